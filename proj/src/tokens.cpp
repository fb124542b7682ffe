#include "helios/tokens.hpp"

#include <cctype>

namespace helios {

std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t seed) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
    // Spread the seed across all 64 bits before folding v; seeding fnv directly
    // would make small-value pairs commute (seed ^ first byte is symmetric).
    h = (h ^ 0x9e3779b97f4a7c15ull) * 0x100000001b3ull;
    return fnv1a64(&v, sizeof(v), h);
}

std::uint64_t hash_str(std::string_view s, std::uint64_t h) {
    h = fnv1a64(s.data(), s.size(), h);
    // terminate so that hash_str(hash_str(h,"ab"),"c") != hash_str(hash_str(h,"a"),"bc")
    unsigned char end = 0xff;
    return fnv1a64(&end, 1, h);
}

Token word_token(std::string_view word) {
    return fnv1a64(word.data(), word.size());
}

TokenSeq tokenize(std::string_view text) {
    TokenSeq out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) out.push_back(word_token(text.substr(start, i - start)));
    }
    return out;
}

TokenSeq synthetic_tokens(std::size_t count, std::uint64_t& counter) {
    TokenSeq out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        // the 0x01 prefix byte cannot appear in a whitespace-split word hash input stream
        // produced by tokenize(), so synthetic tokens never collide with word tokens.
        std::uint64_t h = 0xcbf29ce484222325ull;
        unsigned char tag = 0x01;
        h = fnv1a64(&tag, 1, h);
        std::uint64_t c = counter++;
        h = fnv1a64(&c, sizeof(c), h);
        out.push_back(h);
    }
    return out;
}

std::uint64_t hash_tokens(const TokenSeq& tokens, std::uint64_t seed) {
    return fnv1a64(tokens.data(), tokens.size() * sizeof(Token), seed);
}

}  // namespace helios
