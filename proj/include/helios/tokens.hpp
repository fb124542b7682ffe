#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace helios {

// Tokens are stable 64-bit hashes of whitespace-separated words. No vocabulary
// table is kept: equal words hash equal across runs and across processes, which
// is all the prefix structures and the persistable prompt cache need.
using Token = std::uint64_t;
using TokenSeq = std::vector<Token>;

std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t seed = 0xcbf29ce484222325ull);
std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v);
std::uint64_t hash_str(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ull);

Token word_token(std::string_view word);
TokenSeq tokenize(std::string_view text);

// Mint `count` distinct tokens that no word tokenization can produce.
// `counter` advances so successive mints never alias; callers that need
// reproducibility keep one counter per file/stream.
TokenSeq synthetic_tokens(std::size_t count, std::uint64_t& counter);

std::uint64_t hash_tokens(const TokenSeq& tokens, std::uint64_t seed = 0xcbf29ce484222325ull);

}  // namespace helios
