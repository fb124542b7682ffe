#include "helios/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace helios {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::uint64_t output_digest(const TokenSeq& prompt, std::uint64_t seed) {
    std::uint64_t h = hash_tokens(prompt);
    h = hash_combine(h, seed);
    unsigned char tag = 0x02;  // keep synthesized tokens out of the word-token space
    return fnv1a64(&tag, 1, h);
}

}  // namespace

std::size_t synth_output_len(const TokenSeq& prompt, double len_out, const EvalOptions& opts) {
    if (len_out < 0) fail("negative len_out");
    auto base = static_cast<std::size_t>(std::llround(len_out));
    if (!opts.stochastic) return base;
    std::uint64_t h = splitmix64(hash_combine(output_digest(prompt, opts.seed), 0x6c656e));
    return h % (2 * base + 1);  // uniform on [0, 2*base], mean == base
}

TokenSeq synth_output(const TokenSeq& prompt, double len_out, const EvalOptions& opts) {
    std::size_t n = synth_output_len(prompt, len_out, opts);
    std::uint64_t d = output_digest(prompt, opts.seed);
    TokenSeq out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(splitmix64(hash_combine(d, i)));
    return out;
}

std::size_t synth_llm_len(const TokenSeq& prompt, double len_out, bool deterministic,
                          const EvalOptions& opts) {
    EvalOptions eff = opts;
    if (deterministic) eff.seed = 0;
    return synth_output_len(prompt, len_out, eff);
}

TokenSeq synth_llm_output(const TokenSeq& prompt, double len_out, bool deterministic,
                          const EvalOptions& opts) {
    EvalOptions eff = opts;
    if (deterministic) eff.seed = 0;
    return synth_output(prompt, len_out, eff);
}

Token role_marker(MsgRole r) {
    switch (r) {
        case MsgRole::kSystem: return word_token("<|system|>");
        case MsgRole::kAssistant: return word_token("<|assistant|>");
        case MsgRole::kUser: return word_token("<|user|>");
    }
    fail("bad role");
}

Evaluator::Evaluator(const CompiledGraph& compiled, const ProfileStats& profile, EvalOptions opts)
    : compiled_(&compiled), profile_(&profile), opts_(opts) {}

double Evaluator::profile_len_out(NodeId llm) const {
    auto it = profile_->find(llm);
    if (it == profile_->end())
        fail("no profile entry for llm node " + std::to_string(llm));
    return it->second.len_out;
}

TokenSeq Evaluator::prompt(NodeId llm, std::size_t query) {
    const Operator& n = compiled_->graph.op(llm);
    if (n.kind != OpKind::kLlm) fail("node " + std::to_string(llm) + " is not an llm");
    TokenSeq out;
    for (int role = 0; role < 3; ++role) {
        for (const Message& m : n.messages) {
            if (static_cast<int>(m.role) != role) continue;
            out.push_back(role_marker(m.role));
            for (const MessagePart& p : m.parts) {
                if (p.is_ref) {
                    const TokenSeq& v = value(p.ref, query);
                    out.insert(out.end(), v.begin(), v.end());
                } else {
                    TokenSeq t = tokenize(p.text);
                    out.insert(out.end(), t.begin(), t.end());
                }
            }
        }
    }
    return out;
}

const TokenSeq& Evaluator::value(NodeId id, std::size_t query) {
    auto key = std::make_pair(id, query);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;

    const Operator& n = compiled_->graph.op(id);
    TokenSeq v;
    switch (n.kind) {
        case OpKind::kInput:
        case OpKind::kData:
        case OpKind::kCacheFetch:
            v = compiled_->bound_value(id, query);
            break;
        case OpKind::kOutput:
            v = value(compiled_->graph.inputs_of(id)[0], query);
            break;
        case OpKind::kLambda: {
            std::vector<TokenSeq> ins;
            for (NodeId in : compiled_->graph.inputs_of(id)) ins.push_back(value(in, query));
            v = apply_lambda(n.fn, ins);
            break;
        }
        case OpKind::kFormat: {
            std::vector<NodeId> ins = compiled_->graph.inputs_of(id);
            const std::string& t = n.template_text;
            std::string lit;
            auto flush_lit = [&] {
                TokenSeq toks = tokenize(lit);
                v.insert(v.end(), toks.begin(), toks.end());
                lit.clear();
            };
            for (std::size_t i = 0; i < t.size(); ++i) {
                if (t[i] == '{') {
                    std::size_t close = t.find('}', i);
                    int slot = std::stoi(t.substr(i + 1, close - i - 1));
                    flush_lit();
                    const TokenSeq& sub = value(ins[static_cast<std::size_t>(slot)], query);
                    v.insert(v.end(), sub.begin(), sub.end());
                    i = close;
                } else {
                    lit.push_back(t[i]);
                }
            }
            flush_lit();
            break;
        }
        case OpKind::kLlm: {
            if (opts_.strict_llm)
                fail("llm node " + std::to_string(id) + " query " + std::to_string(query) +
                     " evaluated before its call completed");
            TokenSeq p = prompt(id, query);
            v = synth_llm_output(p, profile_len_out(id), n.deterministic, opts_);
            break;
        }
    }
    return memo_[key] = std::move(v);
}

void Evaluator::put_llm_output(NodeId llm, std::size_t query, TokenSeq out) {
    memo_[{llm, query}] = std::move(out);
}

bool Evaluator::has_llm_output(NodeId llm, std::size_t query) const {
    return memo_.count({llm, query}) != 0;
}

std::map<NodeId, std::vector<TokenSeq>> Evaluator::output_values() {
    std::map<NodeId, std::vector<TokenSeq>> out;
    for (NodeId id : compiled_->graph.outputs) {
        std::vector<TokenSeq> vals;
        for (std::size_t b = 0; b < compiled_->batch; ++b) vals.push_back(value(id, b));
        out[id] = std::move(vals);
    }
    return out;
}

std::map<NodeId, std::vector<TokenSeq>> eval_outputs(const CompiledGraph& compiled,
                                                     const ProfileStats& profile,
                                                     const EvalOptions& opts) {
    Evaluator ev(compiled, profile, opts);
    return ev.output_values();
}

}  // namespace helios
