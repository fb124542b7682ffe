#include "helios/workload_gen.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>
#include <utility>

namespace helios {

namespace {

// Deterministic lorem generator: draws words from a fixed synthetic lexicon so
// the same seed yields the same token stream on every platform.
class Lorem {
  public:
    explicit Lorem(std::uint64_t seed, bool jitter = true) : rng_(seed), jitter_(jitter) {}

    std::string words(int count) {
        std::string out;
        for (int i = 0; i < count; ++i) {
            if (!out.empty()) out.push_back(' ');
            out += "w" + std::to_string(rng_() % 40000);
        }
        return out;
    }

    // Per-op output length: 0.75x .. 1.5x of the base, quantized so profiles
    // stay integral; just the rounded base when jitter is off.
    double jitter(double base) {
        if (!jitter_) return std::max(1.0, std::floor(base + 0.5));
        const double u = static_cast<double>(rng_() % 1000) / 999.0;
        return std::max(1.0, std::floor(base * (0.75 + 0.75 * u) + 0.5));
    }

    std::uint64_t raw() { return rng_(); }

  private:
    std::mt19937_64 rng_;
    bool jitter_ = true;
};

// Small fluent wrapper over WorkflowGraph for generator code.
class Builder {
  public:
    explicit Builder(std::size_t batch) : batch_(batch) {}

    NodeId data(const std::string& text) {
        Operator op;
        op.id = next_++;
        op.kind = OpKind::kData;
        op.values.push_back(ValueSpec{false, text, 0});
        g_.nodes.emplace(op.id, op);
        return op.id;
    }

    NodeId input(const std::string& name) {
        Operator op;
        op.id = next_++;
        op.kind = OpKind::kInput;
        op.input_name = name;
        g_.nodes.emplace(op.id, op);
        return op.id;
    }

    NodeId fmt(const std::string& tmpl, const std::vector<NodeId>& ins) {
        Operator op;
        op.id = next_++;
        op.kind = OpKind::kFormat;
        op.template_text = tmpl;
        g_.nodes.emplace(op.id, op);
        for (std::size_t s = 0; s < ins.size(); ++s)
            g_.edges.push_back(Edge{ins[s], op.id, static_cast<int>(s)});
        return op.id;
    }

    NodeId lambda(const std::string& fn, const std::vector<NodeId>& ins) {
        Operator op;
        op.id = next_++;
        op.kind = OpKind::kLambda;
        op.fn = fn;
        g_.nodes.emplace(op.id, op);
        for (std::size_t s = 0; s < ins.size(); ++s)
            g_.edges.push_back(Edge{ins[s], op.id, static_cast<int>(s)});
        return op.id;
    }

    NodeId llm(std::vector<Message> msgs, bool deterministic, double len_out) {
        Operator op;
        op.id = next_++;
        op.kind = OpKind::kLlm;
        op.messages = std::move(msgs);
        op.deterministic = deterministic;
        g_.nodes.emplace(op.id, op);
        int slot = 0;
        for (const auto& m : g_.nodes.at(op.id).messages)
            for (const auto& p : m.parts)
                if (p.is_ref) g_.edges.push_back(Edge{p.ref, op.id, slot++});
        profile_[op.id] = LlmProfile{len_out};
        return op.id;
    }

    NodeId output(NodeId in) {
        Operator op;
        op.id = next_++;
        op.kind = OpKind::kOutput;
        g_.nodes.emplace(op.id, op);
        g_.edges.push_back(Edge{in, op.id, 0});
        g_.outputs.push_back(op.id);
        return op.id;
    }

    void bind_input(const std::string& name, std::vector<std::string> texts) {
        if (texts.size() != batch_) throw std::runtime_error("input arity mismatch");
        auto& vals = inputs_[name];
        for (auto& t : texts) vals.push_back(ValueSpec{false, std::move(t), 0});
    }

    SynthWorkload finish() {
        validate(g_);
        return SynthWorkload{std::move(g_), std::move(inputs_), std::move(profile_)};
    }

  private:
    std::size_t batch_;
    NodeId next_ = 0;
    WorkflowGraph g_;
    InputBatch inputs_;
    ProfileStats profile_;
};

Message sys_msg(const std::string& text) {
    Message m;
    m.role = MsgRole::kSystem;
    m.parts.push_back(MessagePart{false, text, kNoNode});
    return m;
}

// User message assembled from alternating literal text and node references.
Message user_msg(std::vector<MessagePart> parts) {
    Message m;
    m.role = MsgRole::kUser;
    m.parts = std::move(parts);
    return m;
}

MessagePart lit(const std::string& text) { return MessagePart{false, text, kNoNode}; }
MessagePart ref(NodeId id) { return MessagePart{true, std::string(), id}; }

struct Common {
    NodeId ctx = kNoNode;
    NodeId question = kNoNode;
};

Common make_common(Builder& b, Lorem& lex, const SynthSpec& spec) {
    Common c;
    c.ctx = b.data(lex.words(spec.context_tokens));
    c.question = b.input("question");
    std::vector<std::string> qs;
    for (std::size_t q = 0; q < spec.batch; ++q)
        qs.push_back(lex.words(spec.question_tokens));
    b.bind_input("question", std::move(qs));
    return c;
}

// Experts answer independently; a summarizer merges their answers.
SynthWorkload gen_mapred(const SynthSpec& spec) {
    Builder b(spec.batch);
    Lorem lex(spec.seed, spec.len_jitter);
    Common c = make_common(b, lex, spec);
    std::vector<NodeId> experts;
    for (int i = 0; i < spec.agents; ++i) {
        experts.push_back(b.llm(
            {sys_msg(lex.words(spec.system_tokens)),
             user_msg({lit("Context:"), ref(c.ctx), lit("Question:"), ref(c.question)})},
            true, lex.jitter(spec.len_out)));
    }
    std::vector<MessagePart> parts{lit("Question:"), ref(c.question)};
    for (NodeId e : experts) {
        parts.push_back(lit("Answer:"));
        parts.push_back(ref(e));
    }
    NodeId sum = b.llm({sys_msg(lex.words(spec.system_tokens)), user_msg(parts)}, true,
                       lex.jitter(spec.len_out * 1.5));
    b.output(sum);
    return b.finish();
}

// Debaters revise over rounds, each seeing the prior round of everyone else;
// a judge reads the final round.
SynthWorkload gen_debate(const SynthSpec& spec) {
    Builder b(spec.batch);
    Lorem lex(spec.seed, spec.len_jitter);
    Common c = make_common(b, lex, spec);
    std::vector<std::string> stances;
    for (int i = 0; i < spec.agents; ++i) stances.push_back(lex.words(spec.system_tokens));

    std::vector<NodeId> round;
    for (int i = 0; i < spec.agents; ++i) {
        round.push_back(b.llm(
            {sys_msg(stances[i]),
             user_msg({lit("Context:"), ref(c.ctx), lit("Question:"), ref(c.question)})},
            true, lex.jitter(spec.len_out)));
    }
    for (int r = 1; r < spec.rounds; ++r) {
        std::vector<NodeId> next;
        for (int i = 0; i < spec.agents; ++i) {
            std::vector<MessagePart> parts{lit("Context:"), ref(c.ctx), lit("Question:"),
                                           ref(c.question)};
            for (int j = 0; j < spec.agents; ++j) {
                parts.push_back(lit("Peer argument:"));
                parts.push_back(ref(round[j]));
            }
            parts.push_back(lit("Revise your answer."));
            next.push_back(b.llm({sys_msg(stances[i]), user_msg(parts)}, true,
                                 lex.jitter(spec.len_out)));
        }
        round = next;
    }
    std::vector<MessagePart> parts{lit("Question:"), ref(c.question)};
    for (NodeId d : round) {
        parts.push_back(lit("Position:"));
        parts.push_back(ref(d));
    }
    NodeId judge = b.llm({sys_msg(lex.words(spec.system_tokens)), user_msg(parts)}, true,
                         lex.jitter(spec.len_out * 1.5));
    b.output(judge);
    return b.finish();
}

// One expert drafts, critics comment, the expert refines with the critiques.
SynthWorkload gen_reflect(const SynthSpec& spec) {
    Builder b(spec.batch);
    Lorem lex(spec.seed, spec.len_jitter);
    Common c = make_common(b, lex, spec);
    const std::string expert_sys = lex.words(spec.system_tokens);
    NodeId draft = b.llm(
        {sys_msg(expert_sys),
         user_msg({lit("Context:"), ref(c.ctx), lit("Question:"), ref(c.question)})},
        true, lex.jitter(spec.len_out));
    std::vector<NodeId> critics;
    for (int i = 0; i < spec.agents; ++i) {
        critics.push_back(b.llm(
            {sys_msg(lex.words(spec.system_tokens)),
             user_msg({lit("Question:"), ref(c.question), lit("Draft:"), ref(draft)})},
            true, lex.jitter(spec.len_out)));
    }
    std::vector<MessagePart> parts{lit("Context:"), ref(c.ctx), lit("Question:"),
                                   ref(c.question), lit("Draft:"), ref(draft)};
    for (NodeId cr : critics) {
        parts.push_back(lit("Critique:"));
        parts.push_back(ref(cr));
    }
    NodeId refined = b.llm({sys_msg(expert_sys), user_msg(parts)}, true,
                           lex.jitter(spec.len_out * 1.5));
    b.output(refined);
    return b.finish();
}

// Running summary threaded through document chunks, one call per chunk.
SynthWorkload gen_iterative(const SynthSpec& spec) {
    Builder b(spec.batch);
    Lorem lex(spec.seed, spec.len_jitter);
    Common c = make_common(b, lex, spec);
    const std::string sys = lex.words(spec.system_tokens);
    NodeId prev = kNoNode;
    for (int i = 0; i < spec.agents; ++i) {
        NodeId chunk = b.data(lex.words(spec.context_tokens));
        std::vector<MessagePart> parts{lit("Question:"), ref(c.question)};
        if (prev != kNoNode) {
            parts.push_back(lit("Summary so far:"));
            parts.push_back(ref(prev));
        }
        parts.push_back(lit("Next chunk:"));
        parts.push_back(ref(chunk));
        prev = b.llm({sys_msg(sys), user_msg(parts)}, true, lex.jitter(spec.len_out));
    }
    b.output(prev);
    return b.finish();
}

// Independent specialists; a format node splices their answers into the
// aggregator prompt.
SynthWorkload gen_parallel(const SynthSpec& spec) {
    Builder b(spec.batch);
    Lorem lex(spec.seed, spec.len_jitter);
    Common c = make_common(b, lex, spec);
    std::vector<NodeId> branches;
    for (int i = 0; i < spec.agents; ++i) {
        branches.push_back(b.llm(
            {sys_msg(lex.words(spec.system_tokens)),
             user_msg({lit("Context:"), ref(c.ctx), lit("Question:"), ref(c.question)})},
            true, lex.jitter(spec.len_out)));
    }
    std::string tmpl = "Findings:";
    for (std::size_t i = 0; i < branches.size(); ++i)
        tmpl += " {" + std::to_string(i) + "}";
    NodeId merged = b.fmt(tmpl, branches);
    NodeId agg = b.llm({sys_msg(lex.words(spec.system_tokens)),
                        user_msg({lit("Question:"), ref(c.question), ref(merged)})},
                       true, lex.jitter(spec.len_out * 1.5));
    b.output(agg);
    return b.finish();
}

// Compact trading desk: analysts digest shared market data, researchers
// debate, a manager decides, traders act per asset, a fund head signs off.
// Includes a duplicated news-digest stage (two identical calls), a dead
// compliance branch, and long shared system prompts, so every optimizer
// stage has something to do.
SynthWorkload gen_trading(const SynthSpec& spec) {
    Builder b(spec.batch);
    Lorem lex(spec.seed, spec.len_jitter);
    const int sys_len = std::max(spec.system_tokens, 220);
    NodeId market = b.data(lex.words(std::max(spec.context_tokens, 300)));
    NodeId news = b.data(lex.words(std::max(spec.context_tokens, 200)));
    NodeId question = b.input("question");
    {
        std::vector<std::string> qs;
        for (std::size_t q = 0; q < spec.batch; ++q) qs.push_back(lex.words(spec.question_tokens));
        b.bind_input("question", std::move(qs));
    }

    // Two byte-identical news digests (duplicate work a rewriter can merge).
    const std::string digest_sys = lex.words(sys_len);
    const double digest_len = lex.jitter(spec.len_out);
    auto digest_msgs = [&]() {
        return std::vector<Message>{
            sys_msg(digest_sys), user_msg({lit("Summarize the headlines:"), ref(news)})};
    };
    NodeId digest_a = b.llm(digest_msgs(), true, digest_len);
    NodeId digest_b = b.llm(digest_msgs(), true, digest_len);

    // Analysts write opinionated takes (sampled, so their work can never be
    // served from the cross-run value cache).
    std::vector<NodeId> analysts;
    std::vector<NodeId> digest_for{digest_a, digest_b, digest_a, digest_b};
    for (int i = 0; i < 4; ++i) {
        analysts.push_back(b.llm(
            {sys_msg(lex.words(sys_len)),
             user_msg({lit("Market data:"), ref(market), lit("News digest:"),
                       ref(digest_for[static_cast<std::size_t>(i)]), lit("Mandate:"),
                       ref(question)})},
            false, lex.jitter(spec.len_out * 1.5)));
    }

    // Dead branch: a sampled compliance memo nobody consumes downstream. Only
    // pruning can remove it; being nondeterministic it is never cacheable.
    b.llm({sys_msg(lex.words(sys_len)),
           user_msg({lit("Market data:"), ref(market), lit("File a compliance memo.")})},
          false, lex.jitter(spec.len_out));

    auto research = [&](const std::string& stance_sys, NodeId rebut) {
        std::vector<MessagePart> parts{lit("Mandate:"), ref(question)};
        for (NodeId a : analysts) {
            parts.push_back(lit("Analyst view:"));
            parts.push_back(ref(a));
        }
        if (rebut != kNoNode) {
            parts.push_back(lit("Opposing case:"));
            parts.push_back(ref(rebut));
        }
        return b.llm({sys_msg(stance_sys), user_msg(parts)}, false,
                     lex.jitter(spec.len_out * 1.5));
    };
    const std::string bull_sys = lex.words(sys_len);
    const std::string bear_sys = lex.words(sys_len);
    NodeId bull1 = research(bull_sys, kNoNode);
    NodeId bear1 = research(bear_sys, bull1);
    NodeId bull2 = research(bull_sys, bear1);

    NodeId manager = b.llm(
        {sys_msg(lex.words(sys_len)),
         user_msg({lit("Mandate:"), ref(question), lit("Bull case:"), ref(bull2),
                   lit("Bear case:"), ref(bear1), lit("Issue a decision.")})},
        false, lex.jitter(spec.len_out * 2));

    // Every desk files the same pre-trade risk screen on the decision: four
    // byte-identical calls a rewriter can collapse to one. They sit downstream
    // of the sampled manager, so the value cache can never absorb them.
    const std::string risk_sys = lex.words(sys_len);
    const double risk_len = lex.jitter(spec.len_out * 4);
    auto risk_msgs = [&]() {
        return std::vector<Message>{
            sys_msg(risk_sys),
            user_msg({lit("Decision:"), ref(manager), lit("List limit breaches.")})};
    };
    std::vector<NodeId> risks;
    for (int i = 0; i < 4; ++i) risks.push_back(b.llm(risk_msgs(), true, risk_len));

    const std::string trader_sys = lex.words(sys_len);  // shared by all desks
    std::vector<NodeId> traders;
    for (int i = 0; i < 4; ++i) {
        NodeId asset = b.data(lex.words(40));
        traders.push_back(b.llm(
            {sys_msg(trader_sys),
             user_msg({lit("Decision:"), ref(manager), lit("Risk screen:"),
                       ref(risks[static_cast<std::size_t>(i)]), lit("Asset book:"),
                       ref(asset)})},
            true, lex.jitter(spec.len_out)));
    }

    std::vector<MessagePart> parts{lit("Mandate:"), ref(question)};
    for (NodeId t : traders) {
        parts.push_back(lit("Desk order:"));
        parts.push_back(ref(t));
    }
    NodeId fund = b.llm({sys_msg(lex.words(sys_len)), user_msg(parts)}, true,
                        lex.jitter(spec.len_out * 1.5));
    b.output(fund);
    return b.finish();
}

}  // namespace

SynthWorkload generate_workload(const SynthSpec& spec) {
    if (spec.batch == 0) throw std::runtime_error("batch must be positive");
    if (spec.agents < 1) throw std::runtime_error("agents must be positive");
    if (spec.pattern == "mapred") return gen_mapred(spec);
    if (spec.pattern == "debate") return gen_debate(spec);
    if (spec.pattern == "reflect") return gen_reflect(spec);
    if (spec.pattern == "iterative") return gen_iterative(spec);
    if (spec.pattern == "parallel") return gen_parallel(spec);
    if (spec.pattern == "trading_mini") return gen_trading(spec);
    throw std::runtime_error("unknown workload pattern: " + spec.pattern);
}

SynthWorkload generate_random_workflow(const RandomSpec& spec) {
    Builder b(spec.batch);
    Lorem lex(spec.seed ^ 0x9e3779b97f4a7c15ull);
    std::mt19937_64 rng(spec.seed);
    auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };

    // Pool of upstream value nodes the next operator may reference.
    std::vector<NodeId> pool;
    pool.push_back(b.data(lex.words(8 + static_cast<int>(pick(40)))));
    NodeId q = b.input("q");
    {
        std::vector<std::string> qs;
        for (std::size_t i = 0; i < spec.batch; ++i)
            qs.push_back(lex.words(3 + static_cast<int>(pick(10))));
        b.bind_input("q", std::move(qs));
    }
    pool.push_back(q);

    NodeId last_llm = kNoNode;
    for (int i = 0; i < spec.llm_ops; ++i) {
        // Occasionally add glue nodes feeding the next call.
        if (pick(3) == 0) {
            std::vector<NodeId> ins{pool[pick(pool.size())]};
            if (pick(2) == 0) ins.push_back(pool[pick(pool.size())]);
            std::string tmpl = "glue";
            for (std::size_t s = 0; s < ins.size(); ++s) tmpl += " {" + std::to_string(s) + "}";
            pool.push_back(b.fmt(tmpl, ins));
        }
        if (pick(3) == 0) {
            switch (pick(3)) {
                case 0:
                    pool.push_back(b.lambda("identity", {pool[pick(pool.size())]}));
                    break;
                case 1:
                    pool.push_back(b.lambda(
                        "concat", {pool[pick(pool.size())], pool[pick(pool.size())]}));
                    break;
                default:
                    pool.push_back(b.lambda("truncate:" + std::to_string(2 + pick(8)),
                                            {pool[pick(pool.size())]}));
                    break;
            }
        }
        if (pick(4) == 0) pool.push_back(b.data(lex.words(4 + static_cast<int>(pick(20)))));

        std::vector<MessagePart> parts{lit("Task:")};
        const std::size_t nrefs = 1 + pick(std::min<std::size_t>(pool.size(), 3));
        for (std::size_t r = 0; r < nrefs; ++r) {
            parts.push_back(lit("item" + std::to_string(r) + ":"));
            parts.push_back(ref(pool[pick(pool.size())]));
        }
        const bool det = !spec.allow_nondeterminism || pick(4) != 0;
        NodeId call = b.llm({sys_msg(lex.words(10 + static_cast<int>(pick(60)))),
                             user_msg(parts)},
                            det, 2 + static_cast<double>(pick(9)));
        pool.push_back(call);
        last_llm = call;
    }
    // A dead data node now and then; prune should drop it.
    if (pick(2) == 0) b.data(lex.words(5));
    b.output(last_llm);
    return b.finish();
}

}  // namespace helios
