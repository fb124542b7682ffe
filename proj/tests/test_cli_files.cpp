#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <string>

#include "helios/prompt_cache.hpp"
#include "helios/run_pipeline.hpp"
#include "helios/workflow_io.hpp"
#include "helios/workload_gen.hpp"
#include "support/builders.hpp"

using namespace helios;
using namespace helios::testing;

namespace {

std::filesystem::path scratch_dir() {
    auto p = std::filesystem::temp_directory_path() / "helios_file_tests";
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("workflow json round trips exactly") {
    SynthWorkload w = generate_workload({"trading_mini", 4, 2, 3, 100, 50, 12, 5, true, 61});
    const std::string text = serialize_workflow(w.graph);
    WorkflowGraph back = parse_workflow(text);
    CHECK(serialize_workflow(back) == text);
    validate(back);
    // bound behavior identical, not just syntax
    CompiledGraph c1 = helios::bind(w.graph, w.inputs);
    CompiledGraph c2 = helios::bind(back, w.inputs);
    EvalOptions opts;
    CHECK(eval_outputs(c1, w.profile, opts) == eval_outputs(c2, w.profile, opts));
}

TEST_CASE("inputs and profile json round trip") {
    SynthWorkload w = generate_workload({"debate", 2, 2, 2, 40, 20, 8, 4, true, 62});
    CHECK(serialize_inputs(parse_inputs(serialize_inputs(w.inputs))) == serialize_inputs(w.inputs));
    CHECK(serialize_profile(parse_profile(serialize_profile(w.profile))) ==
          serialize_profile(w.profile));
    // synthetic token-count inputs survive too
    InputBatch in;
    in["blob"] = {ValueSpec{true, "", 300}, ValueSpec{false, "plain words", 0}};
    InputBatch back = parse_inputs(serialize_inputs(in));
    REQUIRE(back.count("blob") == 1);
    CHECK(back["blob"][0].synthetic);
    CHECK(back["blob"][0].token_count == 300);
    CHECK(back["blob"][1].text == "plain words");
}

TEST_CASE("files written to disk load back unchanged") {
    auto dir = scratch_dir();
    SynthWorkload w = generate_workload({"reflect", 2, 1, 2, 30, 15, 6, 3, true, 63});
    save_workflow(w.graph, (dir / "w.json").string());
    save_inputs(w.inputs, (dir / "i.json").string());
    save_profile(w.profile, (dir / "p.json").string());
    CHECK(serialize_workflow(load_workflow((dir / "w.json").string())) ==
          serialize_workflow(w.graph));
    CHECK(serialize_inputs(load_inputs((dir / "i.json").string())) == serialize_inputs(w.inputs));
    CHECK(serialize_profile(load_profile((dir / "p.json").string())) ==
          serialize_profile(w.profile));
}

TEST_CASE("llm edges may be omitted but must agree when present") {
    // hand-written file with refs and no explicit edges: edges are derived
    const std::string derived = R"({
      "nodes": [
        {"id": 1, "kind": "data", "args": {"values": ["hello there"]}},
        {"id": 2, "kind": "llm", "args": {"deterministic": true, "messages": [
          {"role": "system", "parts": [{"text": "be brief"}]},
          {"role": "user", "parts": [{"ref": 1}]}]}},
        {"id": 3, "kind": "output", "args": {}}
      ],
      "edges": [{"from": 2, "to": 3, "slot": 0}],
      "outputs": [3]
    })";
    WorkflowGraph g = parse_workflow(derived);
    validate(g);
    CHECK(g.inputs_of(2) == std::vector<NodeId>{1});

    // the same file with a contradicting explicit llm edge is rejected
    const std::string contradicting = R"({
      "nodes": [
        {"id": 1, "kind": "data", "args": {"values": ["hello there"]}},
        {"id": 4, "kind": "data", "args": {"values": ["unrelated"]}},
        {"id": 2, "kind": "llm", "args": {"deterministic": true, "messages": [
          {"role": "user", "parts": [{"ref": 1}]}]}},
        {"id": 3, "kind": "output", "args": {}}
      ],
      "edges": [{"from": 4, "to": 2, "slot": 0}, {"from": 2, "to": 3, "slot": 0}],
      "outputs": [3]
    })";
    CHECK_THROWS_AS(parse_workflow(contradicting), std::runtime_error);
}

TEST_CASE("malformed files produce errors, not crashes") {
    CHECK_THROWS(parse_workflow("not json at all"));
    CHECK_THROWS(parse_workflow("{}"));
    CHECK_THROWS(parse_workflow(R"({"nodes": [{"id": 1, "kind": "mystery", "args": {}}],
                                   "edges": [], "outputs": []})"));
    CHECK_THROWS(parse_inputs("[1,2,3]"));
    CHECK_THROWS(parse_profile(R"({"7": {"len_out": "fast"}})"));
}

TEST_CASE("prompt cache file round trip preserves entries and recency order") {
    PromptCache cache(8);
    Signature s1{11}, s2{22}, s3{33};
    cache.insert(s1, tokenize("one"));
    cache.insert(s2, tokenize("two two"));
    cache.insert(s3, tokenize("three three three"));
    cache.lookup(s1);  // s1 becomes most recent: order s2, s3, s1

    auto dir = scratch_dir();
    const std::string path = (dir / "cache.json").string();
    cache.save(path);
    PromptCache back = PromptCache::load(path);
    CHECK(back.size() == 3);
    CHECK(back.keys_lru_first() == cache.keys_lru_first());
    REQUIRE(back.lookup(s2) != nullptr);
    CHECK(*back.lookup(s2) == tokenize("two two"));
    // a second save of the untouched copy is byte-identical
    const std::string path2 = (dir / "cache2.json").string();
    PromptCache::load(path).save(path2);
    CHECK(read_file(path) == read_file(path2));
}

TEST_CASE("run pipeline reports are byte-stable and schedule files round trip") {
    SynthWorkload w = generate_workload({"mapred", 3, 1, 2, 50, 25, 8, 4, true, 64});
    RunSpec spec;
    spec.workers = 1;
    spec.capacities = {1024};
    spec.seed = 3;
    RunResult a = run_workflow(w.graph, w.inputs, w.profile, spec, nullptr);
    RunResult b = run_workflow(w.graph, w.inputs, w.profile, spec, nullptr);
    CHECK(run_report_json(a, spec) == run_report_json(b, spec));
    CHECK(sim_metrics_json(a.sim) == sim_metrics_json(b.sim));
}
