#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "helios/cost_model.hpp"
#include "support/builders.hpp"

using namespace helios;
using namespace helios::testing;

namespace {

Segment statics_seg(const std::string& text) {
    Segment s;
    s.parts.push_back(SegmentPart::statics(tokenize(text)));
    s.normalize();
    return s;
}

TrtLeaf call(NodeId op, int query, int worker, double len_out) {
    TrtLeaf l;
    l.op = op;
    l.query = query;
    l.worker = worker;
    l.len_out = len_out;
    return l;
}

}  // namespace

TEST_CASE("decode usage is the arithmetic series n(n+1)/2") {
    for (int n = 0; n <= 100; ++n)
        CHECK(decode_usage(n) == doctest::Approx(0.5 * n * (n + 1)).epsilon(1e-12));
}

TEST_CASE("total usage and precedence delay follow the closed forms") {
    const double alpha = 0.25, len_out = 6, u_p = 40, capacity = 128;
    CHECK(total_usage(alpha, len_out, u_p) ==
          doctest::Approx(alpha * (len_out * u_p + decode_usage(len_out))));
    CHECK(precedence_delay(alpha, capacity, len_out) == doctest::Approx(alpha * capacity * len_out));
    // default alpha = 1/M makes the delay exactly len_out
    WorkerParams w{capacity, 0.0};
    CHECK(precedence_delay(w.resolved_alpha(), capacity, len_out) == doctest::Approx(len_out));
}

TEST_CASE("hand-computed two-call chain on one worker") {
    TemplatedRadixTree t;
    const int a = t.insert(statics_seg("s1 s2 s3 s4 a1 a2"), call(1, 0, 0, 3));
    const int b = t.insert(statics_seg("s1 s2 s3 s4 b1"), call(2, 0, 0, 2));
    t.add_dependency(1, 0, 2, 0);
    (void)a;
    (void)b;

    CostParams params{{WorkerParams{10, 0.0}}};  // alpha = 1/10
    const double alpha = 0.1;

    Schedule sigma{{CallId{1, 0}, CallId{2, 0}}};
    ScheduleEval ev = evaluate_schedule(t, sigma, params);
    REQUIRE(ev.calls.size() == 2);

    // first call: cold path 6 tokens, len_out 3
    const CallCost& ca = ev.calls[0];
    CHECK(ca.u_p == doctest::Approx(6));
    CHECK(ca.u_d == doctest::Approx(6));  // 3*4/2
    CHECK(ca.begin == doctest::Approx(0));
    CHECK(ca.usage == doctest::Approx(alpha * (3 * 6 + 6)));  // 2.4
    CHECK(ca.complete == doctest::Approx(2.4));
    CHECK(ca.delay == doctest::Approx(3));  // alpha*M*len_out = len_out

    // second call shares the 4-token prefix, waits for both the worker slot
    // (2.4) and the dependency release (2.4 + 3 = 5.4)
    const CallCost& cb = ev.calls[1];
    CHECK(cb.u_p == doctest::Approx(1));
    CHECK(cb.begin == doctest::Approx(5.4));
    CHECK(cb.usage == doctest::Approx(alpha * (2 * 1 + 3)));  // 0.5
    CHECK(cb.complete == doctest::Approx(5.9));
    CHECK(ev.makespan == doctest::Approx(5.9));
}

TEST_CASE("parallel workers overlap; makespan is the slowest completion") {
    TemplatedRadixTree t;
    t.insert(statics_seg("p q r a"), call(1, 0, 0, 2));
    t.insert(statics_seg("p q r b"), call(2, 0, 1, 4));
    CostParams params{{WorkerParams{8, 0.0}, WorkerParams{8, 0.0}}};
    Schedule sigma{{CallId{1, 0}}, {CallId{2, 0}}};
    ScheduleEval ev = evaluate_schedule(t, sigma, params);
    // both cold (separate workers; no shared state): u_p = 4 each
    const double t1 = (2 * 4 + 3) / 8.0;
    const double t2 = (4 * 4 + 10) / 8.0;
    CHECK(ev.calls[0].complete == doctest::Approx(t1));
    CHECK(ev.calls[1].complete == doctest::Approx(t2));
    CHECK(ev.makespan == doctest::Approx(std::max(t1, t2)));
}

TEST_CASE("cache sharing only applies to consecutive same-worker calls") {
    TemplatedRadixTree t;
    t.insert(statics_seg("s1 s2 s3 s4 s5 a"), call(1, 0, 0, 1));
    t.insert(statics_seg("s1 s2 s3 s4 s5 b"), call(2, 0, 0, 1));
    t.insert(statics_seg("zz yy"), call(3, 0, 0, 1));
    CostParams params{{WorkerParams{100, 0.0}}};

    ScheduleEval adjacent =
        evaluate_schedule(t, {{CallId{1, 0}, CallId{2, 0}, CallId{3, 0}}}, params);
    CHECK(adjacent.calls[1].u_p == doctest::Approx(1));

    ScheduleEval separated =
        evaluate_schedule(t, {{CallId{1, 0}, CallId{3, 0}, CallId{2, 0}}}, params);
    CHECK(separated.calls[2].u_p == doctest::Approx(6));  // evicted by the interloper
}

TEST_CASE("identical templates scheduled back to back prefill for free") {
    TemplatedRadixTree t;
    t.insert(statics_seg("same prompt twice"), call(1, 0, 0, 2));
    t.insert(statics_seg("same prompt twice"), call(1, 1, 0, 2));
    CostParams params{{WorkerParams{16, 0.0}}};
    ScheduleEval ev = evaluate_schedule(t, {{CallId{1, 0}, CallId{1, 1}}}, params);
    CHECK(ev.calls[1].u_p == doctest::Approx(0));
}

TEST_CASE("makespan scales linearly in alpha") {
    TemplatedRadixTree t;
    t.insert(statics_seg("h1 h2 h3 u1"), call(1, 0, 0, 3));
    t.insert(statics_seg("h1 h2 h3 u2"), call(2, 0, 0, 2));
    t.add_dependency(1, 0, 2, 0);
    Schedule sigma{{CallId{1, 0}, CallId{2, 0}}};
    CostParams base{{WorkerParams{32, 0.5}}};
    CostParams tripled{{WorkerParams{32, 1.5}}};
    ScheduleEval e1 = evaluate_schedule(t, sigma, base);
    ScheduleEval e3 = evaluate_schedule(t, sigma, tripled);
    CHECK(e3.makespan == doctest::Approx(3.0 * e1.makespan));
}

TEST_CASE("contradictory same-worker order deadlocks with a diagnostic") {
    TemplatedRadixTree t;
    t.insert(statics_seg("one"), call(1, 0, 0, 1));
    t.insert(statics_seg("two"), call(2, 0, 0, 1));
    t.add_dependency(1, 0, 2, 0);
    CostParams params{{WorkerParams{8, 0.0}}};
    CHECK_THROWS_AS(evaluate_schedule(t, {{CallId{2, 0}, CallId{1, 0}}}, params),
                    std::runtime_error);
}

TEST_CASE("coverage errors: missing, duplicated, or unknown calls") {
    TemplatedRadixTree t;
    t.insert(statics_seg("one"), call(1, 0, 0, 1));
    t.insert(statics_seg("two"), call(2, 0, 0, 1));
    CostParams params{{WorkerParams{8, 0.0}}};
    CHECK_THROWS_AS(evaluate_schedule(t, {{CallId{1, 0}}}, params), std::runtime_error);
    CHECK_THROWS_AS(evaluate_schedule(t, {{CallId{1, 0}, CallId{1, 0}, CallId{2, 0}}}, params),
                    std::runtime_error);
    CHECK_THROWS_AS(evaluate_schedule(t, {{CallId{1, 0}, CallId{2, 0}, CallId{3, 0}}}, params),
                    std::runtime_error);
    CHECK_THROWS_AS(evaluate_schedule(t, {{CallId{1, 0}, CallId{2, 0}}, {}}, params),
                    std::runtime_error);  // more sequences than workers
}

TEST_CASE("cross-worker dependencies respect the exported delay") {
    TemplatedRadixTree t;
    t.insert(statics_seg("w0 call"), call(1, 0, 0, 4));
    t.insert(statics_seg("w1 call"), call(2, 0, 1, 1));
    t.add_dependency(1, 0, 2, 0);
    CostParams params{{WorkerParams{20, 0.0}, WorkerParams{20, 0.0}}};
    ScheduleEval ev = evaluate_schedule(t, {{CallId{1, 0}}, {CallId{2, 0}}}, params);
    const CallCost& pred = ev.calls[0];
    const CallCost& dep = ev.calls[1];
    CHECK(dep.begin == doctest::Approx(pred.complete + pred.delay));
}
