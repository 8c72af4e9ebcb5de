#include <doctest.h>

#include <random>

#include "intv/core_types.hpp"
#include "intv/errors.hpp"
#include "intv/toy_env.hpp"

using namespace intv;

namespace {

// Builds a fixed problem with forced ops for oracle-style checks.
ToyProblem fixed_problem(int m, int v0, std::vector<ChainOp> ops) {
    ToyProblem p;
    p.id = "fixed";
    p.modulus = m;
    p.v0 = v0;
    p.ops = std::move(ops);
    int prev = v0;
    for (const ChainOp& op : p.ops) {
        prev = apply_op(op, prev, m);
        p.reference_values.push_back(prev);
    }
    p.answer = p.reference_values.back();
    return p;
}

// Renders a trajectory from an explicit delta pattern (formal style).
Trajectory render_with_deltas(const ToyProblem& p, const std::vector<int>& deltas) {
    Trajectory traj;
    traj.problem_id = p.id;
    int prev = p.v0;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        StepEmission e;
        e.style = StepStyle::formal;
        e.delta = deltas[i];
        e.emitted_value = ((apply_op(p.ops[i], prev, p.modulus) + deltas[i]) % p.modulus +
                           p.modulus) % p.modulus;
        traj.steps.push_back(render_step(p, static_cast<int>(i) + 1, prev, e));
        prev = e.emitted_value;
    }
    traj.reward = score(p, traj);
    return traj;
}

}  // namespace

TEST_CASE("reference chain of the worked example") {
    ToyProblem p = fixed_problem(17, 10, {{OpKind::ADD, 5}, {OpKind::MUL, 3}});
    CHECK(p.reference_values == std::vector<int>{15, 11});
    CHECK(p.answer == 11);
}

TEST_CASE("gen_problem determinism and constant range") {
    ToyConfig cfg;
    cfg.modulus = 17;
    cfg.k = 8;
    ToyProblem a = gen_problem(7, cfg);
    ToyProblem b = gen_problem(7, cfg);
    CHECK(a.v0 == b.v0);
    CHECK(a.reference_values == b.reference_values);
    for (const ChainOp& op : a.ops) {
        CHECK(op.constant >= 1);
        CHECK(op.constant <= 16);
    }
    for (int v : a.reference_values) {
        CHECK(v >= 0);
        CHECK(v < 17);
    }
}

TEST_CASE("gen_problem rejects bad config") {
    ToyConfig cfg;
    cfg.modulus = 15;  // not prime
    CHECK_THROWS_AS(gen_problem(1, cfg), ConfigError);
    cfg.modulus = 17;
    cfg.k = 1;
    CHECK_THROWS_AS(gen_problem(1, cfg), ConfigError);
}

TEST_CASE("render/parse round-trip, both styles") {
    ToyProblem p = fixed_problem(17, 10, {{OpKind::ADD, 5}, {OpKind::MUL, 3}});
    StepEmission formal{StepStyle::formal, 0, 15};
    std::string text = render_step(p, 1, 10, formal);
    CHECK(text == "Step 1: 10 ADD 5 = 15 (mod 17)");
    StepEmission back = parse_step(p, 1, 10, text);
    CHECK(back.style == StepStyle::formal);
    CHECK(back.delta == 0);
    CHECK(back.emitted_value == 15);

    StepEmission casual{StepStyle::casual, 1, 12};
    std::string ctext = render_step(p, 2, 15, casual);
    CHECK(ctext == "now v2 = 12");
    StepEmission cback = parse_step(p, 2, 15, ctext);
    CHECK(cback.style == StepStyle::casual);
    CHECK(cback.delta == 1);  // true v2 = 11, emitted 12
    CHECK(cback.emitted_value == 12);
}

TEST_CASE("parse_step rejects garbage and mismatches") {
    ToyProblem p = fixed_problem(17, 10, {{OpKind::ADD, 5}, {OpKind::MUL, 3}});
    CHECK_THROWS_AS(parse_step(p, 1, 10, "garbage"), ParseError);
    CHECK_THROWS_AS(parse_step(p, 1, 10, "Step 2: 10 ADD 5 = 15 (mod 17)"), ParseError);
    CHECK_THROWS_AS(parse_step(p, 1, 10, "Step 1: 10 SUB 5 = 5 (mod 17)"), ParseError);
    CHECK_THROWS_AS(parse_step(p, 1, 10, "now v1 = 99"), ParseError);
}

TEST_CASE("score: perfect and erroneous trajectories") {
    ToyProblem p = fixed_problem(17, 10, {{OpKind::ADD, 5}, {OpKind::ADD, 3}});
    CHECK(render_with_deltas(p, {0, 0}).reward == 1);
    CHECK(render_with_deltas(p, {1, 0}).reward == 0);
    Trajectory garbage;
    garbage.steps = {"nonsense", "words"};
    CHECK(score(p, garbage) == 0);
    Trajectory short_traj = render_with_deltas(p, {0});
    CHECK(short_traj.reward == 0);
}

TEST_CASE("additive error cancellation at small modulus") {
    ToyProblem p = fixed_problem(7, 3, {{OpKind::ADD, 2}, {OpKind::ADD, 4}});
    Trajectory t = render_with_deltas(p, {1, -1});
    CHECK(t.reward == 1);  // +1 then -1 cancel under ADD
    CHECK(first_error_oracle(p, t) == 0);
}

TEST_CASE("first_error_oracle locates the earliest divergence") {
    ToyProblem p = fixed_problem(17, 10,
                                 {{OpKind::ADD, 5}, {OpKind::ADD, 1}, {OpKind::ADD, 2},
                                  {OpKind::ADD, 3}});
    CHECK(first_error_oracle(p, render_with_deltas(p, {0, 0, 1, 0})) == 2);
    CHECK_FALSE(first_error_oracle(p, render_with_deltas(p, {0, 0, 0, 0})).has_value());
    Trajectory t = render_with_deltas(p, {0, 0, 0, 0});
    t.steps[1] = "not a step";
    CHECK(first_error_oracle(p, t) == 1);
}

TEST_CASE("chain replay invariant on random trajectories") {
    ToyConfig cfg;
    cfg.modulus = 17;
    cfg.k = 6;
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        ToyProblem p = gen_problem(rng(), cfg);
        std::vector<int> deltas;
        for (int i = 0; i < cfg.k; ++i) deltas.push_back(static_cast<int>(rng() % 5) - 2);
        Trajectory t = render_with_deltas(p, deltas);
        auto parsed = parse_trajectory(p, t.steps);
        REQUIRE(parsed.has_value());
        int prev = p.v0;
        bool all_match = true;
        for (int i = 0; i < cfg.k; ++i) {
            CHECK((*parsed)[i].delta == deltas[i]);
            int expect = ((apply_op(p.ops[i], prev, p.modulus) + deltas[i]) % p.modulus +
                          p.modulus) % p.modulus;
            CHECK((*parsed)[i].emitted_value == expect);
            prev = expect;
            if (expect != p.reference_values[i] && all_match) {
                CHECK(first_error_oracle(p, t) == i);
                all_match = false;
            }
        }
        if (all_match) CHECK_FALSE(first_error_oracle(p, t).has_value());
    }
}

TEST_CASE("make_hint length rule") {
    ToyConfig cfg;
    cfg.modulus = 17;
    cfg.k = 9;
    ToyProblem p = gen_problem(5, cfg);
    std::mt19937_64 rng(1);
    for (int i = 0; i < 50; ++i) {
        auto hint = make_hint(p, rng);
        CHECK(hint.size() >= 1);
        CHECK(hint.size() <= 3);
    }
    cfg.k = 3;
    ToyProblem q = gen_problem(5, cfg);
    auto hint = make_hint(q, rng);
    CHECK(hint.size() == 1);
    cfg.k = 2;
    ToyProblem r = gen_problem(5, cfg);
    CHECK_THROWS_AS(make_hint(r, rng), ConfigError);
    // seeded reproducibility
    std::mt19937_64 r1(7), r2(7);
    CHECK(make_hint(p, r1) == make_hint(p, r2));
}

TEST_CASE("to_problem carries the formal reference rendering") {
    ToyProblem p = fixed_problem(17, 10, {{OpKind::ADD, 5}, {OpKind::MUL, 3}});
    Problem gen = p.to_problem();
    CHECK(gen.answer == "11");
    CHECK(gen.reference_solution == "Step 1: 10 ADD 5 = 15 (mod 17)\n\nStep 2: 15 MUL 3 = 11 (mod 17)");
    CHECK(gen.source == ProblemSource::toy);
}
