#include <doctest.h>

#include <cmath>
#include <random>

#include "intv/errors.hpp"
#include "intv/policy.hpp"
#include "intv/sft_builder.hpp"
#include "intv/toy_env.hpp"

using namespace intv;

namespace {

ToyProblem make_problem(std::uint64_t seed, int m, int k) {
    ToyConfig cfg;
    cfg.modulus = m;
    cfg.k = k;
    return gen_problem(seed, cfg);
}

// Exact success probability by exhaustive delta-sequence enumeration
// (style does not affect the reward).
double enumerate_success_prob(const ToyPolicy& policy, const ToyProblem& p) {
    int k = p.k();
    double total = 0.0;
    std::vector<int> idx(k, 0);
    while (true) {
        double prob = 1.0;
        int value = p.v0;
        for (int t = 0; t < k; ++t) {
            auto probs = policy.offset_probs(p.ops[t].kind);
            prob *= probs[idx[t]];
            value = ((apply_op(p.ops[t], value, p.modulus) + kOffsets[idx[t]]) % p.modulus +
                     p.modulus) % p.modulus;
        }
        if (value == p.answer) total += prob;
        int pos = k - 1;
        while (pos >= 0 && ++idx[pos] == kNumOffsets) idx[pos--] = 0;
        if (pos < 0) break;
    }
    return total;
}

}  // namespace

TEST_CASE("base policy head probabilities") {
    ToyPolicy p = ToyPolicy::base();
    auto add = p.offset_probs(OpKind::ADD);
    CHECK(add[offset_index(0)] == doctest::Approx(0.9));
    CHECK(p.offset_probs(OpKind::SUB)[offset_index(0)] == doctest::Approx(0.8));
    CHECK(p.offset_probs(OpKind::MUL)[offset_index(0)] == doctest::Approx(0.6));
    CHECK(p.style_probs()[0] == doctest::Approx(0.9));
    double sum = 0.0;
    for (double v : add) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("entropy: uniform, one-hot, and the 0.9/0.1 head") {
    ToyPolicy p;
    // uniform offsets by default construction (all-zero logits)
    CHECK(entropy(p).offset_entropy[0] == doctest::Approx(std::log(5.0)));
    p.theta_style = {std::log(9.0), std::log(1.0)};
    CHECK(entropy(p).style_entropy ==
          doctest::Approx(-(0.9 * std::log(0.9) + 0.1 * std::log(0.1))).epsilon(1e-9));
    p.theta_offset[0] = {0.0, 0.0, 50.0, 0.0, 0.0};  // effectively one-hot
    CHECK(entropy(p).offset_entropy[0] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("logprob arithmetic on a single step") {
    ToyProblem p = make_problem(3, 17, 2);
    p.ops[0].kind = OpKind::ADD;
    ToyPolicy policy = ToyPolicy::base();
    int prev = p.v0;
    StepEmission e{StepStyle::casual, 0,
                   apply_op(p.ops[0], prev, p.modulus)};
    Trajectory traj;
    traj.problem_id = p.id;
    traj.steps = {render_step(p, 1, prev, e)};
    NllResult r = logprob(policy, p, traj);
    CHECK(r.total_nll == doctest::Approx(-std::log(0.81)).epsilon(1e-9));
    CHECK(r.decisions == 2);
}

TEST_CASE("logprob of a near-deterministic policy on its own output is ~0") {
    ToyProblem p = make_problem(11, 17, 4);
    ToyPolicy policy;
    for (int op = 0; op < kNumOpKinds; ++op) {
        policy.theta_offset[op] = {0, 0, 500.0, 0, 0};
    }
    policy.theta_style = {500.0, 0};
    std::mt19937_64 rng(5);
    Trajectory traj = rollout(policy, p, "", rng);
    CHECK(traj.reward == 1);
    CHECK(logprob(policy, p, traj).total_nll == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("rollout: perfect policy always succeeds; full prefix needs no sampling") {
    ToyProblem p = make_problem(21, 17, 6);
    ToyPolicy perfect;
    for (int op = 0; op < kNumOpKinds; ++op) perfect.theta_offset[op] = {0, 0, 500.0, 0, 0};
    std::mt19937_64 rng(1);
    for (int i = 0; i < 20; ++i) {
        CHECK(rollout(perfect, p, "", rng).reward == 1);
    }
    // conditioning on the full correct reference chain
    std::string full = join_steps(reference_steps(p));
    ToyPolicy hopeless;
    for (int op = 0; op < kNumOpKinds; ++op) hopeless.theta_offset[op] = {500.0, 0, 0, 0, 0};
    Trajectory t = rollout(hopeless, p, full, rng);
    CHECK(t.reward == 1);
    CHECK(t.gen_meta.conditioned_steps == p.k());
}

TEST_CASE("rollout reproducibility") {
    ToyProblem p = make_problem(33, 17, 8);
    ToyPolicy policy = ToyPolicy::base();
    std::mt19937_64 r1(77), r2(77);
    Trajectory a = rollout(policy, p, "", r1);
    Trajectory b = rollout(policy, p, "", r2);
    CHECK(a.steps == b.steps);
    CHECK(a.reward == b.reward);
}

TEST_CASE("rollout rejects unparseable conditioning") {
    ToyProblem p = make_problem(3, 17, 4);
    ToyPolicy policy = ToyPolicy::base();
    std::mt19937_64 rng(1);
    CHECK_THROWS_AS(rollout(policy, p, "total garbage", rng), ConditioningError);
}

TEST_CASE("success probability matches exhaustive enumeration within 3 sigma") {
    ToyPolicy policy = ToyPolicy::base();
    for (std::uint64_t seed : {101ull, 202ull, 303ull}) {
        ToyProblem p = make_problem(seed, 17, 5);
        double exact = enumerate_success_prob(policy, p);
        const int trials = 20000;
        std::mt19937_64 rng(seed * 31 + 7);
        int wins = 0;
        for (int i = 0; i < trials; ++i) wins += rollout(policy, p, "", rng).reward;
        double mc = static_cast<double>(wins) / trials;
        double sigma = std::sqrt(std::max(exact * (1 - exact), 1e-9) / trials);
        CHECK(std::abs(mc - exact) < 3 * sigma + 1e-9);
    }
}

TEST_CASE("advantages: mean subtraction and zero-sum") {
    RolloutGroup g;
    g.rewards = {1, 0, 0, 0};
    g.trajectories.resize(4);
    g.compute_advantages();
    CHECK(g.advantages[0] == doctest::Approx(0.75));
    CHECK(g.advantages[1] == doctest::Approx(-0.25));
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 1000; ++trial) {
        RolloutGroup r;
        int n = 2 + static_cast<int>(rng() % 15);
        for (int i = 0; i < n; ++i) r.rewards.push_back(static_cast<double>(rng() % 2));
        r.trajectories.resize(n);
        r.compute_advantages();
        double sum = 0.0;
        for (double a : r.advantages) sum += a;
        CHECK(std::abs(sum) < 1e-12);
    }
}

TEST_CASE("sft_update: P(delta=0) rises monotonically per epoch") {
    ToyProblem p = make_problem(55, 17, 6);
    ToyPolicy policy = ToyPolicy::base();
    // all-correct casual steps as labels
    SftExample ex;
    ex.problem_id = p.id;
    for (int t = 0; t < p.k(); ++t) ex.labels.push_back({StepStyle::casual, 0, p.ops[t].kind});
    std::vector<SftExample> data{ex};
    double prev_prob[kNumOpKinds];
    for (int op = 0; op < kNumOpKinds; ++op) {
        prev_prob[op] = policy.offset_probs(static_cast<OpKind>(op))[offset_index(0)];
    }
    ToyPolicy current = policy;
    for (int epoch = 0; epoch < 4; ++epoch) {
        current = sft_update(current, data, SftConfig{0.3, 1, 32});
        for (int t = 0; t < p.k(); ++t) {
            int op = static_cast<int>(p.ops[t].kind);
            double now = current.offset_probs(static_cast<OpKind>(op))[offset_index(0)];
            CHECK(now > prev_prob[op]);
        }
        for (int op = 0; op < kNumOpKinds; ++op) {
            prev_prob[op] = current.offset_probs(static_cast<OpKind>(op))[offset_index(0)];
        }
    }
}

TEST_CASE("sft_update rejects empty datasets and counts label-less skips") {
    ToyPolicy policy = ToyPolicy::base();
    CHECK_THROWS_AS(sft_update(policy, {}, SftConfig{}), NoDataError);
    SftExample good;
    good.labels.push_back({StepStyle::casual, 0, OpKind::ADD});
    SftExample bad;  // no labels
    int skipped = 0;
    sft_update(policy, {good, bad}, SftConfig{0.1, 1, 8}, &skipped);
    CHECK(skipped == 1);
}

TEST_CASE("softmax heads stay normalized after updates") {
    ToyPolicy policy = ToyPolicy::base();
    SftExample ex;
    ex.labels.push_back({StepStyle::formal, 1, OpKind::MUL});
    policy = sft_update(policy, {ex}, SftConfig{1.0, 3, 8});
    for (int op = 0; op < kNumOpKinds; ++op) {
        auto probs = policy.offset_probs(static_cast<OpKind>(op));
        double sum = 0.0;
        for (double v : probs) sum += v;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("pg_update: group size checks and zero-advantage groups") {
    ToyProblem p = make_problem(66, 17, 4);
    ProblemIndex problems{p};
    ToyPolicy policy = ToyPolicy::base();
    std::mt19937_64 rng(3);

    RolloutGroup small;
    small.problem_id = p.id;
    small.trajectories.push_back(rollout(policy, p, "", rng));
    small.rewards = {0};
    small.compute_advantages();
    CHECK_THROWS_AS(pg_update(policy, {small}, PgConfig{}, problems), GroupSizeError);

    RolloutGroup all_zero;
    all_zero.problem_id = p.id;
    for (int i = 0; i < 4; ++i) {
        Trajectory t = rollout(policy, p, "", rng);
        all_zero.rewards.push_back(0);
        all_zero.trajectories.push_back(std::move(t));
    }
    all_zero.compute_advantages();
    ToyPolicy updated = pg_update(policy, {all_zero}, PgConfig{0.5}, problems);
    CHECK(updated.theta_offset == policy.theta_offset);
    CHECK(updated.theta_style == policy.theta_style);
}

TEST_CASE("gradients match central finite differences") {
    std::mt19937_64 rng(1234);
    const double h = 1e-5;
    for (int trial = 0; trial < 20; ++trial) {
        ToyProblem p = make_problem(rng(), 17, 4);
        ToyPolicy policy = ToyPolicy::base();
        // randomize logits a little so the check is not at a special point
        for (int op = 0; op < kNumOpKinds; ++op) {
            for (int i = 0; i < kNumOffsets; ++i) {
                policy.theta_offset[op][i] +=
                    std::uniform_real_distribution<double>(-0.3, 0.3)(rng);
            }
        }
        std::vector<StepLabel> labels;
        for (int t = 0; t < p.k(); ++t) {
            labels.push_back({static_cast<StepStyle>(rng() % 2),
                              kOffsets[rng() % kNumOffsets], p.ops[t].kind});
        }
        PolicyGradient g = label_loglik_grad(policy, labels);
        for (int op = 0; op < kNumOpKinds; ++op) {
            for (int i = 0; i < kNumOffsets; ++i) {
                ToyPolicy plus = policy, minus = policy;
                plus.theta_offset[op][i] += h;
                minus.theta_offset[op][i] -= h;
                double fd = (label_loglik(plus, labels) - label_loglik(minus, labels)) / (2 * h);
                double analytic = g.theta_offset[op][i];
                double denom = std::max(std::abs(fd), 1e-8);
                CHECK(std::abs(analytic - fd) / denom < 1e-5);
            }
        }
        for (int s = 0; s < kNumStyles; ++s) {
            ToyPolicy plus = policy, minus = policy;
            plus.theta_style[s] += h;
            minus.theta_style[s] -= h;
            double fd = (label_loglik(plus, labels) - label_loglik(minus, labels)) / (2 * h);
            double denom = std::max(std::abs(fd), 1e-8);
            CHECK(std::abs(g.theta_style[s] - fd) / denom < 1e-5);
        }
    }
}

TEST_CASE("policy checkpoint round-trips bit-exactly") {
    ToyPolicy policy = ToyPolicy::base();
    policy.version = 3;
    policy.theta_offset[1][2] = 0.12345678901234567;
    ToyPolicy back = policy_from_json(policy_to_json(policy));
    CHECK(back.version == 3);
    CHECK(back.theta_offset == policy.theta_offset);
    CHECK(back.theta_style == policy.theta_style);
}
