#include <doctest.h>

#include <random>

#include "intv/core_types.hpp"
#include "intv/errors.hpp"

using namespace intv;

TEST_CASE("split_steps basic") {
    CHECK(split_steps("A\n\nB") == std::vector<std::string>{"A", "B"});
    CHECK(split_steps("A") == std::vector<std::string>{"A"});
    CHECK(split_steps("A\n\n\n\nB\n\nC") == std::vector<std::string>{"A", "B", "C"});
}

TEST_CASE("split_steps collapses blank separator runs") {
    CHECK(split_steps("A\n\n\nB") == std::vector<std::string>{"A", "B"});
    CHECK(split_steps("\n\nA\n\n") == std::vector<std::string>{"A"});
}

TEST_CASE("split_steps preserves single newlines inside a step") {
    CHECK(split_steps("line1\nline2\n\nB") == std::vector<std::string>{"line1\nline2", "B"});
}

TEST_CASE("split_steps rejects empty and whitespace-only input") {
    CHECK_THROWS_AS(split_steps(""), EmptyTraceError);
    CHECK_THROWS_AS(split_steps("  \n \t\n"), EmptyTraceError);
}

TEST_CASE("round-trip property: single-delimiter traces are byte-identical") {
    std::mt19937_64 rng(42);
    const char* pieces[] = {"alpha", "x = 3", "b\nc", "Step 9: done", " padded ", "z"};
    for (int trial = 0; trial < 500; ++trial) {
        int n = 1 + static_cast<int>(rng() % 6);
        std::vector<std::string> steps;
        for (int i = 0; i < n; ++i) steps.push_back(pieces[rng() % 6]);
        std::string joined = join_steps(steps);
        CHECK(split_steps(joined) == steps);
        CHECK(join_steps(split_steps(joined)) == joined);
    }
}

TEST_CASE("compose_conditioned_prefix") {
    Trajectory traj;
    traj.steps = {"A", "B", "C"};
    CHECK(compose_conditioned_prefix(traj, 1, std::string("B'")) == "A\n\nB'");
    CHECK(compose_conditioned_prefix(traj, 2, std::nullopt) == "A\n\nB");
    CHECK(compose_conditioned_prefix(traj, 0, std::nullopt) == "");
    CHECK(compose_conditioned_prefix(traj, 0, std::string("X")) == "X");
    // replacement = original step t* reproduces the prefix-plus-error layout
    CHECK(compose_conditioned_prefix(traj, 1, traj.steps[1]) == "A\n\nB");
    CHECK_THROWS_AS(compose_conditioned_prefix(traj, 3, std::nullopt), IndexError);
    CHECK_THROWS_AS(compose_conditioned_prefix(traj, -1, std::nullopt), IndexError);
}

TEST_CASE("normalize_answer and comparison") {
    CHECK(normalize_answer("  42 ") == "42");
    CHECK(normalize_answer("\\boxed{42}") == "42");
    CHECK(normalize_answer("ABC") == "abc");
    CHECK(answers_equal("1/2", "2/4"));
    CHECK(answers_equal("\\boxed{7}", "7"));
    CHECK_FALSE(answers_equal("7", "8"));
    CHECK(answers_equal("Yes", "yes"));
}

TEST_CASE("conditioning mode round-trips through strings") {
    for (auto m : {ConditioningMode::none, ConditioningMode::prefix,
                   ConditioningMode::prefix_error, ConditioningMode::prefix_intervention,
                   ConditioningMode::hint, ConditioningMode::hint_prefix_intervention}) {
        CHECK(conditioning_mode_from_string(to_string(m)) == m);
    }
    CHECK_THROWS_AS(conditioning_mode_from_string("bogus"), ConfigError);
}
