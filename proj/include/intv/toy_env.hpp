#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "intv/core_types.hpp"

namespace intv {

enum class OpKind { ADD, SUB, MUL };
const char* to_string(OpKind k);

enum class StepStyle { casual, formal };
const char* to_string(StepStyle s);

struct ChainOp {
    OpKind kind = OpKind::ADD;
    int constant = 1;  // in [1, m-1]
};

// Modular arithmetic chain: v_t = op_t(v_{t-1}) mod m, answer = v_K.
struct ToyProblem {
    std::string id;
    int modulus = 17;
    int v0 = 0;
    std::vector<ChainOp> ops;                // length K
    std::vector<int> reference_values;       // v_1..v_K
    int answer = 0;

    int k() const { return static_cast<int>(ops.size()); }
    Problem to_problem() const;  // Problem JSONL view; reference solution = formal rendering
};

struct StepEmission {
    StepStyle style = StepStyle::casual;
    int delta = 0;          // offset from the correct application of op_t
    int emitted_value = 0;  // residue in Z_m
};

// The offset alphabet a step policy samples from.
inline constexpr int kOffsets[] = {-2, -1, 0, 1, 2};
inline constexpr int kNumOffsets = 5;
int offset_index(int delta);  // -1 if delta not in the alphabet

struct ToyConfig {
    int modulus = 17;
    int k = 8;
    // Sampling weights for ADD/SUB/MUL when drawing ops.
    double op_mix[3] = {1.0, 1.0, 1.0};
};

int apply_op(const ChainOp& op, int value, int modulus);

// Deterministic in seed; constants drawn from [1, m-1].
ToyProblem gen_problem(std::uint64_t seed, const ToyConfig& cfg);

// t is the 1-based chain index; prev_value is the previous *emitted* value.
std::string render_step(const ToyProblem& p, int t, int prev_value, const StepEmission& e);

// Inverse of render_step for chain position t given the previous emitted value.
// Throws ParseError when the step matches neither style or is inconsistent
// with position t.
StepEmission parse_step(const ToyProblem& p, int t, int prev_value, const std::string& step);

// Parses every step in order; nullopt if any step fails to parse (with the
// failing 0-based index written to fail_index when provided).
std::optional<std::vector<StepEmission>> parse_trajectory(const ToyProblem& p,
                                                          const std::vector<std::string>& steps,
                                                          int* fail_index = nullptr);

// 1 iff the trajectory has exactly K parseable steps and the final emitted
// value equals the answer; malformed input scores 0.
int score(const ToyProblem& p, const Trajectory& traj);

// Smallest 0-based step index whose emitted value differs from the reference
// chain; an unparseable step is itself the error; a trajectory shorter than K
// with no mismatch errs at its first missing step. nullopt if fully correct.
std::optional<int> first_error_oracle(const ToyProblem& p, const Trajectory& traj);

// First j reference steps rendered formally, j uniform in [1, floor(K/3)].
std::vector<std::string> make_hint(const ToyProblem& p, std::mt19937_64& rng);

// Formal rendering of the full reference chain.
std::vector<std::string> reference_steps(const ToyProblem& p);

// One (style, offset) decision with the op kind it was made under; the unit
// of supervision for SFT and the policy gradient.
struct StepLabel {
    StepStyle style = StepStyle::casual;
    int delta = 0;
    OpKind op = OpKind::ADD;
};

using ProblemIndex = std::vector<ToyProblem>;
const ToyProblem* find_problem(const ProblemIndex& index, const std::string& id);

// Labels for a parsed toy trajectory (conditioning steps included).
std::optional<std::vector<StepLabel>> trajectory_labels(const ToyProblem& problem,
                                                        const std::vector<std::string>& steps);

}  // namespace intv
