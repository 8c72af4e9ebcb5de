#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "intv/core_types.hpp"
#include "intv/toy_env.hpp"

namespace intv {

inline constexpr int kNumOpKinds = 3;
inline constexpr int kNumStyles = 2;

// Softmax step policy over (style, offset | op kind).
struct ToyPolicy {
    // theta_offset[op][offset_index], theta_style[style]
    std::array<std::array<double, kNumOffsets>, kNumOpKinds> theta_offset{};
    std::array<double, kNumStyles> theta_style{};
    int version = 0;

    std::array<double, kNumOffsets> offset_probs(OpKind op) const;
    std::array<double, kNumStyles> style_probs() const;

    // Base initialization: P(delta=0) = 0.9/0.8/0.6 for ADD/SUB/MUL with the
    // remaining mass uniform over the nonzero offsets; P(casual) = 0.9.
    static ToyPolicy base();
};

struct PolicyGradient {
    std::array<std::array<double, kNumOffsets>, kNumOpKinds> theta_offset{};
    std::array<double, kNumStyles> theta_style{};

    void add(const PolicyGradient& other, double scale = 1.0);
};

// Samples the remaining chain steps after the conditioning prefix and scores
// the full trajectory. Conditioning steps are prepended verbatim.
Trajectory rollout(const ToyPolicy& policy, const ToyProblem& problem,
                   const std::string& conditioning, std::mt19937_64& rng);

struct NllResult {
    double total_nll = 0.0;
    std::vector<double> per_step_nll;
    int decisions = 0;  // two per step (style + offset)
};

// NLL of every step in the trajectory (conditioning-prepended steps included).
// Throws SetUnscorableError when a step is unparseable or its offset falls
// outside the sampling alphabet.
NllResult logprob(const ToyPolicy& policy, const ToyProblem& problem, const Trajectory& traj);

struct EntropyReport {
    double style_entropy = 0.0;                       // nats
    std::array<double, kNumOpKinds> offset_entropy{}; // nats, per op kind
};

EntropyReport entropy(const ToyPolicy& policy);

// Log-likelihood of a label sequence and its analytic gradient. These back
// both update rules and are exposed for finite-difference checks.
double label_loglik(const ToyPolicy& policy, std::span<const StepLabel> labels);
PolicyGradient label_loglik_grad(const ToyPolicy& policy, std::span<const StepLabel> labels);

struct SftConfig {
    double lr = 0.5;
    int epochs = 4;   // num_train_epochs default
    int batch = 32;
};

struct SftExample;  // sft_builder.hpp

// Gradient ascent on the summed log-likelihood of every example target
// (prefix steps and intervention; nothing after t*). Examples whose labels
// are missing are skipped and counted.
ToyPolicy sft_update(const ToyPolicy& policy, const std::vector<SftExample>& examples,
                     const SftConfig& cfg, int* skipped = nullptr);

struct RolloutGroup {
    std::string problem_id;
    ConditioningMode mode = ConditioningMode::none;
    std::vector<Trajectory> trajectories;
    std::vector<double> rewards;
    std::vector<double> advantages;

    void compute_advantages();
};

struct PgConfig {
    double lr = 0.05;
};

// REINFORCE with group-mean baseline; groups with all-equal rewards contribute
// zero gradient. Only sampled steps (past gen_meta.conditioned_steps) carry
// gradient. Throws GroupSizeError when any group has fewer than 2 rollouts.
ToyPolicy pg_update(const ToyPolicy& policy, const std::vector<RolloutGroup>& groups,
                    const PgConfig& cfg, const ProblemIndex& problems);

// Analytic gradient of the group-baseline objective, for checks and updates.
PolicyGradient pg_gradient(const ToyPolicy& policy, const std::vector<RolloutGroup>& groups,
                           const ProblemIndex& problems);

// Checkpoint serialization: {version, theta_offset, theta_style}.
std::string policy_to_json(const ToyPolicy& policy);
ToyPolicy policy_from_json(const std::string& text);

}  // namespace intv
