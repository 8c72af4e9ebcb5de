#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "intv/core_types.hpp"
#include "intv/policy.hpp"
#include "intv/sft_builder.hpp"
#include "intv/toy_env.hpp"

namespace intv {

// A rollout source: the toy policy or an inference service. sample() must be
// deterministic in (problem, conditioning, seed) for the toy backend.
class RolloutBackend {
public:
    virtual ~RolloutBackend() = default;
    virtual Trajectory sample(const Problem& problem, const std::string& conditioning,
                              std::uint64_t seed) = 0;
    virtual std::string id() const = 0;
};

class ToyBackend : public RolloutBackend {
public:
    ToyBackend(ToyPolicy policy, ProblemIndex problems);
    Trajectory sample(const Problem& problem, const std::string& conditioning,
                      std::uint64_t seed) override;
    std::string id() const override { return "toy"; }

    const ToyPolicy& policy() const { return policy_; }
    void set_policy(ToyPolicy p) { policy_ = std::move(p); }
    const ProblemIndex& problems() const { return problems_; }

private:
    ToyPolicy policy_;
    ProblemIndex problems_;
};

// Deterministic per-trajectory seed derivation (splitmix64 over seed, index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

// n trajectories for one problem with advantages filled in.
RolloutGroup collect_group(RolloutBackend& backend, const Problem& problem, int n,
                           ConditioningMode mode, const std::string& conditioning,
                           std::uint64_t seed);

struct DifficultyRecord {
    std::string problem_id;
    int n = 0;
    int c = 0;
};

// Retains problems with zero correct rollouts out of n unconditioned samples.
std::vector<Problem> difficulty_filter(RolloutBackend& backend,
                                       const std::vector<Problem>& problems, int n,
                                       std::uint64_t seed,
                                       std::vector<DifficultyRecord>* audit = nullptr);

// Runs n continuations from compose_conditioned_prefix(traj, t*, content);
// kept iff at least one succeeds. Stores one successful suffix when available.
VerifyReport verify_intervention(RolloutBackend& backend, const Problem& problem,
                                 const Trajectory& traj, const Intervention& intervention,
                                 int n, std::uint64_t seed);

struct ModeResult {
    int coverage = 0;       // problems with >= 1 correct rollout
    int total_problems = 0;
    double accuracy = 0.0;  // mean reward over all rollouts
};

struct Table1Result {
    std::map<ConditioningMode, ModeResult> per_mode;
    int skipped_problems = 0;  // no usable failed rollout / kept intervention
};

// Per-problem procedure: find a failed unconditioned rollout whose oracle
// intervention survives the leak filter (and a hint-conditioned one for the
// hint+intervention row), then roll n continuations per requested mode.
Table1Result run_table1_suite(ToyBackend& backend, const std::vector<Problem>& problems,
                              const std::vector<ConditioningMode>& modes, int n,
                              std::uint64_t seed);

}  // namespace intv
