#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "intv/policy.hpp"
#include "intv/rollout_engine.hpp"

namespace intv {

struct RlConfig {
    int iters = 200;
    int group_n = 8;        // rollout group size
    int batch_problems = 8; // problems sampled per iteration
    double lr = 0.05;       // toy-scale learning rate
    double ema_decay = 0.9;
    std::uint64_t seed = 0;
};

struct CurvePoint {
    int iter = 0;
    double reward = 0.0;          // raw mean reward this iteration
    double ema = 0.0;             // exponential moving average, init 0
    double zero_adv_ratio = 0.0;  // fraction of groups with all rewards 0
};

struct TrainResult {
    ToyPolicy policy;
    std::vector<CurvePoint> curves;
};

// Fraction of groups whose rewards are all zero. Throws NoDataError on empty.
double zero_advantage_ratio(const std::vector<RolloutGroup>& groups);

// Outcome-reward RL over the toy backend: per iteration sample a problem
// batch, collect groups, mean-baseline advantages, policy-gradient step.
// Deterministic given (policy, problems, cfg).
TrainResult train(const ToyPolicy& policy, const std::vector<Problem>& problems,
                  const ProblemIndex& toy_problems, const RlConfig& cfg);

std::string curves_to_jsonl(const std::vector<CurvePoint>& curves);
std::vector<CurvePoint> curves_from_jsonl(const std::string& text);

}  // namespace intv
