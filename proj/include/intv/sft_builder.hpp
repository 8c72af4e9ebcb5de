#pragma once

#include <string>
#include <vector>

#include "intv/core_types.hpp"
#include "intv/toy_env.hpp"

namespace intv {

struct SftBuildConfig {
    bool include_prefix = true;
    bool include_suffix = false;
    bool filtered = true;
    bool mask_prompt = true;  // prompt is context-only, loss covers the target
};

struct SftExample {
    std::string problem_id;
    std::string prompt;
    std::string target;  // delimiter-joined steps
    SftBuildConfig config;
    std::vector<StepLabel> labels;  // toy mode: per-step (style, delta, op)
    // When a suffix is included, whether it came from a stored successful
    // continuation or was freshly sampled.
    std::string suffix_source;
};

// Verification outcome for one intervention: c correct continuations out of n.
struct VerifyReport {
    std::string problem_id;
    std::string trajectory_id;
    int t_star = 0;
    int n = 0;
    int c = 0;
    bool kept = false;  // c >= 1
    // Steps after the intervention from one successful continuation, when any.
    std::vector<std::string> success_suffix;
};

// Assembles the SFT dataset: target = prefix steps up to t* plus the
// intervention, per config. Ordering is byte-deterministic (problem_id, then
// t*). Throws DanglingInterventionError when an intervention's source rollout
// is missing, and requires a verify report per intervention when filtering.
std::vector<SftExample> build_dataset(const std::vector<Trajectory>& rollouts,
                                      const std::vector<std::string>& rollout_ids,
                                      const std::vector<Intervention>& interventions,
                                      const std::vector<VerifyReport>& verify_reports,
                                      const SftBuildConfig& config,
                                      const ProblemIndex& problems);

// One JSON object per line; returns the number of examples written.
std::size_t emit_sft_jsonl(const std::vector<SftExample>& examples, const std::string& path);

}  // namespace intv
