#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace intv {

// Two-character step delimiter; runs of blank separators collapse to one boundary.
inline constexpr const char* kStepDelimiter = "\n\n";

enum class ProblemSource { toy, corpus };

enum class ConditioningMode {
    none,
    prefix,
    prefix_error,
    prefix_intervention,
    hint,
    hint_prefix_intervention,
};

const char* to_string(ConditioningMode mode);
ConditioningMode conditioning_mode_from_string(const std::string& s);

struct Problem {
    std::string id;
    std::string prompt;
    std::string reference_solution;
    std::string answer;  // normalized answer string
    ProblemSource source = ProblemSource::toy;
};

struct GenMeta {
    std::uint64_t seed = 0;
    double temperature = 1.0;
    std::string backend;
    ConditioningMode conditioning = ConditioningMode::none;
    // Number of leading steps that were given as conditioning, not sampled.
    int conditioned_steps = 0;
};

struct Trajectory {
    std::string problem_id;
    std::vector<std::string> steps;
    int reward = 0;  // binary outcome reward
    GenMeta gen_meta;
};

enum class Proposer { oracle, llm, llm_no_reference };

enum class DiscardReason { answer_leak, parse_failure, no_error_found, failed_correctness_filter };

const char* to_string(Proposer p);
const char* to_string(DiscardReason r);

struct VerifyStats {
    int n = 0;
    int c = 0;
};

struct Intervention {
    std::string problem_id;
    std::string trajectory_id;  // ties the intervention back to its source rollout
    int t_star = 0;             // 0-based step index of the first error
    std::string content;
    Proposer proposer = Proposer::oracle;
    bool kept = true;
    std::optional<DiscardReason> discard_reason;
    std::optional<VerifyStats> verify_stats;
};

// Splits a raw trace into steps on "\n\n"; runs of two or more newlines are a
// single boundary and never produce empty steps. Throws EmptyTraceError on
// empty or whitespace-only input.
std::vector<std::string> split_steps(const std::string& text);

std::string join_steps(const std::vector<std::string>& steps);

// Returns steps strictly before t_star joined by the delimiter, followed by
// the replacement step when given. t_star out of range throws IndexError.
std::string compose_conditioned_prefix(const Trajectory& traj, int t_star,
                                       const std::optional<std::string>& replacement);

// Trim, strip a \boxed{...} wrapper, case-fold. Used before answer comparison.
std::string normalize_answer(const std::string& raw);

// True when the two normalized answers agree; numeric answers are compared as
// exact rationals when both parse.
bool answers_equal(const std::string& a, const std::string& b);

}  // namespace intv
