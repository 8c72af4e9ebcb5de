#pragma once

#include <optional>
#include <random>
#include <string>

#include "intv/core_types.hpp"
#include "intv/policy.hpp"
#include "intv/toy_env.hpp"

namespace intv {

enum class TemplateName { intervention_with_ref, intervention_no_ref, self_reflection };

struct PromptTemplate {
    TemplateName name = TemplateName::intervention_with_ref;
    std::string body;  // placeholders: {problem}, {reference_solution}, {student_attempt}

    static PromptTemplate builtin(TemplateName name);
    // FNV-1a of the body, recorded in run manifests.
    std::uint64_t hash() const;
};

// First-error localization with toy ground truth. The corrected step carries
// the true chain value; its surface style is sampled from the policy's style
// head. An error at the final step is discarded as an answer leak. Throws
// NoErrorFoundError when a failed trace shows no divergence.
Intervention propose_oracle(const ToyProblem& problem, const Trajectory& traj,
                            const std::string& trajectory_id, const ToyPolicy& policy,
                            std::mt19937_64& rng);

// Toy analogue of self-generated interventions: t* comes from the oracle, but
// the replacement value is sampled from the policy's offset head, so proposals
// are wrong exactly as often as the policy is. The downstream 32-rollout
// correctness filter is what separates good proposals from bad ones.
Intervention propose_policy(const ToyProblem& problem, const Trajectory& traj,
                            const std::string& trajectory_id, const ToyPolicy& policy,
                            std::mt19937_64& rng);

// Fills the template; the student attempt is numbered "Substep N:" from 1.
std::string render_prompt(const PromptTemplate& tmpl, const Problem& problem,
                          const Trajectory& traj);

struct ParsedIntervention {
    std::string content;
    int t_star = 0;  // 0-based; prompt-facing "location" is 1-based
};

// Extracts the last <intervention>{...}</intervention> block. nullopt on any
// parse failure (missing block, malformed JSON, location < 1).
std::optional<ParsedIntervention> parse_intervention(const std::string& response);

// Marks the intervention discarded when the normalized answer occurs in the
// content as a token-bounded substring.
Intervention leak_filter(Intervention intervention, const Problem& problem);

// Renders a well-formed intervention block; parse_intervention inverts it.
std::string render_intervention_block(const std::string& content, int location_one_based);

}  // namespace intv
