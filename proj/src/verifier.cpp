#include "intv/verifier.hpp"

#include <cctype>

#include <json.hpp>

#include "intv/errors.hpp"

namespace intv {

namespace {

const char* kInterventionWithRef = R"(You are an expert mathematician teaching a Math Olympiad class. You will be given a problem and a high-level reference solution to the problem.

# Problem #

{problem}

# High-Level Reference Solution #

{reference_solution}

A student in your class has solved the problem incorrectly. Leverage your understanding of the reference solution to help correct his attempt.

## Detailed Verification Log

Perform a step-by-step check of the student's attempt against the reference solution. The steps refer to each numbered substep in the Incorrect Student Attempt (Substep 1:, Substep 2:, ...). For correct substeps a brief justification suffices; for substeps with errors you must provide a detailed explanation. Be careful and check every intermediate result.

## Identify the First Critical Error

A critical error is either a factual error (e.g., a calculation error) or a logical fallacy that disrupts the current line of reasoning, and it must not be recovered from in later steps. Report the first critical error the student makes.

## Propose an Intervention Step

Propose a single intervention step that replaces the critical error and steers the student towards the correct solution. The intervention must not give away the exact answer, and should sketch the next steps that lead toward the correct solution. Write the content from the student's perspective.

Self-check before finalizing: the content must not include the exact answer, must not be missing key insights, and its location must not be later than the first critical error. Revise until all checks pass.

## Final Intervention Step Format

INSERT_STEP_CONTENT is the content of the intervention step, and INSERT_STEP_NUMBER is an integer indicating the substep it replaces.

<intervention>
{ "content": INSERT_STEP_CONTENT, "location": INSERT_STEP_NUMBER }
</intervention>

# Incorrect Student Attempt #

{student_attempt}
)";

const char* kInterventionNoRef = R"(You are an expert mathematician teaching a Math Olympiad class. You will be given a problem and a student's incorrect attempt.

# Problem #

{problem}

A student in your class has solved the problem incorrectly. Help correct his attempt.

## Detailed Verification Log

Perform a step-by-step check of the student's attempt. The steps refer to each numbered substep in the Incorrect Student Attempt (Substep 1:, Substep 2:, ...). For correct substeps a brief justification suffices; for substeps with errors you must provide a detailed explanation. Be careful and check every intermediate result.

## Identify the First Critical Error

A critical error is either a factual error (e.g., a calculation error) or a logical fallacy that disrupts the current line of reasoning, and it must not be recovered from in later steps. Report the first critical error the student makes.

## Propose an Intervention Step

Propose a single intervention step that replaces the critical error and steers the student towards the correct solution. The intervention must not give away the exact answer, and should sketch the next steps that lead toward the correct solution. Write the content from the student's perspective.

## Final Intervention Step Format

INSERT_STEP_CONTENT is the content of the intervention step, and INSERT_STEP_NUMBER is an integer indicating the substep it replaces.

<intervention>
{ "content": INSERT_STEP_CONTENT, "location": INSERT_STEP_NUMBER }
</intervention>

# Incorrect Student Attempt #

{student_attempt}
)";

const char* kSelfReflection = R"(You are an expert mathematician teaching a Math Olympiad class. You will be given a problem and a high-level reference solution to the problem. Your task is to solve the problem step-by-step guided by the high-level reference solution.

# Problem #

{problem}

# High-Level Reference Solution #

{reference_solution}

Great job! Now, a student in your class has solved the problem incorrectly. You must leverage your understanding of the reference solution to rewrite a refined version of his attempt at the problem. Your rewritten solution should be a complete solution to the problem.

# Incorrect Student Attempt #

{student_attempt}
)";

// Replaces {key} exactly once; a missing or duplicate placeholder is a
// template defect.
void substitute_once(std::string& body, const std::string& key, const std::string& value) {
    std::string pat = "{" + key + "}";
    auto pos = body.find(pat);
    if (pos == std::string::npos) {
        throw TemplateError("template missing placeholder " + pat);
    }
    if (body.find(pat, pos + 1) != std::string::npos) {
        throw TemplateError("template has duplicate placeholder " + pat);
    }
    body.replace(pos, pat.size(), value);
}

bool is_token_char(unsigned char c) { return std::isalnum(c) != 0; }

}  // namespace

PromptTemplate PromptTemplate::builtin(TemplateName name) {
    PromptTemplate t;
    t.name = name;
    switch (name) {
        case TemplateName::intervention_with_ref: t.body = kInterventionWithRef; break;
        case TemplateName::intervention_no_ref: t.body = kInterventionNoRef; break;
        case TemplateName::self_reflection: t.body = kSelfReflection; break;
    }
    return t;
}

std::uint64_t PromptTemplate::hash() const {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : body) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

Intervention propose_oracle(const ToyProblem& problem, const Trajectory& traj,
                            const std::string& trajectory_id, const ToyPolicy& policy,
                            std::mt19937_64& rng) {
    if (traj.reward != 0) throw ConfigError("propose_oracle: trajectory already succeeds");
    auto t_star = first_error_oracle(problem, traj);
    if (!t_star) throw NoErrorFoundError("propose_oracle: no divergence in failed trace");
    Intervention out;
    out.problem_id = problem.id;
    out.trajectory_id = trajectory_id;
    out.t_star = *t_star;
    out.proposer = Proposer::oracle;
    if (*t_star >= problem.k() - 1) {
        // The corrected final step carries the answer by construction.
        out.kept = false;
        out.discard_reason = DiscardReason::answer_leak;
        return out;
    }
    // Steps before t* are correct, so the previous emitted value is the
    // reference value; the corrected step carries the true chain value.
    int prev = (*t_star == 0) ? problem.v0 : problem.reference_values[*t_star - 1];
    StepEmission e;
    auto style_p = policy.style_probs();
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    e.style = u < style_p[0] ? StepStyle::casual : StepStyle::formal;
    e.delta = 0;
    e.emitted_value = problem.reference_values[*t_star];
    out.content = render_step(problem, *t_star + 1, prev, e);
    out.kept = true;
    return out;
}

Intervention propose_policy(const ToyProblem& problem, const Trajectory& traj,
                            const std::string& trajectory_id, const ToyPolicy& policy,
                            std::mt19937_64& rng) {
    Intervention out = propose_oracle(problem, traj, trajectory_id, policy, rng);
    out.proposer = Proposer::llm;
    if (!out.kept) return out;
    // Resample the replacement value through the policy's offset head.
    const ChainOp& op = problem.ops[out.t_star];
    auto off_p = policy.offset_probs(op.kind);
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double acc = 0.0;
    int off = kNumOffsets - 1;
    for (int i = 0; i < kNumOffsets; ++i) {
        acc += off_p[i];
        if (u < acc) { off = i; break; }
    }
    int prev = (out.t_star == 0) ? problem.v0 : problem.reference_values[out.t_star - 1];
    StepEmission e;
    auto style_p = policy.style_probs();
    double v = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    e.style = v < style_p[0] ? StepStyle::casual : StepStyle::formal;
    e.delta = kOffsets[off];
    e.emitted_value = ((apply_op(op, prev, problem.modulus) + e.delta) % problem.modulus +
                       problem.modulus) % problem.modulus;
    out.content = render_step(problem, out.t_star + 1, prev, e);
    return out;
}

std::string render_prompt(const PromptTemplate& tmpl, const Problem& problem,
                          const Trajectory& traj) {
    std::string body = tmpl.body;
    substitute_once(body, "problem", problem.prompt);
    if (tmpl.name != TemplateName::intervention_no_ref) {
        if (problem.reference_solution.empty()) {
            throw TemplateError("render_prompt: reference solution required but missing");
        }
        substitute_once(body, "reference_solution", problem.reference_solution);
    }
    std::string attempt;
    for (std::size_t i = 0; i < traj.steps.size(); ++i) {
        if (i) attempt += "\n";
        attempt += "Substep " + std::to_string(i + 1) + ": " + traj.steps[i];
    }
    substitute_once(body, "student_attempt", attempt);
    return body;
}

std::optional<ParsedIntervention> parse_intervention(const std::string& response) {
    const std::string open = "<intervention>";
    const std::string close = "</intervention>";
    auto start = response.rfind(open);
    if (start == std::string::npos) return std::nullopt;
    auto end = response.find(close, start + open.size());
    if (end == std::string::npos) return std::nullopt;
    std::string inner = response.substr(start + open.size(), end - start - open.size());
    nlohmann::json j = nlohmann::json::parse(inner, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    if (!j.contains("content") || !j["content"].is_string()) return std::nullopt;
    if (!j.contains("location") || !j["location"].is_number_integer()) return std::nullopt;
    int location = j["location"].get<int>();
    if (location < 1) return std::nullopt;
    ParsedIntervention out;
    out.content = j["content"].get<std::string>();
    out.t_star = location - 1;
    return out;
}

Intervention leak_filter(Intervention intervention, const Problem& problem) {
    if (!intervention.kept) return intervention;
    std::string answer = normalize_answer(problem.answer);
    std::string content = normalize_answer(intervention.content);
    if (answer.empty()) return intervention;
    std::size_t pos = 0;
    while ((pos = content.find(answer, pos)) != std::string::npos) {
        bool left_ok = pos == 0 || !is_token_char(content[pos - 1]);
        std::size_t after = pos + answer.size();
        bool right_ok = after >= content.size() || !is_token_char(content[after]);
        if (left_ok && right_ok) {
            intervention.kept = false;
            intervention.discard_reason = DiscardReason::answer_leak;
            return intervention;
        }
        ++pos;
    }
    return intervention;
}

std::string render_intervention_block(const std::string& content, int location_one_based) {
    nlohmann::json j;
    j["content"] = content;
    j["location"] = location_one_based;
    return "<intervention>" + j.dump() + "</intervention>";
}

}  // namespace intv
