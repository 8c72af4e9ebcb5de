#include "intv/core_types.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>

#include "intv/errors.hpp"

namespace intv {

const char* to_string(ConditioningMode mode) {
    switch (mode) {
        case ConditioningMode::none: return "none";
        case ConditioningMode::prefix: return "prefix";
        case ConditioningMode::prefix_error: return "prefix_error";
        case ConditioningMode::prefix_intervention: return "prefix_intervention";
        case ConditioningMode::hint: return "hint";
        case ConditioningMode::hint_prefix_intervention: return "hint_prefix_intervention";
    }
    return "none";
}

ConditioningMode conditioning_mode_from_string(const std::string& s) {
    if (s == "none") return ConditioningMode::none;
    if (s == "prefix") return ConditioningMode::prefix;
    if (s == "prefix_error") return ConditioningMode::prefix_error;
    if (s == "prefix_intervention") return ConditioningMode::prefix_intervention;
    if (s == "hint") return ConditioningMode::hint;
    if (s == "hint_prefix_intervention") return ConditioningMode::hint_prefix_intervention;
    throw ConfigError("unknown conditioning mode: " + s);
}

const char* to_string(Proposer p) {
    switch (p) {
        case Proposer::oracle: return "oracle";
        case Proposer::llm: return "llm";
        case Proposer::llm_no_reference: return "llm-no-reference";
    }
    return "oracle";
}

const char* to_string(DiscardReason r) {
    switch (r) {
        case DiscardReason::answer_leak: return "answer_leak";
        case DiscardReason::parse_failure: return "parse_failure";
        case DiscardReason::no_error_found: return "no_error_found";
        case DiscardReason::failed_correctness_filter: return "failed_correctness_filter";
    }
    return "parse_failure";
}

std::vector<std::string> split_steps(const std::string& text) {
    bool all_ws = std::all_of(text.begin(), text.end(),
                              [](unsigned char c) { return std::isspace(c); });
    if (text.empty() || all_ws) {
        throw EmptyTraceError("split_steps: empty or whitespace-only trace");
    }
    std::vector<std::string> steps;
    std::size_t i = 0;
    while (i < text.size()) {
        // A boundary is a run of >= 2 consecutive newlines.
        std::size_t j = text.find("\n\n", i);
        std::string piece = (j == std::string::npos) ? text.substr(i) : text.substr(i, j - i);
        if (!piece.empty()) steps.push_back(std::move(piece));
        if (j == std::string::npos) break;
        i = j;
        while (i < text.size() && text[i] == '\n') ++i;
    }
    return steps;
}

std::string join_steps(const std::vector<std::string>& steps) {
    std::string out;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (i) out += kStepDelimiter;
        out += steps[i];
    }
    return out;
}

std::string compose_conditioned_prefix(const Trajectory& traj, int t_star,
                                       const std::optional<std::string>& replacement) {
    if (t_star < 0 || t_star >= static_cast<int>(traj.steps.size())) {
        throw IndexError("compose_conditioned_prefix: t_star out of range");
    }
    std::vector<std::string> steps(traj.steps.begin(), traj.steps.begin() + t_star);
    if (replacement) steps.push_back(*replacement);
    return join_steps(steps);
}

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Parses a signed integer or a/b fraction; returns (num, den) on success.
bool parse_rational(const std::string& s, long long& num, long long& den) {
    std::string t = trim(s);
    if (t.empty()) return false;
    auto slash = t.find('/');
    auto parse_ll = [](const std::string& part, long long& out) {
        if (part.empty()) return false;
        char* end = nullptr;
        errno = 0;
        long long v = std::strtoll(part.c_str(), &end, 10);
        if (errno != 0 || end != part.c_str() + part.size()) return false;
        out = v;
        return true;
    };
    if (slash == std::string::npos) {
        den = 1;
        return parse_ll(t, num);
    }
    return parse_ll(trim(t.substr(0, slash)), num) &&
           parse_ll(trim(t.substr(slash + 1)), den) && den != 0;
}

}  // namespace

std::string normalize_answer(const std::string& raw) {
    std::string s = trim(raw);
    const std::string boxed = "\\boxed{";
    if (s.rfind(boxed, 0) == 0 && !s.empty() && s.back() == '}') {
        s = trim(s.substr(boxed.size(), s.size() - boxed.size() - 1));
    }
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool answers_equal(const std::string& a, const std::string& b) {
    std::string na = normalize_answer(a);
    std::string nb = normalize_answer(b);
    long long an, ad, bn, bd;
    if (parse_rational(na, an, ad) && parse_rational(nb, bn, bd)) {
        return an * bd == bn * ad;
    }
    return na == nb;
}

}  // namespace intv
