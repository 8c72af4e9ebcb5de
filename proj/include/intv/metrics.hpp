#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "intv/core_types.hpp"
#include "intv/policy.hpp"
#include "intv/toy_env.hpp"

namespace intv {

// Exact numerator/denominator of the unbiased pass@k estimator
// 1 - C(n-c, k)/C(n, k). Valid for n <= 62 without overflow.
struct Rational {
    std::uint64_t num = 0;
    std::uint64_t den = 1;
};
Rational pass_at_k_rational(int n, int c, int k);

// Unbiased pass@k from n samples with c successes; overflow-safe.
double pass_at_k(int n, int c, int k);

struct ErrorLocationHistogram {
    std::vector<double> bucket_edges;  // final implicit edge is +inf
    std::vector<int> counts;           // absolute t* (1-based chain position)
    std::vector<int> fraction_counts;  // t* / trace length, same edges scaled to [0,1]
    double frac_beyond_50 = 0.0;       // fraction of first errors after step 50
    int total = 0;
};

struct LocatedError {
    int t_star = 0;       // 0-based
    int trace_length = 0;
};

ErrorLocationHistogram error_location_histogram(const std::vector<LocatedError>& errors,
                                                const std::vector<double>& bucket_edges);

struct NllSetReport {
    std::string name;
    double mean = 0.0;    // per-decision mean NLL
    double stderr_ = 0.0;
    int traces = 0;
    int unscorable = 0;
};

// Per-decision NLL aggregated per named trace set; sets where no trace scores
// throw SetUnscorableError.
std::vector<NllSetReport> nll_report(
    const ToyPolicy& policy, const ProblemIndex& problems,
    const std::vector<std::pair<std::string, std::vector<Trajectory>>>& trace_sets);

struct LengthStats {
    std::optional<double> mean_steps, median_steps, p95_steps;
    std::optional<double> mean_chars, median_chars, p95_chars;
    int count = 0;
};

LengthStats length_stats(const std::vector<std::vector<std::string>>& items);

}  // namespace intv
