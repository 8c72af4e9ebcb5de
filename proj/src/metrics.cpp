#include "intv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "intv/errors.hpp"

namespace intv {

namespace {

std::uint64_t gcd_u64(std::uint64_t a, std::uint64_t b) {
    while (b) {
        std::uint64_t t = a % b;
        a = b;
        b = t;
    }
    return a;
}

std::uint64_t binom_u64(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) {
        r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    }
    return r;
}

double percentile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    if (v.empty()) return 0.0;
    double idx = p * (v.size() - 1);
    std::size_t lo = static_cast<std::size_t>(idx);
    std::size_t hi = std::min(lo + 1, v.size() - 1);
    double frac = idx - lo;
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

}  // namespace

Rational pass_at_k_rational(int n, int c, int k) {
    if (c < 0 || c > n || k < 1 || k > n) throw DomainError("pass_at_k: invalid (n, c, k)");
    if (n > 62) throw DomainError("pass_at_k_rational: n too large for exact arithmetic");
    std::uint64_t miss = binom_u64(n - c, k);
    std::uint64_t all = binom_u64(n, k);
    // pass = 1 - miss/all = (all - miss)/all
    std::uint64_t num = all - miss;
    std::uint64_t g = gcd_u64(num == 0 ? all : num, all);
    return {num / g, all / g};
}

double pass_at_k(int n, int c, int k) {
    if (c < 0 || c > n || k < 1 || k > n) throw DomainError("pass_at_k: invalid (n, c, k)");
    if (n <= 62) {
        Rational r = pass_at_k_rational(n, c, k);
        return static_cast<double>(r.num) / static_cast<double>(r.den);
    }
    if (n - c < k) return 1.0;
    // 1 - prod_{i=0}^{k-1} (n-c-i)/(n-i), overflow-safe
    double prod = 1.0;
    for (int i = 0; i < k; ++i) {
        prod *= static_cast<double>(n - c - i) / static_cast<double>(n - i);
    }
    return 1.0 - prod;
}

ErrorLocationHistogram error_location_histogram(const std::vector<LocatedError>& errors,
                                                const std::vector<double>& bucket_edges) {
    ErrorLocationHistogram h;
    h.bucket_edges = bucket_edges;
    h.counts.assign(bucket_edges.empty() ? 0 : bucket_edges.size(), 0);
    h.fraction_counts.assign(10, 0);  // fixed deciles over t*/length
    h.total = static_cast<int>(errors.size());
    if (errors.empty()) return h;
    int beyond_50 = 0;
    for (const LocatedError& e : errors) {
        int position = e.t_star + 1;  // 1-based chain position
        if (!bucket_edges.empty()) {
            std::size_t b = bucket_edges.size() - 1;
            for (std::size_t i = 0; i + 1 < bucket_edges.size(); ++i) {
                if (position >= bucket_edges[i] && position < bucket_edges[i + 1]) {
                    b = i;
                    break;
                }
            }
            ++h.counts[b];
        }
        if (position > 50) ++beyond_50;
        if (e.trace_length > 0) {
            double frac = static_cast<double>(position) / e.trace_length;
            int d = std::min(9, static_cast<int>(frac * 10.0));
            ++h.fraction_counts[d];
        }
    }
    h.frac_beyond_50 = static_cast<double>(beyond_50) / errors.size();
    return h;
}

std::vector<NllSetReport> nll_report(
    const ToyPolicy& policy, const ProblemIndex& problems,
    const std::vector<std::pair<std::string, std::vector<Trajectory>>>& trace_sets) {
    std::vector<NllSetReport> out;
    for (const auto& [name, traces] : trace_sets) {
        if (traces.empty()) throw SetUnscorableError("nll_report: empty set " + name);
        NllSetReport rep;
        rep.name = name;
        std::vector<double> per_trace;
        for (const Trajectory& traj : traces) {
            const ToyProblem* toy = find_problem(problems, traj.problem_id);
            if (!toy) throw ConfigError("nll_report: unknown problem " + traj.problem_id);
            try {
                NllResult r = logprob(policy, *toy, traj);
                if (r.decisions > 0) per_trace.push_back(r.total_nll / r.decisions);
            } catch (const SetUnscorableError&) {
                ++rep.unscorable;
            }
        }
        if (per_trace.empty()) throw SetUnscorableError("nll_report: no scoreable traces in " + name);
        rep.traces = static_cast<int>(per_trace.size());
        rep.mean = std::accumulate(per_trace.begin(), per_trace.end(), 0.0) / per_trace.size();
        if (per_trace.size() > 1) {
            double var = 0.0;
            for (double v : per_trace) var += (v - rep.mean) * (v - rep.mean);
            var /= (per_trace.size() - 1);
            rep.stderr_ = std::sqrt(var / per_trace.size());
        }
        out.push_back(std::move(rep));
    }
    return out;
}

LengthStats length_stats(const std::vector<std::vector<std::string>>& items) {
    LengthStats s;
    s.count = static_cast<int>(items.size());
    if (items.empty()) return s;
    std::vector<double> steps, chars;
    for (const auto& item : items) {
        steps.push_back(static_cast<double>(item.size()));
        chars.push_back(static_cast<double>(join_steps(item).size()));
    }
    auto mean = [](const std::vector<double>& v) {
        return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    };
    s.mean_steps = mean(steps);
    s.median_steps = percentile(steps, 0.5);
    s.p95_steps = percentile(steps, 0.95);
    s.mean_chars = mean(chars);
    s.median_chars = percentile(chars, 0.5);
    s.p95_chars = percentile(chars, 0.95);
    return s;
}

}  // namespace intv
