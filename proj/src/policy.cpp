#include "intv/policy.hpp"

#include <cmath>
#include <numeric>

#include <json.hpp>

#include "intv/errors.hpp"
#include "intv/sft_builder.hpp"

namespace intv {

namespace {

template <std::size_t N>
std::array<double, N> softmax(const std::array<double, N>& logits) {
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    std::array<double, N> out{};
    double sum = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        out[i] = std::exp(logits[i] - mx);
        sum += out[i];
    }
    for (auto& v : out) v /= sum;
    return out;
}

// Inverse-CDF sample from explicit probabilities; avoids the
// implementation-defined behavior of std::discrete_distribution.
template <std::size_t N>
int sample_index(const std::array<double, N>& probs, std::mt19937_64& rng) {
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double acc = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        acc += probs[i];
        if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(N) - 1;
}

template <std::size_t N>
double shannon_entropy(const std::array<double, N>& probs) {
    double h = 0.0;
    for (double p : probs) {
        if (p > 0.0) h -= p * std::log(p);
    }
    return h;
}

}  // namespace

std::array<double, kNumOffsets> ToyPolicy::offset_probs(OpKind op) const {
    return softmax(theta_offset[static_cast<int>(op)]);
}

std::array<double, kNumStyles> ToyPolicy::style_probs() const {
    return softmax(theta_style);
}

ToyPolicy ToyPolicy::base() {
    ToyPolicy p;
    const double p_correct[kNumOpKinds] = {0.9, 0.8, 0.6};
    int zero_idx = offset_index(0);
    for (int op = 0; op < kNumOpKinds; ++op) {
        double rest = (1.0 - p_correct[op]) / (kNumOffsets - 1);
        for (int i = 0; i < kNumOffsets; ++i) {
            p.theta_offset[op][i] = std::log(i == zero_idx ? p_correct[op] : rest);
        }
    }
    p.theta_style = {std::log(0.9), std::log(0.1)};  // casual, formal
    return p;
}

void PolicyGradient::add(const PolicyGradient& other, double scale) {
    for (int op = 0; op < kNumOpKinds; ++op) {
        for (int i = 0; i < kNumOffsets; ++i) {
            theta_offset[op][i] += scale * other.theta_offset[op][i];
        }
    }
    for (int s = 0; s < kNumStyles; ++s) theta_style[s] += scale * other.theta_style[s];
}

Trajectory rollout(const ToyPolicy& policy, const ToyProblem& problem,
                   const std::string& conditioning, std::mt19937_64& rng) {
    Trajectory traj;
    traj.problem_id = problem.id;
    int prev = problem.v0;
    int resume = 0;
    if (!conditioning.empty()) {
        std::vector<std::string> cond_steps;
        try {
            cond_steps = split_steps(conditioning);
        } catch (const EmptyTraceError&) {
            throw ConditioningError("rollout: conditioning is whitespace only");
        }
        auto parsed = parse_trajectory(problem, cond_steps);
        if (!parsed) throw ConditioningError("rollout: conditioning does not parse");
        traj.steps = cond_steps;
        resume = static_cast<int>(cond_steps.size());
        if (resume > 0) prev = parsed->back().emitted_value;
    }
    traj.gen_meta.conditioned_steps = resume;
    auto style_p = policy.style_probs();
    for (int t = resume + 1; t <= problem.k(); ++t) {
        const ChainOp& op = problem.ops[t - 1];
        StepEmission e;
        e.style = static_cast<StepStyle>(sample_index(style_p, rng));
        int off = sample_index(policy.offset_probs(op.kind), rng);
        e.delta = kOffsets[off];
        e.emitted_value = (apply_op(op, prev, problem.modulus) + e.delta % problem.modulus +
                           problem.modulus) % problem.modulus;
        traj.steps.push_back(render_step(problem, t, prev, e));
        prev = e.emitted_value;
    }
    traj.reward = score(problem, traj);
    return traj;
}

NllResult logprob(const ToyPolicy& policy, const ToyProblem& problem, const Trajectory& traj) {
    auto labels = trajectory_labels(problem, traj.steps);
    if (!labels) throw SetUnscorableError("logprob: trajectory does not parse");
    NllResult out;
    auto style_p = policy.style_probs();
    for (const StepLabel& lab : *labels) {
        int off = offset_index(lab.delta);
        if (off < 0) throw SetUnscorableError("logprob: offset outside the sampling alphabet");
        auto off_p = policy.offset_probs(lab.op);
        double nll = -(std::log(style_p[static_cast<int>(lab.style)]) + std::log(off_p[off]));
        out.per_step_nll.push_back(nll);
        out.total_nll += nll;
        out.decisions += 2;
    }
    return out;
}

EntropyReport entropy(const ToyPolicy& policy) {
    EntropyReport r;
    r.style_entropy = shannon_entropy(policy.style_probs());
    for (int op = 0; op < kNumOpKinds; ++op) {
        r.offset_entropy[op] = shannon_entropy(policy.offset_probs(static_cast<OpKind>(op)));
    }
    return r;
}

double label_loglik(const ToyPolicy& policy, std::span<const StepLabel> labels) {
    double ll = 0.0;
    auto style_p = policy.style_probs();
    for (const StepLabel& lab : labels) {
        int off = offset_index(lab.delta);
        if (off < 0) throw SetUnscorableError("label_loglik: offset outside alphabet");
        ll += std::log(style_p[static_cast<int>(lab.style)]);
        ll += std::log(policy.offset_probs(lab.op)[off]);
    }
    return ll;
}

PolicyGradient label_loglik_grad(const ToyPolicy& policy, std::span<const StepLabel> labels) {
    PolicyGradient g;
    auto style_p = policy.style_probs();
    for (const StepLabel& lab : labels) {
        int off = offset_index(lab.delta);
        if (off < 0) throw SetUnscorableError("label_loglik_grad: offset outside alphabet");
        // d/dtheta_j log p_i = [i == j] - p_j
        for (int s = 0; s < kNumStyles; ++s) {
            g.theta_style[s] += (s == static_cast<int>(lab.style) ? 1.0 : 0.0) - style_p[s];
        }
        auto off_p = policy.offset_probs(lab.op);
        int op = static_cast<int>(lab.op);
        for (int i = 0; i < kNumOffsets; ++i) {
            g.theta_offset[op][i] += (i == off ? 1.0 : 0.0) - off_p[i];
        }
    }
    return g;
}

ToyPolicy sft_update(const ToyPolicy& policy, const std::vector<SftExample>& examples,
                     const SftConfig& cfg, int* skipped) {
    if (examples.empty()) throw NoDataError("sft_update: empty dataset");
    int skip_count = 0;
    ToyPolicy out = policy;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::size_t i = 0;
        while (i < examples.size()) {
            std::size_t end = std::min(i + static_cast<std::size_t>(cfg.batch), examples.size());
            PolicyGradient batch_grad;
            std::size_t used = 0;  // labels, not examples: per-decision mean loss
            for (std::size_t j = i; j < end; ++j) {
                if (examples[j].labels.empty()) {
                    if (epoch == 0) ++skip_count;
                    continue;
                }
                batch_grad.add(label_loglik_grad(out, examples[j].labels));
                used += examples[j].labels.size();
            }
            if (used > 0) {
                double scale = cfg.lr / static_cast<double>(used);
                for (int op = 0; op < kNumOpKinds; ++op) {
                    for (int k = 0; k < kNumOffsets; ++k) {
                        out.theta_offset[op][k] += scale * batch_grad.theta_offset[op][k];
                    }
                }
                for (int s = 0; s < kNumStyles; ++s) {
                    out.theta_style[s] += scale * batch_grad.theta_style[s];
                }
            }
            i = end;
        }
    }
    if (skipped) *skipped = skip_count;
    out.version = policy.version + 1;
    return out;
}

void RolloutGroup::compute_advantages() {
    advantages.assign(rewards.size(), 0.0);
    if (rewards.empty()) return;
    double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) /
                  static_cast<double>(rewards.size());
    for (std::size_t i = 0; i < rewards.size(); ++i) advantages[i] = rewards[i] - mean;
}

PolicyGradient pg_gradient(const ToyPolicy& policy, const std::vector<RolloutGroup>& groups,
                           const ProblemIndex& problems) {
    PolicyGradient g;
    int total = 0;
    for (const RolloutGroup& group : groups) {
        if (group.trajectories.size() < 2) {
            throw GroupSizeError("pg_gradient: group size must be >= 2");
        }
        total += static_cast<int>(group.trajectories.size());
    }
    for (const RolloutGroup& group : groups) {
        const ToyProblem* problem = find_problem(problems, group.problem_id);
        if (!problem) throw ConfigError("pg_gradient: unknown problem " + group.problem_id);
        for (std::size_t i = 0; i < group.trajectories.size(); ++i) {
            double adv = group.advantages[i];
            if (adv == 0.0) continue;
            const Trajectory& traj = group.trajectories[i];
            auto labels = trajectory_labels(*problem, traj.steps);
            if (!labels) continue;
            std::span<const StepLabel> sampled(
                labels->data() + traj.gen_meta.conditioned_steps,
                labels->size() - static_cast<std::size_t>(traj.gen_meta.conditioned_steps));
            g.add(label_loglik_grad(policy, sampled), adv);
        }
    }
    if (total > 0) {
        PolicyGradient scaled;
        scaled.add(g, 1.0 / total);
        return scaled;
    }
    return g;
}

ToyPolicy pg_update(const ToyPolicy& policy, const std::vector<RolloutGroup>& groups,
                    const PgConfig& cfg, const ProblemIndex& problems) {
    PolicyGradient g = pg_gradient(policy, groups, problems);
    ToyPolicy out = policy;
    for (int op = 0; op < kNumOpKinds; ++op) {
        for (int i = 0; i < kNumOffsets; ++i) {
            out.theta_offset[op][i] += cfg.lr * g.theta_offset[op][i];
        }
    }
    for (int s = 0; s < kNumStyles; ++s) out.theta_style[s] += cfg.lr * g.theta_style[s];
    out.version = policy.version + 1;
    return out;
}

std::string policy_to_json(const ToyPolicy& policy) {
    nlohmann::json j;
    j["version"] = policy.version;
    j["theta_offset"] = policy.theta_offset;
    j["theta_style"] = policy.theta_style;
    return j.dump();
}

ToyPolicy policy_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    ToyPolicy p;
    p.version = j.at("version").get<int>();
    auto off = j.at("theta_offset");
    for (int op = 0; op < kNumOpKinds; ++op) {
        for (int i = 0; i < kNumOffsets; ++i) p.theta_offset[op][i] = off.at(op).at(i);
    }
    auto style = j.at("theta_style");
    for (int s = 0; s < kNumStyles; ++s) p.theta_style[s] = style.at(s);
    return p;
}

}  // namespace intv
