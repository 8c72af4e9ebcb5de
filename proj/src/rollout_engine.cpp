#include "intv/rollout_engine.hpp"

#include <random>

#include "intv/errors.hpp"
#include "intv/verifier.hpp"

namespace intv {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    // splitmix64 over the combined value
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

ToyBackend::ToyBackend(ToyPolicy policy, ProblemIndex problems)
    : policy_(std::move(policy)), problems_(std::move(problems)) {}

Trajectory ToyBackend::sample(const Problem& problem, const std::string& conditioning,
                              std::uint64_t seed) {
    const ToyProblem* toy = find_problem(problems_, problem.id);
    if (!toy) throw ConfigError("ToyBackend: unknown problem " + problem.id);
    std::mt19937_64 rng(seed);
    Trajectory traj = rollout(policy_, *toy, conditioning, rng);
    traj.gen_meta.seed = seed;
    traj.gen_meta.backend = id();
    return traj;
}

RolloutGroup collect_group(RolloutBackend& backend, const Problem& problem, int n,
                           ConditioningMode mode, const std::string& conditioning,
                           std::uint64_t seed) {
    if (n < 1) throw ConfigError("collect_group: n must be >= 1");
    RolloutGroup group;
    group.problem_id = problem.id;
    group.mode = mode;
    try {
        for (int i = 0; i < n; ++i) {
            Trajectory traj = backend.sample(problem, conditioning, derive_seed(seed, i));
            traj.gen_meta.conditioning = mode;
            group.rewards.push_back(traj.reward);
            group.trajectories.push_back(std::move(traj));
        }
    } catch (const ConditioningError&) {
        throw;
    } catch (const Error& e) {
        // Partial groups bias the mean baseline; reject the whole group.
        throw GroupCollectError(std::string("collect_group: ") + e.what());
    }
    group.compute_advantages();
    return group;
}

std::vector<Problem> difficulty_filter(RolloutBackend& backend,
                                       const std::vector<Problem>& problems, int n,
                                       std::uint64_t seed,
                                       std::vector<DifficultyRecord>* audit) {
    std::vector<Problem> hard;
    for (std::size_t p = 0; p < problems.size(); ++p) {
        int c = 0;
        std::uint64_t pseed = derive_seed(seed, p);
        for (int i = 0; i < n; ++i) {
            Trajectory traj = backend.sample(problems[p], "", derive_seed(pseed, i));
            c += traj.reward;
        }
        if (audit) audit->push_back({problems[p].id, n, c});
        if (c == 0) hard.push_back(problems[p]);
    }
    return hard;
}

VerifyReport verify_intervention(RolloutBackend& backend, const Problem& problem,
                                 const Trajectory& traj, const Intervention& intervention,
                                 int n, std::uint64_t seed) {
    VerifyReport report;
    report.problem_id = problem.id;
    report.trajectory_id = intervention.trajectory_id;
    report.t_star = intervention.t_star;
    report.n = n;
    std::string conditioning =
        compose_conditioned_prefix(traj, intervention.t_star, intervention.content);
    for (int i = 0; i < n; ++i) {
        Trajectory cont;
        try {
            cont = backend.sample(problem, conditioning, derive_seed(seed, i));
        } catch (const ConditioningError&) {
            report.c = 0;
            report.kept = false;
            return report;
        }
        if (cont.reward == 1) {
            if (report.c == 0) {
                report.success_suffix.assign(cont.steps.begin() + intervention.t_star + 1,
                                             cont.steps.end());
            }
            ++report.c;
        }
    }
    report.kept = report.c >= 1;
    return report;
}

namespace {

struct InterventionSource {
    Trajectory traj;
    Intervention interv;
};

// Searches failed rollouts whose oracle intervention survives the leak
// filter and keeps the one with the latest first error: intervening as late
// as possible preserves the most of the model's own work.
std::optional<InterventionSource> find_source(ToyBackend& backend, const Problem& problem,
                                              const ToyProblem& toy,
                                              const std::string& conditioning,
                                              std::uint64_t seed, int max_attempts) {
    std::optional<InterventionSource> best;
    for (int a = 0; a < max_attempts; ++a) {
        Trajectory traj = backend.sample(problem, conditioning, derive_seed(seed, a));
        if (traj.reward != 0) continue;
        std::mt19937_64 rng(derive_seed(seed, 1000 + a));
        Intervention interv;
        try {
            interv = propose_oracle(toy, traj, problem.id + "#" + std::to_string(a),
                                    backend.policy(), rng);
        } catch (const NoErrorFoundError&) {
            continue;
        }
        interv = leak_filter(std::move(interv), problem);
        if (!interv.kept) continue;
        if (!best || interv.t_star > best->interv.t_star) {
            best = InterventionSource{std::move(traj), std::move(interv)};
        }
    }
    return best;
}

}  // namespace

Table1Result run_table1_suite(ToyBackend& backend, const std::vector<Problem>& problems,
                              const std::vector<ConditioningMode>& modes, int n,
                              std::uint64_t seed) {
    Table1Result result;
    bool needs_plain = false;
    bool needs_hint_interv = false;
    bool needs_hint = false;
    for (ConditioningMode m : modes) {
        if (m == ConditioningMode::prefix || m == ConditioningMode::prefix_error ||
            m == ConditioningMode::prefix_intervention) {
            needs_plain = true;
        }
        if (m == ConditioningMode::hint_prefix_intervention) needs_hint_interv = true;
        if (m == ConditioningMode::hint || m == ConditioningMode::hint_prefix_intervention) {
            needs_hint = true;
        }
    }
    struct Tally {
        int covered = 0;
        long long correct = 0;
        long long total = 0;
    };
    std::map<ConditioningMode, Tally> tallies;
    for (std::size_t p = 0; p < problems.size(); ++p) {
        const ToyProblem* toy = find_problem(backend.problems(), problems[p].id);
        if (!toy) throw ConfigError("run_table1_suite: unknown problem " + problems[p].id);
        std::uint64_t pseed = derive_seed(seed, p);

        std::optional<InterventionSource> plain;
        if (needs_plain) {
            plain = find_source(backend, problems[p], *toy, "", derive_seed(pseed, 1), 16);
        }
        std::string hint_text;
        if (needs_hint) {
            std::mt19937_64 hint_rng(derive_seed(pseed, 2));
            hint_text = join_steps(make_hint(*toy, hint_rng));
        }
        std::optional<InterventionSource> hinted;
        if (needs_hint_interv) {
            hinted = find_source(backend, problems[p], *toy, hint_text, derive_seed(pseed, 3), 16);
        }
        if ((needs_plain && !plain) || (needs_hint_interv && !hinted)) {
            ++result.skipped_problems;
            continue;
        }

        for (std::size_t mi = 0; mi < modes.size(); ++mi) {
            ConditioningMode mode = modes[mi];
            std::string conditioning;
            switch (mode) {
                case ConditioningMode::none:
                    break;
                case ConditioningMode::prefix:
                    conditioning = compose_conditioned_prefix(plain->traj, plain->interv.t_star,
                                                              std::nullopt);
                    break;
                case ConditioningMode::prefix_error:
                    conditioning = compose_conditioned_prefix(
                        plain->traj, plain->interv.t_star,
                        plain->traj.steps[plain->interv.t_star]);
                    break;
                case ConditioningMode::prefix_intervention:
                    conditioning = compose_conditioned_prefix(plain->traj, plain->interv.t_star,
                                                              plain->interv.content);
                    break;
                case ConditioningMode::hint:
                    conditioning = hint_text;
                    break;
                case ConditioningMode::hint_prefix_intervention:
                    conditioning = compose_conditioned_prefix(hinted->traj, hinted->interv.t_star,
                                                              hinted->interv.content);
                    break;
            }
            int correct = 0;
            std::uint64_t mseed = derive_seed(pseed, 100 + mi);
            for (int i = 0; i < n; ++i) {
                Trajectory traj = backend.sample(problems[p], conditioning, derive_seed(mseed, i));
                correct += traj.reward;
            }
            Tally& t = tallies[mode];
            t.correct += correct;
            t.total += n;
            if (correct > 0) ++t.covered;
        }
    }
    for (ConditioningMode mode : modes) {
        const Tally& t = tallies[mode];
        ModeResult mr;
        mr.coverage = t.covered;
        mr.total_problems = static_cast<int>(problems.size()) - result.skipped_problems;
        mr.accuracy = t.total > 0 ? static_cast<double>(t.correct) / t.total : 0.0;
        result.per_mode[mode] = mr;
    }
    return result;
}

}  // namespace intv
