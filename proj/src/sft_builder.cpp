#include "intv/sft_builder.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include <json.hpp>

#include "intv/errors.hpp"
#include "intv/jsonl.hpp"
#include "intv/policy.hpp"

namespace intv {

std::vector<SftExample> build_dataset(const std::vector<Trajectory>& rollouts,
                                      const std::vector<std::string>& rollout_ids,
                                      const std::vector<Intervention>& interventions,
                                      const std::vector<VerifyReport>& verify_reports,
                                      const SftBuildConfig& config,
                                      const ProblemIndex& problems) {
    if (rollouts.size() != rollout_ids.size()) {
        throw ConfigError("build_dataset: rollouts and ids length mismatch");
    }
    std::map<std::string, const Trajectory*> traj_by_id;
    for (std::size_t i = 0; i < rollouts.size(); ++i) traj_by_id[rollout_ids[i]] = &rollouts[i];
    std::map<std::string, const VerifyReport*> report_by_id;
    for (const VerifyReport& r : verify_reports) report_by_id[r.trajectory_id] = &r;

    // Output ordering is byte-deterministic: problem_id, then t*.
    std::vector<Intervention> ordered = interventions;
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const Intervention& a, const Intervention& b) {
                         if (a.problem_id != b.problem_id) return a.problem_id < b.problem_id;
                         return a.t_star < b.t_star;
                     });

    std::vector<SftExample> out;
    for (const Intervention& interv : ordered) {
        if (!interv.kept) continue;
        auto traj_it = traj_by_id.find(interv.trajectory_id);
        if (traj_it == traj_by_id.end()) {
            throw DanglingInterventionError("build_dataset: no source rollout for " +
                                            interv.trajectory_id);
        }
        const Trajectory& traj = *traj_it->second;
        const VerifyReport* report = nullptr;
        if (auto it = report_by_id.find(interv.trajectory_id); it != report_by_id.end()) {
            report = it->second;
        }
        if (config.filtered) {
            if (!report) {
                throw ConfigError("build_dataset: filtering requires a verify report for " +
                                  interv.trajectory_id);
            }
            if (report->c == 0) continue;
        }
        SftExample ex;
        ex.problem_id = interv.problem_id;
        ex.config = config;
        std::vector<std::string> target_steps;
        if (config.include_prefix) {
            target_steps.assign(traj.steps.begin(), traj.steps.begin() + interv.t_star);
        }
        target_steps.push_back(interv.content);
        if (config.include_suffix) {
            if (report && !report->success_suffix.empty()) {
                target_steps.insert(target_steps.end(), report->success_suffix.begin(),
                                    report->success_suffix.end());
                ex.suffix_source = "stored";
            } else {
                ex.suffix_source = "none_available";
            }
        }
        ex.target = join_steps(target_steps);
        const ToyProblem* toy = find_problem(problems, interv.problem_id);
        if (toy) {
            ex.prompt = toy->to_problem().prompt;
            if (config.include_prefix) {
                // Prefix starts at the chain head, so labels parse directly.
                if (auto labels = trajectory_labels(*toy, target_steps)) ex.labels = *labels;
            } else {
                // The lone intervention step sits mid-chain; recover its label
                // by parsing at position t*+1 with the correct previous value.
                int prev = interv.t_star == 0 ? toy->v0
                                              : toy->reference_values[interv.t_star - 1];
                try {
                    StepEmission e = parse_step(*toy, interv.t_star + 1, prev, interv.content);
                    ex.labels.push_back({e.style, e.delta, toy->ops[interv.t_star].kind});
                } catch (const ParseError&) {
                    // Unlabelable example: counted by sft_update as a skip.
                }
            }
        }
        out.push_back(std::move(ex));
    }
    return out;
}

std::size_t emit_sft_jsonl(const std::vector<SftExample>& examples, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw WriteError("emit_sft_jsonl: cannot open " + path);
    for (const SftExample& ex : examples) {
        f << sft_example_to_json(ex).dump() << "\n";
        if (!f) throw WriteError("emit_sft_jsonl: write failed for " + path);
    }
    return examples.size();
}

}  // namespace intv
