#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "intv/errors.hpp"
#include "intv/jsonl.hpp"
#include "intv/metrics.hpp"
#include "intv/policy.hpp"
#include "intv/rl_loop.hpp"
#include "intv/rollout_engine.hpp"
#include "intv/sft_builder.hpp"
#include "intv/toy_env.hpp"
#include "intv/verifier.hpp"

using nlohmann::json;
using namespace intv;

namespace {

struct LoadedProblems {
    std::vector<Problem> problems;
    ProblemIndex toys;
    JsonlHeader header;
};

LoadedProblems load_problems(const std::string& path) {
    LoadedProblems out;
    auto [header, records] = read_jsonl(path, kSchemaProblem);
    out.header = header;
    for (const json& rec : records) {
        ToyProblem toy;
        out.problems.push_back(problem_from_json(rec, &toy));
        if (!toy.id.empty()) out.toys.push_back(std::move(toy));
    }
    return out;
}

struct LoadedTrajectories {
    std::vector<Trajectory> trajs;
    std::vector<std::string> ids;
    JsonlHeader header;
};

LoadedTrajectories load_trajectories(const std::string& path) {
    LoadedTrajectories out;
    auto [header, records] = read_jsonl(path, kSchemaTrajectory);
    out.header = header;
    for (const json& rec : records) {
        std::string id;
        out.trajs.push_back(trajectory_from_json(rec, &id));
        out.ids.push_back(std::move(id));
    }
    return out;
}

std::vector<Intervention> load_interventions(const std::string& path) {
    std::vector<Intervention> out;
    auto [header, records] = read_jsonl(path, kSchemaIntervention);
    for (const json& rec : records) out.push_back(intervention_from_json(rec));
    return out;
}

std::vector<VerifyReport> load_verify_reports(const std::string& path) {
    std::vector<VerifyReport> out;
    auto [header, records] = read_jsonl(path, kSchemaVerify);
    for (const json& rec : records) out.push_back(verify_report_from_json(rec));
    return out;
}

std::vector<SftExample> load_sft(const std::string& path) {
    std::vector<SftExample> out;
    auto [header, records] = read_jsonl(path, kSchemaSft);
    for (const json& rec : records) out.push_back(sft_example_from_json(rec));
    return out;
}

ToyPolicy load_policy(const std::string& path) {
    if (path.empty()) return ToyPolicy::base();
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open policy file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return policy_from_json(text);
}

void save_policy(const ToyPolicy& policy, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw WriteError("cannot open for writing: " + path);
    out << policy_to_json(policy) << "\n";
    if (!out) throw WriteError("write failed: " + path);
}

void save_text(const std::string& text, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw WriteError("cannot open for writing: " + path);
    out << text;
    if (!out) throw WriteError("write failed: " + path);
}

// ---- gen-toy -------------------------------------------------------------

struct GenToyOpts {
    std::uint64_t seed = 1;
    int m = 17;
    int k = 8;
    int count = 100;
    bool filter_hard = false;
    int filter_n = 64;
    std::string policy_path;
    std::string out;
};

void cmd_gen_toy(const GenToyOpts& o) {
    ToyConfig cfg;
    cfg.modulus = o.m;
    cfg.k = o.k;
    ToyPolicy policy = load_policy(o.policy_path);
    std::vector<json> records;
    int produced = 0;
    const long long max_attempts = static_cast<long long>(o.count) * 500 + 1000;
    for (long long attempt = 0; produced < o.count; ++attempt) {
        if (attempt >= max_attempts) {
            throw NoDataError("gen-toy: could not find enough hard problems");
        }
        ToyProblem toy = gen_problem(derive_seed(o.seed, static_cast<std::uint64_t>(attempt)),
                                     cfg);
        if (o.filter_hard) {
            ProblemIndex index{toy};
            ToyBackend backend(policy, index);
            std::vector<Problem> kept = difficulty_filter(
                backend, {toy.to_problem()}, o.filter_n,
                derive_seed(o.seed, 0x10000000ull + static_cast<std::uint64_t>(attempt)));
            if (kept.empty()) continue;
        }
        records.push_back(problem_to_json(toy.to_problem(), &toy));
        ++produced;
    }
    JsonlHeader header;
    header.schema_version = kSchemaProblem;
    header.seed = o.seed;
    header.config_hash = stable_hash(json{{"m", o.m}, {"k", o.k}, {"count", o.count},
                                          {"filter_hard", o.filter_hard},
                                          {"filter_n", o.filter_n}}.dump());
    write_jsonl(o.out, header, records);
}

// ---- collect -------------------------------------------------------------

struct CollectOpts {
    std::string backend = "toy";
    std::string mode = "none";
    int n = 8;
    std::uint64_t seed = 1;
    std::string in;
    std::string out;
    std::string policy_path;
    bool filter_hard = false;
    int filter_n = 64;
};

void cmd_collect(const CollectOpts& o) {
    if (o.backend != "toy") {
        throw ConfigError("collect: only the toy backend is available offline");
    }
    ConditioningMode mode = conditioning_mode_from_string(o.mode);
    if (mode != ConditioningMode::none && mode != ConditioningMode::hint) {
        throw ConfigError("collect: conditioning mode '" + o.mode +
                          "' requires a source trajectory; use the report/table1 path");
    }
    LoadedProblems loaded = load_problems(o.in);
    ToyPolicy policy = load_policy(o.policy_path);
    ToyBackend backend(policy, loaded.toys);

    std::vector<Problem> problems = loaded.problems;
    if (o.filter_hard) {
        problems = difficulty_filter(backend, problems, o.filter_n,
                                     derive_seed(o.seed, 0x20000000ull));
    }

    std::vector<json> records;
    for (std::size_t pi = 0; pi < problems.size(); ++pi) {
        const Problem& p = problems[pi];
        std::string conditioning;
        if (mode == ConditioningMode::hint) {
            const ToyProblem* toy = find_problem(loaded.toys, p.id);
            if (!toy) throw ConfigError("collect: no toy payload for " + p.id);
            std::mt19937_64 hint_rng(derive_seed(o.seed, 0x30000000ull + pi));
            conditioning = join_steps(make_hint(*toy, hint_rng));
        }
        RolloutGroup g = collect_group(backend, p, o.n, mode, conditioning,
                                       derive_seed(o.seed, pi));
        for (int i = 0; i < o.n; ++i) {
            records.push_back(trajectory_to_json(g.trajectories[i],
                                                 p.id + "/r" + std::to_string(i)));
        }
    }
    JsonlHeader header;
    header.schema_version = kSchemaTrajectory;
    header.seed = o.seed;
    header.config_hash = stable_hash(json{{"mode", o.mode}, {"n", o.n},
                                          {"filter_hard", o.filter_hard},
                                          {"filter_n", o.filter_n}}.dump());
    write_jsonl(o.out, header, records);
}

// ---- propose -------------------------------------------------------------

struct ProposeOpts {
    std::string proposer = "oracle";
    std::string in;        // trajectory JSONL
    std::string problems;
    std::string out;
    std::uint64_t seed = 1;
    std::string policy_path;
};

void cmd_propose(const ProposeOpts& o) {
    LoadedProblems loaded = load_problems(o.problems);
    LoadedTrajectories trajs = load_trajectories(o.in);
    ToyPolicy policy = load_policy(o.policy_path);

    std::vector<json> records;
    for (std::size_t i = 0; i < trajs.trajs.size(); ++i) {
        const Trajectory& t = trajs.trajs[i];
        if (t.reward != 0) continue;
        const ToyProblem* toy = find_problem(loaded.toys, t.problem_id);
        if (!toy) throw ConfigError("propose: no toy payload for " + t.problem_id);
        std::mt19937_64 rng(derive_seed(o.seed, i));
        Intervention iv;
        try {
            if (o.proposer == "oracle") {
                iv = propose_oracle(*toy, t, trajs.ids[i], policy, rng);
            } else if (o.proposer == "llm" || o.proposer == "llm-no-ref") {
                iv = propose_policy(*toy, t, trajs.ids[i], policy, rng);
                if (o.proposer == "llm-no-ref") iv.proposer = Proposer::llm_no_reference;
            } else {
                throw ConfigError("propose: unknown proposer " + o.proposer);
            }
        } catch (const NoErrorFoundError&) {
            iv.problem_id = t.problem_id;
            iv.trajectory_id = trajs.ids[i];
            iv.kept = false;
            iv.discard_reason = DiscardReason::no_error_found;
            records.push_back(intervention_to_json(iv));
            continue;
        }
        iv = leak_filter(std::move(iv), toy->to_problem());
        records.push_back(intervention_to_json(iv));
    }
    JsonlHeader header;
    header.schema_version = kSchemaIntervention;
    header.seed = o.seed;
    header.config_hash = stable_hash(json{{"proposer", o.proposer}}.dump());
    header.template_hash = std::to_string(
        PromptTemplate::builtin(o.proposer == "llm-no-ref"
                                    ? TemplateName::intervention_no_ref
                                    : TemplateName::intervention_with_ref).hash());
    write_jsonl(o.out, header, records);
}

// ---- verify --------------------------------------------------------------

struct VerifyOpts {
    int n = 32;
    std::string in;  // intervention JSONL
    std::string problems;
    std::string traj;
    std::string out;
    std::uint64_t seed = 1;
    std::string policy_path;
};

void cmd_verify(const VerifyOpts& o) {
    LoadedProblems loaded = load_problems(o.problems);
    LoadedTrajectories trajs = load_trajectories(o.traj);
    std::vector<Intervention> interventions = load_interventions(o.in);
    ToyPolicy policy = load_policy(o.policy_path);
    ToyBackend backend(policy, loaded.toys);

    std::map<std::string, const Trajectory*> by_id;
    for (std::size_t i = 0; i < trajs.trajs.size(); ++i) by_id[trajs.ids[i]] = &trajs.trajs[i];

    std::vector<json> records;
    for (std::size_t i = 0; i < interventions.size(); ++i) {
        const Intervention& iv = interventions[i];
        if (!iv.kept) continue;
        auto it = by_id.find(iv.trajectory_id);
        if (it == by_id.end()) {
            throw DanglingInterventionError("verify: missing trajectory " + iv.trajectory_id);
        }
        const ToyProblem* toy = find_problem(loaded.toys, iv.problem_id);
        if (!toy) throw ConfigError("verify: no toy payload for " + iv.problem_id);
        VerifyReport rep = verify_intervention(backend, toy->to_problem(), *it->second, iv,
                                               o.n, derive_seed(o.seed, i));
        records.push_back(verify_report_to_json(rep));
    }
    JsonlHeader header;
    header.schema_version = kSchemaVerify;
    header.seed = o.seed;
    header.config_hash = stable_hash(json{{"n", o.n}}.dump());
    write_jsonl(o.out, header, records);
}

// ---- build-sft -----------------------------------------------------------

struct BuildSftOpts {
    std::string problems;
    std::string traj;
    std::string interventions;
    std::string verify;
    std::string out;
    bool prefix = true;
    bool suffix = false;
    bool filter = true;
};

void cmd_build_sft(const BuildSftOpts& o) {
    LoadedProblems loaded = load_problems(o.problems);
    LoadedTrajectories trajs = load_trajectories(o.traj);
    std::vector<Intervention> interventions = load_interventions(o.interventions);
    std::vector<VerifyReport> reports;
    if (!o.verify.empty()) reports = load_verify_reports(o.verify);

    SftBuildConfig cfg;
    cfg.include_prefix = o.prefix;
    cfg.include_suffix = o.suffix;
    cfg.filtered = o.filter;
    std::vector<SftExample> ds = build_dataset(trajs.trajs, trajs.ids, interventions, reports,
                                               cfg, loaded.toys);
    std::vector<json> records;
    for (const SftExample& ex : ds) records.push_back(sft_example_to_json(ex));
    JsonlHeader header;
    header.schema_version = kSchemaSft;
    header.seed = trajs.header.seed;
    header.config_hash = stable_hash(json{{"prefix", o.prefix}, {"suffix", o.suffix},
                                          {"filter", o.filter}}.dump());
    write_jsonl(o.out, header, records);
}

// ---- patch ---------------------------------------------------------------

struct PatchOpts {
    std::string sft;
    std::string policy_in;
    std::string out;
    int epochs = 4;
    double lr = 0.5;
    int batch = 32;
};

void cmd_patch(const PatchOpts& o) {
    std::vector<SftExample> ds = load_sft(o.sft);
    ToyPolicy policy = load_policy(o.policy_in);
    SftConfig cfg;
    cfg.epochs = o.epochs;
    cfg.lr = o.lr;
    cfg.batch = o.batch;
    save_policy(sft_update(policy, ds, cfg), o.out);
}

// ---- rl ------------------------------------------------------------------

struct RlOpts {
    std::string problems;
    std::string policy_in;
    std::string out;
    std::string curves;
    int iters = 200;
    int group_n = 8;
    int batch = 8;
    double lr = 0.05;
    double ema_decay = 0.9;
    std::uint64_t seed = 1;
};

void cmd_rl(const RlOpts& o) {
    LoadedProblems loaded = load_problems(o.problems);
    ToyPolicy policy = load_policy(o.policy_in);
    RlConfig cfg;
    cfg.iters = o.iters;
    cfg.group_n = o.group_n;
    cfg.batch_problems = o.batch;
    cfg.lr = o.lr;
    cfg.ema_decay = o.ema_decay;
    cfg.seed = o.seed;
    TrainResult res = train(policy, loaded.problems, loaded.toys, cfg);
    save_policy(res.policy, o.out);
    if (!o.curves.empty()) {
        std::vector<json> records;
        for (const CurvePoint& c : res.curves) {
            records.push_back(json{{"iter", c.iter}, {"reward", c.reward}, {"ema", c.ema},
                                   {"zero_adv_ratio", c.zero_adv_ratio}});
        }
        JsonlHeader header;
        header.schema_version = kSchemaCurves;
        header.seed = o.seed;
        header.config_hash = stable_hash(json{{"iters", o.iters}, {"group_n", o.group_n},
                                              {"batch", o.batch}, {"lr", o.lr},
                                              {"ema_decay", o.ema_decay}}.dump());
        write_jsonl(o.curves, header, records);
    }
}

// ---- report --------------------------------------------------------------

struct ReportOpts {
    std::string what;
    std::string problems;
    std::string traj;
    std::string policy_path;
    std::vector<std::string> sets;  // name=path for nll
    std::vector<int> ks{1, 2, 4, 8, 16};
    int n = 32;
    std::uint64_t seed = 1;
};

json report_passk(const ReportOpts& o) {
    LoadedTrajectories trajs = load_trajectories(o.traj);
    std::map<std::string, std::pair<int, int>> per_problem;  // n, c
    for (const Trajectory& t : trajs.trajs) {
        auto& [n, c] = per_problem[t.problem_id];
        ++n;
        c += t.reward;
    }
    if (per_problem.empty()) throw NoDataError("report passk: no trajectories");
    json out;
    out["problems"] = per_problem.size();
    json by_k = json::object();
    for (int k : o.ks) {
        double sum = 0.0;
        int counted = 0;
        for (const auto& [id, nc] : per_problem) {
            if (k > nc.first) continue;
            sum += pass_at_k(nc.first, nc.second, k);
            ++counted;
        }
        if (counted > 0) by_k[std::to_string(k)] = sum / counted;
    }
    out["pass_at_k"] = by_k;
    return out;
}

json report_table1(const ReportOpts& o) {
    LoadedProblems loaded = load_problems(o.problems);
    ToyPolicy policy = load_policy(o.policy_path);
    ToyBackend backend(policy, loaded.toys);
    std::vector<ConditioningMode> modes{ConditioningMode::prefix_error,
                                        ConditioningMode::prefix_intervention,
                                        ConditioningMode::hint,
                                        ConditioningMode::hint_prefix_intervention};
    Table1Result res = run_table1_suite(backend, loaded.problems, modes, o.n, o.seed);
    json out;
    out["skipped_problems"] = res.skipped_problems;
    json rows = json::object();
    for (const auto& [mode, r] : res.per_mode) {
        rows[to_string(mode)] = json{{"coverage", r.coverage},
                                     {"total_problems", r.total_problems},
                                     {"accuracy", r.accuracy}};
    }
    out["modes"] = rows;
    return out;
}

json report_nll(const ReportOpts& o) {
    LoadedProblems loaded = load_problems(o.problems);
    ToyPolicy policy = load_policy(o.policy_path);
    std::vector<std::pair<std::string, std::vector<Trajectory>>> sets;
    for (const std::string& spec : o.sets) {
        auto eq = spec.find('=');
        if (eq == std::string::npos) throw ConfigError("report nll: --set needs name=path");
        sets.push_back({spec.substr(0, eq),
                        load_trajectories(spec.substr(eq + 1)).trajs});
    }
    if (sets.empty()) throw ConfigError("report nll: at least one --set required");
    json out = json::array();
    for (const NllSetReport& rep : nll_report(policy, loaded.toys, sets)) {
        out.push_back(json{{"name", rep.name}, {"mean", rep.mean}, {"stderr", rep.stderr_},
                           {"traces", rep.traces}, {"unscorable", rep.unscorable}});
    }
    return json{{"sets", out}};
}

json report_entropy(const ReportOpts& o) {
    ToyPolicy policy = load_policy(o.policy_path);
    EntropyReport rep = entropy(policy);
    return json{{"style_entropy", rep.style_entropy},
                {"offset_entropy", {rep.offset_entropy[0], rep.offset_entropy[1],
                                    rep.offset_entropy[2]}}};
}

json report_errloc(const ReportOpts& o) {
    LoadedProblems loaded = load_problems(o.problems);
    LoadedTrajectories trajs = load_trajectories(o.traj);
    std::vector<LocatedError> errors;
    for (const Trajectory& t : trajs.trajs) {
        if (t.reward != 0) continue;
        const ToyProblem* toy = find_problem(loaded.toys, t.problem_id);
        if (!toy) continue;
        auto t_star = first_error_oracle(*toy, t);
        if (t_star) errors.push_back({*t_star, toy->k()});
    }
    ErrorLocationHistogram h =
        error_location_histogram(errors, {0.0, 10.0, 20.0, 30.0, 40.0, 50.0});
    return json{{"total", h.total},
                {"counts", h.counts},
                {"bucket_edges", h.bucket_edges},
                {"fraction_counts", h.fraction_counts},
                {"frac_beyond_50", h.frac_beyond_50}};
}

json report_lengths(const ReportOpts& o) {
    LoadedTrajectories trajs = load_trajectories(o.traj);
    std::vector<std::vector<std::string>> items;
    for (const Trajectory& t : trajs.trajs) items.push_back(t.steps);
    LengthStats s = length_stats(items);
    json out{{"count", s.count}};
    auto put = [&](const char* key, const std::optional<double>& v) {
        if (v) out[key] = *v;
    };
    put("mean_steps", s.mean_steps);
    put("median_steps", s.median_steps);
    put("p95_steps", s.p95_steps);
    put("mean_chars", s.mean_chars);
    put("median_chars", s.median_chars);
    put("p95_chars", s.p95_chars);
    return out;
}

void cmd_report(const ReportOpts& o) {
    json out;
    if (o.what == "passk") out = report_passk(o);
    else if (o.what == "table1") out = report_table1(o);
    else if (o.what == "table3") {
        throw ConfigError("report table3: build the four datasets with build-sft and compare "
                          "patched policies with report passk");
    } else if (o.what == "nll") out = report_nll(o);
    else if (o.what == "entropy") out = report_entropy(o);
    else if (o.what == "errloc") out = report_errloc(o);
    else if (o.what == "lengths") out = report_lengths(o);
    else throw ConfigError("report: unknown --what " + o.what);
    std::cout << out.dump(2) << "\n";
}

// ---- e2e-toy -------------------------------------------------------------

struct E2eOpts {
    std::string config_path;
    std::string out_dir = "e2e_out";
};

json default_e2e_config() {
    return json{{"seed", 1},
                {"m", 17},
                {"k", 6},
                {"count", 30},
                {"rollout_n", 8},
                {"verify_n", 16},
                {"proposer", "llm"},
                {"sft", json{{"epochs", 4}, {"lr", 0.5}, {"batch", 32},
                             {"prefix", true}, {"suffix", false}, {"filter", true}}},
                {"rl", json{{"iters", 20}, {"group_n", 8}, {"batch", 4}, {"lr", 0.05},
                            {"ema_decay", 0.9}}}};
}

void cmd_e2e_toy(const E2eOpts& o) {
    json cfg = default_e2e_config();
    if (!o.config_path.empty()) {
        std::ifstream in(o.config_path);
        if (!in) throw ConfigError("e2e-toy: cannot open config " + o.config_path);
        json user = json::parse(in, nullptr, false);
        if (user.is_discarded()) throw ConfigError("e2e-toy: config is not valid JSON");
        cfg.update(user, true);
    }
    std::filesystem::create_directories(o.out_dir);
    auto path = [&](const char* name) {
        return (std::filesystem::path(o.out_dir) / name).string();
    };
    std::uint64_t seed = cfg["seed"].get<std::uint64_t>();

    GenToyOpts gen;
    gen.seed = seed;
    gen.m = cfg["m"];
    gen.k = cfg["k"];
    gen.count = cfg["count"];
    gen.out = path("problems.jsonl");
    cmd_gen_toy(gen);

    CollectOpts collect;
    collect.n = cfg["rollout_n"];
    collect.seed = derive_seed(seed, 1);
    collect.in = gen.out;
    collect.out = path("traj.jsonl");
    cmd_collect(collect);

    ProposeOpts propose;
    propose.proposer = cfg["proposer"];
    propose.in = collect.out;
    propose.problems = gen.out;
    propose.out = path("interventions.jsonl");
    propose.seed = derive_seed(seed, 2);
    cmd_propose(propose);

    VerifyOpts verify;
    verify.n = cfg["verify_n"];
    verify.in = propose.out;
    verify.problems = gen.out;
    verify.traj = collect.out;
    verify.out = path("verify.jsonl");
    verify.seed = derive_seed(seed, 3);
    cmd_verify(verify);

    BuildSftOpts sft;
    sft.problems = gen.out;
    sft.traj = collect.out;
    sft.interventions = propose.out;
    sft.verify = verify.out;
    sft.out = path("sft.jsonl");
    sft.prefix = cfg["sft"]["prefix"];
    sft.suffix = cfg["sft"]["suffix"];
    sft.filter = cfg["sft"]["filter"];
    cmd_build_sft(sft);

    PatchOpts patch;
    patch.sft = sft.out;
    patch.out = path("policy_sft.json");
    patch.epochs = cfg["sft"]["epochs"];
    patch.lr = cfg["sft"]["lr"];
    patch.batch = cfg["sft"]["batch"];
    cmd_patch(patch);

    RlOpts rl;
    rl.problems = gen.out;
    rl.policy_in = patch.out;
    rl.out = path("policy_rl.json");
    rl.curves = path("curves.jsonl");
    rl.iters = cfg["rl"]["iters"];
    rl.group_n = cfg["rl"]["group_n"];
    rl.batch = cfg["rl"]["batch"];
    rl.lr = cfg["rl"]["lr"];
    rl.ema_decay = cfg["rl"]["ema_decay"];
    rl.seed = derive_seed(seed, 4);
    cmd_rl(rl);

    // the manifest is the only artifact allowed to carry a timestamp
    auto now = std::chrono::system_clock::now().time_since_epoch();
    json manifest{
        {"timestamp_ms",
         std::chrono::duration_cast<std::chrono::milliseconds>(now).count()},
        {"config", cfg},
        {"config_hash", stable_hash(cfg.dump())},
        {"template_hash",
         std::to_string(PromptTemplate::builtin(TemplateName::intervention_with_ref).hash())},
        {"artifacts",
         {"problems.jsonl", "traj.jsonl", "interventions.jsonl", "verify.jsonl", "sft.jsonl",
          "policy_sft.json", "policy_rl.json", "curves.jsonl"}}};
    save_text(manifest.dump(2) + "\n", path("manifest.json"));
}

int error_exit(const std::string& type, const std::string& message, int code) {
    std::cerr << json{{"error", {{"type", type}, {"message", message}}}}.dump() << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Intervention-training pipeline for reasoning rollouts"};
    app.require_subcommand(1);

    GenToyOpts gen;
    auto* gen_cmd = app.add_subcommand("gen-toy", "Generate toy modular-arithmetic problems");
    gen_cmd->add_option("--seed", gen.seed);
    gen_cmd->add_option("--m", gen.m, "Prime modulus");
    gen_cmd->add_option("--k", gen.k, "Chain length");
    gen_cmd->add_option("--count", gen.count);
    gen_cmd->add_flag("--filter-hard", gen.filter_hard, "Keep only never-solved problems");
    gen_cmd->add_option("--filter-n", gen.filter_n);
    gen_cmd->add_option("--policy", gen.policy_path);
    gen_cmd->add_option("--out", gen.out)->required();

    CollectOpts collect;
    auto* collect_cmd = app.add_subcommand("collect", "Sample rollouts for each problem");
    collect_cmd->add_option("--backend", collect.backend);
    collect_cmd->add_option("--mode", collect.mode, "Conditioning mode");
    collect_cmd->add_option("--n", collect.n);
    collect_cmd->add_option("--seed", collect.seed);
    collect_cmd->add_option("--in", collect.in)->required();
    collect_cmd->add_option("--out", collect.out)->required();
    collect_cmd->add_option("--policy", collect.policy_path);
    collect_cmd->add_flag("--filter-hard", collect.filter_hard);
    collect_cmd->add_option("--filter-n", collect.filter_n);

    ProposeOpts propose;
    auto* propose_cmd = app.add_subcommand("propose", "Propose single-step interventions");
    propose_cmd->add_option("--proposer", propose.proposer, "oracle, llm, or llm-no-ref");
    propose_cmd->add_option("--in", propose.in, "Trajectory JSONL")->required();
    propose_cmd->add_option("--problems", propose.problems)->required();
    propose_cmd->add_option("--out", propose.out)->required();
    propose_cmd->add_option("--seed", propose.seed);
    propose_cmd->add_option("--policy", propose.policy_path);

    VerifyOpts verify;
    auto* verify_cmd = app.add_subcommand("verify", "Filter interventions by continuation success");
    verify_cmd->add_option("--n", verify.n, "Continuations per intervention");
    verify_cmd->add_option("--in", verify.in, "Intervention JSONL")->required();
    verify_cmd->add_option("--problems", verify.problems)->required();
    verify_cmd->add_option("--traj", verify.traj)->required();
    verify_cmd->add_option("--out", verify.out)->required();
    verify_cmd->add_option("--seed", verify.seed);
    verify_cmd->add_option("--policy", verify.policy_path);

    BuildSftOpts sft;
    auto* sft_cmd = app.add_subcommand("build-sft", "Assemble the SFT dataset");
    sft_cmd->add_option("--problems", sft.problems)->required();
    sft_cmd->add_option("--traj", sft.traj)->required();
    sft_cmd->add_option("--interventions", sft.interventions)->required();
    sft_cmd->add_option("--verify", sft.verify);
    sft_cmd->add_option("--out", sft.out)->required();
    sft_cmd->add_flag("--prefix,!--no-prefix", sft.prefix);
    sft_cmd->add_flag("--suffix,!--no-suffix", sft.suffix);
    sft_cmd->add_flag("--filter,!--no-filter", sft.filter);

    PatchOpts patch;
    auto* patch_cmd = app.add_subcommand("patch", "Supervised update from the SFT dataset");
    patch_cmd->add_option("--sft", patch.sft)->required();
    patch_cmd->add_option("--policy-in", patch.policy_in);
    patch_cmd->add_option("--out", patch.out)->required();
    patch_cmd->add_option("--epochs", patch.epochs);
    patch_cmd->add_option("--lr", patch.lr);
    patch_cmd->add_option("--batch", patch.batch);

    RlOpts rl;
    auto* rl_cmd = app.add_subcommand("rl", "Outcome-reward RL on the toy backend");
    rl_cmd->add_option("--problems", rl.problems)->required();
    rl_cmd->add_option("--policy-in", rl.policy_in);
    rl_cmd->add_option("--out", rl.out)->required();
    rl_cmd->add_option("--curves", rl.curves);
    rl_cmd->add_option("--iters", rl.iters);
    rl_cmd->add_option("--group-n", rl.group_n);
    rl_cmd->add_option("--batch", rl.batch);
    rl_cmd->add_option("--lr", rl.lr);
    rl_cmd->add_option("--ema-decay", rl.ema_decay);
    rl_cmd->add_option("--seed", rl.seed);

    ReportOpts report;
    auto* report_cmd = app.add_subcommand("report", "Summaries over pipeline artifacts");
    report_cmd->add_option("--what", report.what)->required();
    report_cmd->add_option("--problems", report.problems);
    report_cmd->add_option("--traj", report.traj);
    report_cmd->add_option("--policy", report.policy_path);
    report_cmd->add_option("--set", report.sets, "name=path trajectory sets (nll)");
    report_cmd->add_option("--k", report.ks, "k values for passk");
    report_cmd->add_option("--n", report.n);
    report_cmd->add_option("--seed", report.seed);

    E2eOpts e2e;
    auto* e2e_cmd = app.add_subcommand("e2e-toy", "Full pipeline on the toy environment");
    e2e_cmd->add_option("--config", e2e.config_path);
    e2e_cmd->add_option("--out-dir", e2e.out_dir);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return error_exit("UsageError", e.what(), 1);
    }

    try {
        if (*gen_cmd) cmd_gen_toy(gen);
        else if (*collect_cmd) cmd_collect(collect);
        else if (*propose_cmd) cmd_propose(propose);
        else if (*verify_cmd) cmd_verify(verify);
        else if (*sft_cmd) cmd_build_sft(sft);
        else if (*patch_cmd) cmd_patch(patch);
        else if (*rl_cmd) cmd_rl(rl);
        else if (*report_cmd) cmd_report(report);
        else if (*e2e_cmd) cmd_e2e_toy(e2e);
    } catch (const ConfigError& e) {
        return error_exit("ConfigError", e.what(), 1);
    } catch (const SchemaError& e) {
        return error_exit("SchemaError", e.what(), 1);
    } catch (const DomainError& e) {
        return error_exit("DomainError", e.what(), 1);
    } catch (const Error& e) {
        return error_exit("RuntimeError", e.what(), 2);
    } catch (const std::exception& e) {
        return error_exit("InternalError", e.what(), 2);
    }
    return 0;
}
