#include "intv/jsonl.hpp"

#include <fstream>
#include <sstream>

#include "intv/errors.hpp"
#include "intv/policy.hpp"

namespace intv {

std::string stable_hash(const std::string& text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream out;
    out << std::hex << h;
    return out.str();
}

void write_jsonl(const std::string& path, const JsonlHeader& header,
                 const std::vector<nlohmann::json>& records) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw WriteError("write_jsonl: cannot open " + path);
    nlohmann::json h;
    h["schema_version"] = header.schema_version;
    h["config_hash"] = header.config_hash;
    h["seed"] = header.seed;
    h["template_hash"] = header.template_hash;
    f << h.dump() << "\n";
    for (const auto& r : records) f << r.dump() << "\n";
    if (!f) throw WriteError("write_jsonl: write failed for " + path);
}

std::pair<JsonlHeader, std::vector<nlohmann::json>> read_jsonl(
    const std::string& path, const std::string& expected_schema) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("read_jsonl: cannot open " + path);
    std::string line;
    if (!std::getline(f, line)) throw SchemaError("read_jsonl: missing header in " + path);
    nlohmann::json h = nlohmann::json::parse(line, nullptr, false);
    if (h.is_discarded() || !h.contains("schema_version")) {
        throw SchemaError("read_jsonl: malformed header in " + path);
    }
    JsonlHeader header;
    header.schema_version = h["schema_version"].get<std::string>();
    if (header.schema_version != expected_schema) {
        throw SchemaError("read_jsonl: expected " + expected_schema + ", found " +
                          header.schema_version + " in " + path);
    }
    header.config_hash = h.value("config_hash", "0");
    header.seed = h.value("seed", std::uint64_t{0});
    header.template_hash = h.value("template_hash", "0");
    std::vector<nlohmann::json> records;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        records.push_back(nlohmann::json::parse(line));
    }
    return {header, records};
}

nlohmann::json problem_to_json(const Problem& p, const ToyProblem* toy) {
    nlohmann::json j;
    j["id"] = p.id;
    j["prompt"] = p.prompt;
    j["reference_solution"] = p.reference_solution;
    j["answer"] = p.answer;
    j["source"] = p.source == ProblemSource::toy ? "toy" : "corpus";
    if (toy) {
        nlohmann::json ops = nlohmann::json::array();
        for (const ChainOp& op : toy->ops) {
            ops.push_back({to_string(op.kind), op.constant});
        }
        j["toy"] = {{"m", toy->modulus}, {"v0", toy->v0}, {"ops", ops}};
    }
    return j;
}

Problem problem_from_json(const nlohmann::json& j, ToyProblem* toy_out) {
    Problem p;
    p.id = j.at("id").get<std::string>();
    p.prompt = j.at("prompt").get<std::string>();
    p.reference_solution = j.at("reference_solution").get<std::string>();
    p.answer = j.at("answer").get<std::string>();
    p.source = j.at("source").get<std::string>() == "toy" ? ProblemSource::toy
                                                          : ProblemSource::corpus;
    if (toy_out && j.contains("toy")) {
        const auto& t = j["toy"];
        toy_out->id = p.id;
        toy_out->modulus = t.at("m").get<int>();
        toy_out->v0 = t.at("v0").get<int>();
        toy_out->ops.clear();
        toy_out->reference_values.clear();
        int prev = toy_out->v0;
        for (const auto& opj : t.at("ops")) {
            ChainOp op;
            std::string kind = opj.at(0).get<std::string>();
            if (kind == "ADD") op.kind = OpKind::ADD;
            else if (kind == "SUB") op.kind = OpKind::SUB;
            else if (kind == "MUL") op.kind = OpKind::MUL;
            else throw SchemaError("problem_from_json: unknown op kind " + kind);
            op.constant = opj.at(1).get<int>();
            toy_out->ops.push_back(op);
            prev = apply_op(op, prev, toy_out->modulus);
            toy_out->reference_values.push_back(prev);
        }
        toy_out->answer = prev;
    }
    return p;
}

nlohmann::json trajectory_to_json(const Trajectory& t, const std::string& trajectory_id) {
    nlohmann::json j;
    j["trajectory_id"] = trajectory_id;
    j["problem_id"] = t.problem_id;
    j["steps"] = t.steps;
    j["reward"] = t.reward;
    j["gen_meta"] = {{"seed", t.gen_meta.seed},
                     {"temperature", t.gen_meta.temperature},
                     {"backend", t.gen_meta.backend},
                     {"conditioning", to_string(t.gen_meta.conditioning)},
                     {"conditioned_steps", t.gen_meta.conditioned_steps}};
    return j;
}

Trajectory trajectory_from_json(const nlohmann::json& j, std::string* trajectory_id) {
    Trajectory t;
    if (trajectory_id) *trajectory_id = j.value("trajectory_id", "");
    t.problem_id = j.at("problem_id").get<std::string>();
    t.steps = j.at("steps").get<std::vector<std::string>>();
    t.reward = j.at("reward").get<int>();
    const auto& g = j.at("gen_meta");
    t.gen_meta.seed = g.at("seed").get<std::uint64_t>();
    t.gen_meta.temperature = g.at("temperature").get<double>();
    t.gen_meta.backend = g.at("backend").get<std::string>();
    t.gen_meta.conditioning = conditioning_mode_from_string(g.at("conditioning").get<std::string>());
    t.gen_meta.conditioned_steps = g.value("conditioned_steps", 0);
    return t;
}

nlohmann::json intervention_to_json(const Intervention& i) {
    nlohmann::json j;
    j["problem_id"] = i.problem_id;
    j["trajectory_id"] = i.trajectory_id;
    j["t_star"] = i.t_star;
    j["content"] = i.content;
    j["proposer"] = to_string(i.proposer);
    j["kept"] = i.kept;
    if (i.discard_reason) j["discard_reason"] = to_string(*i.discard_reason);
    if (i.verify_stats) j["verify_stats"] = {{"n", i.verify_stats->n}, {"c", i.verify_stats->c}};
    return j;
}

Intervention intervention_from_json(const nlohmann::json& j) {
    Intervention i;
    i.problem_id = j.at("problem_id").get<std::string>();
    i.trajectory_id = j.at("trajectory_id").get<std::string>();
    i.t_star = j.at("t_star").get<int>();
    i.content = j.at("content").get<std::string>();
    std::string prop = j.at("proposer").get<std::string>();
    if (prop == "oracle") i.proposer = Proposer::oracle;
    else if (prop == "llm") i.proposer = Proposer::llm;
    else if (prop == "llm-no-reference") i.proposer = Proposer::llm_no_reference;
    else throw SchemaError("intervention_from_json: unknown proposer " + prop);
    i.kept = j.at("kept").get<bool>();
    if (j.contains("discard_reason")) {
        std::string r = j["discard_reason"].get<std::string>();
        if (r == "answer_leak") i.discard_reason = DiscardReason::answer_leak;
        else if (r == "parse_failure") i.discard_reason = DiscardReason::parse_failure;
        else if (r == "no_error_found") i.discard_reason = DiscardReason::no_error_found;
        else if (r == "failed_correctness_filter")
            i.discard_reason = DiscardReason::failed_correctness_filter;
        else throw SchemaError("intervention_from_json: unknown discard_reason " + r);
    }
    if (j.contains("verify_stats")) {
        i.verify_stats = VerifyStats{j["verify_stats"].at("n").get<int>(),
                                     j["verify_stats"].at("c").get<int>()};
    }
    return i;
}

nlohmann::json verify_report_to_json(const VerifyReport& r) {
    nlohmann::json j;
    j["problem_id"] = r.problem_id;
    j["trajectory_id"] = r.trajectory_id;
    j["t_star"] = r.t_star;
    j["n"] = r.n;
    j["c"] = r.c;
    j["kept"] = r.kept;
    if (!r.success_suffix.empty()) j["success_suffix"] = r.success_suffix;
    return j;
}

VerifyReport verify_report_from_json(const nlohmann::json& j) {
    VerifyReport r;
    r.problem_id = j.at("problem_id").get<std::string>();
    r.trajectory_id = j.at("trajectory_id").get<std::string>();
    r.t_star = j.at("t_star").get<int>();
    r.n = j.at("n").get<int>();
    r.c = j.at("c").get<int>();
    r.kept = j.at("kept").get<bool>();
    if (j.contains("success_suffix")) {
        r.success_suffix = j["success_suffix"].get<std::vector<std::string>>();
    }
    return r;
}

nlohmann::json sft_example_to_json(const SftExample& e) {
    nlohmann::json j;
    j["problem_id"] = e.problem_id;
    j["prompt"] = e.prompt;
    j["target"] = e.target;
    j["config"] = {{"include_prefix", e.config.include_prefix},
                   {"include_suffix", e.config.include_suffix},
                   {"filtered", e.config.filtered},
                   {"mask_prompt", e.config.mask_prompt}};
    if (!e.labels.empty()) {
        nlohmann::json labels = nlohmann::json::array();
        for (const StepLabel& lab : e.labels) {
            labels.push_back({{"style", to_string(lab.style)},
                              {"delta", lab.delta},
                              {"op", to_string(lab.op)}});
        }
        j["labels"] = labels;
    }
    if (!e.suffix_source.empty()) j["suffix_source"] = e.suffix_source;
    return j;
}

SftExample sft_example_from_json(const nlohmann::json& j) {
    SftExample e;
    e.problem_id = j.at("problem_id").get<std::string>();
    e.prompt = j.at("prompt").get<std::string>();
    e.target = j.at("target").get<std::string>();
    const auto& c = j.at("config");
    e.config.include_prefix = c.at("include_prefix").get<bool>();
    e.config.include_suffix = c.at("include_suffix").get<bool>();
    e.config.filtered = c.at("filtered").get<bool>();
    e.config.mask_prompt = c.value("mask_prompt", true);
    if (j.contains("labels")) {
        for (const auto& labj : j["labels"]) {
            StepLabel lab;
            lab.style = labj.at("style").get<std::string>() == "casual" ? StepStyle::casual
                                                                        : StepStyle::formal;
            lab.delta = labj.at("delta").get<int>();
            std::string op = labj.at("op").get<std::string>();
            lab.op = op == "ADD" ? OpKind::ADD : (op == "SUB" ? OpKind::SUB : OpKind::MUL);
            e.labels.push_back(lab);
        }
    }
    e.suffix_source = j.value("suffix_source", "");
    return e;
}

}  // namespace intv
