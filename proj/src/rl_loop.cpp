#include "intv/rl_loop.hpp"

#include <random>
#include <sstream>

#include <json.hpp>

#include "intv/errors.hpp"

namespace intv {

double zero_advantage_ratio(const std::vector<RolloutGroup>& groups) {
    if (groups.empty()) throw NoDataError("zero_advantage_ratio: no groups");
    int zero = 0;
    for (const RolloutGroup& g : groups) {
        bool all_zero = true;
        for (double r : g.rewards) {
            if (r != 0.0) { all_zero = false; break; }
        }
        if (all_zero) ++zero;
    }
    return static_cast<double>(zero) / static_cast<double>(groups.size());
}

TrainResult train(const ToyPolicy& policy, const std::vector<Problem>& problems,
                  const ProblemIndex& toy_problems, const RlConfig& cfg) {
    if (cfg.iters < 1) throw ConfigError("train: iters must be >= 1");
    if (problems.empty()) throw NoDataError("train: no problems");
    TrainResult result;
    result.policy = policy;
    double ema = 0.0;
    std::mt19937_64 batch_rng(derive_seed(cfg.seed, 0xb47c));
    for (int iter = 0; iter < cfg.iters; ++iter) {
        ToyBackend backend(result.policy, toy_problems);
        std::vector<RolloutGroup> groups;
        double reward_sum = 0.0;
        long long reward_count = 0;
        for (int b = 0; b < cfg.batch_problems; ++b) {
            std::size_t pi = batch_rng() % problems.size();
            std::uint64_t gseed = derive_seed(cfg.seed, (static_cast<std::uint64_t>(iter) << 16) +
                                                            static_cast<std::uint64_t>(b));
            RolloutGroup group = collect_group(backend, problems[pi], cfg.group_n,
                                               ConditioningMode::none, "", gseed);
            for (double r : group.rewards) {
                reward_sum += r;
                ++reward_count;
            }
            groups.push_back(std::move(group));
        }
        CurvePoint point;
        point.iter = iter;
        point.reward = reward_count > 0 ? reward_sum / reward_count : 0.0;
        ema = cfg.ema_decay * ema + (1.0 - cfg.ema_decay) * point.reward;
        point.ema = ema;
        point.zero_adv_ratio = zero_advantage_ratio(groups);
        result.curves.push_back(point);
        // All-zero-advantage iterations take a zero-gradient step and continue.
        result.policy = pg_update(result.policy, groups, PgConfig{cfg.lr}, toy_problems);
    }
    return result;
}

std::string curves_to_jsonl(const std::vector<CurvePoint>& curves) {
    std::string out;
    for (const CurvePoint& p : curves) {
        nlohmann::json j;
        j["iter"] = p.iter;
        j["reward"] = p.reward;
        j["ema"] = p.ema;
        j["zero_adv_ratio"] = p.zero_adv_ratio;
        out += j.dump();
        out += "\n";
    }
    return out;
}

std::vector<CurvePoint> curves_from_jsonl(const std::string& text) {
    std::vector<CurvePoint> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        CurvePoint p;
        p.iter = j.at("iter").get<int>();
        p.reward = j.at("reward").get<double>();
        p.ema = j.at("ema").get<double>();
        p.zero_adv_ratio = j.at("zero_adv_ratio").get<double>();
        out.push_back(p);
    }
    return out;
}

}  // namespace intv
