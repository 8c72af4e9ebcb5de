#include "intv/toy_env.hpp"

#include <charconv>
#include <regex>

#include "intv/errors.hpp"

namespace intv {

const char* to_string(OpKind k) {
    switch (k) {
        case OpKind::ADD: return "ADD";
        case OpKind::SUB: return "SUB";
        case OpKind::MUL: return "MUL";
    }
    return "ADD";
}

const char* to_string(StepStyle s) {
    return s == StepStyle::casual ? "casual" : "formal";
}

int offset_index(int delta) {
    for (int i = 0; i < kNumOffsets; ++i) {
        if (kOffsets[i] == delta) return i;
    }
    return -1;
}

int apply_op(const ChainOp& op, int value, int modulus) {
    long long v = value;
    switch (op.kind) {
        case OpKind::ADD: v = v + op.constant; break;
        case OpKind::SUB: v = v - op.constant; break;
        case OpKind::MUL: v = v * op.constant; break;
    }
    long long r = v % modulus;
    if (r < 0) r += modulus;
    return static_cast<int>(r);
}

namespace {

bool is_prime(int n) {
    if (n < 2) return false;
    for (int d = 2; static_cast<long long>(d) * d <= n; ++d) {
        if (n % d == 0) return false;
    }
    return true;
}

int mod_pos(long long v, int m) {
    long long r = v % m;
    if (r < 0) r += m;
    return static_cast<int>(r);
}

// Map a residue difference to the symmetric representative.
int symmetric_delta(int d, int m) {
    if (d > m / 2) d -= m;
    return d;
}

}  // namespace

ToyProblem gen_problem(std::uint64_t seed, const ToyConfig& cfg) {
    if (!is_prime(cfg.modulus) || cfg.modulus < 5 || cfg.modulus > 10007) {
        throw ConfigError("gen_problem: modulus must be a prime in [5, 10007]");
    }
    if (cfg.k < 2 || cfg.k > 64) {
        throw ConfigError("gen_problem: K must be in [2, 64]");
    }
    std::mt19937_64 rng(seed);
    ToyProblem p;
    p.id = "toy-" + std::to_string(seed);
    p.modulus = cfg.modulus;
    p.v0 = static_cast<int>(rng() % static_cast<std::uint64_t>(cfg.modulus));
    std::discrete_distribution<int> op_dist(std::begin(cfg.op_mix), std::end(cfg.op_mix));
    std::uniform_int_distribution<int> const_dist(1, cfg.modulus - 1);
    int prev = p.v0;
    for (int t = 0; t < cfg.k; ++t) {
        ChainOp op;
        op.kind = static_cast<OpKind>(op_dist(rng));
        op.constant = const_dist(rng);
        p.ops.push_back(op);
        prev = apply_op(op, prev, cfg.modulus);
        p.reference_values.push_back(prev);
    }
    p.answer = p.reference_values.back();
    return p;
}

std::string render_step(const ToyProblem& p, int t, int prev_value, const StepEmission& e) {
    if (t < 1 || t > p.k()) throw IndexError("render_step: t out of range");
    const ChainOp& op = p.ops[t - 1];
    if (e.style == StepStyle::formal) {
        return "Step " + std::to_string(t) + ": " + std::to_string(prev_value) + " " +
               to_string(op.kind) + " " + std::to_string(op.constant) + " = " +
               std::to_string(e.emitted_value) + " (mod " + std::to_string(p.modulus) + ")";
    }
    return "now v" + std::to_string(t) + " = " + std::to_string(e.emitted_value);
}

StepEmission parse_step(const ToyProblem& p, int t, int prev_value, const std::string& step) {
    static const std::regex formal_re(
        R"(^Step (\d+): (\d+) (ADD|SUB|MUL) (\d+) = (\d+) \(mod (\d+)\)$)");
    static const std::regex casual_re(R"(^now v(\d+) = (\d+)$)");
    if (t < 1 || t > p.k()) throw ParseError("parse_step: t out of range");
    const ChainOp& op = p.ops[t - 1];
    std::smatch m;
    StepEmission e;
    if (std::regex_match(step, m, formal_re)) {
        e.style = StepStyle::formal;
        if (std::stoi(m[1]) != t) throw ParseError("parse_step: step number mismatch");
        if (m[3].str() != to_string(op.kind) || std::stoi(m[4]) != op.constant) {
            throw ParseError("parse_step: operation does not match the chain");
        }
        if (std::stoi(m[6]) != p.modulus) throw ParseError("parse_step: modulus mismatch");
        e.emitted_value = std::stoi(m[5]);
    } else if (std::regex_match(step, m, casual_re)) {
        e.style = StepStyle::casual;
        if (std::stoi(m[1]) != t) throw ParseError("parse_step: step number mismatch");
        e.emitted_value = std::stoi(m[2]);
    } else {
        throw ParseError("parse_step: unrecognized step shape");
    }
    if (e.emitted_value < 0 || e.emitted_value >= p.modulus) {
        throw ParseError("parse_step: value outside Z_m");
    }
    int expected = apply_op(op, prev_value, p.modulus);
    e.delta = symmetric_delta(mod_pos(e.emitted_value - expected, p.modulus), p.modulus);
    return e;
}

std::optional<std::vector<StepEmission>> parse_trajectory(const ToyProblem& p,
                                                          const std::vector<std::string>& steps,
                                                          int* fail_index) {
    std::vector<StepEmission> out;
    int prev = p.v0;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (static_cast<int>(i) >= p.k()) {
            if (fail_index) *fail_index = static_cast<int>(i);
            return std::nullopt;
        }
        try {
            StepEmission e = parse_step(p, static_cast<int>(i) + 1, prev, steps[i]);
            prev = e.emitted_value;
            out.push_back(e);
        } catch (const ParseError&) {
            if (fail_index) *fail_index = static_cast<int>(i);
            return std::nullopt;
        }
    }
    return out;
}

int score(const ToyProblem& p, const Trajectory& traj) {
    if (static_cast<int>(traj.steps.size()) != p.k()) return 0;
    auto parsed = parse_trajectory(p, traj.steps);
    if (!parsed) return 0;
    return parsed->back().emitted_value == p.answer ? 1 : 0;
}

std::optional<int> first_error_oracle(const ToyProblem& p, const Trajectory& traj) {
    int prev = p.v0;
    for (std::size_t i = 0; i < traj.steps.size(); ++i) {
        if (static_cast<int>(i) >= p.k()) return static_cast<int>(i);
        StepEmission e;
        try {
            e = parse_step(p, static_cast<int>(i) + 1, prev, traj.steps[i]);
        } catch (const ParseError&) {
            return static_cast<int>(i);
        }
        if (e.emitted_value != p.reference_values[i]) return static_cast<int>(i);
        prev = e.emitted_value;
    }
    return std::nullopt;
}

std::vector<std::string> reference_steps(const ToyProblem& p) {
    std::vector<std::string> out;
    int prev = p.v0;
    for (int t = 1; t <= p.k(); ++t) {
        StepEmission e{StepStyle::formal, 0, p.reference_values[t - 1]};
        out.push_back(render_step(p, t, prev, e));
        prev = e.emitted_value;
    }
    return out;
}

std::vector<std::string> make_hint(const ToyProblem& p, std::mt19937_64& rng) {
    if (p.k() < 3) throw ConfigError("make_hint: K must be >= 3");
    int j_max = p.k() / 3;
    std::uniform_int_distribution<int> dist(1, j_max);
    int j = dist(rng);
    std::vector<std::string> all = reference_steps(p);
    all.resize(static_cast<std::size_t>(j));
    return all;
}

const ToyProblem* find_problem(const ProblemIndex& index, const std::string& id) {
    for (const ToyProblem& p : index) {
        if (p.id == id) return &p;
    }
    return nullptr;
}

std::optional<std::vector<StepLabel>> trajectory_labels(const ToyProblem& problem,
                                                        const std::vector<std::string>& steps) {
    auto parsed = parse_trajectory(problem, steps);
    if (!parsed) return std::nullopt;
    std::vector<StepLabel> labels;
    for (std::size_t i = 0; i < parsed->size(); ++i) {
        labels.push_back({(*parsed)[i].style, (*parsed)[i].delta, problem.ops[i].kind});
    }
    return labels;
}

Problem ToyProblem::to_problem() const {
    Problem out;
    out.id = id;
    out.prompt = "Starting from v0 = " + std::to_string(v0) +
                 ", apply each operation in order modulo " + std::to_string(modulus) +
                 " and report the final value v" + std::to_string(k()) + ".";
    out.reference_solution = join_steps(reference_steps(*this));
    out.answer = std::to_string(answer);
    out.source = ProblemSource::toy;
    return out;
}

}  // namespace intv
