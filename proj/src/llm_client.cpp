#include "intv/llm_client.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <random>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "intv/errors.hpp"

namespace intv {

double LogprobsResponse::nll() const {
    double total = 0.0;
    for (const TokenLogprob& t : tokens) total -= t.logprob;
    return total;
}

namespace {

// Counting limiter; enforces the in-flight cap without busy waiting.
class AdmissionLimiter {
public:
    explicit AdmissionLimiter(int cap) : available_(cap) {}

    void acquire() {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return available_ > 0; });
        --available_;
    }

    void release() {
        {
            std::lock_guard lock(mu_);
            ++available_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mu_;
    std::condition_variable cv_;
    int available_;
};

struct AdmissionGuard {
    AdmissionLimiter& limiter;
    explicit AdmissionGuard(AdmissionLimiter& l) : limiter(l) { limiter.acquire(); }
    ~AdmissionGuard() { limiter.release(); }
};

nlohmann::json request_body(const ChatRequest& request) {
    nlohmann::json body;
    body["model"] = request.model;
    nlohmann::json messages = nlohmann::json::array();
    for (const ChatMessage& m : request.messages) {
        messages.push_back({{"role", m.role}, {"content", m.content}});
    }
    body["messages"] = messages;
    body["temperature"] = request.temperature;
    body["top_p"] = request.top_p;
    if (request.top_k) body["top_k"] = *request.top_k;
    body["max_tokens"] = request.max_tokens;
    if (request.seed) body["seed"] = *request.seed;
    return body;
}

}  // namespace

struct LlmClient::Impl {
    LlmClientConfig cfg;
    AdmissionLimiter limiter;
    std::mutex rng_mu;
    std::mt19937_64 jitter_rng{0x1f2e3d4c5b6a7988ull};

    explicit Impl(LlmClientConfig c) : cfg(std::move(c)), limiter(cfg.parallel) {
        if (cfg.api_key.empty()) {
            if (const char* env = std::getenv("INT_API_KEY")) cfg.api_key = env;
        }
    }

    double jitter() {
        std::lock_guard lock(rng_mu);
        return std::uniform_real_distribution<double>(0.0, 1.0)(jitter_rng);
    }

    nlohmann::json post_json(const std::string& path, const nlohmann::json& body) {
        AdmissionGuard guard(limiter);
        httplib::Client http(cfg.base_url);
        http.set_connection_timeout(std::chrono::milliseconds(
            static_cast<int>(cfg.timeout_s * 1000)));
        http.set_read_timeout(std::chrono::milliseconds(static_cast<int>(cfg.timeout_s * 1000)));
        httplib::Headers headers;
        if (!cfg.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg.api_key);

        std::string payload = body.dump();
        for (int attempt = 0; attempt < cfg.max_retries; ++attempt) {
            if (attempt > 0) {
                double delay = cfg.backoff_base_s * (1 << (attempt - 1)) * (1.0 + jitter());
                std::this_thread::sleep_for(std::chrono::duration<double>(delay));
            }
            auto res = http.Post(path, headers, payload, "application/json");
            if (!res) continue;  // transport failure, retry
            if (res->status == 429 || res->status >= 500) continue;
            if (res->status != 200) {
                throw ProtocolError("llm_client: HTTP " + std::to_string(res->status));
            }
            nlohmann::json parsed = nlohmann::json::parse(res->body, nullptr, false);
            if (parsed.is_discarded()) throw ProtocolError("llm_client: non-JSON response body");
            return parsed;
        }
        throw BackendUnavailableError("llm_client: retries exhausted for " + path);
    }
};

LlmClient::LlmClient(LlmClientConfig cfg) : impl_(std::make_unique<Impl>(std::move(cfg))) {}
LlmClient::~LlmClient() = default;

ChatResponse LlmClient::chat(const ChatRequest& request) {
    if (request.messages.empty()) throw ConfigError("chat: messages must be non-empty");
    nlohmann::json j = impl_->post_json("/v1/chat/completions", request_body(request));
    if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
        throw ProtocolError("chat: response has no choices");
    }
    const auto& choice = j["choices"][0];
    ChatResponse out;
    out.text = choice.value("message", nlohmann::json::object()).value("content", "");
    out.finish_reason = choice.value("finish_reason", "");
    if (j.contains("usage")) {
        out.usage.prompt_tokens = j["usage"].value("prompt_tokens", 0);
        out.usage.completion_tokens = j["usage"].value("completion_tokens", 0);
    }
    return out;
}

LogprobsResponse LlmClient::logprobs(const ChatRequest& request) {
    if (request.messages.empty()) throw ConfigError("logprobs: messages must be non-empty");
    nlohmann::json body = request_body(request);
    body["logprobs"] = true;
    body["max_tokens"] = 0;
    body["echo"] = true;
    nlohmann::json j = impl_->post_json("/v1/chat/completions", body);
    if (j.contains("error")) {
        throw FeatureUnsupportedError("logprobs: backend rejected request");
    }
    if (!j.contains("choices") || j["choices"].empty() ||
        !j["choices"][0].contains("logprobs")) {
        throw FeatureUnsupportedError("logprobs: backend does not report logprobs");
    }
    const auto& lp = j["choices"][0]["logprobs"];
    LogprobsResponse out;
    if (lp.contains("content") && lp["content"].is_array()) {
        for (const auto& entry : lp["content"]) {
            out.tokens.push_back({entry.value("token", ""), entry.value("logprob", 0.0)});
        }
    }
    return out;
}

}  // namespace intv
