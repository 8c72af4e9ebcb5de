#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace intv {

struct ChatMessage {
    std::string role;
    std::string content;
};

struct ChatRequest {
    std::string model;
    std::vector<ChatMessage> messages;
    double temperature = 1.0;
    double top_p = 1.0;
    std::optional<int> top_k;
    int max_tokens = 4096;
    std::optional<std::uint64_t> seed;
};

struct ChatUsage {
    int prompt_tokens = 0;
    int completion_tokens = 0;
};

struct ChatResponse {
    std::string text;
    std::string finish_reason;  // "length" means truncation; surfaced, never hidden
    ChatUsage usage;
};

struct TokenLogprob {
    std::string token;
    double logprob = 0.0;
};

struct LogprobsResponse {
    std::vector<TokenLogprob> tokens;
    double nll() const;
};

struct LlmClientConfig {
    std::string base_url;      // e.g. http://127.0.0.1:8080
    std::string api_key;       // from INT_API_KEY when empty
    int max_retries = 3;       // attempts on 429/5xx
    double backoff_base_s = 0.05;
    double timeout_s = 30.0;
    int parallel = 8;          // in-flight request cap
};

// Minimal OpenAI-compatible chat-completions client. Shareable across
// threads; an internal admission limiter enforces the in-flight cap.
class LlmClient {
public:
    explicit LlmClient(LlmClientConfig cfg);
    ~LlmClient();
    LlmClient(const LlmClient&) = delete;
    LlmClient& operator=(const LlmClient&) = delete;

    // POST /v1/chat/completions; retries with exponential backoff + jitter on
    // 429 and 5xx. Throws BackendUnavailableError after exhausted retries and
    // ProtocolError on a non-JSON body.
    ChatResponse chat(const ChatRequest& request);

    // Scores a provided completion via the echo+logprobs convention. Throws
    // FeatureUnsupportedError when the backend does not advertise support.
    LogprobsResponse logprobs(const ChatRequest& request);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace intv
