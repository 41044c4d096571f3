#pragma once

#include <string>

#include "sico/gateway.hpp"

namespace sico {

struct HttpOptions {
    std::string base_url;    // e.g. http://localhost:8080/v1
    std::string api_key;     // sent as "Authorization: Bearer <key>" when set
    int timeout_ms = 60000;
};

/// Names of the environment variables the CLI reads when the config leaves
/// the corresponding fields empty.
inline constexpr const char* kApiKeyEnvVar = "SICO_API_KEY";
inline constexpr const char* kBaseUrlEnvVar = "SICO_BASE_URL";

/// OpenAI-compatible chat completion client. POSTs
/// {model, messages:[{role,content}], temperature?, max_tokens} to
/// <base_url>/chat/completions and reads choices[0].message.content plus the
/// usage token counts. Connection failures, timeouts, 429 and 5xx statuses
/// surface as TransportError (retriable); other failures abort.
class HttpGenerationBackend : public GenerationBackend {
public:
    explicit HttpGenerationBackend(HttpOptions options);
    GenerationResult generate(const GenerationRequest& request) override;

private:
    HttpOptions options_;
};

/// Remote token-scoring service client. POSTs {model, text} to
/// <base_url>/score and expects {tokens:[{text, log_prob, rank}]}.
class HttpScoringBackend : public ScoringBackend {
public:
    HttpScoringBackend(HttpOptions options, std::string model_id);
    std::vector<TokenScore> score_tokens(const std::string& text) override;
    std::string model_id() const override { return model_id_; }

private:
    HttpOptions options_;
    std::string model_id_;
};

/// POSTs `body_json` to a full URL and returns the response body. Shared by
/// the HTTP backends and the remote-classifier detector.
std::string http_post_json(const std::string& url, const std::string& body_json,
                           const std::string& api_key, int timeout_ms);

} // namespace sico
