#include "sico/http_gateway.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "sico/errors.hpp"

namespace sico {

using nlohmann::json;

namespace {

struct SplitUrl {
    std::string origin; // scheme://host[:port]
    std::string path;   // leading '/', possibly "/"
};

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ConfigError("malformed URL (missing scheme): " + url);
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, path_start), url.substr(path_start)};
}

std::string join_path(const std::string& prefix, const std::string& suffix) {
    if (prefix.empty() || prefix == "/") return suffix;
    if (prefix.back() == '/') return prefix.substr(0, prefix.size() - 1) + suffix;
    return prefix + suffix;
}

bool is_retriable_status(int status) {
    return status == 429 || (status >= 500 && status < 600);
}

std::string body_snippet(const std::string& body) {
    constexpr std::size_t kMax = 200;
    if (body.size() <= kMax) return body;
    return body.substr(0, kMax) + "...";
}

} // namespace

std::string http_post_json(const std::string& url, const std::string& body_json,
                           const std::string& api_key, int timeout_ms) {
    const SplitUrl split = split_url(url);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (split.origin.rfind("https://", 0) == 0) {
        throw ConfigError("https URL but this build has no TLS support: " + url);
    }
#endif
    httplib::Client client(split.origin);
    client.set_connection_timeout(0, timeout_ms * 1000);
    client.set_read_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
    client.set_write_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);

    httplib::Headers headers;
    if (!api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + api_key);
    }

    auto res = client.Post(split.path, headers, body_json, "application/json");
    if (!res) {
        throw TransportError("request to " + url +
                             " failed: " + httplib::to_string(res.error()));
    }
    if (is_retriable_status(res->status)) {
        throw TransportError("request to " + url + " returned status " +
                             std::to_string(res->status));
    }
    if (res->status < 200 || res->status >= 300) {
        throw Error("request to " + url + " returned status " + std::to_string(res->status) +
                    ": " + body_snippet(res->body));
    }
    return res->body;
}

HttpGenerationBackend::HttpGenerationBackend(HttpOptions options)
    : options_(std::move(options)) {
    if (options_.base_url.empty()) {
        throw ConfigError("generation backend: base URL not configured (set " +
                          std::string(kBaseUrlEnvVar) + " or gateway.base_url)");
    }
}

GenerationResult HttpGenerationBackend::generate(const GenerationRequest& request) {
    json body = {
        {"model", request.model_id},
        {"messages", json::array({json{{"role", "user"}, {"content", request.prompt}}})},
        {"max_tokens", request.max_output_tokens},
    };
    if (request.temperature) {
        body["temperature"] = *request.temperature;
    }

    const SplitUrl split = split_url(options_.base_url);
    const std::string url = split.origin + join_path(split.path, "/chat/completions");
    const std::string response =
        http_post_json(url, body.dump(), options_.api_key, options_.timeout_ms);

    json doc = json::parse(response, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw ParseError("chat completion response: malformed JSON");
    }
    try {
        GenerationResult result;
        result.text = doc.at("choices").at(0).at("message").at("content").get<std::string>();
        if (doc.contains("usage") && doc["usage"].is_object()) {
            result.prompt_tokens = doc["usage"].value("prompt_tokens", std::int64_t{0});
            result.completion_tokens = doc["usage"].value("completion_tokens", std::int64_t{0});
        }
        return result;
    } catch (const json::exception& e) {
        throw ParseError(std::string("chat completion response: ") + e.what());
    }
}

HttpScoringBackend::HttpScoringBackend(HttpOptions options, std::string model_id)
    : options_(std::move(options)), model_id_(std::move(model_id)) {
    if (options_.base_url.empty()) {
        throw ConfigError("scoring backend: base URL not configured");
    }
}

std::vector<TokenScore> HttpScoringBackend::score_tokens(const std::string& text) {
    const json body = {{"model", model_id_}, {"text", text}};
    const SplitUrl split = split_url(options_.base_url);
    const std::string url = split.origin + join_path(split.path, "/score");
    const std::string response =
        http_post_json(url, body.dump(), options_.api_key, options_.timeout_ms);

    json doc = json::parse(response, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("tokens")) {
        throw ParseError("scoring response: expected {\"tokens\": [...]}");
    }
    std::vector<TokenScore> out;
    try {
        for (const auto& t : doc["tokens"]) {
            TokenScore s;
            s.token_text = t.at("text").get<std::string>();
            s.log_prob = t.at("log_prob").get<double>();
            s.rank = t.at("rank").get<std::int64_t>();
            if (s.rank < 1) {
                throw ParseError("scoring response: rank < 1");
            }
            out.push_back(std::move(s));
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("scoring response: ") + e.what());
    }
    return out;
}

} // namespace sico
