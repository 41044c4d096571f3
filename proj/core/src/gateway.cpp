#include "sico/gateway.hpp"

#include <chrono>
#include <semaphore>
#include <thread>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "sico/errors.hpp"
#include "sico/hash.hpp"
#include "sico/io_util.hpp"
#include "sico/recording.hpp"

namespace sico {

using nlohmann::json;

void GenerationRequest::validate() const {
    if (prompt.empty()) throw ValidationError("generation request: empty prompt");
    if (max_output_tokens < 1) {
        throw ValidationError("generation request: max_output_tokens must be >= 1");
    }
    if (temperature && *temperature < 0.0) {
        throw ValidationError("generation request: temperature must be >= 0");
    }
}

PriceTable PriceTable::load(const std::filesystem::path& path) {
    json doc = json::parse(read_file(path), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw ParseError(path.string() + ": malformed price table");
    }
    PriceTable table;
    for (const auto& [model, entry] : doc.items()) {
        if (!entry.is_object() || !entry.contains("input_per_1k") ||
            !entry.contains("output_per_1k")) {
            throw ParseError(path.string() + ": model \"" + model +
                             "\": expected input_per_1k and output_per_1k");
        }
        table.set(model, entry["input_per_1k"].get<double>(),
                  entry["output_per_1k"].get<double>());
    }
    return table;
}

void PriceTable::set(const std::string& model_id, double input_per_1k, double output_per_1k) {
    per_1k_[model_id] = {input_per_1k, output_per_1k};
}

double PriceTable::cost(const std::string& model_id, std::int64_t input_tokens,
                        std::int64_t output_tokens) const {
    auto it = per_1k_.find(model_id);
    if (it == per_1k_.end()) return 0.0;
    return static_cast<double>(input_tokens) / 1000.0 * it->second.first +
           static_cast<double>(output_tokens) / 1000.0 * it->second.second;
}

GatewayMode gateway_mode_from_string(std::string_view s) {
    if (s == "live") return GatewayMode::live;
    if (s == "record") return GatewayMode::record;
    if (s == "replay") return GatewayMode::replay;
    throw ValidationError("unknown gateway mode: \"" + std::string(s) +
                          "\" (expected live|record|replay)");
}

std::string_view to_string(GatewayMode mode) {
    switch (mode) {
    case GatewayMode::live: return "live";
    case GatewayMode::record: return "record";
    case GatewayMode::replay: return "replay";
    }
    return "live";
}

void GatewayConfig::validate() const {
    if (concurrency < 1) throw ConfigError("gateway: concurrency must be >= 1");
    if (retry_attempts < 1) throw ConfigError("gateway: retry_attempts must be >= 1");
    if (max_output_tokens < 1) throw ConfigError("gateway: max_output_tokens must be >= 1");
    if (mode != GatewayMode::live && recording_dir.empty()) {
        throw ConfigError("gateway: record/replay mode requires a recording directory");
    }
}

namespace {

constexpr char kFieldSep = '\x1f';
constexpr int kMaxConcurrency = 256;

std::string temperature_tag(const std::optional<double>& t) {
    if (!t) return "default";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", *t);
    return buf;
}

json result_to_json(const GenerationResult& r) {
    return {{"text", r.text},
            {"prompt_tokens", r.prompt_tokens},
            {"completion_tokens", r.completion_tokens}};
}

GenerationResult result_from_json(const std::string& text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("text")) {
        throw ParseError("recorded generation response: malformed payload");
    }
    GenerationResult r;
    r.text = doc["text"].get<std::string>();
    r.prompt_tokens = doc.value("prompt_tokens", std::int64_t{0});
    r.completion_tokens = doc.value("completion_tokens", std::int64_t{0});
    return r;
}

json scores_to_json(const std::vector<TokenScore>& scores) {
    json tokens = json::array();
    for (const auto& s : scores) {
        tokens.push_back({{"text", s.token_text}, {"log_prob", s.log_prob}, {"rank", s.rank}});
    }
    return {{"tokens", tokens}};
}

std::vector<TokenScore> scores_from_json(const std::string& text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("tokens")) {
        throw ParseError("recorded scoring response: malformed payload");
    }
    std::vector<TokenScore> out;
    for (const auto& t : doc["tokens"]) {
        out.push_back({t.at("text").get<std::string>(), t.at("log_prob").get<double>(),
                       t.at("rank").get<std::int64_t>()});
    }
    return out;
}

} // namespace

struct LlmGateway::Impl {
    explicit Impl(const GatewayConfig& cfg)
        : semaphore(std::min(cfg.concurrency, kMaxConcurrency)) {
        if (!cfg.recording_dir.empty()) {
            store = std::make_unique<RecordingStore>(cfg.recording_dir);
        }
    }

    struct SlotGuard {
        std::counting_semaphore<kMaxConcurrency>& sem;
        explicit SlotGuard(std::counting_semaphore<kMaxConcurrency>& s) : sem(s) {
            sem.acquire();
        }
        ~SlotGuard() { sem.release(); }
    };

    std::mutex cache_mutex;
    std::unordered_map<std::string, GenerationResult> generation_cache;
    std::unordered_map<std::string, std::vector<TokenScore>> scoring_cache;

    std::mutex ledger_mutex;
    CostLedgerSnapshot ledger;

    std::mutex mode_mutex;
    GatewayMode mode = GatewayMode::live;

    std::counting_semaphore<kMaxConcurrency> semaphore;
    std::unique_ptr<RecordingStore> store;
};

LlmGateway::LlmGateway(std::shared_ptr<GenerationBackend> generation,
                       std::shared_ptr<ScoringBackend> scoring, GatewayConfig config)
    : generation_(std::move(generation)), scoring_(std::move(scoring)),
      config_(std::move(config)) {
    config_.validate();
    impl_ = std::make_unique<Impl>(config_);
    impl_->mode = config_.mode;
}

LlmGateway::~LlmGateway() = default;

std::string LlmGateway::generation_key(const GenerationRequest& request) {
    std::string key;
    key += request.model_id;
    key += kFieldSep;
    key += to_hex(fnv1a64(request.prompt));
    key += kFieldSep;
    key += temperature_tag(request.temperature);
    key += kFieldSep;
    key += std::to_string(request.max_output_tokens);
    key += kFieldSep;
    key += std::to_string(request.sample_index);
    return to_hex(fnv1a64(key));
}

std::string LlmGateway::scoring_key(const std::string& model_id, const std::string& text) {
    std::string key = "score";
    key += kFieldSep;
    key += model_id;
    key += kFieldSep;
    key += to_hex(fnv1a64(text));
    return to_hex(fnv1a64(key));
}

void LlmGateway::set_mode(GatewayMode mode) {
    if (mode != GatewayMode::live && !impl_->store) {
        throw ConfigError("gateway: record/replay mode requires a recording directory");
    }
    std::lock_guard lock(impl_->mode_mutex);
    impl_->mode = mode;
}

GatewayMode LlmGateway::mode() const {
    std::lock_guard lock(impl_->mode_mutex);
    return impl_->mode;
}

CostLedgerSnapshot LlmGateway::ledger() const {
    std::lock_guard lock(impl_->ledger_mutex);
    return impl_->ledger;
}

std::string LlmGateway::scoring_model_id() const {
    return scoring_ ? scoring_->model_id() : std::string{};
}

GenerationResult LlmGateway::call_with_retry(const GenerationRequest& request) {
    if (!generation_) {
        throw ConfigError("gateway: no generation backend configured");
    }
    int delay_ms = config_.retry_initial_delay_ms;
    for (int attempt = 1;; ++attempt) {
        try {
            Impl::SlotGuard slot(impl_->semaphore);
            return generation_->generate(request);
        } catch (const TransportError& e) {
            if (attempt >= config_.retry_attempts) {
                throw TransportError("retry budget exhausted after " +
                                     std::to_string(attempt) + " attempts: " + e.what());
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
            delay_ms *= 2;
        }
    }
}

std::string LlmGateway::generate(const GenerationRequest& request) {
    GenerationRequest effective = request;
    if (effective.model_id.empty()) effective.model_id = config_.model_id;
    if (!effective.temperature) effective.temperature = config_.temperature;
    effective.validate();

    const std::string key = generation_key(effective);
    {
        std::lock_guard lock(impl_->cache_mutex);
        auto it = impl_->generation_cache.find(key);
        if (it != impl_->generation_cache.end()) {
            return it->second.text;
        }
    }
    return generate_uncached(effective, key).text;
}

std::string LlmGateway::generate(std::string_view prompt, int sample_index) {
    GenerationRequest request;
    request.prompt = std::string(prompt);
    request.model_id = config_.model_id;
    request.temperature = config_.temperature;
    request.max_output_tokens = config_.max_output_tokens;
    request.sample_index = sample_index;
    return generate(request);
}

GenerationResult LlmGateway::generate_uncached(const GenerationRequest& request,
                                               const std::string& key) {
    const GatewayMode mode = this->mode();
    GenerationResult result;

    if (mode == GatewayMode::replay) {
        auto recorded = impl_->store->lookup(key);
        if (!recorded) {
            throw ReplayMissError("replay: no recording for generation key " + key);
        }
        result = result_from_json(*recorded);
    } else {
        result = call_with_retry(request);
        if (mode == GatewayMode::record) {
            const json req_json = {{"kind", "generate"},
                                   {"model", request.model_id},
                                   {"prompt", request.prompt},
                                   {"temperature", temperature_tag(request.temperature)},
                                   {"max_tokens", request.max_output_tokens},
                                   {"sample_index", request.sample_index}};
            impl_->store->record(key, req_json.dump(), result_to_json(result).dump());
        }
    }

    {
        std::lock_guard lock(impl_->ledger_mutex);
        auto& ledger = impl_->ledger;
        ledger.calls += 1;
        ledger.input_tokens += static_cast<std::uint64_t>(std::max<std::int64_t>(0, result.prompt_tokens));
        ledger.output_tokens += static_cast<std::uint64_t>(std::max<std::int64_t>(0, result.completion_tokens));
        ledger.estimated_cost +=
            config_.prices.cost(request.model_id, result.prompt_tokens, result.completion_tokens);
    }
    {
        std::lock_guard lock(impl_->cache_mutex);
        impl_->generation_cache.emplace(key, result);
    }
    return result;
}

std::vector<TokenScore> LlmGateway::score_tokens(const std::string& text) {
    if (text.empty()) {
        return {};
    }
    const std::string model = scoring_ ? scoring_->model_id() : std::string("unconfigured");
    const std::string key = scoring_key(model, text);
    {
        std::lock_guard lock(impl_->cache_mutex);
        auto it = impl_->scoring_cache.find(key);
        if (it != impl_->scoring_cache.end()) return it->second;
    }

    std::vector<TokenScore> scores;
    const GatewayMode mode = this->mode();
    if (mode == GatewayMode::replay) {
        auto recorded = impl_->store->lookup(key);
        if (!recorded) {
            throw ReplayMissError("replay: no recording for scoring key " + key);
        }
        scores = scores_from_json(*recorded);
    } else {
        if (!scoring_) {
            throw ConfigError("gateway: no scoring backend configured");
        }
        {
            Impl::SlotGuard slot(impl_->semaphore);
            scores = scoring_->score_tokens(text);
        }
        if (mode == GatewayMode::record) {
            const json req_json = {{"kind", "score"}, {"model", model}, {"text", text}};
            impl_->store->record(key, req_json.dump(), scores_to_json(scores).dump());
        }
    }
    {
        std::lock_guard lock(impl_->cache_mutex);
        impl_->scoring_cache.emplace(key, scores);
    }
    return scores;
}

} // namespace sico
