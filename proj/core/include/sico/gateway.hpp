#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace sico {

struct GenerationRequest {
    std::string prompt;
    int max_output_tokens = 512;
    std::optional<double> temperature; // nullopt = provider default
    std::string model_id;
    int sample_index = 0; // disambiguates repeated sampling of one prompt

    void validate() const;
};

struct GenerationResult {
    std::string text;
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
};

/// Per-token score under a causal scoring model. `rank` is 1 plus the number
/// of vocabulary entries strictly more probable than the actual token at that
/// position; `log_prob` is the natural log of the token's probability.
struct TokenScore {
    std::string token_text;
    double log_prob = 0.0;
    std::int64_t rank = 1;
};

struct CostLedgerSnapshot {
    std::uint64_t calls = 0;
    std::uint64_t input_tokens = 0;
    std::uint64_t output_tokens = 0;
    double estimated_cost = 0.0;
};

/// Maps model id -> (input, output) price per 1K tokens. Unknown models cost 0.
class PriceTable {
public:
    PriceTable() = default;
    static PriceTable load(const std::filesystem::path& path);

    void set(const std::string& model_id, double input_per_1k, double output_per_1k);
    double cost(const std::string& model_id, std::int64_t input_tokens,
                std::int64_t output_tokens) const;
    bool empty() const { return per_1k_.empty(); }

private:
    std::map<std::string, std::pair<double, double>> per_1k_;
};

class GenerationBackend {
public:
    virtual ~GenerationBackend() = default;
    virtual GenerationResult generate(const GenerationRequest& request) = 0;
};

/// Token-level scoring over full next-token distributions. Implementations
/// own their context-length policy: either window long texts (documenting the
/// overlap) or throw when windowing is disabled.
class ScoringBackend {
public:
    virtual ~ScoringBackend() = default;
    virtual std::vector<TokenScore> score_tokens(const std::string& text) = 0;
    virtual std::string model_id() const = 0;
};

enum class GatewayMode { live, record, replay };

GatewayMode gateway_mode_from_string(std::string_view s);
std::string_view to_string(GatewayMode mode);

struct GatewayConfig {
    std::string model_id = "gpt-3.5-turbo";
    std::optional<double> temperature; // provider default unless set
    int max_output_tokens = 512;
    int concurrency = 4;
    int retry_attempts = 3;
    int retry_initial_delay_ms = 500;
    GatewayMode mode = GatewayMode::live;
    std::filesystem::path recording_dir; // required for record/replay
    PriceTable prices;

    void validate() const;
};

class RecordingStore;

/// Single entry point for text generation and token scoring. Adds an
/// in-memory result cache keyed by (model, prompt hash, temperature,
/// max_tokens, sample_index), a persistent record/replay layer, retry with
/// exponential backoff for transport failures, a concurrency cap, and the
/// token-cost ledger. Thread safe.
class LlmGateway {
public:
    LlmGateway(std::shared_ptr<GenerationBackend> generation,
               std::shared_ptr<ScoringBackend> scoring, GatewayConfig config);
    ~LlmGateway();

    LlmGateway(const LlmGateway&) = delete;
    LlmGateway& operator=(const LlmGateway&) = delete;

    std::string generate(const GenerationRequest& request);

    /// Generates with the configured model/temperature/max_tokens defaults.
    std::string generate(std::string_view prompt, int sample_index = 0);

    std::vector<TokenScore> score_tokens(const std::string& text);

    void set_mode(GatewayMode mode);
    GatewayMode mode() const;

    CostLedgerSnapshot ledger() const;

    const GatewayConfig& config() const { return config_; }

    bool has_scoring_backend() const { return scoring_ != nullptr; }
    std::string scoring_model_id() const;

    /// Stable cache key for a generation request (hex FNV-1a of the
    /// serialized key tuple). Also the recording key.
    static std::string generation_key(const GenerationRequest& request);
    static std::string scoring_key(const std::string& model_id, const std::string& text);

private:
    GenerationResult generate_uncached(const GenerationRequest& request,
                                       const std::string& key);
    GenerationResult call_with_retry(const GenerationRequest& request);

    std::shared_ptr<GenerationBackend> generation_;
    std::shared_ptr<ScoringBackend> scoring_;
    GatewayConfig config_;

    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace sico
