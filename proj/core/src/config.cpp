#include "sico/config.hpp"

#include <charconv>

#include "sico/errors.hpp"
#include "sico/io_util.hpp"

namespace sico {

AppConfig default_app_config() {
    return AppConfig{};
}

namespace {

int parse_int(const std::string& key, const std::string& value) {
    int out = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw ConfigError("config: " + key + ": expected integer, got \"" + value + "\"");
    }
    return out;
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t consumed = 0;
        const double out = std::stod(value, &consumed);
        if (consumed != value.size()) throw std::invalid_argument(value);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("config: " + key + ": expected number, got \"" + value + "\"");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("config: " + key + ": expected boolean, got \"" + value + "\"");
}

std::filesystem::path resolve(const std::filesystem::path& base_dir, const std::string& value) {
    std::filesystem::path p(value);
    if (p.is_absolute() || base_dir.empty()) return p;
    return base_dir / p;
}

std::string unquote(std::string value) {
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
        return value.substr(1, value.size() - 2);
    }
    return value;
}

void set_key(AppConfig& config, const std::string& section, const std::string& key,
             const std::string& value, const std::filesystem::path& base_dir) {
    const std::string full = section + "." + key;

    if (section == "run") {
        auto& run = config.run;
        if (key == "task") return void(run.task_kind = task_kind_from_string(value));
        if (key == "mode") return void(run.mode = prompt_mode_from_string(value));
        if (key == "k") return void(run.k = parse_int(full, value));
        if (key == "iterations") return void(run.iterations = parse_int(full, value));
        if (key == "eval_size") return void(run.eval_size = parse_int(full, value));
        if (key == "feature_count") return void(run.feature_count = parse_int(full, value));
        if (key == "alternation_start") {
            return void(run.alternation_start = substitution_level_from_string(value));
        }
        if (key == "paraphrases_per_sentence") {
            return void(run.paraphrases_per_sentence = parse_int(full, value));
        }
        if (key == "plausibility_tau") {
            return void(run.plausibility_tau = parse_double(full, value));
        }
        if (key == "utility_samples") return void(run.utility_samples = parse_int(full, value));
        if (key == "greedy_rescore_after_apply") {
            return void(run.greedy_rescore_after_apply = parse_bool(full, value));
        }
        if (key == "run_id") return void(run.run_id = value);
        if (key == "custom_template") return void(run.custom_template = value);
    } else if (section == "gateway") {
        auto& gw = config.gateway;
        if (key == "model") return void(gw.model_id = value);
        if (key == "temperature") return void(gw.temperature = parse_double(full, value));
        if (key == "max_output_tokens") {
            return void(gw.max_output_tokens = parse_int(full, value));
        }
        if (key == "concurrency") return void(gw.concurrency = parse_int(full, value));
        if (key == "retry_attempts") return void(gw.retry_attempts = parse_int(full, value));
        if (key == "retry_initial_delay_ms") {
            return void(gw.retry_initial_delay_ms = parse_int(full, value));
        }
        if (key == "mode") return void(gw.mode = gateway_mode_from_string(value));
        if (key == "recording_dir") return void(gw.recording_dir = resolve(base_dir, value));
        if (key == "base_url") return void(config.gateway_base_url = value);
        if (key == "api_key") return void(config.api_key = value);
        if (key == "price_table") return void(config.price_table = resolve(base_dir, value));
    } else if (section == "scoring") {
        if (key == "base_url") return void(config.scoring.base_url = value);
        if (key == "model") return void(config.scoring.model_id = value);
    } else if (section == "detector") {
        auto& det = config.detector;
        if (key == "kind") return void(det.kind = value);
        if (key == "id") return void(det.id = value);
        if (key == "endpoint") return void(det.endpoint = value);
        if (key == "endpoint2") return void(det.endpoint2 = value);
        if (key == "api_key") return void(det.api_key = value);
        if (key == "wordlist") return void(det.wordlist = resolve(base_dir, value));
        if (key == "calibration") {
            return void(det.calibration = calibration_kind_from_string(value));
        }
        if (key == "calibration_a") return void(det.calibration_a = parse_double(full, value));
        if (key == "calibration_b") return void(det.calibration_b = parse_double(full, value));
        if (key == "fit_on_triplets") {
            return void(det.fit_on_triplets = parse_bool(full, value));
        }
        if (key == "use_raw_rank") return void(det.use_raw_rank = parse_bool(full, value));
        if (key == "sample_count") {
            return void(det.perturbation.sample_count = parse_int(full, value));
        }
        if (key == "replacement_ratio") {
            return void(det.perturbation.replacement_ratio = parse_double(full, value));
        }
        if (key == "span_length") {
            return void(det.perturbation.span_length = parse_int(full, value));
        }
        if (key == "timeout_ms") return void(det.timeout_ms = parse_int(full, value));
        if (key == "retry_attempts") return void(det.retry_attempts = parse_int(full, value));
    } else if (section == "substitution") {
        if (key == "lexicon") return void(config.substitution.lexicon = resolve(base_dir, value));
        if (key == "tagger_dict") {
            return void(config.substitution.tagger_dict = resolve(base_dir, value));
        }
    } else if (section == "data") {
        if (key == "triplets") return void(config.data.triplets = resolve(base_dir, value));
        if (key == "eval_inputs") {
            return void(config.data.eval_inputs = resolve(base_dir, value));
        }
    } else {
        throw ConfigError("config: unknown section [" + section + "]");
    }
    throw ConfigError("config: unknown key " + full);
}

} // namespace

AppConfig parse_app_config(const std::string& text, const std::filesystem::path& base_dir) {
    AppConfig config = default_app_config();
    std::string section;
    std::size_t line_number = 0;
    for (const std::string& raw_line : split_lines(text)) {
        ++line_number;
        const std::string line = trim(raw_line);
        if (line.empty() || line.front() == '#' || line.front() == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3) {
                throw ConfigError("config: line " + std::to_string(line_number) +
                                  ": malformed section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config: line " + std::to_string(line_number) +
                              ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = unquote(trim(line.substr(eq + 1)));
        if (section.empty()) {
            throw ConfigError("config: line " + std::to_string(line_number) +
                              ": key \"" + key + "\" outside any [section]");
        }
        set_key(config, section, key, value, base_dir);
    }
    return config;
}

AppConfig load_app_config(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    const std::filesystem::path base_dir =
        path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    return parse_app_config(text, base_dir);
}

void apply_override(AppConfig& config, const std::string& assignment,
                    const std::filesystem::path& base_dir) {
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
        throw ConfigError("override: expected section.key=value, got \"" + assignment + "\"");
    }
    const std::string section = trim(assignment.substr(0, dot));
    const std::string key = trim(assignment.substr(dot + 1, eq - dot - 1));
    const std::string value = unquote(trim(assignment.substr(eq + 1)));
    set_key(config, section, key, value, base_dir);
}

} // namespace sico
