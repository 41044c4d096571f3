#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sico/config.hpp"
#include "sico/corpus.hpp"
#include "sico/detector_factory.hpp"
#include "sico/errors.hpp"
#include "sico/evaluation.hpp"
#include "sico/hash.hpp"
#include "sico/io_util.hpp"
#include "sico/optimizer.hpp"
#include "sico/runtime.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonFlags {
    std::string config_path;
    std::string mode;
    std::string replay_dir;
    std::string record_dir;
    std::vector<std::string> overrides;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags, bool config_required = true) {
    auto* opt = cmd->add_option("--config", flags.config_path, "run config file");
    if (config_required) opt->required();
    cmd->add_option("--mode", flags.mode, "operating mode: gen|para");
    cmd->add_option("--replay", flags.replay_dir, "serve LLM calls from this recording dir");
    cmd->add_option("--record", flags.record_dir, "record LLM calls into this dir");
    cmd->add_option("--set", flags.overrides, "config override, section.key=value");
}

sico::AppConfig load_config(const CommonFlags& flags) {
    sico::AppConfig config = flags.config_path.empty()
                                 ? sico::default_app_config()
                                 : sico::load_app_config(flags.config_path);
    const fs::path base_dir = flags.config_path.empty()
                                  ? fs::current_path()
                                  : fs::path(flags.config_path).parent_path();
    for (const auto& assignment : flags.overrides) {
        sico::apply_override(config, assignment, base_dir);
    }
    if (!flags.mode.empty()) {
        config.run = sico::configure_mode(config.run,
                                          sico::prompt_mode_from_string(flags.mode));
    }
    if (!flags.replay_dir.empty() && !flags.record_dir.empty()) {
        throw sico::ConfigError("--replay and --record are mutually exclusive");
    }
    if (!flags.replay_dir.empty()) {
        config.gateway.mode = sico::GatewayMode::replay;
        config.gateway.recording_dir = flags.replay_dir;
    } else if (!flags.record_dir.empty()) {
        config.gateway.mode = sico::GatewayMode::record;
        config.gateway.recording_dir = flags.record_dir;
    }
    return config;
}

std::vector<std::string> load_texts(const fs::path& path) {
    std::vector<std::string> texts;
    sico::for_each_jsonl_line(path, [&](std::size_t number, const std::string& line) {
        json obj = json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object() || !obj.contains("text") ||
            !obj["text"].is_string()) {
            throw sico::ParseError(path.string() + ": line " + std::to_string(number) +
                                   ": expected {\"text\": ...}");
        }
        texts.push_back(obj["text"].get<std::string>());
    });
    return texts;
}

void write_ledger(const sico::CostLedgerSnapshot& ledger, const fs::path& path) {
    const json doc = {{"calls", ledger.calls},
                      {"input_tokens", ledger.input_tokens},
                      {"output_tokens", ledger.output_tokens},
                      {"estimated_cost", ledger.estimated_cost}};
    sico::write_file_atomic(path, doc.dump(2) + "\n");
}

std::string default_run_id(const sico::AppConfig& config, const CommonFlags& flags) {
    // Content-derived, so reruns of one config are byte-reproducible.
    std::string seed = flags.config_path;
    seed += '\x1f';
    seed += std::string(sico::to_string(config.run.mode));
    seed += '\x1f';
    seed += std::to_string(config.run.k);
    seed += '\x1f';
    seed += std::to_string(config.run.iterations);
    return "run-" + sico::to_hex(sico::fnv1a64(seed));
}

int cmd_build_prompt(const CommonFlags& flags, const std::string& out_dir, bool resume) {
    sico::AppConfig config = load_config(flags);
    if (config.data.triplets.empty()) {
        throw sico::ConfigError("config: missing key data.triplets");
    }
    if (config.data.eval_inputs.empty()) {
        throw sico::ConfigError("config: missing key data.eval_inputs");
    }
    if (config.run.run_id.empty()) {
        config.run.run_id = default_run_id(config, flags);
    }
    config.run.validate();

    const auto triplets = sico::load_triplets(config.data.triplets, config.run.task_kind);
    const auto eval_inputs =
        sico::load_eval_inputs(config.data.eval_inputs, config.run.task_kind);

    sico::Runtime rt = sico::build_runtime(config);
    const auto proxy = sico::make_detector(config.detector, *rt.gateway, &triplets);

    const fs::path out(out_dir);
    fs::create_directories(out);
    const fs::path checkpoint_path = out / "checkpoint.json";

    std::optional<sico::RunState> resume_state;
    if (resume) {
        if (!fs::exists(checkpoint_path)) {
            throw sico::ConfigError("--resume: no checkpoint at " + checkpoint_path.string());
        }
        resume_state = sico::load_checkpoint(checkpoint_path);
        std::cerr << "resuming from iteration " << resume_state->iteration << "\n";
    }

    sico::SicoEnv env{*rt.gateway,
                      *proxy,
                      *rt.segmenter,
                      *rt.lexicon,
                      *rt.plausibility,
                      [](const std::string& message) { std::cerr << message << "\n"; },
                      [&](const sico::RunState& state) {
                          sico::save_checkpoint(state, checkpoint_path);
                      }};

    try {
        sico::SicoResult result =
            sico::run_sico(config.run, triplets, eval_inputs, env, std::move(resume_state));
        sico::save_prompt(result.prompt, out / "prompt.json");
        sico::write_file_atomic(out / "trace.csv",
                                sico::trace_to_csv(result.state.utility_trace));
        write_ledger(result.state.ledger, out / "ledger.json");
        std::cout << "best utility " << result.state.best_utility << " after "
                  << result.state.iteration << " iterations\n";
        std::cout << "prompt written to " << (out / "prompt.json").string() << "\n";
        return 0;
    } catch (...) {
        write_ledger(rt.gateway->ledger(), out / "ledger.json");
        throw;
    }
}

int cmd_apply_prompt(const CommonFlags& flags, const std::string& artifact_path,
                     const std::string& inputs_path, const std::string& out_path,
                     bool continue_on_error) {
    const sico::AppConfig config = load_config(flags);
    const sico::PromptArtifact artifact = sico::load_prompt(artifact_path);
    artifact.validate();

    sico::Runtime rt = sico::build_runtime(config);

    std::string out;
    sico::for_each_jsonl_line(inputs_path, [&](std::size_t number, const std::string& line) {
        json obj = json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object() || !obj.contains("task_input")) {
            throw sico::ParseError(inputs_path + ": line " + std::to_string(number) +
                                   ": expected {\"task_input\": ...}");
        }
        const std::string task_input = obj["task_input"].get<std::string>();
        json row = {{"task_input", task_input}};
        try {
            row["output"] = rt.gateway->generate(sico::assemble_prompt(artifact, task_input));
        } catch (const std::exception& e) {
            if (!continue_on_error) throw;
            row["error"] = e.what();
        }
        out += row.dump();
        out += '\n';
    });
    sico::write_file_atomic(out_path, out);
    return 0;
}

int cmd_detect(const CommonFlags& flags, const std::string& texts_path,
               const std::string& out_path) {
    const sico::AppConfig config = load_config(flags);
    sico::Runtime rt = sico::build_runtime(config);

    std::vector<sico::TaskTriplet> triplets;
    if (config.detector.fit_on_triplets && !config.data.triplets.empty()) {
        triplets = sico::load_triplets(config.data.triplets, config.run.task_kind);
    }
    const auto detector = sico::make_detector(config.detector, *rt.gateway,
                                              triplets.empty() ? nullptr : &triplets);

    std::string out;
    for (const std::string& text : load_texts(texts_path)) {
        const sico::DetectorVerdict verdict = detector->score(text);
        const json row = {{"text", text},
                          {"detector_id", verdict.detector_id},
                          {"raw_score", verdict.raw_score},
                          {"p_ai", verdict.p_ai}};
        out += row.dump();
        out += '\n';
    }
    sico::write_file_atomic(out_path, out);
    return 0;
}

int cmd_evaluate(const CommonFlags& flags, const std::string& human_path,
                 const std::string& ai_path, const std::string& out_dir,
                 const std::string& method_id, const std::string& scores_out) {
    const sico::AppConfig config = load_config(flags);
    sico::Runtime rt = sico::build_runtime(config);

    std::vector<sico::TaskTriplet> triplets;
    if (config.detector.fit_on_triplets && !config.data.triplets.empty()) {
        triplets = sico::load_triplets(config.data.triplets, config.run.task_kind);
    }
    const auto detector = sico::make_detector(config.detector, *rt.gateway,
                                              triplets.empty() ? nullptr : &triplets);

    sico::ScoreSet scores;
    scores.detector_id = detector->id();
    scores.method_id = method_id;
    for (const std::string& text : load_texts(human_path)) {
        scores.human_scores.push_back(detector->score(text).p_ai);
    }
    for (const std::string& text : load_texts(ai_path)) {
        scores.ai_scores.push_back(detector->score(text).p_ai);
    }

    const sico::Report report = sico::build_report({scores}, {}, rt.gateway->ledger());
    const fs::path out(out_dir);
    fs::create_directories(out);
    sico::write_file_atomic(out / "report.json", sico::report_to_json(report));
    sico::write_file_atomic(out / "report.txt", sico::report_to_table(report));
    sico::write_file_atomic(out / "auc_matrix.csv", sico::auc_matrix_csv(report));
    sico::write_file_atomic(out / "roc.csv", sico::roc_csv(sico::roc_points(scores)));
    if (!scores_out.empty()) {
        sico::write_file_atomic(scores_out, sico::score_set_to_json(scores));
    }
    std::cout << "auc " << scores.detector_id << " " << scores.method_id << " "
              << sico::auc(scores) << "\n";
    return 0;
}

int cmd_report(const std::vector<std::string>& score_files, const std::string& similarity_path,
               const std::string& ledger_path, const std::string& out_dir) {
    std::vector<sico::ScoreSet> sets;
    for (const auto& file : score_files) {
        sets.push_back(sico::score_set_from_json(sico::read_file(file)));
    }
    std::vector<sico::SimilarityStat> similarity;
    if (!similarity_path.empty()) {
        json doc = json::parse(sico::read_file(similarity_path));
        for (const auto& s : doc) {
            similarity.push_back({s.at("method_id").get<std::string>(),
                                  s.at("mean_similarity").get<double>(),
                                  s.at("count").get<std::size_t>()});
        }
    }
    sico::CostLedgerSnapshot ledger;
    if (!ledger_path.empty()) {
        json doc = json::parse(sico::read_file(ledger_path));
        ledger.calls = doc.value("calls", std::uint64_t{0});
        ledger.input_tokens = doc.value("input_tokens", std::uint64_t{0});
        ledger.output_tokens = doc.value("output_tokens", std::uint64_t{0});
        ledger.estimated_cost = doc.value("estimated_cost", 0.0);
    }

    const sico::Report report = sico::build_report(sets, similarity, ledger);
    const fs::path out(out_dir);
    fs::create_directories(out);
    sico::write_file_atomic(out / "report.json", sico::report_to_json(report));
    sico::write_file_atomic(out / "report.txt", sico::report_to_table(report));
    sico::write_file_atomic(out / "auc_matrix.csv", sico::auc_matrix_csv(report));
    std::cout << sico::report_to_table(report);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"prompt construction and detector evaluation toolkit"};
    app.require_subcommand(1);

    CommonFlags build_flags;
    std::string build_out = "out";
    bool resume = false;
    auto* build = app.add_subcommand("build-prompt", "run the prompt optimization loop");
    add_common_flags(build, build_flags);
    build->add_option("--out", build_out, "output directory");
    build->add_flag("--resume", resume, "continue from the checkpoint in --out");

    CommonFlags apply_flags;
    std::string artifact_path;
    std::string apply_inputs;
    std::string apply_out = "outputs.jsonl";
    bool continue_on_error = false;
    auto* apply = app.add_subcommand("apply-prompt", "generate outputs with a saved prompt");
    add_common_flags(apply, apply_flags, /*config_required=*/false);
    apply->add_option("--artifact", artifact_path, "prompt artifact file")->required();
    apply->add_option("--inputs", apply_inputs, "JSONL of {\"task_input\"}")->required();
    apply->add_option("--out", apply_out, "output JSONL path");
    apply->add_flag("--continue-on-error", continue_on_error,
                    "emit per-line errors instead of aborting");

    CommonFlags detect_flags;
    std::string detect_texts;
    std::string detect_out = "verdicts.jsonl";
    auto* detect = app.add_subcommand("detect", "score texts with a detector");
    add_common_flags(detect, detect_flags);
    detect->add_option("--texts", detect_texts, "JSONL of {\"text\"}")->required();
    detect->add_option("--out", detect_out, "output JSONL path");

    CommonFlags eval_flags;
    std::string human_path;
    std::string ai_path;
    std::string eval_out = "eval-out";
    std::string method_id = "eval";
    std::string scores_out;
    auto* evaluate = app.add_subcommand("evaluate", "AUC/threshold report for one detector");
    add_common_flags(evaluate, eval_flags);
    evaluate->add_option("--human", human_path, "JSONL of human-written {\"text\"}")->required();
    evaluate->add_option("--ai", ai_path, "JSONL of AI-generated {\"text\"}")->required();
    evaluate->add_option("--out", eval_out, "output directory");
    evaluate->add_option("--method-id", method_id, "evasion method label");
    evaluate->add_option("--scores-out", scores_out, "also save the raw score set as JSON");

    std::vector<std::string> score_files;
    std::string similarity_path;
    std::string ledger_path;
    std::string report_out = "report-out";
    auto* report = app.add_subcommand("report", "merge saved score sets into one report");
    report->add_option("--scores", score_files, "score-set JSON files")->required();
    report->add_option("--similarity", similarity_path, "similarity stats JSON");
    report->add_option("--ledger", ledger_path, "ledger JSON");
    report->add_option("--out", report_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (build->parsed()) return cmd_build_prompt(build_flags, build_out, resume);
        if (apply->parsed()) {
            return cmd_apply_prompt(apply_flags, artifact_path, apply_inputs, apply_out,
                                    continue_on_error);
        }
        if (detect->parsed()) return cmd_detect(detect_flags, detect_texts, detect_out);
        if (evaluate->parsed()) {
            return cmd_evaluate(eval_flags, human_path, ai_path, eval_out, method_id,
                                scores_out);
        }
        if (report->parsed()) {
            return cmd_report(score_files, similarity_path, ledger_path, report_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
