#include "sico/optimizer.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "sico/errors.hpp"
#include "sico/io_util.hpp"

namespace sico {

using nlohmann::json;

void RunConfig::validate() const {
    if (k < 1) throw ValidationError("run config: k must be >= 1");
    if (iterations < 1) throw ValidationError("run config: iterations must be >= 1");
    if (eval_size < 1) throw ValidationError("run config: eval_size must be >= 1");
    if (feature_count < 1) throw ValidationError("run config: feature_count must be >= 1");
    if (paraphrases_per_sentence < 0) {
        throw ValidationError("run config: paraphrases_per_sentence must be >= 0");
    }
    if (!(plausibility_tau >= 0.0 && plausibility_tau <= 1.0)) {
        throw ValidationError("run config: plausibility_tau must be in [0, 1]");
    }
    if (utility_samples < 1) throw ValidationError("run config: utility_samples must be >= 1");
    if (!custom_template.empty()) {
        InstructionTemplate{task_kind, custom_template}.validate();
    }
}

InstructionTemplate instruction_for(const RunConfig& config) {
    if (!config.custom_template.empty()) {
        InstructionTemplate t{config.task_kind, config.custom_template};
        t.validate();
        return t;
    }
    if (config.mode == PromptMode::para) {
        return InstructionTemplate::paraphrase_mode();
    }
    return InstructionTemplate::for_task(config.task_kind);
}

RunConfig configure_mode(RunConfig config, PromptMode mode) {
    config.mode = mode;
    return config;
}

std::vector<TaskTriplet> para_triplet_view(std::vector<TaskTriplet> triplets) {
    for (auto& t : triplets) {
        t.task_input = t.ai_output;
    }
    return triplets;
}

std::vector<EvalInput> para_eval_view(const std::vector<EvalInput>& inputs) {
    std::vector<EvalInput> out;
    out.reserve(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        if (inputs[i].ai_output.empty()) {
            throw ValidationError(
                "eval input #" + std::to_string(i + 1) +
                ": paraphrase mode needs the AI-generated source text in \"ai_output\"");
        }
        EvalInput e = inputs[i];
        e.task_input = e.ai_output;
        out.push_back(std::move(e));
    }
    return out;
}

void validate_mode_datasets(const RunConfig& config, const std::vector<TaskTriplet>& triplets,
                            const std::vector<EvalInput>& eval_inputs) {
    for (const auto& t : triplets) t.validate();
    if (config.mode == PromptMode::para) {
        (void)para_eval_view(eval_inputs);
    } else {
        for (std::size_t i = 0; i < eval_inputs.size(); ++i) {
            if (eval_inputs[i].task_input.empty()) {
                throw ValidationError("eval input #" + std::to_string(i + 1) +
                                      ": empty task_input");
            }
        }
    }
}

void RunState::validate() const {
    double previous = -1.0;
    for (const auto& entry : utility_trace) {
        if (entry.best_utility + 1e-12 < previous) {
            throw ValidationError("run state: utility trace is not non-decreasing");
        }
        previous = entry.best_utility;
    }
    if (!utility_trace.empty() &&
        std::abs(utility_trace.back().best_utility - best_utility) > 1e-9) {
        throw ValidationError("run state: best_utility does not match the trace");
    }
}

std::string run_state_to_json(const RunState& state) {
    json trace = json::array();
    for (const auto& e : state.utility_trace) {
        trace.push_back({{"iteration", e.iteration},
                         {"level", e.level},
                         {"candidate_utility", e.candidate_utility},
                         {"accepted", e.accepted},
                         {"best_utility", e.best_utility}});
    }
    const json doc = {
        {"version", 1},
        {"best_prompt", json::parse(prompt_to_json(state.best_prompt))},
        {"best_utility", state.best_utility},
        {"current_examples", state.current_examples},
        {"iteration", state.iteration},
        {"utility_trace", trace},
        {"ledger",
         {{"calls", state.ledger.calls},
          {"input_tokens", state.ledger.input_tokens},
          {"output_tokens", state.ledger.output_tokens},
          {"estimated_cost", state.ledger.estimated_cost}}},
        {"notes", state.notes},
    };
    return doc.dump(2) + "\n";
}

RunState run_state_from_json(const std::string& json_text) {
    json doc = json::parse(json_text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw ParseError("checkpoint: malformed JSON");
    }
    try {
        RunState state;
        state.best_prompt = prompt_from_json(doc.at("best_prompt").dump());
        state.best_utility = doc.at("best_utility").get<double>();
        state.current_examples = doc.at("current_examples").get<std::vector<std::string>>();
        state.iteration = doc.at("iteration").get<int>();
        for (const auto& e : doc.at("utility_trace")) {
            state.utility_trace.push_back({e.at("iteration").get<int>(),
                                           e.at("level").get<std::string>(),
                                           e.at("candidate_utility").get<double>(),
                                           e.at("accepted").get<bool>(),
                                           e.at("best_utility").get<double>()});
        }
        const auto& ledger = doc.at("ledger");
        state.ledger.calls = ledger.at("calls").get<std::uint64_t>();
        state.ledger.input_tokens = ledger.at("input_tokens").get<std::uint64_t>();
        state.ledger.output_tokens = ledger.at("output_tokens").get<std::uint64_t>();
        state.ledger.estimated_cost = ledger.at("estimated_cost").get<double>();
        state.notes = doc.at("notes").get<std::vector<std::string>>();
        state.validate();
        return state;
    } catch (const json::exception& e) {
        throw ParseError(std::string("checkpoint: ") + e.what());
    }
}

void save_checkpoint(const RunState& state, const std::filesystem::path& path) {
    write_file_atomic(path, run_state_to_json(state));
}

RunState load_checkpoint(const std::filesystem::path& path) {
    return run_state_from_json(read_file(path));
}

std::string trace_to_csv(const std::vector<TraceEntry>& trace) {
    std::string out = "iteration,level,candidate_utility,accepted,best_utility\n";
    for (const auto& e : trace) {
        char line[160];
        std::snprintf(line, sizeof(line), "%d,%s,%.17g,%d,%.17g\n", e.iteration,
                      e.level.c_str(), e.candidate_utility, e.accepted ? 1 : 0,
                      e.best_utility);
        out += line;
    }
    return out;
}

double utility(const PromptArtifact& prompt, const std::vector<EvalInput>& eval_inputs,
               LlmGateway& gateway, const Detector& proxy, int samples_per_input) {
    if (eval_inputs.empty()) {
        throw ValidationError("utility: empty eval input set");
    }
    if (samples_per_input < 1) {
        throw ValidationError("utility: samples_per_input must be >= 1");
    }
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& input : eval_inputs) {
        const std::string assembled = assemble_prompt(prompt, input.task_input);
        for (int s = 0; s < samples_per_input; ++s) {
            const std::string output = gateway.generate(assembled, s);
            const DetectorVerdict verdict = proxy.score(output);
            if (!(verdict.p_ai >= 0.0 && verdict.p_ai <= 1.0)) {
                throw DetectorError("utility: proxy p_ai outside [0, 1]");
            }
            total += verdict.p_ai;
            ++count;
        }
    }
    return 1.0 - total / static_cast<double>(count);
}

std::string feature_extraction_prompt(
    const std::vector<std::pair<std::string, std::string>>& ai_human_pairs) {
    std::string prompt = "Here are the writings from AI and human:\n";
    for (const auto& [ai, human] : ai_human_pairs) {
        prompt += "AI writing: ";
        prompt += ai;
        prompt += "\nHuman writing: ";
        prompt += human;
        prompt += '\n';
    }
    prompt += "What is the key distinct feature of human's writings?";
    return prompt;
}

std::vector<std::string> extract_features(
    const std::vector<std::pair<std::string, std::string>>& ai_human_pairs,
    LlmGateway& gateway, int feature_count, const Logger& log) {
    if (ai_human_pairs.empty()) {
        throw ValidationError("feature extraction: no (AI, human) pairs");
    }
    if (feature_count < 1) {
        throw ValidationError("feature extraction: feature_count must be >= 1");
    }
    const std::string prompt = feature_extraction_prompt(ai_human_pairs);
    std::vector<std::string> features;
    for (int i = 0; i < feature_count; ++i) {
        const std::string feature = trim(gateway.generate(prompt, i));
        if (feature.empty()) {
            if (log) log("feature candidate " + std::to_string(i) + " was empty, discarded");
            continue;
        }
        features.push_back(feature);
    }
    if (features.empty()) {
        throw Error("feature extraction: every candidate came back empty");
    }
    return features;
}

std::string select_feature(const std::vector<std::string>& features,
                           const InstructionTemplate& task_instruction,
                           const std::vector<EvalInput>& eval_inputs, LlmGateway& gateway,
                           const Detector& proxy, int samples_per_input) {
    if (features.empty()) {
        throw ValidationError("feature selection: no candidates");
    }
    if (features.size() == 1) {
        return features.front();
    }
    std::size_t best_index = 0;
    double best_utility = -1.0;
    for (std::size_t i = 0; i < features.size(); ++i) {
        PromptArtifact bare;
        bare.feature_text = features[i];
        bare.task_instruction = task_instruction;
        const double u = utility(bare, eval_inputs, gateway, proxy, samples_per_input);
        if (u > best_utility) {
            best_utility = u;
            best_index = i;
        }
    }
    return features[best_index];
}

std::vector<SegmentedText> init_examples(const std::string& feature_text,
                                         const std::vector<TaskTriplet>& triplets,
                                         LlmGateway& gateway, const Segmenter& segmenter,
                                         const Logger& log) {
    if (feature_text.empty()) {
        throw ValidationError("init examples: empty feature text");
    }
    std::vector<SegmentedText> examples;
    examples.reserve(triplets.size());
    for (std::size_t k = 0; k < triplets.size(); ++k) {
        const std::string prompt = paraphrase_prompt(feature_text, triplets[k].ai_output);
        std::string output = trim(gateway.generate(prompt, 0));
        if (output.empty()) {
            if (log) {
                log("init example " + std::to_string(k) +
                    ": empty paraphrase, falling back to the AI output");
            }
            output = triplets[k].ai_output;
        }
        examples.push_back(segmenter.segment(output));
    }
    return examples;
}

SegmentedText greedy_opt(const SegmentedText& text, const CandidateSet& candidates,
                         const Detector& proxy, const Segmenter& segmenter,
                         bool rescore_after_apply) {
    if (candidates.empty()) {
        return text;
    }
    const auto& spans =
        candidates.level == SubstitutionLevel::word ? text.words : text.sentences;
    for (const auto& [position, list] : candidates.per_position) {
        if (position >= spans.size()) {
            throw ValidationError("greedy: candidate position " + std::to_string(position) +
                                  " out of range");
        }
        (void)list;
    }

    if (rescore_after_apply) {
        // Sequential variant: later positions are substituted first so that
        // earlier spans keep their offsets in the evolving text.
        std::string current = text.raw;
        for (auto it = candidates.per_position.rbegin(); it != candidates.per_position.rend();
             ++it) {
            const Span span = spans[it->first];
            double best = proxy.score(current).p_ai;
            const std::string* winner = nullptr;
            for (const auto& candidate : it->second) {
                const double p = proxy.score(splice(current, span, candidate)).p_ai;
                if (p < best) {
                    best = p;
                    winner = &candidate;
                }
            }
            if (winner) {
                current = splice(current, span, *winner);
            }
        }
        return segmenter.segment(current);
    }

    const double original_score = proxy.score(text.raw).p_ai;
    std::map<std::size_t, std::string> chosen;
    for (const auto& [position, list] : candidates.per_position) {
        const Span span = spans[position];
        double best = original_score;
        const std::string* winner = nullptr;
        for (const auto& candidate : list) {
            const double p = proxy.score(splice(text.raw, span, candidate)).p_ai;
            if (p < best) {
                best = p;
                winner = &candidate;
            }
        }
        if (winner) {
            chosen.emplace(position, *winner);
        }
    }
    return apply_substitutions(segmenter, text, candidates.level, chosen);
}

SubstitutionLevel level_for_iteration(int n, SubstitutionLevel start) {
    const SubstitutionLevel other = start == SubstitutionLevel::word
                                        ? SubstitutionLevel::sentence
                                        : SubstitutionLevel::word;
    return n % 2 == 1 ? start : other;
}

namespace {

PromptArtifact make_artifact(const RunConfig& config, const std::string& feature_text,
                             const InstructionTemplate& instruction,
                             const std::vector<TaskTriplet>& triplets,
                             const std::vector<SegmentedText>& examples, int iteration) {
    PromptArtifact artifact;
    artifact.feature_text = feature_text;
    artifact.task_instruction = instruction;
    artifact.mode = config.mode;
    artifact.provenance = {config.run_id, iteration};
    for (std::size_t k = 0; k < examples.size(); ++k) {
        artifact.examples.emplace_back(triplets[k].task_input, examples[k].raw);
    }
    artifact.validate();
    return artifact;
}

} // namespace

SicoResult run_sico(const RunConfig& config, const std::vector<TaskTriplet>& triplets_in,
                    const std::vector<EvalInput>& eval_inputs_in, const SicoEnv& env,
                    std::optional<RunState> resume_from) {
    config.validate();
    validate_mode_datasets(config, triplets_in, eval_inputs_in);

    std::vector<TaskTriplet> triplets = config.mode == PromptMode::para
                                            ? para_triplet_view(triplets_in)
                                            : triplets_in;
    std::vector<EvalInput> eval_inputs = config.mode == PromptMode::para
                                             ? para_eval_view(eval_inputs_in)
                                             : eval_inputs_in;
    if (triplets.size() < static_cast<std::size_t>(config.k)) {
        throw ValidationError("run: dataset has " + std::to_string(triplets.size()) +
                              " triplets but k = " + std::to_string(config.k));
    }
    if (eval_inputs.size() < static_cast<std::size_t>(config.eval_size)) {
        throw ValidationError("run: dataset has " + std::to_string(eval_inputs.size()) +
                              " eval inputs but eval_size = " +
                              std::to_string(config.eval_size));
    }
    triplets.resize(static_cast<std::size_t>(config.k));
    eval_inputs.resize(static_cast<std::size_t>(config.eval_size));

    const InstructionTemplate instruction = instruction_for(config);

    RunState state;
    std::vector<SegmentedText> examples;
    std::string feature_text;
    int start_iteration = 1;

    if (resume_from) {
        state = std::move(*resume_from);
        state.validate();
        if (state.best_prompt.examples.size() != triplets.size()) {
            throw ValidationError("resume: checkpoint has " +
                                  std::to_string(state.best_prompt.examples.size()) +
                                  " examples but k = " + std::to_string(config.k));
        }
        feature_text = state.best_prompt.feature_text;
        for (const auto& raw : state.current_examples) {
            examples.push_back(env.segmenter.segment(raw));
        }
        start_iteration = state.iteration + 1;
    } else {
        std::vector<std::pair<std::string, std::string>> pairs;
        pairs.reserve(triplets.size());
        for (const auto& t : triplets) {
            pairs.emplace_back(t.ai_output, t.human_output);
        }
        const std::vector<std::string> features =
            extract_features(pairs, env.gateway, config.feature_count, env.log);
        feature_text = select_feature(features, instruction, eval_inputs, env.gateway,
                                      env.proxy, config.utility_samples);
        examples = init_examples(feature_text, triplets, env.gateway, env.segmenter, env.log);

        state.best_prompt =
            make_artifact(config, feature_text, instruction, triplets, examples, 0);
        state.best_utility = utility(state.best_prompt, eval_inputs, env.gateway, env.proxy,
                                     config.utility_samples);
        state.iteration = 0;
        for (const auto& e : examples) state.current_examples.push_back(e.raw);
        state.utility_trace.push_back(
            {0, "init", state.best_utility, true, state.best_utility});
        state.ledger = env.gateway.ledger();
        if (env.checkpoint) env.checkpoint(state);
    }

    try {
        for (int n = start_iteration; n <= config.iterations; ++n) {
            const SubstitutionLevel level = level_for_iteration(n, config.alternation_start);

            std::vector<SegmentedText> optimized;
            optimized.reserve(examples.size());
            for (const auto& example : examples) {
                CandidateSet candidates =
                    level == SubstitutionLevel::word
                        ? word_candidates(example, env.lexicon, env.plausibility,
                                          config.plausibility_tau)
                        : sentence_candidates(example, feature_text, env.gateway,
                                              config.paraphrases_per_sentence);
                optimized.push_back(greedy_opt(example, candidates, env.proxy, env.segmenter,
                                               config.greedy_rescore_after_apply));
            }

            const PromptArtifact candidate_prompt =
                make_artifact(config, feature_text, instruction, triplets, optimized, n);
            const double candidate_utility = utility(candidate_prompt, eval_inputs,
                                                     env.gateway, env.proxy,
                                                     config.utility_samples);
            const bool accepted = candidate_utility > state.best_utility;
            if (accepted) {
                examples = std::move(optimized);
                state.best_prompt = candidate_prompt;
                state.best_utility = candidate_utility;
                state.current_examples.clear();
                for (const auto& e : examples) state.current_examples.push_back(e.raw);
            }
            state.iteration = n;
            state.utility_trace.push_back({n, std::string(to_string(level)),
                                           candidate_utility, accepted,
                                           state.best_utility});
            state.ledger = env.gateway.ledger();
            if (env.checkpoint) env.checkpoint(state);
        }
    } catch (...) {
        state.ledger = env.gateway.ledger();
        if (env.checkpoint) env.checkpoint(state);
        throw;
    }

    state.validate();
    return {state.best_prompt, state};
}

} // namespace sico
