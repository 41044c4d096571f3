#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sico/corpus.hpp"
#include "sico/detectors.hpp"
#include "sico/gateway.hpp"
#include "sico/substitution.hpp"

namespace sico {

struct RunConfig {
    TaskKind task_kind = TaskKind::qa;
    PromptMode mode = PromptMode::gen;
    int k = 8;                 // in-context examples
    int iterations = 6;        // N
    int eval_size = 32;        // |X_eval|
    int feature_count = 5;
    SubstitutionLevel alternation_start = SubstitutionLevel::sentence;
    int paraphrases_per_sentence = 4; // M
    double plausibility_tau = 1e-3;
    int utility_samples = 1;   // generations per eval input
    bool greedy_rescore_after_apply = false;
    std::string run_id;
    std::string custom_template; // overrides the built-in instruction when set

    void validate() const;
};

/// The instruction a run uses: the paraphrase instruction in para mode, the
/// task's own instruction otherwise, unless a custom template overrides both.
InstructionTemplate instruction_for(const RunConfig& config);

/// Swaps the operating mode; everything else (K, N, ...) is unchanged.
RunConfig configure_mode(RunConfig config, PromptMode mode);

/// Para mode rewrites task inputs to the AI-generated source text. Eval
/// inputs must carry that text in `ai_output`; loudly rejected otherwise.
std::vector<TaskTriplet> para_triplet_view(std::vector<TaskTriplet> triplets);
std::vector<EvalInput> para_eval_view(const std::vector<EvalInput>& inputs);

void validate_mode_datasets(const RunConfig& config, const std::vector<TaskTriplet>& triplets,
                            const std::vector<EvalInput>& eval_inputs);

struct TraceEntry {
    int iteration = 0;
    std::string level;              // "init", "word" or "sentence"
    double candidate_utility = 0.0; // U of the prompt evaluated this iteration
    bool accepted = false;
    double best_utility = 0.0;      // U(p*) after the iteration

    bool operator==(const TraceEntry&) const = default;
};

struct RunState {
    PromptArtifact best_prompt;
    double best_utility = 0.0;
    std::vector<std::string> current_examples; // raw in-context outputs
    int iteration = 0;                         // last completed iteration
    std::vector<TraceEntry> utility_trace;
    CostLedgerSnapshot ledger;
    std::vector<std::string> notes;

    void validate() const; // monotone trace, consistent best utility
};

std::string run_state_to_json(const RunState& state);
RunState run_state_from_json(const std::string& json_text);
void save_checkpoint(const RunState& state, const std::filesystem::path& path);
RunState load_checkpoint(const std::filesystem::path& path);
std::string trace_to_csv(const std::vector<TraceEntry>& trace);

using Logger = std::function<void(const std::string&)>;
using CheckpointSink = std::function<void(const RunState&)>;

/// Prompt utility: 1 - mean AI probability of the prompt's generations over
/// the eval inputs. Any generation or scoring failure aborts the evaluation.
double utility(const PromptArtifact& prompt, const std::vector<EvalInput>& eval_inputs,
               LlmGateway& gateway, const Detector& proxy, int samples_per_input = 1);

/// Renders the feature-extraction prompt over (AI, human) output pairs.
std::string feature_extraction_prompt(
    const std::vector<std::pair<std::string, std::string>>& ai_human_pairs);

/// Asks the LLM for `feature_count` candidate descriptions of how the human
/// outputs differ from the AI ones; empty completions are dropped.
std::vector<std::string> extract_features(
    const std::vector<std::pair<std::string, std::string>>& ai_human_pairs,
    LlmGateway& gateway, int feature_count, const Logger& log = {});

/// Evaluates each feature on a bare prompt (feature + instruction, no
/// examples) and returns the one with maximal utility; ties keep the lowest
/// index. A single candidate is returned without comparison.
std::string select_feature(const std::vector<std::string>& features,
                           const InstructionTemplate& task_instruction,
                           const std::vector<EvalInput>& eval_inputs, LlmGateway& gateway,
                           const Detector& proxy, int samples_per_input = 1);

/// Feature-guided paraphrases of each triplet's AI output; an empty
/// paraphrase falls back to the AI output verbatim (logged).
std::vector<SegmentedText> init_examples(const std::string& feature_text,
                                         const std::vector<TaskTriplet>& triplets,
                                         LlmGateway& gateway, const Segmenter& segmenter,
                                         const Logger& log = {});

/// Greedy substitution: each position picks the candidate whose single
/// substitution into the *original* text scores strictly lower than the
/// original (ties keep the original, equal minima keep the earliest
/// candidate); all winners are then applied jointly. The rescore variant
/// re-evaluates against the partially substituted text instead.
SegmentedText greedy_opt(const SegmentedText& text, const CandidateSet& candidates,
                         const Detector& proxy, const Segmenter& segmenter,
                         bool rescore_after_apply = false);

/// Substitution level used at 1-based iteration n.
SubstitutionLevel level_for_iteration(int n, SubstitutionLevel start);

struct SicoEnv {
    LlmGateway& gateway;
    const Detector& proxy;
    const Segmenter& segmenter;
    const SynonymLexicon& lexicon;
    const PlausibilityFilter& plausibility;
    Logger log = {};
    CheckpointSink checkpoint = {};
};

struct SicoResult {
    PromptArtifact prompt;
    RunState state;
};

/// The full optimization loop: feature extraction and selection, in-context
/// example initialization, then `iterations` rounds of candidate generation
/// (alternating sentence/word level), greedy substitution, and strict
/// utility-improvement acceptance. On an unrecoverable backend error the
/// current state is checkpointed before the error propagates.
SicoResult run_sico(const RunConfig& config, const std::vector<TaskTriplet>& triplets,
                    const std::vector<EvalInput>& eval_inputs, const SicoEnv& env,
                    std::optional<RunState> resume_from = std::nullopt);

} // namespace sico
