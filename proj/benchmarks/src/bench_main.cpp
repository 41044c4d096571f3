#include <benchmark/benchmark.h>

#include "sico/corpus.hpp"
#include "sico/detectors.hpp"
#include "sico/evaluation.hpp"
#include "sico/hash.hpp"
#include "sico/optimizer.hpp"
#include "sico/segmentation.hpp"
#include "sico/substitution.hpp"

namespace {

using namespace sico;

std::vector<double> random_scores(std::size_t n, std::uint64_t seed) {
    SplitMix64 rng(seed);
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(rng.next_unit());
    return out;
}

std::string lorem_text(std::size_t words, std::uint64_t seed) {
    static const std::vector<std::string> vocab = {
        "system", "signal", "filter", "value",  "steady", "narrow", "widely",
        "quite",  "simple", "model",  "score",  "input",  "output", "check"};
    SplitMix64 rng(seed);
    std::string text;
    for (std::size_t i = 0; i < words; ++i) {
        if (i) text += ' ';
        text += vocab[rng.next_below(vocab.size())];
        if (i % 11 == 10) text += '.';
    }
    return text;
}

void BM_auc(benchmark::State& state) {
    ScoreSet scores;
    scores.detector_id = "bench";
    scores.method_id = "none";
    scores.human_scores = random_scores(static_cast<std::size_t>(state.range(0)), 1);
    scores.ai_scores = random_scores(static_cast<std::size_t>(state.range(0)), 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(auc(scores));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * 2);
}
BENCHMARK(BM_auc)->Arg(200)->Arg(2000)->Arg(20000);

void BM_roc_points(benchmark::State& state) {
    ScoreSet scores;
    scores.detector_id = "bench";
    scores.method_id = "none";
    scores.human_scores = random_scores(static_cast<std::size_t>(state.range(0)), 3);
    scores.ai_scores = random_scores(static_cast<std::size_t>(state.range(0)), 4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(roc_points(scores));
    }
}
BENCHMARK(BM_roc_points)->Arg(200)->Arg(2000);

void BM_segment(benchmark::State& state) {
    const std::string text = lorem_text(static_cast<std::size_t>(state.range(0)), 7);
    const Segmenter segmenter(
        std::make_shared<DictionaryPosTagger>(std::map<std::string, PosTag>{}));
    for (auto _ : state) {
        benchmark::DoNotOptimize(segmenter.segment(text));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_segment)->Arg(100)->Arg(1000)->Arg(10000);

void BM_assemble_prompt(benchmark::State& state) {
    PromptArtifact artifact;
    artifact.feature_text = lorem_text(40, 11);
    artifact.task_instruction = InstructionTemplate::for_task(TaskKind::qa);
    for (int k = 0; k < 8; ++k) {
        artifact.examples.emplace_back(lorem_text(30, 100 + k), lorem_text(120, 200 + k));
    }
    const std::string input = lorem_text(30, 300);
    for (auto _ : state) {
        benchmark::DoNotOptimize(assemble_prompt(artifact, input));
    }
}
BENCHMARK(BM_assemble_prompt);

void BM_wordlist_score(benchmark::State& state) {
    WordlistDetector detector({"system", "signal", "filter", "value"});
    const std::string text = lorem_text(static_cast<std::size_t>(state.range(0)), 13);
    for (auto _ : state) {
        benchmark::DoNotOptimize(detector.score(text));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_wordlist_score)->Arg(100)->Arg(1000);

void BM_greedy_opt(benchmark::State& state) {
    auto tagger = std::make_shared<DictionaryPosTagger>(std::map<std::string, PosTag>{
        {"system", PosTag::noun}, {"signal", PosTag::noun}, {"filter", PosTag::noun},
        {"value", PosTag::noun},  {"model", PosTag::noun},  {"score", PosTag::noun}});
    const Segmenter segmenter(tagger);
    const SegmentedText text =
        segmenter.segment(lorem_text(static_cast<std::size_t>(state.range(0)), 17));

    CandidateSet candidates{SubstitutionLevel::word, {}};
    for (std::size_t i = 0; i < text.words.size(); ++i) {
        if (text.content_mask[i]) {
            candidates.per_position.emplace(i, std::vector<std::string>{"model", "score"});
        }
    }
    struct HashDetector : Detector {
        DetectorVerdict score(const std::string& t) const override {
            const double p = static_cast<double>(fnv1a64(t) % 9973) / 9972.0;
            return {p, p, id_};
        }
        const std::string& id() const override { return id_; }
        std::string id_ = "hash";
    } proxy;

    for (auto _ : state) {
        benchmark::DoNotOptimize(greedy_opt(text, candidates, proxy, segmenter));
    }
}
BENCHMARK(BM_greedy_opt)->Arg(50)->Arg(200);

void BM_mask_spans(benchmark::State& state) {
    const std::string text = lorem_text(static_cast<std::size_t>(state.range(0)), 23);
    const PerturbationConfig config;
    std::uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(mask_spans(text, config, seed++));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_mask_spans)->Arg(100)->Arg(1000);

} // namespace

BENCHMARK_MAIN();
