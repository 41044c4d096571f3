#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mock_backends.hpp"
#include "sico/calibration.hpp"
#include "sico/detector_factory.hpp"
#include "sico/detectors.hpp"
#include "sico/errors.hpp"
#include "sico/hash.hpp"
#include "sico/io_util.hpp"

using namespace sico;
using namespace sico::testing;

namespace {

const CalibrationMap kLogistic{CalibrationKind::logistic, 1.0, 0.0};

LlmGateway gateway_over(std::shared_ptr<ScoringBackend> scoring) {
    GatewayConfig config;
    config.retry_initial_delay_ms = 1;
    return LlmGateway(nullptr, std::move(scoring), std::move(config));
}

std::shared_ptr<TableScoringBackend> fixed_ranks(const std::string& text,
                                                 std::vector<std::int64_t> ranks) {
    std::vector<TokenScore> scores;
    for (std::int64_t r : ranks) scores.push_back({"t", -1.0, r});
    return std::make_shared<TableScoringBackend>(
        std::map<std::string, std::vector<TokenScore>>{{text, scores}});
}

} // namespace

TEST_CASE("log-rank: all ranks 1 scores 0, maximally AI-like") {
    auto gateway = gateway_over(fixed_ranks("txt", {1, 1, 1}));
    LogRankDetector detector(gateway, kLogistic);
    const DetectorVerdict v = detector.score("txt");
    CHECK(v.raw_score == 0.0);
    CHECK(v.p_ai == doctest::Approx(0.5));
    CHECK(v.detector_id == "log-rank");
}

TEST_CASE("log-rank mean-log arithmetic: ranks 1,3,9 give -ln 3") {
    auto gateway = gateway_over(fixed_ranks("txt", {1, 3, 9}));
    LogRankDetector detector(gateway, kLogistic);
    // (ln 1 + ln 3 + ln 9) / 3 = ln 3, negated for higher-is-AI orientation.
    CHECK(detector.score("txt").raw_score == doctest::Approx(-std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("log-rank raw-rank variant averages plain ranks") {
    auto gateway = gateway_over(fixed_ranks("txt", {1, 3, 9}));
    LogRankDetector detector(gateway, kLogistic, /*use_raw_rank=*/true);
    CHECK(detector.score("txt").raw_score ==
          doctest::Approx(-(1.0 + 3.0 + 9.0) / 3.0).epsilon(1e-12));
}

TEST_CASE("log-rank matches brute force on a bigram mock") {
    BigramScoringModel::Table table;
    table["<s>"] = {{"the", 0.5}, {"a", 0.3}, {"fox", 0.2}};
    table["the"] = {{"fox", 0.6}, {"a", 0.25}, {"the", 0.15}};
    table["a"] = {{"fox", 0.7}, {"the", 0.3}};
    table["fox"] = {{"the", 0.5}, {"a", 0.3}, {"fox", 0.2}};
    auto gateway = gateway_over(std::make_shared<BigramScoringModel>(table));
    LogRankDetector detector(gateway, kLogistic);

    const std::string text = "a fox the fox a";
    const auto tokens = BigramScoringModel::tokenize(text);
    double expected = 0.0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const std::string context = i == 0 ? "<s>" : tokens[i - 1];
        const double p = table.at(context).at(tokens[i]);
        std::int64_t rank = 1;
        for (const auto& [token, q] : table.at(context)) {
            (void)token;
            if (q > p) ++rank;
        }
        expected += std::log(static_cast<double>(rank));
    }
    expected = -expected / static_cast<double>(tokens.size());
    CHECK(detector.score(text).raw_score == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("log-rank rejects empty text") {
    auto gateway = gateway_over(fixed_ranks("txt", {1}));
    LogRankDetector detector(gateway, kLogistic);
    CHECK_THROWS_AS(detector.score(""), DetectorError);
}

TEST_CASE("single-token text is scored over that token") {
    auto gateway = gateway_over(fixed_ranks("word", {4}));
    LogRankDetector detector(gateway, kLogistic);
    CHECK(detector.score("word").raw_score == doctest::Approx(-std::log(4.0)));
}

TEST_CASE("perplexity: uniform model scores -log V exactly") {
    constexpr int kVocab = 8;
    BigramScoringModel::Table table;
    BigramScoringModel::Row row;
    for (int i = 0; i < kVocab; ++i) row["w" + std::to_string(i)] = 1.0 / kVocab;
    table["<s>"] = row;
    for (int i = 0; i < kVocab; ++i) table["w" + std::to_string(i)] = row;
    auto gateway = gateway_over(std::make_shared<BigramScoringModel>(table));
    PerplexityDetector detector(gateway, kLogistic);
    CHECK(detector.score("w0 w3 w7").raw_score ==
          doctest::Approx(-std::log(static_cast<double>(kVocab))).epsilon(1e-12));
}

TEST_CASE("perplexity is monotone in token log-probs") {
    auto scoring = std::make_shared<TableScoringBackend>(
        std::map<std::string, std::vector<TokenScore>>{
            {"likely", {{"a", -0.1, 1}, {"b", -0.2, 1}}},
            {"unlikely", {{"a", -2.0, 3}, {"b", -3.0, 4}}},
        });
    auto gateway = gateway_over(scoring);
    PerplexityDetector detector(gateway, kLogistic);
    CHECK(detector.score("likely").raw_score > detector.score("unlikely").raw_score);
}

TEST_CASE("perplexity matches the bigram table sum") {
    BigramScoringModel::Table table;
    table["<s>"] = {{"x", 0.6}, {"y", 0.4}};
    table["x"] = {{"y", 0.9}, {"x", 0.1}};
    table["y"] = {{"x", 0.8}, {"y", 0.2}};
    auto gateway = gateway_over(std::make_shared<BigramScoringModel>(table));
    PerplexityDetector detector(gateway, kLogistic);
    const double expected =
        (std::log(0.6) + std::log(0.9) + std::log(0.2) + std::log(0.8)) / 4.0;
    CHECK(detector.score("x y y x").raw_score == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("orientation: tokenwise more probable text never scores lower") {
    SplitMix64 rng(99);
    for (int round = 0; round < 25; ++round) {
        // Two-token vocabulary where "hi" always beats "lo".
        const double p_hi = 0.55 + 0.4 * rng.next_unit();
        BigramScoringModel::Table table;
        const BigramScoringModel::Row row = {{"hi", p_hi}, {"lo", 1.0 - p_hi}};
        table["<s>"] = row;
        table["hi"] = row;
        table["lo"] = row;
        auto gateway = gateway_over(std::make_shared<BigramScoringModel>(table));

        std::string likely = "hi";
        std::string unlikely = "lo";
        for (int i = 0; i < 5; ++i) {
            likely += " hi";
            unlikely += " lo";
        }
        PerplexityDetector perplexity(gateway, kLogistic);
        CHECK(perplexity.score(likely).raw_score >= perplexity.score(unlikely).raw_score);
        LogRankDetector log_rank(gateway, kLogistic);
        CHECK(log_rank.score(likely).raw_score >= log_rank.score(unlikely).raw_score);
    }
}

TEST_CASE("detectgpt reproduces the hand-computed z = 3 case") {
    // One-token scoring table: original -10, perturbations -12 and -14.
    auto scoring = std::make_shared<FunctionScoringBackend>([](const std::string& text) {
        if (text.find("zq0") != std::string::npos) return -12.0;
        if (text.find("zq1") != std::string::npos) return -14.0;
        return -10.0;
    });
    auto gateway = gateway_over(scoring);
    auto mask_fill = std::make_shared<FunctionMaskFill>(
        [](const std::string&, std::size_t count, int sample_index) {
            return std::vector<std::string>(count, "zq" + std::to_string(sample_index));
        });
    PerturbationConfig config;
    config.sample_count = 2;
    config.replacement_ratio = 0.3;
    DetectGptDetector detector(gateway, mask_fill, config, kLogistic);

    const DetectorVerdict v = detector.score("one two three four five six seven eight");
    // mean = -13, population std = 1, z = (-10 - -13) / 1 = 3, exactly.
    CHECK(v.raw_score == 3.0);
}

TEST_CASE("detectgpt zero-variance guard returns exactly 0") {
    auto scoring =
        std::make_shared<FunctionScoringBackend>([](const std::string&) { return -10.0; });
    auto gateway = gateway_over(scoring);
    auto mask_fill = std::make_shared<FunctionMaskFill>(
        [](const std::string&, std::size_t count, int sample_index) {
            return std::vector<std::string>(count, "fill" + std::to_string(sample_index));
        });
    PerturbationConfig config;
    config.sample_count = 3;
    DetectGptDetector detector(gateway, mask_fill, config, kLogistic);
    CHECK(detector.score("alpha beta gamma delta").raw_score == 0.0);
}

TEST_CASE("detectgpt defaults match sample_count 100 and ratio 0.3") {
    const PerturbationConfig config;
    CHECK(config.sample_count == 100);
    CHECK(config.replacement_ratio == 0.3);
    config.validate();
}

TEST_CASE("perturbation config validation") {
    PerturbationConfig config;
    config.sample_count = 1;
    CHECK_THROWS_AS(config.validate(), ValidationError);
    config.sample_count = 2;
    config.replacement_ratio = 0.0;
    CHECK_THROWS_AS(config.validate(), ValidationError);
    config.replacement_ratio = 1.0;
    CHECK_THROWS_AS(config.validate(), ValidationError);
}

TEST_CASE("detectgpt without a mask-fill backend is a configuration error") {
    auto gateway = gateway_over(
        std::make_shared<FunctionScoringBackend>([](const std::string&) { return -1.0; }));
    DetectGptDetector detector(gateway, nullptr, PerturbationConfig{}, kLogistic);
    CHECK_THROWS_AS(detector.score("text"), ConfigError);
}

TEST_CASE("mask_spans masks roughly the requested token ratio") {
    PerturbationConfig config;
    config.replacement_ratio = 0.3;
    config.span_length = 2;
    std::string text;
    for (int i = 0; i < 40; ++i) text += "tok" + std::to_string(i) + " ";
    const auto [masked, count] = mask_spans(text, config, 1234);
    CHECK(count >= 6); // ceil(0.3 * 40) = 12 tokens = 6 two-token spans
    CHECK(masked.find("<mask_0>") != std::string::npos);
    // Deterministic under the same seed.
    CHECK(mask_spans(text, config, 1234).first == masked);
    CHECK(mask_spans(text, config, 99).first != masked);
}

TEST_CASE("ensemble max picks the higher probability") {
    const DetectorVerdict low{0.2, 0.2, "a"};
    const DetectorVerdict high{0.7, 0.7, "b"};
    CHECK(ensemble_max(low, high).p_ai == 0.7);
    CHECK(ensemble_max({0.0, 0.0, "a"}, {0.0, 0.0, "b"}).p_ai == 0.0);
    CHECK(ensemble_max({0.9, 0.9, "a"}, {0.3, 0.3, "b"}).p_ai == 0.9);
    CHECK(ensemble_max(low, high).detector_id == "max(a,b)");
}

TEST_CASE("ensemble dominance property") {
    SplitMix64 rng(5);
    for (int i = 0; i < 100; ++i) {
        const double a = rng.next_unit();
        const double b = rng.next_unit();
        const DetectorVerdict v = ensemble_max({a, a, "a"}, {b, b, "b"});
        CHECK(v.p_ai >= a);
        CHECK(v.p_ai >= b);
        CHECK((v.p_ai == a || v.p_ai == b));
    }
}

TEST_CASE("ensemble detector combines two detectors") {
    auto first = std::make_shared<FunctionDetector>(
        [](const std::string& text) { return text.size() > 3 ? 0.8 : 0.1; }, "len");
    auto second = std::make_shared<FunctionDetector>(
        [](const std::string&) { return 0.5; }, "const");
    EnsembleMaxDetector ensemble(first, second);
    CHECK(ensemble.score("long text").p_ai == 0.8);
    CHECK(ensemble.score("ab").p_ai == 0.5);
    CHECK(ensemble.id() == "max(len,const)");
}

TEST_CASE("calibration fit saturates on widely separated classes") {
    const CalibrationMap map = fit_calibration({5.0, 6.0}, {-5.0, -6.0});
    CHECK(map.kind == CalibrationKind::logistic);
    CHECK(map.slope > 0.0);
    CHECK(map.apply(5.5) >= 0.9);
    CHECK(map.apply(-5.5) <= 0.1);
}

TEST_CASE("fitted calibration is monotone, strictly so until saturation") {
    const CalibrationMap map = fit_calibration({1.0, 2.0, 3.0}, {-1.0, 0.0, 0.5});
    double previous = -1.0;
    for (double s = -5.0; s <= 5.0; s += 0.25) {
        const double p = map.apply(s);
        CHECK(p >= previous);
        previous = p;
    }
    // Strict growth where the sigmoid has not flushed to 0/1 in doubles.
    CHECK(map.apply(0.3) > map.apply(0.2));
    CHECK(map.apply(-0.2) > map.apply(-0.3));
}

TEST_CASE("identical class scores cannot be calibrated") {
    CHECK_THROWS_AS(fit_calibration({1.0, 2.0}, {2.0, 1.0}), ValidationError);
    CHECK_THROWS_AS(fit_calibration({1.0}, {0.0, 0.5}), ValidationError);
}

TEST_CASE("inverted orientation is rejected by the fit") {
    // AI scores below human ones: a positive slope cannot explain this.
    CHECK_THROWS_AS(fit_calibration({-5.0, -6.0}, {5.0, 6.0}), ValidationError);
}

TEST_CASE("identity calibration on out-of-range raw scores is a detector error") {
    auto gateway = gateway_over(fixed_ranks("txt", {3, 5}));
    LogRankDetector detector(gateway, CalibrationMap{CalibrationKind::identity, 1.0, 0.0});
    CHECK_THROWS_AS(detector.score("txt"), DetectorError);
}

TEST_CASE("llm mask fill parses one replacement per line") {
    auto backend = std::make_shared<FunctionGenerationBackend>(
        [](const GenerationRequest&) { return "first fill\nsecond fill\n"; });
    GatewayConfig gc;
    gc.retry_initial_delay_ms = 1;
    LlmGateway gateway(backend, nullptr, gc);
    const LlmMaskFill fill(gateway);
    const auto fills = fill.fill("text <mask_0> mid <mask_1> end", 2, 0, 42);
    CHECK(fills == std::vector<std::string>{"first fill", "second fill"});

    CHECK_THROWS_AS(fill.fill("text <mask_0> <mask_1> <mask_2>", 3, 0, 42), DetectorError);
}

TEST_CASE("detector factory builds from config") {
    GatewayConfig gc;
    gc.retry_initial_delay_ms = 1;

    // Unknown kinds and missing pieces are configuration errors.
    {
        LlmGateway gateway(nullptr, nullptr, gc);
        DetectorConfig config;
        config.kind = "nope";
        CHECK_THROWS_AS(make_detector(config, gateway, nullptr), ConfigError);
        config.kind = "wordlist";
        CHECK_THROWS_AS(make_detector(config, gateway, nullptr), ConfigError);
        config.kind = "ensemble";
        CHECK_THROWS_AS(make_detector(config, gateway, nullptr), ConfigError);
    }

    // Statistical detector with the calibration fitted on triplets.
    {
        BigramScoringModel::Table table;
        const BigramScoringModel::Row row = {{"hi", 0.8}, {"lo", 0.2}};
        table["<s>"] = row;
        table["hi"] = row;
        table["lo"] = row;
        LlmGateway gateway(nullptr, std::make_shared<BigramScoringModel>(table), gc);

        DetectorConfig config;
        config.kind = "log_rank";
        config.id = "fitted";
        config.calibration = CalibrationKind::logistic;
        config.fit_on_triplets = true;
        const std::vector<TaskTriplet> triplets = {
            {"q", "hi hi hi hi", "lo lo lo lo", TaskKind::qa},
            {"q", "hi hi hi", "lo lo hi lo", TaskKind::qa},
        };
        const auto detector = make_detector(config, gateway, &triplets);
        CHECK(detector->id() == "fitted");
        CHECK(detector->score("hi hi hi hi").p_ai > detector->score("lo lo lo lo").p_ai);
        CHECK(detector->score("hi hi hi hi").p_ai > 0.5);
        CHECK(detector->score("lo lo lo lo").p_ai < 0.5);

        DetectorConfig no_data = config;
        CHECK_THROWS_AS(make_detector(no_data, gateway, nullptr), ConfigError);
    }
}

TEST_CASE("price table loads from JSON and prices per 1K tokens") {
    sico::testing::TempDir dir;
    write_file_atomic(dir.path / "prices.json",
                      R"({"m1": {"input_per_1k": 0.5, "output_per_1k": 1.5}})");
    const PriceTable table = PriceTable::load(dir.path / "prices.json");
    CHECK(table.cost("m1", 2000, 1000) == doctest::Approx(0.5 * 2 + 1.5 * 1));
    CHECK(table.cost("unknown", 2000, 1000) == 0.0);
    write_file_atomic(dir.path / "bad.json", R"({"m1": {"input_per_1k": 0.5}})");
    CHECK_THROWS_AS(PriceTable::load(dir.path / "bad.json"), ParseError);
}

TEST_CASE("wordlist detector scores the flagged fraction") {
    WordlistDetector detector({"alpha", "beta"});
    CHECK(detector.score("alpha beta gamma delta").p_ai == doctest::Approx(0.5));
    CHECK(detector.score("Alpha!").p_ai == doctest::Approx(1.0)); // case and punctuation
    CHECK(detector.score("gamma delta").p_ai == 0.0);
    CHECK_THROWS_AS(detector.score("..."), DetectorError);
}
