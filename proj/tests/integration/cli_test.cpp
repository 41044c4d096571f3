#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "mock_backends.hpp"
#include "sico/io_util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using sico::testing::TempDir;

namespace {

const fs::path kFixture = fs::path(SICO_FIXTURES_DIR) / "e2e";

struct CliResult {
    int exit_code;
    std::string output;
};

CliResult run_cli(const std::string& args) {
    const std::string command = std::string(SICO_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string output;
    char buffer[4096];
    std::size_t n = 0;
    while ((n = fread(buffer, 1, sizeof(buffer), pipe)) > 0) {
        output.append(buffer, n);
    }
    const int status = pclose(pipe);
    return {WEXITSTATUS(status), output};
}

std::string q(const fs::path& path) {
    return "\"" + path.string() + "\"";
}

void write_texts(const fs::path& path, const std::vector<std::string>& texts) {
    std::string out;
    for (const auto& t : texts) {
        out += json{{"text", t}}.dump();
        out += '\n';
    }
    sico::write_file_atomic(path, out);
}

/// Config with a wordlist detector over b1..b9, no gateway needed.
fs::path write_detect_config(const TempDir& dir) {
    std::string words;
    for (int i = 1; i <= 9; ++i) words += "b" + std::to_string(i) + "\n";
    sico::write_file_atomic(dir.path / "words.txt", words);
    sico::write_file_atomic(dir.path / "run.ini",
                            "[detector]\nkind = wordlist\nwordlist = words.txt\n");
    return dir.path / "run.ini";
}

} // namespace

TEST_CASE("build-prompt on the replay fixture succeeds and resumes") {
    TempDir out;
    const std::string base = "build-prompt --config " + q(kFixture / "config.ini");

    const CliResult first = run_cli(base + " --out " + q(out.path / "a"));
    CHECK(first.exit_code == 0);
    CHECK(fs::exists(out.path / "a" / "prompt.json"));
    CHECK(fs::exists(out.path / "a" / "trace.csv"));
    CHECK(fs::exists(out.path / "a" / "checkpoint.json"));
    CHECK(fs::exists(out.path / "a" / "ledger.json"));

    // Identical config + replay cache: bit-reproducible outputs.
    const CliResult second = run_cli(base + " --out " + q(out.path / "b"));
    CHECK(second.exit_code == 0);
    CHECK(sico::read_file(out.path / "a" / "prompt.json") ==
          sico::read_file(out.path / "b" / "prompt.json"));
    CHECK(sico::read_file(out.path / "a" / "trace.csv") ==
          sico::read_file(out.path / "b" / "trace.csv"));

    // A shortened run followed by --resume continues the same trajectory.
    const CliResult partial =
        run_cli(base + " --set run.iterations=3 --out " + q(out.path / "c"));
    CHECK(partial.exit_code == 0);
    const CliResult resumed = run_cli(base + " --resume --out " + q(out.path / "c"));
    CHECK(resumed.exit_code == 0);
    CHECK(sico::read_file(out.path / "c" / "trace.csv") ==
          sico::read_file(out.path / "a" / "trace.csv"));
    CHECK(sico::read_file(out.path / "c" / "prompt.json") ==
          sico::read_file(out.path / "a" / "prompt.json"));
}

TEST_CASE("build-prompt errors name the missing config key") {
    TempDir dir;
    sico::write_file_atomic(dir.path / "bad.ini", "[run]\nk = 4\n");
    const CliResult result =
        run_cli("build-prompt --config " + q(dir.path / "bad.ini"));
    CHECK(result.exit_code != 0);
    CHECK(result.output.find("data.triplets") != std::string::npos);
}

TEST_CASE("apply-prompt maps inputs to outputs in order") {
    TempDir out;
    const std::string build = "build-prompt --config " + q(kFixture / "config.ini") +
                              " --out " + q(out.path / "run");
    REQUIRE(run_cli(build).exit_code == 0);

    const std::string apply = "apply-prompt --config " + q(kFixture / "config.ini") +
                              " --artifact " + q(out.path / "run" / "prompt.json") +
                              " --inputs " + q(kFixture / "heldout.jsonl") + " --out " +
                              q(out.path / "outputs.jsonl");
    const CliResult first = run_cli(apply);
    CHECK(first.exit_code == 0);

    // One output per input, order preserved.
    std::vector<std::string> inputs;
    sico::for_each_jsonl_line(kFixture / "heldout.jsonl",
                              [&](std::size_t, const std::string& line) {
                                  inputs.push_back(
                                      json::parse(line)["task_input"].get<std::string>());
                              });
    std::vector<json> outputs;
    sico::for_each_jsonl_line(out.path / "outputs.jsonl",
                              [&](std::size_t, const std::string& line) {
                                  outputs.push_back(json::parse(line));
                              });
    REQUIRE(outputs.size() == inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        CHECK(outputs[i]["task_input"] == inputs[i]);
        CHECK(outputs[i].contains("output"));
    }

    // Replay-backed runs are byte-stable.
    const std::string first_bytes = sico::read_file(out.path / "outputs.jsonl");
    const CliResult second = run_cli(apply);
    CHECK(second.exit_code == 0);
    CHECK(sico::read_file(out.path / "outputs.jsonl") == first_bytes);

    // Empty input file -> empty output file.
    sico::write_file_atomic(out.path / "empty.jsonl", "");
    const CliResult empty = run_cli(
        "apply-prompt --config " + q(kFixture / "config.ini") + " --artifact " +
        q(out.path / "run" / "prompt.json") + " --inputs " + q(out.path / "empty.jsonl") +
        " --out " + q(out.path / "empty-out.jsonl"));
    CHECK(empty.exit_code == 0);
    CHECK(sico::read_file(out.path / "empty-out.jsonl").empty());
}

TEST_CASE("detect writes one verdict per line, deterministically") {
    TempDir dir;
    const fs::path config = write_detect_config(dir);
    write_texts(dir.path / "texts.jsonl", {"b1 b2 x y", "x y z", "b1 b2 b3 b4"});

    const std::string command = "detect --config " + q(config) + " --texts " +
                                q(dir.path / "texts.jsonl") + " --out " +
                                q(dir.path / "verdicts.jsonl");
    const CliResult result = run_cli(command);
    CHECK(result.exit_code == 0);

    std::vector<json> verdicts;
    sico::for_each_jsonl_line(dir.path / "verdicts.jsonl",
                              [&](std::size_t, const std::string& line) {
                                  verdicts.push_back(json::parse(line));
                              });
    REQUIRE(verdicts.size() == 3);
    CHECK(verdicts[0]["p_ai"] == doctest::Approx(0.5));
    CHECK(verdicts[1]["p_ai"] == doctest::Approx(0.0));
    CHECK(verdicts[2]["p_ai"] == doctest::Approx(1.0));
    CHECK(verdicts[0]["detector_id"] == "wordlist");

    const std::string bytes = sico::read_file(dir.path / "verdicts.jsonl");
    REQUIRE(run_cli(command).exit_code == 0);
    CHECK(sico::read_file(dir.path / "verdicts.jsonl") == bytes);

    // Empty input -> empty output.
    sico::write_file_atomic(dir.path / "none.jsonl", "");
    REQUIRE(run_cli("detect --config " + q(config) + " --texts " + q(dir.path / "none.jsonl") +
                    " --out " + q(dir.path / "none-out.jsonl"))
                .exit_code == 0);
    CHECK(sico::read_file(dir.path / "none-out.jsonl").empty());
}

TEST_CASE("evaluate reports AUC for separated, swapped and mixed fixtures") {
    TempDir dir;
    const fs::path config = write_detect_config(dir);

    // Flagged fractions: human {0.0, 0.1}; ai {0.9, 1.0} -> AUC 1.
    write_texts(dir.path / "human.jsonl",
                {"x1 x2 x3 x4 x5 x6 x7 x8 x9 x10", "b1 x2 x3 x4 x5 x6 x7 x8 x9 x10"});
    write_texts(dir.path / "ai.jsonl",
                {"b1 b2 b3 b4 b5 b6 b7 b8 b9 x10", "b1 b2 b3 b4 b5 b6 b7 b8 b9 b9"});

    const CliResult separated = run_cli("evaluate --config " + q(config) + " --human " +
                                        q(dir.path / "human.jsonl") + " --ai " +
                                        q(dir.path / "ai.jsonl") + " --out " +
                                        q(dir.path / "eval1"));
    CHECK(separated.exit_code == 0);
    CHECK(separated.output.find("auc wordlist eval 1") != std::string::npos);

    const CliResult swapped = run_cli("evaluate --config " + q(config) + " --human " +
                                      q(dir.path / "ai.jsonl") + " --ai " +
                                      q(dir.path / "human.jsonl") + " --out " +
                                      q(dir.path / "eval2"));
    CHECK(swapped.exit_code == 0);
    CHECK(swapped.output.find("auc wordlist eval 0\n") != std::string::npos);

    // Pairwise oracle case: human {0.3, 0.7}, ai {0.5, 0.9} -> AUC 0.75.
    write_texts(dir.path / "human2.jsonl",
                {"b1 b2 b3 x4 x5 x6 x7 x8 x9 x10", "b1 b2 b3 b4 b5 b6 b7 x8 x9 x10"});
    write_texts(dir.path / "ai2.jsonl",
                {"b1 b2 b3 b4 b5 x6 x7 x8 x9 x10", "b1 b2 b3 b4 b5 b6 b7 b8 b9 x10"});
    const CliResult mixed = run_cli("evaluate --config " + q(config) + " --human " +
                                    q(dir.path / "human2.jsonl") + " --ai " +
                                    q(dir.path / "ai2.jsonl") + " --out " +
                                    q(dir.path / "eval3") + " --scores-out " +
                                    q(dir.path / "scores.json"));
    CHECK(mixed.exit_code == 0);
    CHECK(mixed.output.find("auc wordlist eval 0.75") != std::string::npos);

    const json report = json::parse(sico::read_file(dir.path / "eval3" / "report.json"));
    CHECK(report["rows"][0]["auc"] == doctest::Approx(0.75));
    CHECK(fs::exists(dir.path / "eval3" / "roc.csv"));

    // The saved score set feeds the report command.
    const CliResult merged = run_cli("report --scores " + q(dir.path / "scores.json") +
                                     " --out " + q(dir.path / "merged"));
    CHECK(merged.exit_code == 0);
    CHECK(fs::exists(dir.path / "merged" / "report.json"));
    CHECK(fs::exists(dir.path / "merged" / "auc_matrix.csv"));
}

TEST_CASE("unknown flags and missing files exit nonzero") {
    CHECK(run_cli("detect --nope").exit_code != 0);
    TempDir dir;
    const fs::path config = write_detect_config(dir);
    CHECK(run_cli("detect --config " + q(config) + " --texts " + q(dir.path / "missing.jsonl") +
                  " --out " + q(dir.path / "o.jsonl"))
              .exit_code != 0);
}
