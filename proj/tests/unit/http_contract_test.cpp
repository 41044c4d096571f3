#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <thread>

#include "mock_backends.hpp"
#include "sico/detectors.hpp"
#include "sico/errors.hpp"
#include "sico/http_gateway.hpp"

using namespace sico;
using nlohmann::json;

namespace {

/// Local HTTP server bound to an ephemeral port for contract tests.
struct LocalServer {
    httplib::Server server;
    int port = 0;
    std::thread thread;

    void start() {
        port = server.bind_to_any_port("127.0.0.1");
        REQUIRE(port > 0);
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~LocalServer() {
        server.stop();
        if (thread.joinable()) thread.join();
    }

    std::string url(const std::string& path = "") const {
        return "http://127.0.0.1:" + std::to_string(port) + path;
    }
};

} // namespace

TEST_CASE("generation backend speaks the chat-completions contract") {
    LocalServer server;
    json seen_request;
    std::string seen_auth;
    server.server.Post("/v1/chat/completions",
                       [&](const httplib::Request& req, httplib::Response& res) {
                           seen_request = json::parse(req.body);
                           if (req.has_header("Authorization")) {
                               seen_auth = req.get_header_value("Authorization");
                           }
                           const json reply = {
                               {"choices",
                                json::array({json{{"message",
                                                   json{{"content", "hello there"}}}}})},
                               {"usage",
                                {{"prompt_tokens", 12}, {"completion_tokens", 3}}},
                           };
                           res.set_content(reply.dump(), "application/json");
                       });
    server.start();

    HttpGenerationBackend backend({server.url("/v1"), "secret-key", 5000});
    GenerationRequest request;
    request.prompt = "say hello";
    request.model_id = "test-model";
    request.max_output_tokens = 64;
    request.temperature = 0.25;

    const GenerationResult result = backend.generate(request);
    CHECK(result.text == "hello there");
    CHECK(result.prompt_tokens == 12);
    CHECK(result.completion_tokens == 3);

    CHECK(seen_request["model"] == "test-model");
    CHECK(seen_request["messages"][0]["role"] == "user");
    CHECK(seen_request["messages"][0]["content"] == "say hello");
    CHECK(seen_request["max_tokens"] == 64);
    CHECK(seen_request["temperature"] == doctest::Approx(0.25));
    CHECK(seen_auth == "Bearer secret-key");
}

TEST_CASE("default temperature is omitted from the request body") {
    LocalServer server;
    json seen_request;
    server.server.Post("/v1/chat/completions",
                       [&](const httplib::Request& req, httplib::Response& res) {
                           seen_request = json::parse(req.body);
                           const json reply = {
                               {"choices",
                                json::array({json{{"message", json{{"content", "x"}}}}})}};
                           res.set_content(reply.dump(), "application/json");
                       });
    server.start();

    HttpGenerationBackend backend({server.url("/v1"), "", 5000});
    GenerationRequest request;
    request.prompt = "p";
    request.model_id = "m";
    backend.generate(request);
    CHECK_FALSE(seen_request.contains("temperature"));
}

TEST_CASE("5xx responses surface as retriable transport errors") {
    LocalServer server;
    server.server.Post("/v1/chat/completions",
                       [](const httplib::Request&, httplib::Response& res) {
                           res.status = 503;
                           res.set_content("overloaded", "text/plain");
                       });
    server.start();
    HttpGenerationBackend backend({server.url("/v1"), "", 5000});
    GenerationRequest request;
    request.prompt = "p";
    request.model_id = "m";
    CHECK_THROWS_AS(backend.generate(request), TransportError);
}

TEST_CASE("4xx responses abort without retry") {
    LocalServer server;
    server.server.Post("/v1/chat/completions",
                       [](const httplib::Request&, httplib::Response& res) {
                           res.status = 400;
                           res.set_content("bad request", "text/plain");
                       });
    server.start();
    HttpGenerationBackend backend({server.url("/v1"), "", 5000});
    GenerationRequest request;
    request.prompt = "p";
    request.model_id = "m";
    CHECK_THROWS_AS(backend.generate(request), Error);
    CHECK_THROWS_AS(backend.generate(request), std::exception);
}

TEST_CASE("malformed completion payloads are parse errors") {
    LocalServer server;
    server.server.Post("/v1/chat/completions",
                       [](const httplib::Request&, httplib::Response& res) {
                           res.set_content("{\"choices\": []}", "application/json");
                       });
    server.start();
    HttpGenerationBackend backend({server.url("/v1"), "", 5000});
    GenerationRequest request;
    request.prompt = "p";
    request.model_id = "m";
    CHECK_THROWS_AS(backend.generate(request), ParseError);
}

TEST_CASE("connection refusal is a transport error") {
    HttpGenerationBackend backend({"http://127.0.0.1:1", "", 500});
    GenerationRequest request;
    request.prompt = "p";
    request.model_id = "m";
    CHECK_THROWS_AS(backend.generate(request), TransportError);
}

TEST_CASE("scoring backend speaks the token-scores contract") {
    LocalServer server;
    json seen_request;
    server.server.Post("/score", [&](const httplib::Request& req, httplib::Response& res) {
        seen_request = json::parse(req.body);
        const json reply = {
            {"tokens", json::array({json{{"text", "a"}, {"log_prob", -0.5}, {"rank", 2}},
                                    json{{"text", "b"}, {"log_prob", -1.5}, {"rank", 1}}})}};
        res.set_content(reply.dump(), "application/json");
    });
    server.start();

    HttpScoringBackend backend({server.url(), "", 5000}, "tiny-model");
    const auto scores = backend.score_tokens("a b");
    REQUIRE(scores.size() == 2);
    CHECK(scores[0].token_text == "a");
    CHECK(scores[0].log_prob == -0.5);
    CHECK(scores[0].rank == 2);
    CHECK(seen_request["model"] == "tiny-model");
    CHECK(seen_request["text"] == "a b");
}

TEST_CASE("scoring rejects invalid ranks") {
    LocalServer server;
    server.server.Post("/score", [](const httplib::Request&, httplib::Response& res) {
        const json reply = {
            {"tokens", json::array({json{{"text", "a"}, {"log_prob", -0.5}, {"rank", 0}}})}};
        res.set_content(reply.dump(), "application/json");
    });
    server.start();
    HttpScoringBackend backend({server.url(), "", 5000}, "tiny");
    CHECK_THROWS_AS(backend.score_tokens("a"), ParseError);
}

TEST_CASE("remote classifier passes the probability through") {
    LocalServer server;
    json seen_request;
    server.server.Post("/classify", [&](const httplib::Request& req, httplib::Response& res) {
        seen_request = json::parse(req.body);
        res.set_content(R"({"p_ai": 0.99})", "application/json");
    });
    server.start();

    RemoteClassifierDetector detector(server.url("/classify"), "", 5000, 2, "gpt3-d");
    const DetectorVerdict verdict = detector.score("suspicious text");
    CHECK(verdict.p_ai == 0.99);
    CHECK(verdict.raw_score == 0.99);
    CHECK(verdict.detector_id == "gpt3-d");
    CHECK(seen_request["text"] == "suspicious text");
}

TEST_CASE("remote classifier rejects out-of-range probabilities") {
    LocalServer server;
    server.server.Post("/classify", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"p_ai": 1.2})", "application/json");
    });
    server.start();
    RemoteClassifierDetector detector(server.url("/classify"), "", 5000, 2);
    CHECK_THROWS_AS(detector.score("text"), DetectorError);
}

TEST_CASE("remote classifier rejects missing fields, never defaults to 0") {
    LocalServer server;
    server.server.Post("/classify", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"probability": 0.4})", "application/json");
    });
    server.start();
    RemoteClassifierDetector detector(server.url("/classify"), "", 5000, 2);
    CHECK_THROWS_AS(detector.score("text"), DetectorError);
}

TEST_CASE("remote classifier retries transport failures then fails") {
    // Unreachable endpoint: every attempt is a transport error.
    RemoteClassifierDetector detector("http://127.0.0.1:1/classify", "", 300, 2);
    CHECK_THROWS_AS(detector.score("text"), DetectorError);
}

TEST_CASE("ensemble of two remote classifiers takes the max") {
    LocalServer server;
    server.server.Post("/original", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"p_ai": 0.30})", "application/json");
    });
    server.server.Post("/hardened", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"p_ai": 0.80})", "application/json");
    });
    server.start();

    EnsembleMaxDetector ensemble(
        std::make_shared<RemoteClassifierDetector>(server.url("/original"), "", 5000, 2, "o"),
        std::make_shared<RemoteClassifierDetector>(server.url("/hardened"), "", 5000, 2, "h"));
    const DetectorVerdict verdict = ensemble.score("text");
    CHECK(verdict.p_ai == 0.80);
    CHECK(verdict.detector_id == "max(o,h)");
}
