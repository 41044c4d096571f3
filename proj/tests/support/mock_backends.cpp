#include "mock_backends.hpp"

#include <random>

#include "sico/hash.hpp"

namespace sico::testing {

LlmGateway make_canned_gateway(std::map<std::string, std::string> responses,
                               GatewayConfig config) {
    auto backend = std::make_shared<FunctionGenerationBackend>(
        [table = std::move(responses)](const GenerationRequest& request) {
            auto it = table.find(request.prompt);
            if (it == table.end()) {
                throw Error("canned gateway: no response for prompt \"" + request.prompt +
                            "\"");
            }
            return it->second;
        });
    config.retry_initial_delay_ms = 1;
    return LlmGateway(std::move(backend), nullptr, std::move(config));
}

TempDir::TempDir() {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() /
           ("sico_test_" + to_hex((static_cast<std::uint64_t>(rd()) << 32) ^ rd()));
    std::filesystem::create_directories(path);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
}

} // namespace sico::testing
