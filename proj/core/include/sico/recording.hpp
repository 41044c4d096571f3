#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>

namespace sico {

/// Append-only store of (key_hash, request, response) JSONL records backing
/// the gateway's record/replay modes. Responses are stored as serialized JSON
/// strings; the gateway owns their schema.
class RecordingStore {
public:
    explicit RecordingStore(std::filesystem::path dir);

    /// Returns the serialized response for a key, if recorded.
    std::optional<std::string> lookup(const std::string& key_hash) const;

    /// Records a response (idempotent per key; later records win in memory
    /// but every call is appended to the log).
    void record(const std::string& key_hash, const std::string& request_json,
                const std::string& response_json);

    std::size_t size() const;
    const std::filesystem::path& file_path() const { return file_; }

private:
    std::filesystem::path dir_;
    std::filesystem::path file_;
    std::map<std::string, std::string> responses_;
    mutable std::mutex mutex_;
};

} // namespace sico
