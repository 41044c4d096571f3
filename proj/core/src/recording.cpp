#include "sico/recording.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "sico/errors.hpp"
#include "sico/io_util.hpp"

namespace sico {

using nlohmann::json;

RecordingStore::RecordingStore(std::filesystem::path dir)
    : dir_(std::move(dir)), file_(dir_ / "recordings.jsonl") {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (!std::filesystem::exists(file_)) {
        return;
    }
    for_each_jsonl_line(file_, [&](std::size_t number, const std::string& line) {
        json obj = json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object() || !obj.contains("key_hash") ||
            !obj.contains("response")) {
            throw ParseError(file_.string() + ": line " + std::to_string(number) +
                             ": malformed recording");
        }
        responses_[obj["key_hash"].get<std::string>()] = obj["response"].dump();
    });
}

std::optional<std::string> RecordingStore::lookup(const std::string& key_hash) const {
    std::lock_guard lock(mutex_);
    auto it = responses_.find(key_hash);
    if (it == responses_.end()) return std::nullopt;
    return it->second;
}

void RecordingStore::record(const std::string& key_hash, const std::string& request_json,
                            const std::string& response_json) {
    std::lock_guard lock(mutex_);
    json line = {{"key_hash", key_hash},
                 {"request", json::parse(request_json)},
                 {"response", json::parse(response_json)}};
    std::ofstream out(file_, std::ios::binary | std::ios::app);
    if (!out) {
        throw IoError("cannot open recording file: " + file_.string());
    }
    out << line.dump() << '\n';
    out.flush();
    if (!out) {
        throw IoError("write failed: " + file_.string());
    }
    responses_[key_hash] = response_json;
}

std::size_t RecordingStore::size() const {
    std::lock_guard lock(mutex_);
    return responses_.size();
}

} // namespace sico
