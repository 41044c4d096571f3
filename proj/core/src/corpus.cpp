#include "sico/corpus.hpp"

#include <nlohmann/json.hpp>

#include "sico/errors.hpp"
#include "sico/io_util.hpp"

namespace sico {

using nlohmann::json;

TaskKind task_kind_from_string(std::string_view s) {
    if (s == "writing") return TaskKind::writing;
    if (s == "qa") return TaskKind::qa;
    if (s == "review") return TaskKind::review;
    if (s == "paraphrase") return TaskKind::paraphrase;
    throw ValidationError("unknown task kind: \"" + std::string(s) +
                          "\" (expected writing|qa|review|paraphrase)");
}

std::string_view to_string(TaskKind kind) {
    switch (kind) {
    case TaskKind::writing: return "writing";
    case TaskKind::qa: return "qa";
    case TaskKind::review: return "review";
    case TaskKind::paraphrase: return "paraphrase";
    }
    return "qa";
}

void TaskTriplet::validate() const {
    if (task_input.empty()) throw ValidationError("triplet: empty task_input");
    if (ai_output.empty()) throw ValidationError("triplet: empty ai_output");
    if (human_output.empty()) throw ValidationError("triplet: empty human_output");
}

InstructionTemplate InstructionTemplate::for_task(TaskKind kind) {
    switch (kind) {
    case TaskKind::writing:
        return {kind,
                "Based on the description, complete an academic paragraph in human style "
                "writings:\nPrompt: {x}\nHuman:"};
    case TaskKind::qa:
        return {kind,
                "Based on the description, answer questions in human style writings:\nQ: "
                "{x}\nHuman:"};
    case TaskKind::review:
        return {kind,
                "Based on the description, write a human review about the given object and "
                "keywords, with a specified sentiment:\nObject, Keywords, Sentiment: "
                "{x}\nHuman:"};
    case TaskKind::paraphrase:
        return paraphrase_mode();
    }
    return paraphrase_mode();
}

InstructionTemplate InstructionTemplate::paraphrase_mode() {
    return {TaskKind::paraphrase,
            "Based on the description, rewrite this in human-style writings:\nOrigin: "
            "{x}\nHuman:"};
}

void InstructionTemplate::validate() const {
    const auto first = template_text.find(kPlaceholder);
    if (first == std::string::npos) {
        throw ValidationError("instruction template: missing {x} input placeholder");
    }
    if (template_text.find(kPlaceholder, first + kPlaceholder.size()) != std::string::npos) {
        throw ValidationError("instruction template: more than one {x} placeholder");
    }
    if (trim(template_text.substr(first + kPlaceholder.size())).empty()) {
        throw ValidationError("instruction template: no completion marker after {x}");
    }
}

std::string InstructionTemplate::render(std::string_view task_input) const {
    const auto pos = template_text.find(kPlaceholder);
    if (pos == std::string::npos) {
        throw ValidationError("instruction template: missing {x} input placeholder");
    }
    std::string out;
    out.reserve(template_text.size() + task_input.size());
    out.append(template_text, 0, pos);
    out.append(task_input);
    out.append(template_text, pos + kPlaceholder.size(), std::string::npos);
    return out;
}

std::string InstructionTemplate::completion_marker() const {
    const auto pos = template_text.find(kPlaceholder);
    if (pos == std::string::npos) return {};
    return trim(template_text.substr(pos + kPlaceholder.size()));
}

PromptMode prompt_mode_from_string(std::string_view s) {
    if (s == "gen") return PromptMode::gen;
    if (s == "para") return PromptMode::para;
    throw ValidationError("unknown mode: \"" + std::string(s) + "\" (expected gen|para)");
}

std::string_view to_string(PromptMode mode) {
    return mode == PromptMode::gen ? "gen" : "para";
}

void PromptArtifact::validate() const {
    if (feature_text.empty()) {
        throw ValidationError("prompt artifact: empty feature_text");
    }
    task_instruction.validate();
    for (const auto& [input, output] : examples) {
        if (input.empty() || output.empty()) {
            throw ValidationError("prompt artifact: empty in-context example field");
        }
    }
}

namespace {

std::string required_string(const json& obj, const char* key, std::size_t line,
                            const std::filesystem::path& path) {
    if (!obj.contains(key) || !obj[key].is_string()) {
        throw ValidationError(path.string() + ": line " + std::to_string(line) +
                              ": missing or non-string field \"" + key + "\"");
    }
    auto value = obj[key].get<std::string>();
    if (value.empty()) {
        throw ValidationError(path.string() + ": line " + std::to_string(line) +
                              ": empty field \"" + key + "\"");
    }
    return value;
}

json parse_line(const std::string& line, std::size_t number, const std::filesystem::path& path) {
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
        throw ParseError(path.string() + ": line " + std::to_string(number) +
                         ": malformed JSON object");
    }
    return obj;
}

} // namespace

std::vector<TaskTriplet> load_triplets(const std::filesystem::path& path, TaskKind kind) {
    std::vector<TaskTriplet> out;
    for_each_jsonl_line(path, [&](std::size_t number, const std::string& line) {
        const json obj = parse_line(line, number, path);
        TaskTriplet t;
        t.task_input = required_string(obj, "task_input", number, path);
        t.ai_output = required_string(obj, "ai_output", number, path);
        t.human_output = required_string(obj, "human_output", number, path);
        t.task_kind = kind;
        out.push_back(std::move(t));
    });
    if (out.empty()) {
        throw ValidationError(path.string() + ": empty dataset (no triplets)");
    }
    return out;
}

std::vector<EvalInput> load_eval_inputs(const std::filesystem::path& path, TaskKind kind) {
    std::vector<EvalInput> out;
    for_each_jsonl_line(path, [&](std::size_t number, const std::string& line) {
        const json obj = parse_line(line, number, path);
        EvalInput e;
        e.task_input = required_string(obj, "task_input", number, path);
        if (obj.contains("ai_output")) {
            if (!obj["ai_output"].is_string()) {
                throw ValidationError(path.string() + ": line " + std::to_string(number) +
                                      ": non-string field \"ai_output\"");
            }
            e.ai_output = obj["ai_output"].get<std::string>();
        }
        e.task_kind = kind;
        out.push_back(std::move(e));
    });
    if (out.empty()) {
        throw ValidationError(path.string() + ": empty dataset (no eval inputs)");
    }
    return out;
}

void save_triplets(const std::vector<TaskTriplet>& triplets, const std::filesystem::path& path) {
    std::string buf;
    for (const auto& t : triplets) {
        json obj = {{"task_input", t.task_input},
                    {"ai_output", t.ai_output},
                    {"human_output", t.human_output}};
        buf += obj.dump();
        buf += '\n';
    }
    write_file_atomic(path, buf);
}

std::string assemble_prompt(const PromptArtifact& artifact, std::string_view task_input) {
    std::string out = artifact.feature_text;
    for (const auto& [example_input, example_output] : artifact.examples) {
        out += '\n';
        out += artifact.task_instruction.render(example_input);
        out += ' ';
        out += example_output;
    }
    out += '\n';
    out += artifact.task_instruction.render(task_input);
    return out;
}

std::string prompt_to_json(const PromptArtifact& artifact) {
    json examples = json::array();
    for (const auto& [input, output] : artifact.examples) {
        examples.push_back({{"task_input", input}, {"output", output}});
    }
    const json doc = {
        {"version", artifact.version},
        {"feature_text", artifact.feature_text},
        {"task_instruction",
         {{"task_kind", std::string(to_string(artifact.task_instruction.task_kind))},
          {"template_text", artifact.task_instruction.template_text}}},
        {"examples", examples},
        {"mode", std::string(to_string(artifact.mode))},
        {"provenance",
         {{"run_id", artifact.provenance.run_id}, {"iteration", artifact.provenance.iteration}}},
    };
    return doc.dump(2) + "\n";
}

PromptArtifact prompt_from_json(const std::string& json_text) {
    json doc = json::parse(json_text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw ParseError("prompt artifact: malformed JSON");
    }
    if (!doc.contains("version") || !doc["version"].is_number_integer()) {
        throw ParseError("prompt artifact: missing integer \"version\"");
    }
    const int version = doc["version"].get<int>();
    if (version != kPromptArtifactVersion) {
        throw ParseError("prompt artifact: incompatible version " + std::to_string(version) +
                         " (expected " + std::to_string(kPromptArtifactVersion) + ")");
    }
    try {
        PromptArtifact a;
        a.version = version;
        a.feature_text = doc.at("feature_text").get<std::string>();
        const auto& instr = doc.at("task_instruction");
        a.task_instruction.task_kind =
            task_kind_from_string(instr.at("task_kind").get<std::string>());
        a.task_instruction.template_text = instr.at("template_text").get<std::string>();
        for (const auto& e : doc.at("examples")) {
            a.examples.emplace_back(e.at("task_input").get<std::string>(),
                                    e.at("output").get<std::string>());
        }
        a.mode = prompt_mode_from_string(doc.at("mode").get<std::string>());
        a.provenance.run_id = doc.at("provenance").at("run_id").get<std::string>();
        a.provenance.iteration = doc.at("provenance").at("iteration").get<int>();
        return a;
    } catch (const json::exception& e) {
        throw ParseError(std::string("prompt artifact: ") + e.what());
    }
}

void save_prompt(const PromptArtifact& artifact, const std::filesystem::path& path) {
    write_file_atomic(path, prompt_to_json(artifact));
}

PromptArtifact load_prompt(const std::filesystem::path& path) {
    try {
        return prompt_from_json(read_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

} // namespace sico
