#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sico {

enum class TaskKind { writing, qa, review, paraphrase };

TaskKind task_kind_from_string(std::string_view s);
std::string_view to_string(TaskKind kind);

/// One construction record: a task input with its AI-generated and
/// human-written outputs.
struct TaskTriplet {
    std::string task_input;
    std::string ai_output;
    std::string human_output;
    TaskKind task_kind = TaskKind::qa;

    void validate() const; // throws ValidationError
};

/// One element of the evaluation input set. `ai_output` is optional; when
/// present it carries the source text a paraphrase-mode run rewrites.
struct EvalInput {
    std::string task_input;
    std::string ai_output; // empty = absent
    TaskKind task_kind = TaskKind::qa;

    bool operator==(const EvalInput&) const = default;
};

/// A task instruction with exactly one `{x}` input slot and a trailing
/// completion marker (the non-empty text after the slot, e.g. "Human:").
struct InstructionTemplate {
    TaskKind task_kind = TaskKind::qa;
    std::string template_text;

    static constexpr std::string_view kPlaceholder = "{x}";

    /// The instruction used for each task (input slot + "Human:" marker).
    static InstructionTemplate for_task(TaskKind kind);
    /// The rewrite instruction paraphrase-mode runs swap in for the task one.
    static InstructionTemplate paraphrase_mode();

    void validate() const;
    std::string render(std::string_view task_input) const;
    std::string completion_marker() const;

    bool operator==(const InstructionTemplate&) const = default;
};

enum class PromptMode { gen, para };

PromptMode prompt_mode_from_string(std::string_view s);
std::string_view to_string(PromptMode mode);

struct Provenance {
    std::string run_id;
    int iteration = 0;

    bool operator==(const Provenance&) const = default;
};

inline constexpr int kPromptArtifactVersion = 1;

/// The object the optimizer searches over and finally emits: a feature
/// description, a task instruction, and the in-context demonstration pairs.
struct PromptArtifact {
    int version = kPromptArtifactVersion;
    std::string feature_text;
    InstructionTemplate task_instruction;
    std::vector<std::pair<std::string, std::string>> examples; // (task_input, output)
    PromptMode mode = PromptMode::gen;
    Provenance provenance;

    void validate() const;

    bool operator==(const PromptArtifact&) const = default;
};

/// Loads construction triplets from JSONL, one object per line with keys
/// task_input / ai_output / human_output. Errors name the offending line.
std::vector<TaskTriplet> load_triplets(const std::filesystem::path& path, TaskKind kind);

/// Loads evaluation inputs from JSONL ({"task_input": ...}, optionally with
/// "ai_output" for paraphrase-mode datasets).
std::vector<EvalInput> load_eval_inputs(const std::filesystem::path& path, TaskKind kind);

void save_triplets(const std::vector<TaskTriplet>& triplets, const std::filesystem::path& path);

/// Concatenates feature text, one rendered demonstration per example
/// (instruction with the example input in the slot, then the example output),
/// and finally the instruction with `task_input` in the slot so that the
/// completion marker comes last. Byte-deterministic.
std::string assemble_prompt(const PromptArtifact& artifact, std::string_view task_input);

void save_prompt(const PromptArtifact& artifact, const std::filesystem::path& path);
PromptArtifact load_prompt(const std::filesystem::path& path);

std::string prompt_to_json(const PromptArtifact& artifact);
PromptArtifact prompt_from_json(const std::string& json_text);

} // namespace sico
