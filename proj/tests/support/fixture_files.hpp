#pragma once

#include <filesystem>

namespace sico::testing {

/// Writes the fixture inputs (datasets, lexicon, tagger dictionary, word
/// list, run config) for the offline end-to-end run into `dir`. Content is
/// fully deterministic.
void write_e2e_fixture_inputs(const std::filesystem::path& dir);

} // namespace sico::testing
