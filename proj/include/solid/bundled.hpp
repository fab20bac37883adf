#pragma once

#include <string_view>

namespace solid {

// Default intent-sequence corpus in canonical text form, compiled in from
// data/fixture_sequences.txt.
std::string_view bundled_sequence_corpus();

}  // namespace solid
