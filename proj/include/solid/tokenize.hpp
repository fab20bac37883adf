#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace solid {

// Lowercases and splits on runs of non-alphanumeric ASCII characters.
// Bytes >= 0x80 are treated as alphanumeric so UTF-8 words stay whole.
std::vector<std::string> tokenize(std::string_view text);

}  // namespace solid
