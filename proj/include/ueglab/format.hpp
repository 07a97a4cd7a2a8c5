#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace ueglab {

/// Shortest decimal that reads back to the same double.
std::string format_number(double value);
/// Whole-string parse of a double; nullopt on any leftover character.
std::optional<double> parse_number(std::string_view text);
/// Strips ASCII whitespace at both ends.
std::string_view trim(std::string_view text);

}  // namespace ueglab
