#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace afdetect::csv {

/// Splits one line on commas. No quoting: none of the formats here need it.
std::vector<std::string_view> split(std::string_view line);

std::string_view trim(std::string_view s) noexcept;

/// Locale-independent strict parse; nullopt for empty or unparseable cells.
std::optional<double> parse_double(std::string_view cell) noexcept;

/// Shortest representation that round-trips exactly.
std::string format_double(double value);

/// Comment line carried at the top of every file the tools write.
std::string provenance_line(std::string_view config_hash, unsigned long long seed);

}  // namespace afdetect::csv
