#pragma once

#include <string_view>

namespace afdetect {

/// Rhythm class. AF is the positive class everywhere in this library.
enum class Label : unsigned char { NAF = 0, AF = 1 };

/// Throws Error{BadLabel} for anything other than "AF" / "NAF".
Label parse_label(std::string_view text);
std::string_view to_string(Label label) noexcept;

inline int signed_label(Label label) noexcept { return label == Label::AF ? 1 : -1; }

}  // namespace afdetect
