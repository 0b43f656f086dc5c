#include "afdetect/label.hpp"

#include <string>

#include "afdetect/error.hpp"

namespace afdetect {

Label parse_label(std::string_view text) {
  if (text == "AF") return Label::AF;
  if (text == "NAF") return Label::NAF;
  throw Error(ErrorKind::BadLabel, "label '" + std::string(text) + "' is not AF or NAF");
}

std::string_view to_string(Label label) noexcept { return label == Label::AF ? "AF" : "NAF"; }

}  // namespace afdetect
