#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "semrte/common.hpp"

namespace semrte {

std::string_view to_string(Label label) {
  switch (label) {
    case Label::kAgree: return "agree";
    case Label::kDisagree: return "disagree";
    case Label::kNeutral: return "neutral";
  }
  return "?";
}

std::string_view to_string(Lang lang) {
  switch (lang) {
    case Lang::kVie: return "vie";
    case Lang::kEng: return "eng";
  }
  return "?";
}

std::optional<Label> parse_label(std::string_view s) {
  for (Label l : kAllLabels) {
    if (to_string(l) == s) return l;
  }
  return std::nullopt;
}

std::optional<Lang> parse_lang(std::string_view s) {
  for (Lang l : kAllLangs) {
    if (to_string(l) == s) return l;
  }
  return std::nullopt;
}

std::int64_t to_hundredths(double percent) {
  const double scaled = std::abs(percent) * 100.0;
  const auto magnitude = static_cast<std::int64_t>(std::floor(scaled + 0.5 + 1e-7));
  return percent < 0 ? -magnitude : magnitude;
}

std::string format_hundredths(std::int64_t hundredths) {
  const std::int64_t mag = std::llabs(hundredths);
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%lld.%02lld", hundredths < 0 ? "-" : "",
                static_cast<long long>(mag / 100), static_cast<long long>(mag % 100));
  return buf;
}

std::string format_percent(double fraction) {
  return format_hundredths(to_hundredths(fraction * 100.0));
}

}  // namespace semrte
