#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace semrte {

// Malformed or inconsistent input data (parse failures, shape mismatches
// between files). The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Label : std::uint8_t { kAgree = 0, kDisagree = 1, kNeutral = 2 };
inline constexpr int kNumLabels = 3;
inline constexpr std::array<Label, kNumLabels> kAllLabels = {
    Label::kAgree, Label::kDisagree, Label::kNeutral};

enum class Lang : std::uint8_t { kVie = 0, kEng = 1 };
inline constexpr std::array<Lang, 2> kAllLangs = {Lang::kVie, Lang::kEng};

std::string_view to_string(Label label);
std::string_view to_string(Lang lang);
std::optional<Label> parse_label(std::string_view s);
std::optional<Lang> parse_lang(std::string_view s);

inline int label_index(Label label) { return static_cast<int>(label); }

// Half-up rounding of a percentage-scaled value to integer hundredths,
// tolerant of binary representation error (35.565 -> 3557).
std::int64_t to_hundredths(double percent);

// Formats integer hundredths as a fixed two-decimal string ("-1.42", "35.57").
std::string format_hundredths(std::int64_t hundredths);

// fraction in [0,1] -> "NN.NN" percent string.
std::string format_percent(double fraction);

}  // namespace semrte
