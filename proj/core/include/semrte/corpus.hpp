#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "semrte/common.hpp"

namespace semrte {

// One entailment example. Texts are whitespace-pretokenized.
struct PremisePair {
  std::string id;
  std::vector<std::string> text1;
  std::vector<std::string> text2;
  Label label = Label::kNeutral;
  Lang lang = Lang::kVie;
  // Language of text2 when it differs from `lang` (cross-lingual pairs);
  // serialized as the optional "lang2" key.
  std::optional<Lang> lang2;

  Lang text2_lang() const { return lang2.value_or(lang); }

  bool operator==(const PremisePair&) const = default;
};

// A tokenized sentence with one IOB label sequence.
struct LabeledSentence {
  std::string sentence_id;
  std::vector<std::string> tokens;
  std::vector<std::string> labels;

  bool operator==(const LabeledSentence&) const = default;
};

// Parsed form of a single IOB tag.
struct IobTag {
  enum class Kind : std::uint8_t { kOutside, kBegin, kInside };
  Kind kind = Kind::kOutside;
  std::string role;
};

// Parses "O", "B-<role>" or "I-<role>"; throws DataError otherwise.
IobTag parse_iob_tag(std::string_view tag);

// Returns an empty string when `labels` follows the IOB grammar, otherwise a
// description of the first violation ("I-ARG0 without preceding B-ARG0 at
// position 0").
std::string iob_violation(std::span<const std::string> labels);
inline bool is_valid_iob(std::span<const std::string> labels) {
  return iob_violation(labels).empty();
}

// Tag <-> id mapping over {O} and {B-,I-} x roles. Id 0 is O; role i (in
// sorted order) owns ids 2i+1 (B-) and 2i+2 (I-).
class LabelInventory {
 public:
  LabelInventory() = default;
  // Throws DataError if "V" is not among the roles.
  explicit LabelInventory(std::vector<std::string> roles);

  // Scans every label of every sequence; V must be present.
  static LabelInventory from_sequences(std::span<const std::vector<std::string>> sequences);
  // Rebuilds from the id-ordered tag list produced by tags().
  static LabelInventory from_tags(std::span<const std::string> tags);

  const std::vector<std::string>& roles() const { return roles_; }
  std::size_t size() const { return id_to_tag_.size(); }
  const std::vector<std::string>& tags() const { return id_to_tag_; }

  // Unknown tags map to O (id 0).
  int id_of(std::string_view tag) const;
  const std::string& tag_of(int id) const { return id_to_tag_.at(static_cast<std::size_t>(id)); }
  bool contains(std::string_view tag) const;

 private:
  std::vector<std::string> roles_;
  std::vector<std::string> id_to_tag_;
  std::map<std::string, int, std::less<>> tag_to_id_;
};

struct CorpusStats {
  std::size_t pairs = 0;
  // [lang][slot]: number of text1 (slot 0) / text2 (slot 1) fragments.
  std::array<std::array<std::size_t, 2>, 2> by_lang_slot{};
  std::array<std::size_t, kNumLabels> by_label{};

  std::size_t count(Lang lang, int slot) const {
    return by_lang_slot[static_cast<std::size_t>(lang)][static_cast<std::size_t>(slot)];
  }
};

std::vector<PremisePair> parse_pairs(std::string_view text);
std::string serialize_pairs(std::span<const PremisePair> pairs);

std::vector<LabeledSentence> parse_conll(std::string_view text);
std::string serialize_conll(std::span<const LabeledSentence> sentences);

CorpusStats corpus_stats(std::span<const PremisePair> pairs);

// Stratified by (label, lang): each stratum sends floor(ratio * n) pairs to
// train and the rest to val. Both outputs keep input order.
std::pair<std::vector<PremisePair>, std::vector<PremisePair>> split_train_val(
    std::span<const PremisePair> pairs, double ratio, std::uint64_t seed);

std::vector<std::string> split_whitespace(std::string_view text);
std::string join_tokens(std::span<const std::string> tokens);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace semrte
