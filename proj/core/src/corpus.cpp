#include "semrte/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "semrte/rng.hpp"

namespace semrte {

using nlohmann::json;

IobTag parse_iob_tag(std::string_view tag) {
  if (tag == "O") return {};
  if (tag.size() > 2 && tag[1] == '-' && (tag[0] == 'B' || tag[0] == 'I')) {
    return {tag[0] == 'B' ? IobTag::Kind::kBegin : IobTag::Kind::kInside,
            std::string(tag.substr(2))};
  }
  throw DataError("invalid IOB tag '" + std::string(tag) + "'");
}

namespace {

// Also reports the offending index through `at`.
std::string iob_violation_at(std::span<const std::string> labels, std::size_t& at) {
  std::string open_role;  // role of the previous B-/I- tag, empty after O
  for (std::size_t i = 0; i < labels.size(); ++i) {
    IobTag tag;
    try {
      tag = parse_iob_tag(labels[i]);
    } catch (const DataError&) {
      at = i;
      return "invalid IOB tag '" + labels[i] + "' at position " + std::to_string(i);
    }
    switch (tag.kind) {
      case IobTag::Kind::kOutside:
        open_role.clear();
        break;
      case IobTag::Kind::kBegin:
        open_role = tag.role;
        break;
      case IobTag::Kind::kInside:
        if (open_role != tag.role) {
          at = i;
          return labels[i] + " without preceding B-" + tag.role + " at position " +
                 std::to_string(i);
        }
        break;
    }
  }
  return {};
}

}  // namespace

std::string iob_violation(std::span<const std::string> labels) {
  std::size_t at = 0;
  return iob_violation_at(labels, at);
}

// ---------------------------------------------------------------------------
// LabelInventory

LabelInventory::LabelInventory(std::vector<std::string> roles) {
  std::sort(roles.begin(), roles.end());
  roles.erase(std::unique(roles.begin(), roles.end()), roles.end());
  if (!std::binary_search(roles.begin(), roles.end(), std::string("V"))) {
    throw DataError("label inventory has no predicate role V");
  }
  roles_ = std::move(roles);
  id_to_tag_.push_back("O");
  for (const auto& role : roles_) {
    id_to_tag_.push_back("B-" + role);
    id_to_tag_.push_back("I-" + role);
  }
  for (std::size_t i = 0; i < id_to_tag_.size(); ++i) {
    tag_to_id_.emplace(id_to_tag_[i], static_cast<int>(i));
  }
}

LabelInventory LabelInventory::from_sequences(
    std::span<const std::vector<std::string>> sequences) {
  std::set<std::string> roles;
  for (const auto& seq : sequences) {
    for (const auto& label : seq) {
      IobTag tag = parse_iob_tag(label);
      if (tag.kind != IobTag::Kind::kOutside) roles.insert(std::move(tag.role));
    }
  }
  return LabelInventory(std::vector<std::string>(roles.begin(), roles.end()));
}

LabelInventory LabelInventory::from_tags(std::span<const std::string> tags) {
  std::vector<std::string> roles;
  for (const auto& t : tags) {
    IobTag tag = parse_iob_tag(t);
    if (tag.kind == IobTag::Kind::kBegin) roles.push_back(tag.role);
  }
  LabelInventory inv(std::move(roles));
  if (!std::equal(inv.tags().begin(), inv.tags().end(), tags.begin(), tags.end())) {
    throw DataError("label tag list is not in canonical inventory order");
  }
  return inv;
}

int LabelInventory::id_of(std::string_view tag) const {
  auto it = tag_to_id_.find(tag);
  return it == tag_to_id_.end() ? 0 : it->second;
}

bool LabelInventory::contains(std::string_view tag) const {
  return tag_to_id_.find(tag) != tag_to_id_.end();
}

// ---------------------------------------------------------------------------
// Text helpers

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string join_tokens(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

namespace {

// Iterates lines, yielding (1-based line number, line without '\r').
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    fn(++line_no, line);
    pos = end + 1;
  }
}

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

}  // namespace

// ---------------------------------------------------------------------------
// Pair format

std::vector<PremisePair> parse_pairs(std::string_view text) {
  std::vector<PremisePair> pairs;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (is_blank(line)) return;
    const std::string where = " at line " + std::to_string(line_no);
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error&) {
      throw DataError("malformed JSON" + where);
    }
    if (!obj.is_object()) throw DataError("expected a JSON object" + where);
    auto field = [&](const char* key) -> std::string {
      auto it = obj.find(key);
      if (it == obj.end()) throw DataError(std::string("missing key '") + key + "'" + where);
      if (!it->is_string()) throw DataError(std::string("key '") + key + "' is not a string" + where);
      return it->get<std::string>();
    };
    PremisePair p;
    p.id = field("id");
    p.text1 = split_whitespace(field("text1"));
    p.text2 = split_whitespace(field("text2"));
    if (p.text1.empty()) throw DataError("empty text1" + where);
    if (p.text2.empty()) throw DataError("empty text2" + where);
    const std::string label = field("label");
    const auto parsed_label = parse_label(label);
    if (!parsed_label) throw DataError("unknown label '" + label + "'" + where);
    p.label = *parsed_label;
    const std::string lang = field("lang");
    const auto parsed_lang = parse_lang(lang);
    if (!parsed_lang) throw DataError("unknown lang '" + lang + "'" + where);
    p.lang = *parsed_lang;
    if (obj.contains("lang2")) {
      const std::string lang2 = field("lang2");
      const auto parsed_lang2 = parse_lang(lang2);
      if (!parsed_lang2) throw DataError("unknown lang '" + lang2 + "'" + where);
      if (*parsed_lang2 != p.lang) p.lang2 = *parsed_lang2;
    }
    pairs.push_back(std::move(p));
  });
  return pairs;
}

std::string serialize_pairs(std::span<const PremisePair> pairs) {
  std::string out;
  for (const auto& p : pairs) {
    json obj = json::object();
    obj["id"] = p.id;
    obj["text1"] = join_tokens(p.text1);
    obj["text2"] = join_tokens(p.text2);
    obj["label"] = std::string(to_string(p.label));
    obj["lang"] = std::string(to_string(p.lang));
    if (p.text2_lang() != p.lang) obj["lang2"] = std::string(to_string(p.text2_lang()));
    out += obj.dump();
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// SRL format

std::vector<LabeledSentence> parse_conll(std::string_view text) {
  std::vector<LabeledSentence> sentences;
  LabeledSentence current;
  std::string pending_id;
  bool has_pending_id = false;
  std::vector<std::size_t> token_lines;

  auto flush = [&]() {
    if (current.tokens.empty()) return;
    const std::size_t index = sentences.size();
    current.sentence_id = has_pending_id ? pending_id : std::to_string(index);
    std::size_t at = 0;
    std::string violation = iob_violation_at(current.labels, at);
    if (!violation.empty()) {
      throw DataError(violation + " in sentence " + current.sentence_id + " (line " +
                      std::to_string(token_lines[at]) + ")");
    }
    sentences.push_back(std::move(current));
    current = {};
    token_lines.clear();
    has_pending_id = false;
  };

  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (is_blank(line)) {
      flush();
      return;
    }
    if (line.front() == '#') {
      constexpr std::string_view kIdPrefix = "# id = ";
      if (line.substr(0, kIdPrefix.size()) == kIdPrefix) {
        if (!current.tokens.empty()) flush();
        pending_id = std::string(line.substr(kIdPrefix.size()));
        has_pending_id = true;
      }
      return;
    }
    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0 || tab + 1 >= line.size() ||
        line.find('\t', tab + 1) != std::string_view::npos) {
      throw DataError("expected 'token<TAB>tag' at line " + std::to_string(line_no));
    }
    token_lines.push_back(line_no);
    current.tokens.emplace_back(line.substr(0, tab));
    current.labels.emplace_back(line.substr(tab + 1));
  });
  flush();
  return sentences;
}

std::string serialize_conll(std::span<const LabeledSentence> sentences) {
  std::string out;
  for (const auto& s : sentences) {
    out += "# id = " + s.sentence_id + "\n";
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      out += s.tokens[i];
      out += '\t';
      out += s.labels[i];
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Statistics and splitting

CorpusStats corpus_stats(std::span<const PremisePair> pairs) {
  CorpusStats stats;
  stats.pairs = pairs.size();
  for (const auto& p : pairs) {
    ++stats.by_lang_slot[static_cast<std::size_t>(p.lang)][0];
    ++stats.by_lang_slot[static_cast<std::size_t>(p.text2_lang())][1];
    ++stats.by_label[static_cast<std::size_t>(label_index(p.label))];
  }
  return stats;
}

std::pair<std::vector<PremisePair>, std::vector<PremisePair>> split_train_val(
    std::span<const PremisePair> pairs, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw std::invalid_argument("split ratio must lie in (0, 1), got " + std::to_string(ratio));
  }
  // Strata keyed by (label, lang), visited in key order so the draw sequence
  // does not depend on input order of first appearance.
  std::map<std::pair<int, int>, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    strata[{label_index(pairs[i].label), static_cast<int>(pairs[i].lang)}].push_back(i);
  }
  Rng rng(seed);
  std::vector<bool> to_train(pairs.size(), false);
  for (auto& [key, members] : strata) {
    rng.shuffle(members);
    // Epsilon guards products like 0.7 * 10 = 6.999...
    const auto n_train = static_cast<std::size_t>(
        std::floor(ratio * static_cast<double>(members.size()) + 1e-9));
    for (std::size_t j = 0; j < n_train; ++j) to_train[members[j]] = true;
  }
  std::vector<PremisePair> train, val;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    (to_train[i] ? train : val).push_back(pairs[i]);
  }
  return {std::move(train), std::move(val)};
}

}  // namespace semrte
