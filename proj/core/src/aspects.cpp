#include "semrte/aspects.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "semrte/srl_metrics.hpp"

namespace semrte {

using nlohmann::json;

std::vector<PredictedSequence> dedupe(std::span<const PredictedSequence> seqs) {
  std::set<std::pair<std::string, std::vector<std::string>>> seen;
  std::vector<PredictedSequence> out;
  for (const auto& s : seqs) {
    if (seen.emplace(s.sentence_id, s.labels).second) out.push_back(s);
  }
  return out;
}

std::size_t count_verb_spans(std::span<const std::string> labels) {
  std::size_t n = 0;
  for (const auto& span : extract_spans(labels)) {
    if (span.role == "V") ++n;
  }
  return n;
}

std::vector<PredictedSequence> filter_multi_verb(std::span<const PredictedSequence> seqs) {
  std::vector<PredictedSequence> out;
  for (const auto& s : seqs) {
    if (count_verb_spans(s.labels) < 2) out.push_back(s);
  }
  return out;
}

namespace {

std::size_t verb_position(const std::vector<std::string>& labels) {
  for (const auto& span : extract_spans(labels)) {
    if (span.role == "V") return span.start;
  }
  return std::numeric_limits<std::size_t>::max();
}

std::vector<std::string> all_outside(std::size_t n) { return std::vector<std::string>(n, "O"); }

}  // namespace

std::vector<AspectSet> group_by_sentence(std::span<const PredictedSequence> seqs,
                                         std::span<const SentenceTokens> sentences) {
  std::unordered_map<std::string, std::size_t> index;
  std::vector<AspectSet> out(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    index.emplace(sentences[i].sentence_id, i);
    out[i].sentence_id = sentences[i].sentence_id;
    out[i].tokens = sentences[i].tokens;
  }
  for (const auto& s : seqs) {
    auto it = index.find(s.sentence_id);
    if (it == index.end()) throw DataError("unresolvable sentence_id '" + s.sentence_id + "'");
    AspectSet& target = out[it->second];
    if (s.labels.size() != target.tokens.size()) {
      throw DataError("sentence '" + s.sentence_id + "' has " + std::to_string(target.tokens.size()) +
                      " tokens but a label sequence of length " + std::to_string(s.labels.size()));
    }
    target.aspects.push_back(s.labels);
  }
  for (auto& a : out) {
    if (a.aspects.empty()) {
      a.aspects.push_back(all_outside(a.tokens.size()));
      continue;
    }
    std::vector<std::pair<std::size_t, std::vector<std::string>>> keyed;
    keyed.reserve(a.aspects.size());
    for (auto& row : a.aspects) keyed.emplace_back(verb_position(row), std::move(row));
    std::sort(keyed.begin(), keyed.end());
    a.aspects.clear();
    for (auto& [pos, row] : keyed) a.aspects.push_back(std::move(row));
  }
  return out;
}

AspectSet cap_and_pad(const AspectSet& aset, int m) {
  if (m < 1) throw std::invalid_argument("aspect capacity m must be >= 1");
  AspectSet out;
  out.sentence_id = aset.sentence_id;
  out.tokens = aset.tokens;
  const auto cap = static_cast<std::size_t>(m);
  for (std::size_t i = 0; i < aset.aspects.size() && i < cap; ++i) out.aspects.push_back(aset.aspects[i]);
  while (out.aspects.size() < cap) out.aspects.push_back(all_outside(aset.tokens.size()));
  return out;
}

int count_predicates(const AspectSet& aset) {
  int n = 0;
  for (const auto& row : aset.aspects) {
    if (count_verb_spans(row) > 0) ++n;
  }
  return n;
}

PairAspectGrid pair_aspects(const PremisePair& pair, const AspectSet& a1, const AspectSet& a2,
                            int m, std::size_t keep1, std::size_t keep2) {
  if (a1.tokens != pair.text1) {
    throw DataError("aspect tokens of '" + a1.sentence_id + "' do not match text1 of pair '" +
                    pair.id + "'");
  }
  if (a2.tokens != pair.text2) {
    throw DataError("aspect tokens of '" + a2.sentence_id + "' do not match text2 of pair '" +
                    pair.id + "'");
  }
  const auto rows = static_cast<std::size_t>(m);
  if (a1.aspects.size() != rows || a2.aspects.size() != rows) {
    throw std::invalid_argument("aspect sets must be capped to m before pairing");
  }
  const std::size_t n1 = std::min(keep1, pair.text1.size());
  const std::size_t n2 = std::min(keep2, pair.text2.size());

  PairAspectGrid grid;
  grid.m = m;
  grid.width = n1 + n2 + 3;
  grid.rows.assign(rows, all_outside(grid.width));
  for (std::size_t r = 0; r < rows; ++r) {
    auto& row = grid.rows[r];
    for (std::size_t i = 0; i < n1; ++i) row[1 + i] = a1.aspects[r][i];
    for (std::size_t i = 0; i < n2; ++i) row[2 + n1 + i] = a2.aspects[r][i];
  }
  return grid;
}

std::vector<AspectSet> merge_aspects(std::span<const PredictedSequence> seqs,
                                     std::span<const SentenceTokens> sentences, int m,
                                     MergeStats* stats) {
  if (m < 1) throw std::invalid_argument("aspect capacity m must be >= 1");
  auto unique = dedupe(seqs);
  auto single_verb = filter_multi_verb(unique);
  auto grouped = group_by_sentence(single_verb, sentences);
  std::vector<AspectSet> out;
  out.reserve(grouped.size());
  std::size_t fallback = 0;
  std::set<std::string> covered;
  for (const auto& s : single_verb) covered.insert(s.sentence_id);
  for (const auto& g : grouped) {
    if (!covered.count(g.sentence_id)) ++fallback;
    out.push_back(cap_and_pad(g, m));
  }
  if (stats) {
    stats->input_sequences = seqs.size();
    stats->removed_duplicates = seqs.size() - unique.size();
    stats->removed_multi_verb = unique.size() - single_verb.size();
    stats->fallback_sentences = fallback;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

std::string serialize_aspect_sets(std::span<const AspectSet> sets) {
  std::string out;
  for (const auto& s : sets) {
    json obj = json::object();
    obj["sentence_id"] = s.sentence_id;
    obj["tokens"] = s.tokens;
    obj["aspects"] = s.aspects;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

namespace {

template <typename Fn>
void for_each_json_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
      fn(line_no, obj);
    } catch (const json::exception& e) {
      throw DataError("invalid record at line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace

std::vector<AspectSet> parse_aspect_sets(std::string_view text) {
  std::vector<AspectSet> out;
  for_each_json_line(text, [&](std::size_t line_no, const json& obj) {
    AspectSet s;
    s.sentence_id = obj.at("sentence_id").get<std::string>();
    s.tokens = obj.at("tokens").get<std::vector<std::string>>();
    s.aspects = obj.at("aspects").get<std::vector<std::vector<std::string>>>();
    for (const auto& row : s.aspects) {
      if (row.size() != s.tokens.size()) {
        throw DataError("aspect row length mismatch for '" + s.sentence_id + "' at line " +
                        std::to_string(line_no));
      }
      const std::string violation = iob_violation(row);
      if (!violation.empty()) {
        throw DataError(violation + " in '" + s.sentence_id + "' at line " + std::to_string(line_no));
      }
    }
    out.push_back(std::move(s));
  });
  return out;
}

std::string serialize_sentence_tokens(std::span<const SentenceTokens> sentences) {
  std::string out;
  for (const auto& s : sentences) {
    json obj = json::object();
    obj["sentence_id"] = s.sentence_id;
    obj["tokens"] = s.tokens;
    out += obj.dump();
    out += '\n';
  }
  return out;
}

std::vector<SentenceTokens> parse_sentence_tokens(std::string_view text) {
  std::vector<SentenceTokens> out;
  for_each_json_line(text, [&](std::size_t, const json& obj) {
    out.push_back({obj.at("sentence_id").get<std::string>(),
                   obj.at("tokens").get<std::vector<std::string>>()});
  });
  return out;
}

std::string text1_sentence_id(const PremisePair& pair) { return pair.id + "#1"; }
std::string text2_sentence_id(const PremisePair& pair) { return pair.id + "#2"; }

std::vector<SentenceTokens> sentences_of_pairs(std::span<const PremisePair> pairs) {
  std::vector<SentenceTokens> out;
  out.reserve(pairs.size() * 2);
  for (const auto& p : pairs) {
    out.push_back({text1_sentence_id(p), p.text1});
    out.push_back({text2_sentence_id(p), p.text2});
  }
  return out;
}

std::vector<PredictedSequence> predictions_from_conll(std::span<const LabeledSentence> sentences,
                                                      int source_model) {
  std::vector<PredictedSequence> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back({s.sentence_id, source_model, s.labels});
  return out;
}

}  // namespace semrte
