#include "semrte/tokenizer.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace semrte {

namespace {

std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;  // stray continuation byte: treat as its own character
}

const std::string kSpecialNames[] = {"", "[CLS]", "[SEP]", "[PAD]", "[UNK]"};

}  // namespace

std::vector<std::string> chunk_word(std::string_view word, int chunk_size) {
  if (chunk_size < 1) throw std::invalid_argument("chunk_size must be >= 1");
  if (word.empty()) throw std::invalid_argument("cannot chunk an empty word");
  std::vector<std::string> pieces;
  std::size_t pos = 0;
  while (pos < word.size()) {
    std::size_t end = pos;
    for (int c = 0; c < chunk_size && end < word.size(); ++c) {
      end += utf8_length(static_cast<unsigned char>(word[end]));
    }
    end = std::min(end, word.size());
    std::string piece = pieces.empty() ? "" : "##";
    piece.append(word.substr(pos, end - pos));
    pieces.push_back(std::move(piece));
    pos = end;
  }
  return pieces;
}

SubwordVocab::SubwordVocab(std::vector<std::string> pieces, int chunk_size)
    : pieces_(std::move(pieces)), chunk_size_(chunk_size) {
  if (chunk_size < 1) throw std::invalid_argument("chunk_size must be >= 1");
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    if (!index_.emplace(pieces_[i], kFirstPiece + static_cast<int>(i)).second) {
      throw DataError("duplicate vocabulary piece '" + pieces_[i] + "'");
    }
  }
}

SubwordVocab SubwordVocab::build(std::span<const std::vector<std::string>> corpus,
                                 int chunk_size) {
  std::set<std::string> pieces;
  for (const auto& sentence : corpus) {
    for (const auto& word : sentence) {
      for (auto& p : chunk_word(word, chunk_size)) pieces.insert(std::move(p));
    }
  }
  return SubwordVocab(std::vector<std::string>(pieces.begin(), pieces.end()), chunk_size);
}

std::string SubwordVocab::serialize() const {
  std::string out;
  for (const auto& p : pieces_) {
    out += p;
    out += '\n';
  }
  return out;
}

SubwordVocab SubwordVocab::parse(std::string_view text, int chunk_size) {
  std::vector<std::string> pieces;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) throw DataError("empty vocabulary line " + std::to_string(pieces.size() + 1));
    pieces.emplace_back(line);
    pos = end + 1;
  }
  return SubwordVocab(std::move(pieces), chunk_size);
}

int SubwordVocab::id_of(std::string_view piece) const {
  auto it = index_.find(piece);
  return it == index_.end() ? kUnk : it->second;
}

const std::string& SubwordVocab::piece_of(int id) const {
  if (id >= 0 && id < kFirstPiece) return kSpecialNames[id];
  return pieces_.at(static_cast<std::size_t>(id - kFirstPiece));
}

TokenizedInput tokenize_pair(const PremisePair& pair, const SubwordVocab& vocab, int max_length) {
  auto pieces_of = [&](const std::vector<std::string>& words) {
    std::vector<std::vector<int>> out;
    out.reserve(words.size());
    for (const auto& w : words) {
      std::vector<int> ids;
      for (const auto& p : chunk_word(w, vocab.chunk_size())) ids.push_back(vocab.id_of(p));
      out.push_back(std::move(ids));
    }
    return out;
  };
  const auto side1 = pieces_of(pair.text1);
  const auto side2 = pieces_of(pair.text2);

  std::size_t n1 = side1.size(), n2 = side2.size();
  std::size_t len1 = 0, len2 = 0;
  for (const auto& w : side1) len1 += w.size();
  for (const auto& w : side2) len2 += w.size();
  const auto budget = static_cast<std::size_t>(std::max(max_length, 0));

  while (len1 + len2 + 3 > budget) {
    const bool trim_text2 = n2 > 0 && (len2 >= len1 || n1 <= 1);
    if (trim_text2) {
      len2 -= side2[--n2].size();
    } else if (n1 > 1) {
      len1 -= side1[--n1].size();
    } else {
      throw DataError("pair '" + pair.id + "' cannot fit max_length " + std::to_string(max_length) +
                      ": its first word alone needs " + std::to_string(len1 + 3) + " subwords");
    }
  }

  TokenizedInput out;
  out.kept1 = n1;
  out.kept2 = n2;
  auto emit_word = [&](const std::vector<int>& ids) {
    const int first = static_cast<int>(out.subword_ids.size());
    out.subword_ids.insert(out.subword_ids.end(), ids.begin(), ids.end());
    out.word_spans.push_back({first, static_cast<int>(out.subword_ids.size()) - 1});
  };
  emit_word({SubwordVocab::kCls});
  for (std::size_t i = 0; i < n1; ++i) emit_word(side1[i]);
  emit_word({SubwordVocab::kSep});
  for (std::size_t i = 0; i < n2; ++i) emit_word(side2[i]);
  emit_word({SubwordVocab::kSep});
  return out;
}

}  // namespace semrte
