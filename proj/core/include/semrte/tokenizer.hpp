#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semrte/corpus.hpp"

namespace semrte {

// Fixed-width character chunking stands in for a learned WordPiece model:
// "hello" with chunk 3 -> "hel", "##lo". Chunks count UTF-8 code points.
std::vector<std::string> chunk_word(std::string_view word, int chunk_size);

class SubwordVocab {
 public:
  static constexpr int kCls = 1;
  static constexpr int kSep = 2;
  static constexpr int kPad = 3;
  static constexpr int kUnk = 4;
  static constexpr int kFirstPiece = 5;  // id 0 is unused

  SubwordVocab() = default;
  SubwordVocab(std::vector<std::string> pieces, int chunk_size);

  // All chunks of all words, sorted, ids assigned after the specials.
  static SubwordVocab build(std::span<const std::vector<std::string>> corpus, int chunk_size);

  // One piece per line; the piece on 1-based line n has id n + 4.
  std::string serialize() const;
  static SubwordVocab parse(std::string_view text, int chunk_size);

  int id_of(std::string_view piece) const;  // kUnk when absent
  const std::string& piece_of(int id) const;
  // Total id range including the unused id 0 and the specials.
  int size() const { return kFirstPiece + static_cast<int>(pieces_.size()); }
  int chunk_size() const { return chunk_size_; }
  const std::vector<std::string>& pieces() const { return pieces_; }

  bool operator==(const SubwordVocab& other) const {
    return pieces_ == other.pieces_ && chunk_size_ == other.chunk_size_;
  }

 private:
  std::vector<std::string> pieces_;
  std::map<std::string, int, std::less<>> index_;
  int chunk_size_ = 3;
};

// Inclusive subword index range of one word of the joined sequence.
struct WordSpan {
  int first = 0;
  int last = 0;
  bool operator==(const WordSpan&) const = default;
};

// CLS + pieces(text1) + SEP + pieces(text2) + SEP. Specials are words of
// their own, so word_spans.size() == kept1 + kept2 + 3.
struct TokenizedInput {
  std::vector<int> subword_ids;
  std::vector<WordSpan> word_spans;
  std::size_t kept1 = 0;  // words of text1 kept after truncation
  std::size_t kept2 = 0;
};

// Truncates at word boundaries, dropping the last word of whichever side
// currently has more subwords (text2 on ties) until the sequence fits in
// max_length. text1 keeps at least one word; text2 may be emptied. Throws
// DataError when even that minimum does not fit.
TokenizedInput tokenize_pair(const PremisePair& pair, const SubwordVocab& vocab, int max_length);

}  // namespace semrte
