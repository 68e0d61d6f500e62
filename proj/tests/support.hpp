#pragma once

#include <string>
#include <vector>

#include "semrte/aspects.hpp"
#include "semrte/rng.hpp"

namespace semrte::testing {

inline const std::vector<std::string>& role_pool() {
  static const std::vector<std::string> roles{"ARG0", "ARG1", "ARG2", "V"};
  return roles;
}

// A grammatical IOB sequence over the first `n_roles` roles of role_pool().
inline std::vector<std::string> random_iob(Rng& rng, std::size_t length, std::size_t n_roles) {
  std::vector<std::string> out;
  std::string open;  // role of the span in progress
  for (std::size_t i = 0; i < length; ++i) {
    const auto r = rng.uniform_index(3);
    if (r == 0 || n_roles == 0) {
      out.push_back("O");
      open.clear();
    } else if (r == 2 && !open.empty()) {
      out.push_back("I-" + open);
    } else {
      open = role_pool()[rng.uniform_index(n_roles)];
      out.push_back("B-" + open);
    }
  }
  return out;
}

inline std::vector<std::string> words(Rng& rng, std::size_t n) {
  static const std::vector<std::string> lexicon{"sun", "rises", "over", "hills", "river", "flows",
                                                "toward", "city", "people", "gather", "news", "đến"};
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(lexicon[rng.uniform_index(lexicon.size())]);
  return out;
}

struct Ensemble {
  std::vector<SentenceTokens> sentences;
  std::vector<PredictedSequence> sequences;
};

// Ten models labelling a handful of sentences. Each model draws from a small
// per-sentence pool so exact duplicates across models are common; some
// sentences get no sequence at all.
inline Ensemble random_ensemble(Rng& rng) {
  Ensemble e;
  const auto n_sent = 1 + rng.uniform_index(6);
  std::vector<std::vector<std::vector<std::string>>> pools(n_sent);
  for (std::size_t s = 0; s < n_sent; ++s) {
    const auto len = 1 + rng.uniform_index(8);
    e.sentences.push_back({"s" + std::to_string(s), words(rng, len)});
    const auto pool = rng.uniform_index(4);
    for (std::size_t k = 0; k < pool; ++k) pools[s].push_back(random_iob(rng, len, 4));
  }
  for (int model = 0; model < 10; ++model) {
    for (std::size_t s = 0; s < n_sent; ++s) {
      if (pools[s].empty() || rng.uniform_index(3) == 0) continue;
      e.sequences.push_back({e.sentences[s].sentence_id, model, pools[s][rng.uniform_index(pools[s].size())]});
    }
  }
  return e;
}

}  // namespace semrte::testing
