#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "semrte/aspects.hpp"
#include "semrte/srl_metrics.hpp"
#include "support.hpp"

using namespace semrte;
using Tags = std::vector<std::string>;

namespace {

// V spans counted by decoding tags one at a time.
std::size_t oracle_verbs(const Tags& row) {
  std::size_t n = 0;
  std::string prev = "O";
  for (const auto& t : row) {
    if (t == "B-V" || (t == "I-V" && prev != "B-V" && prev != "I-V")) ++n;
    prev = t;
  }
  return n;
}

std::multiset<std::pair<std::string, Tags>> aspect_multiset(const std::vector<AspectSet>& sets) {
  std::multiset<std::pair<std::string, Tags>> out;
  for (const auto& s : sets) {
    for (const auto& row : s.aspects) out.emplace(s.sentence_id, row);
  }
  return out;
}

}  // namespace

TEST_CASE("dedupe keeps the first occurrence") {
  const std::vector<PredictedSequence> seqs{{"s1", 0, {"B-V", "O"}}, {"s1", 3, {"B-V", "O"}}, {"s1", 4, {"O", "B-V"}}};
  const auto out = dedupe(seqs);
  REQUIRE(out.size() == 2);
  CHECK(out[0].source_model == 0);
  CHECK(out[1].source_model == 4);
  CHECK(dedupe(out) == out);
  CHECK(dedupe({}).empty());
}

TEST_CASE("filter_multi_verb") {
  const std::vector<PredictedSequence> seqs{
      {"a", 0, {"B-V", "O", "B-V"}}, {"b", 0, {"B-V", "I-V", "O"}}, {"c", 0, {"O", "O"}}, {"d", 0, {"B-V", "B-V"}}};
  const auto out = filter_multi_verb(seqs);
  REQUIRE(out.size() == 2);
  CHECK(out[0].sentence_id == "b");
  CHECK(out[1].sentence_id == "c");
}

TEST_CASE("group_by_sentence ordering and fallback") {
  const std::vector<SentenceTokens> sents{{"s1", {"a", "b", "c", "d", "e"}}, {"s2", {"x"}}};
  const std::vector<PredictedSequence> seqs{{"s1", 0, {"O", "O", "O", "O", "B-V"}},
                                            {"s1", 1, {"B-ARG0", "B-V", "O", "O", "O"}},
                                            {"s1", 2, {"O", "O", "B-ARG1", "O", "O"}}};
  const auto g = group_by_sentence(seqs, sents);
  REQUIRE(g.size() == 2);
  REQUIRE(g[0].aspects.size() == 3);
  CHECK(g[0].aspects[0] == seqs[1].labels);
  CHECK(g[0].aspects[1] == seqs[0].labels);
  CHECK(g[0].aspects[2] == seqs[2].labels);  // no V: last
  CHECK(g[1].aspects == std::vector<Tags>{{"O"}});

  const std::vector<PredictedSequence> bad_id{{"nope", 0, {"O"}}};
  CHECK_THROWS_WITH_AS(group_by_sentence(bad_id, sents), "unresolvable sentence_id 'nope'", DataError);
  const std::vector<PredictedSequence> bad_len{{"s2", 0, {"O", "O"}}};
  CHECK_THROWS_AS(group_by_sentence(bad_len, sents), DataError);
}

TEST_CASE("cap_and_pad") {
  AspectSet a{"s", {"w1", "w2"}, {{"B-V", "O"}, {"O", "B-V"}, {"B-ARG0", "B-V"}, {"B-V", "B-ARG1"}, {"O", "O"}}};
  CHECK(cap_and_pad(a, 2).aspects == std::vector<Tags>{{"B-V", "O"}, {"O", "B-V"}});
  CHECK(cap_and_pad(a, 1).aspects == std::vector<Tags>{{"B-V", "O"}});
  AspectSet one{"s", {"w1", "w2"}, {{"B-V", "O"}}};
  CHECK(cap_and_pad(one, 3).aspects == std::vector<Tags>{{"B-V", "O"}, {"O", "O"}, {"O", "O"}});
  CHECK_THROWS_AS(cap_and_pad(one, 0), std::invalid_argument);
}

TEST_CASE("count_predicates") {
  AspectSet a{"s", {"w1", "w2"}, {{"B-V", "O"}, {"B-ARG0", "B-V"}}};
  CHECK(count_predicates(cap_and_pad(a, 3)) == 2);
  AspectSet fallback{"s", {"w1", "w2"}, {{"O", "O"}}};
  CHECK(count_predicates(fallback) == 0);
}

TEST_CASE("merge properties over random ensembles") {
  Rng rng(101);
  for (int trial = 0; trial < 300; ++trial) {
    const auto e = testing::random_ensemble(rng);
    const auto d = dedupe(e.sequences);
    CHECK(dedupe(d) == d);
    const auto f = filter_multi_verb(e.sequences);
    CHECK(filter_multi_verb(f) == f);
    for (const auto& s : f) CHECK(oracle_verbs(s.labels) <= 1);
    for (const auto& s : e.sequences) {
      const bool kept = std::find(f.begin(), f.end(), s) != f.end();
      CHECK(kept == (oracle_verbs(s.labels) <= 1));
      CHECK(count_verb_spans(s.labels) == oracle_verbs(s.labels));
    }
    // Rule order does not change the final aspect multiset.
    const auto a = group_by_sentence(filter_multi_verb(dedupe(e.sequences)), e.sentences);
    const auto b = group_by_sentence(dedupe(filter_multi_verb(e.sequences)), e.sentences);
    CHECK(aspect_multiset(a) == aspect_multiset(b));

    const int m = 1 + static_cast<int>(rng.uniform_index(5));
    for (const auto& g : a) {
      const auto c = cap_and_pad(g, m);
      CHECK(c.aspects.size() == static_cast<std::size_t>(m));
      for (const auto& row : c.aspects) CHECK(row.size() == c.tokens.size());
      int oracle = 0;
      bool all_o = true;
      for (const auto& row : c.aspects) {
        if (oracle_verbs(row) > 0) ++oracle;
        for (const auto& t : row) all_o = all_o && t == "O";
      }
      CHECK(count_predicates(c) == oracle);
      CHECK(count_predicates(c) <= m);
      if (all_o) CHECK(count_predicates(c) == 0);
    }
  }
}

TEST_CASE("merge_aspects equals composing the rules by hand") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto e = testing::random_ensemble(rng);
    MergeStats stats;
    const auto merged = merge_aspects(e.sequences, e.sentences, 2, &stats);
    const auto d = dedupe(e.sequences);
    const auto f = filter_multi_verb(d);
    std::vector<AspectSet> manual;
    for (const auto& g : group_by_sentence(f, e.sentences)) manual.push_back(cap_and_pad(g, 2));
    CHECK(serialize_aspect_sets(merged) == serialize_aspect_sets(manual));
    CHECK(stats.input_sequences == e.sequences.size());
    CHECK(stats.removed_duplicates == e.sequences.size() - d.size());
    CHECK(stats.removed_multi_verb == d.size() - f.size());
  }
}

TEST_CASE("ten identical model outputs collapse to one aspect") {
  const std::vector<SentenceTokens> sents{{"s", {"he", "ran", "home"}}};
  std::vector<PredictedSequence> seqs;
  for (int k = 0; k < 10; ++k) seqs.push_back({"s", k, {"B-ARG0", "B-V", "B-ARG1"}});
  MergeStats stats;
  const auto merged = merge_aspects(seqs, sents, 3, &stats);
  REQUIRE(merged.size() == 1);
  CHECK(merged[0].aspects == std::vector<Tags>{{"B-ARG0", "B-V", "B-ARG1"}, {"O", "O", "O"}, {"O", "O", "O"}});
  CHECK(stats.removed_duplicates == 9);

  seqs.push_back({"s", 0, {"B-V", "O", "B-V"}});
  merge_aspects(seqs, sents, 3, &stats);
  CHECK(stats.removed_multi_verb == 1);
}

TEST_CASE("pair_aspects layout") {
  PremisePair p{"p", {"a", "b"}, {"c", "d", "e"}, Label::kAgree, Lang::kVie, {}};
  AspectSet a1{"p#1", {"a", "b"}, {{"O", "B-V"}}};
  AspectSet a2{"p#2", {"c", "d", "e"}, {{"B-ARG0", "I-ARG0", "B-V"}}};
  const auto grid = pair_aspects(p, a1, a2, 1);
  CHECK(grid.width == 8);
  CHECK(grid.rows == std::vector<Tags>{{"O", "O", "B-V", "O", "B-ARG0", "I-ARG0", "B-V", "O"}});

  AspectSet o1{"p#1", {"a", "b"}, {{"O", "O"}, {"O", "O"}}};
  AspectSet o2{"p#2", {"c", "d", "e"}, {{"O", "O", "O"}, {"O", "O", "O"}}};
  const auto zero = pair_aspects(p, o1, o2, 2);
  for (const auto& row : zero.rows) CHECK(std::all_of(row.begin(), row.end(), [](auto& t) { return t == "O"; }));

  const auto cut = pair_aspects(p, a1, a2, 1, 1, 2);
  CHECK(cut.rows == std::vector<Tags>{{"O", "O", "O", "B-ARG0", "I-ARG0", "O"}});

  AspectSet wrong{"p#1", {"a", "x"}, {{"O", "O"}}};
  CHECK_THROWS_AS(pair_aspects(p, wrong, a2, 1), DataError);
}

TEST_CASE("aspect and token JSONL round-trip") {
  Rng rng(9);
  const auto e = testing::random_ensemble(rng);
  const auto merged = merge_aspects(e.sequences, e.sentences, 3);
  CHECK(parse_aspect_sets(serialize_aspect_sets(merged)) == merged);
  const auto toks = parse_sentence_tokens(serialize_sentence_tokens(e.sentences));
  REQUIRE(toks.size() == e.sentences.size());
  for (std::size_t i = 0; i < toks.size(); ++i) CHECK(toks[i].tokens == e.sentences[i].tokens);
  CHECK_THROWS_AS(parse_aspect_sets("{\"sentence_id\":\"x\",\"tokens\":[\"a\"],\"aspects\":[[\"I-V\"]]}\n"),
                  DataError);
}

TEST_CASE("CoNLL predictions become ensemble sequences") {
  const auto sents = parse_conll("# id = s1\nhe\tB-ARG0\nran\tB-V\n\n# id = s2\ngo\tB-V\n\n");
  const auto preds = predictions_from_conll(sents, 4);
  REQUIRE(preds.size() == 2);
  CHECK(preds[1] == PredictedSequence{"s2", 4, {"B-V"}});
}
