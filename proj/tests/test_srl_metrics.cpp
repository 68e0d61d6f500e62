#include <doctest.h>

#include <algorithm>
#include <set>

#include "semrte/common.hpp"
#include "semrte/srl_metrics.hpp"
#include "support.hpp"

using namespace semrte;

namespace {

// Counts exact matches by pairing each gold span with an unused equal
// predicted span.
std::size_t oracle_tp(const std::vector<Span>& gold, const std::vector<Span>& pred) {
  std::vector<bool> used(pred.size(), false);
  std::size_t tp = 0;
  for (const auto& g : gold) {
    for (std::size_t j = 0; j < pred.size(); ++j) {
      if (!used[j] && pred[j].role == g.role && pred[j].start == g.start && pred[j].end == g.end) {
        used[j] = true;
        ++tp;
        break;
      }
    }
  }
  return tp;
}

std::vector<Span> random_spans(Rng& rng) {
  std::vector<Span> out;
  const auto n = rng.uniform_index(5);
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = rng.uniform_index(4), b = rng.uniform_index(4);
    out.push_back({testing::role_pool()[rng.uniform_index(2)], std::min(a, b), std::max(a, b)});
  }
  return out;
}

}  // namespace

TEST_CASE("extract_spans examples") {
  using V = std::vector<std::string>;
  const V a{"B-ARG0", "I-ARG0", "O", "B-V"};
  CHECK(extract_spans(a) == std::vector<Span>{{"ARG0", 0, 1}, {"V", 3, 3}});
  CHECK(extract_spans(V{"O", "O"}).empty());
  CHECK(extract_spans(V{"B-V", "B-V"}) == std::vector<Span>{{"V", 0, 0}, {"V", 1, 1}});
}

TEST_CASE("extract_spans and spans_to_iob round-trip") {
  Rng rng(17);
  for (int i = 0; i < 1000; ++i) {
    const auto labels = testing::random_iob(rng, 1 + rng.uniform_index(10), 4);
    CHECK(spans_to_iob(extract_spans(labels), labels.size()) == labels);
  }
}

TEST_CASE("span_prf direct formula") {
  const std::vector<std::vector<Span>> gold{{{"ARG0", 0, 1}}};
  const std::vector<std::vector<Span>> pred{{{"ARG0", 0, 1}, {"V", 2, 2}}};
  const PRF prf = span_prf(gold, pred);
  CHECK(prf.precision == doctest::Approx(0.5));
  CHECK(prf.recall == doctest::Approx(1.0));
  CHECK(prf.f1 == doctest::Approx(2.0 / 3.0));

  const PRF same = span_prf(gold, gold);
  CHECK(same.precision == 1.0);
  CHECK(same.recall == 1.0);
  CHECK(same.f1 == 1.0);

  const PRF none = span_prf(std::vector<std::vector<Span>>{{}}, std::vector<std::vector<Span>>{{}});
  CHECK(none.f1 == 0.0);
  CHECK(none.precision == 0.0);
  CHECK_THROWS_AS(span_prf(gold, std::vector<std::vector<Span>>{}), DataError);
}

TEST_CASE("span_prf matches the multiset oracle, including repeated spans") {
  Rng rng(23);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::vector<Span>> gold, pred;
    std::size_t tp = 0, ng = 0, np = 0;
    const auto n = 1 + rng.uniform_index(4);
    for (std::size_t s = 0; s < n; ++s) {
      gold.push_back(random_spans(rng));
      pred.push_back(random_spans(rng));
      tp += oracle_tp(gold.back(), pred.back());
      ng += gold.back().size();
      np += pred.back().size();
    }
    const PRF prf = span_prf(gold, pred);
    CHECK(prf.tp == tp);
    CHECK(prf.fp == np - tp);
    CHECK(prf.fn == ng - tp);
    // Swapping gold and prediction swaps precision and recall.
    const PRF swapped = span_prf(pred, gold);
    CHECK(swapped.precision == prf.recall);
    CHECK(swapped.recall == prf.precision);
    CHECK(swapped.f1 == prf.f1);
    CHECK(prf.f1 <= 1.0);
    CHECK((prf.f1 == 0.0) == (prf.tp == 0));
  }
}

TEST_CASE("PRF::from_counts") {
  const PRF p = PRF::from_counts(3, 1, 2);
  CHECK(p.precision == doctest::Approx(0.75));
  CHECK(p.recall == doctest::Approx(0.6));
  CHECK(p.f1 == doctest::Approx(2 * 0.75 * 0.6 / 1.35));
  const PRF z = PRF::from_counts(0, 0, 0);
  CHECK(z.precision == 0.0);
  CHECK(z.recall == 0.0);
  CHECK(z.f1 == 0.0);
}

TEST_CASE("kfold_split balance and determinism") {
  std::vector<std::string> ids;
  for (int i = 0; i < 1760; ++i) ids.push_back("s" + std::to_string(i));
  const KFoldPlan plan = kfold_split(ids, 10, 4);
  CHECK(plan.fold_sizes() == std::vector<std::size_t>(10, 176));
  std::set<std::string> seen;
  for (int f = 0; f < 10; ++f) {
    for (const auto& id : plan.fold_members(f)) CHECK(seen.insert(id).second);
  }
  CHECK(seen.size() == ids.size());
  CHECK(kfold_split(ids, 10, 4).fold_of == plan.fold_of);
  CHECK(kfold_split(ids, 10, 5).fold_of != plan.fold_of);

  std::vector<std::string> ten(ids.begin(), ids.begin() + 10);
  CHECK(kfold_split(ten, 10, 0).fold_sizes() == std::vector<std::size_t>(10, 1));

  std::vector<std::string> odd(ids.begin(), ids.begin() + 23);
  const auto sizes = kfold_split(odd, 10, 0).fold_sizes();
  CHECK(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()) <= 1);

  CHECK_THROWS_AS(kfold_split(ten, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(kfold_split(ten, 11, 0), std::invalid_argument);
}

TEST_CASE("aggregate_folds over the ten XLM-R folds") {
  const double f1[] = {35.10, 36.21, 35.36, 34.91, 34.92, 35.03, 34.30, 35.69, 37.22, 36.94};
  const double p[] = {36.72, 44.83, 39.62, 41.34, 38.82, 38.20, 36.72, 41.28, 42.32, 40.91};
  std::vector<PRF> folds;
  for (int i = 0; i < 10; ++i) {
    PRF x;
    x.precision = p[i] / 100;
    x.f1 = f1[i] / 100;
    folds.push_back(x);
  }
  const PRF avg = aggregate_folds(folds);
  CHECK(format_percent(avg.f1) == "35.57");
  CHECK(format_percent(avg.precision) == "40.08");
}

TEST_CASE("aggregate_folds identities") {
  PRF x = PRF::from_counts(5, 2, 3);
  CHECK(aggregate_folds(std::vector<PRF>{x}).f1 == x.f1);
  const PRF avg = aggregate_folds(std::vector<PRF>(7, x));
  CHECK(avg.precision == doctest::Approx(x.precision).epsilon(1e-15));
  CHECK(avg.recall == doctest::Approx(x.recall).epsilon(1e-15));
  CHECK(avg.f1 == doctest::Approx(x.f1).epsilon(1e-15));
  CHECK(avg.tp == 35);
  CHECK_THROWS_AS(aggregate_folds({}), std::invalid_argument);
}

TEST_CASE("PRF JSON") {
  const PRF x = PRF::from_counts(7, 3, 5);
  const std::string j = prf_to_json(x);
  CHECK(j.find("\"precision\": 70.00,") != std::string::npos);
  const PRF back = prf_from_json(j);
  CHECK(back.tp == 7);
  CHECK(back.fp == 3);
  CHECK(back.fn == 5);
  CHECK(format_percent(back.f1) == format_percent(x.f1));
  CHECK_THROWS_AS(prf_from_json("{"), DataError);
}

TEST_CASE("half-up rounding to hundredths") {
  CHECK(to_hundredths(35.565) == 3557);
  CHECK(to_hundredths(35.564999) == 3556);
  CHECK(to_hundredths(-1.425) == -143);
  CHECK(format_hundredths(-142) == "-1.42");
  CHECK(format_hundredths(5) == "0.05");
  CHECK(format_percent(1.0) == "100.00");
}
