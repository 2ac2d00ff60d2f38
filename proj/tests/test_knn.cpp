#include <gtest/gtest.h>
#include <numeric>

#include "iotids/error.hpp"
#include "iotids/knn.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace iotids;

namespace {

KnnConfig config(std::size_t k, KnnWeighting w, Metric m = Metric::manhattan, double p = 1.0) {
  return {k, w, m, p};
}

}  // namespace

TEST(Distance, Examples) {
  const std::vector<double> o{0, 0}, q{3, 4};
  EXPECT_EQ(distance(o, o, Metric::manhattan), 0.0);
  EXPECT_EQ(distance(q, q, Metric::minkowski, 3.0), 0.0);
  EXPECT_DOUBLE_EQ(distance(o, q, Metric::manhattan), 7.0);
  EXPECT_DOUBLE_EQ(distance(o, q, Metric::minkowski, 2.0), 5.0);
  EXPECT_DOUBLE_EQ(distance(o, q, Metric::minkowski, 1.0), 7.0);
  const std::vector<double> short_row{1.0};
  EXPECT_THROW(distance(o, short_row, Metric::manhattan), std::invalid_argument);
}

TEST(Distance, SymmetricAndNonNegative) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(4), b(4);
    for (auto& v : a) v = fixtures::gaussian(rng);
    for (auto& v : b) v = fixtures::gaussian(rng);
    for (double p : {1.0, 1.5, 2.0, 3.0}) {
      const Metric m = p == 1.0 ? Metric::manhattan : Metric::minkowski;
      EXPECT_EQ(distance(a, b, m, p), distance(b, a, m, p));
      EXPECT_GT(distance(a, b, m, p), 0.0);
    }
  }
}

TEST(Knn, ExactMatchWins) {
  const DataTable t({"x", "y"}, {0, 0, 1, 1, 2, 2, 3, 3}, {0, 1, 1, 1});
  const KnnModel m(t, config(3, KnnWeighting::distance));
  const std::vector<double> q{0, 0};
  EXPECT_EQ(m.predict(q), 0);
  EXPECT_EQ(m.predict_score(q), (std::array<double, 2>{1.0, 0.0}));
}

TEST(Knn, FourPointExample) {
  const DataTable t({"x", "y"}, {0, 0, 1, 0, 5, 5, 6, 5}, {0, 0, 1, 1});
  const KnnModel m(t, config(3, KnnWeighting::distance));
  const std::vector<double> q{0.5, 0};
  const auto nb = m.nearest(q);
  ASSERT_EQ(nb.size(), 3u);
  EXPECT_EQ(nb[0], (Neighbor{0, 0.5}));
  EXPECT_EQ(nb[1], (Neighbor{1, 0.5}));
  EXPECT_EQ(nb[2], (Neighbor{2, 9.5}));
  EXPECT_EQ(m.predict(q), 0);
  EXPECT_NEAR(m.predict_score(q)[0], 4.0 / (4.0 + 1.0 / 9.5), 1e-15);
}

TEST(Knn, AllNeighboursGiveGlobalFrequency) {
  const DataTable t = fixtures::random_table(17, 3, 5, 2);
  const KnnModel m(t, config(t.rows(), KnnWeighting::uniform));
  const double freq = static_cast<double>(t.class_counts()[1]) / static_cast<double>(t.rows());
  Rng rng(1);
  for (int i = 0; i < 10; ++i) {
    const std::vector<double> q{fixtures::gaussian(rng), fixtures::gaussian(rng), fixtures::gaussian(rng)};
    EXPECT_DOUBLE_EQ(m.predict_score(q)[1], freq);
  }
}

TEST(Knn, TieAtKthDistanceKeepsLowestIndex) {
  const DataTable t({"x"}, {1, -1, 1, -1}, {1, 0, 1, 0});
  const KnnModel m(t, config(2, KnnWeighting::uniform));
  const std::vector<double> q{0};
  const auto nb = m.nearest(q);
  EXPECT_EQ(nb[0].index, 0u);
  EXPECT_EQ(nb[1].index, 1u);
  // One vote each: tie resolves to class 0.
  EXPECT_EQ(m.predict(q), 0);
}

TEST(Knn, KOneIsNearestLabel) {
  const DataTable t = fixtures::noisy_linear(60, 3, 0.5, 3);
  const KnnModel m(t, config(1, KnnWeighting::uniform));
  for (std::size_t i = 0; i < t.rows(); ++i) EXPECT_EQ(m.predict(t.row(i)), t.label(i));
}

TEST(Knn, MatchesFullSortOracle) {
  Rng rng(42);
  for (std::uint64_t trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(200);
    const std::size_t d = 1 + rng.uniform_index(8);
    const DataTable t = fixtures::random_table(n, d, 1 + static_cast<int>(trial % 5), trial);
    const std::size_t k = 1 + rng.uniform_index(std::min<std::uint64_t>(n, 9));
    const double p = trial % 3 == 0 ? 2.0 : 1.0;
    for (KnnWeighting w : {KnnWeighting::uniform, KnnWeighting::distance}) {
      const KnnModel m(t, config(k, w, p == 1.0 ? Metric::manhattan : Metric::minkowski, p));
      for (int qi = 0; qi < 10; ++qi) {
        std::vector<double> q(d);
        for (auto& v : q) v = static_cast<double>(rng.uniform_index(5));
        const auto ref = fixtures::ref_nearest(t, q, k, p);
        const auto got = m.nearest(q);
        ASSERT_EQ(got.size(), ref.size());
        for (std::size_t j = 0; j < k; ++j) EXPECT_EQ(got[j].index, ref[j].index);
        EXPECT_EQ(m.predict(q), fixtures::ref_knn_vote(t, ref, w == KnnWeighting::distance));
      }
    }
  }
}

TEST(Knn, PermutationInvariantInGeneralPosition) {
  const DataTable t = fixtures::noisy_linear(80, 4, 0.6, 11);
  std::vector<std::size_t> perm(t.rows());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(2);
  rng.shuffle(std::span(perm));
  const KnnModel a(t, config(5, KnnWeighting::distance));
  const KnnModel b(t.subset(perm), config(5, KnnWeighting::distance));
  const DataTable queries = fixtures::noisy_linear(40, 4, 0.6, 12);
  for (std::size_t i = 0; i < queries.rows(); ++i) {
    EXPECT_EQ(a.predict(queries.row(i)), b.predict(queries.row(i)));
    EXPECT_NEAR(a.predict_score(queries.row(i))[1], b.predict_score(queries.row(i))[1], 1e-12);
  }
}

TEST(Knn, RejectsBadConfigAndRows) {
  const DataTable t = fixtures::blobs(6, 2, 1.0, 1);
  EXPECT_THROW(KnnModel(t, config(7, KnnWeighting::uniform)), FitError);
  EXPECT_THROW(KnnModel(t, config(0, KnnWeighting::uniform)), ConfigError);
  EXPECT_THROW(KnnModel(t, config(3, KnnWeighting::uniform, Metric::minkowski, 0.5)), ConfigError);
  EXPECT_THROW(KnnModel(DataTable(), config(1, KnnWeighting::uniform)), FitError);
  const KnnModel m(t, config(3, KnnWeighting::uniform));
  const std::vector<double> wrong{1.0};
  EXPECT_THROW(m.predict(wrong), std::invalid_argument);
}
