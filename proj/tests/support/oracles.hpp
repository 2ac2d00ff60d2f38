#pragma once

// Slow reference implementations. They share no code with the library.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "iotids/data.hpp"

namespace iotids::fixtures {

// Probability that a random positive outscores a random negative, ties 1/2.
inline double mann_whitney_auc(const std::vector<Label>& truth, const std::vector<double>& scores) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] != 1) continue;
    for (std::size_t j = 0; j < truth.size(); ++j) {
      if (truth[j] != 0) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

struct TallyMetrics {
  double precision, recall, f1, accuracy;
};

inline TallyMetrics tally(double tp, double fp, double tn, double fn) {
  const double p = tp / (tp + fp);
  const double r = tp / (tp + fn);
  return {p, r, 2.0 * p * r / (p + r), (tp + tn) / (tp + fp + tn + fn)};
}

struct RefNeighbor {
  std::size_t index;
  double distance;
};

inline double ref_distance(const DataTable& t, std::size_t row, const std::vector<double>& q, double p) {
  double s = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) s += std::pow(std::abs(t.at(row, j) - q[j]), p);
  return p == 1.0 ? s : std::pow(s, 1.0 / p);
}

// Full sort of every training row by (distance, index).
inline std::vector<RefNeighbor> ref_nearest(const DataTable& t, const std::vector<double>& q, std::size_t k,
                                            double p) {
  std::vector<RefNeighbor> all;
  for (std::size_t i = 0; i < t.rows(); ++i) all.push_back({i, ref_distance(t, i, q, p)});
  std::sort(all.begin(), all.end(), [](const RefNeighbor& a, const RefNeighbor& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.index < b.index;
  });
  all.resize(k);
  return all;
}

// Exact matches outvote everything else when weighting by inverse distance.
inline Label ref_knn_vote(const DataTable& t, const std::vector<RefNeighbor>& nb, bool by_distance) {
  double votes[2] = {0.0, 0.0};
  bool exact = false;
  for (const auto& n : nb) exact = exact || n.distance == 0.0;
  for (const auto& n : nb) {
    double w = 1.0;
    if (by_distance) w = exact ? (n.distance == 0.0 ? 1.0 : 0.0) : 1.0 / n.distance;
    votes[t.label(n.index)] += w;
  }
  return votes[1] > votes[0] ? 1 : 0;
}

inline double ref_impurity(double n0, double n1, bool entropy) {
  const double n = n0 + n1;
  if (n == 0.0) return 0.0;
  const double p[2] = {n0 / n, n1 / n};
  double out = entropy ? 0.0 : 1.0;
  for (double q : p) {
    if (entropy) out -= q > 0.0 ? q * std::log2(q) : 0.0;
    else out -= q * q;
  }
  return out;
}

struct RefStump {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double decrease = 0.0;
};

// Every feature, every midpoint between distinct observed values.
inline RefStump ref_best_stump(const DataTable& t, bool entropy, std::size_t min_leaf) {
  double c[2] = {0.0, 0.0};
  for (std::size_t i = 0; i < t.rows(); ++i) c[t.label(i)] += 1.0;
  const double parent = ref_impurity(c[0], c[1], entropy);
  const double n = c[0] + c[1];
  RefStump best;
  for (std::size_t f = 0; f < t.cols(); ++f) {
    std::vector<double> vals;
    for (std::size_t i = 0; i < t.rows(); ++i) vals.push_back(t.at(i, f));
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    for (std::size_t k = 0; k + 1 < vals.size(); ++k) {
      const double thr = (vals[k] + vals[k + 1]) / 2.0;
      double l[2] = {0.0, 0.0};
      double r[2] = {0.0, 0.0};
      for (std::size_t i = 0; i < t.rows(); ++i) (t.at(i, f) <= thr ? l : r)[t.label(i)] += 1.0;
      const double nl = l[0] + l[1];
      const double nr = r[0] + r[1];
      if (nl < min_leaf || nr < min_leaf) continue;
      const double dec =
          parent - nl / n * ref_impurity(l[0], l[1], entropy) - nr / n * ref_impurity(r[0], r[1], entropy);
      if (!best.found || dec > best.decrease) best = {true, f, thr, dec};
    }
  }
  return best;
}

}  // namespace iotids::fixtures
