#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "semshift/embeddings.hpp"
#include "semshift/error.hpp"
#include "semshift/matrix.hpp"
#include "semshift/random.hpp"

namespace semshift {

struct ClusterResult {
  std::size_t k = 0;
  std::vector<std::size_t> assignments;  // aligned with input rows
  Matrix centroids;
  double distortion = 0.0;           // sum of squared distances to assigned centroid
  std::optional<double> silhouette;  // unset when k == 1
};

// Called once per Lloyd iteration with the distortion after the assignment
// step. `restart` is the zero-based restart index.
using LloydObserver =
    std::function<void(std::size_t restart, std::size_t iteration, double distortion)>;

inline constexpr std::size_t kMaxLloydIterations = 300;

inline double compute_distortion(const Matrix& rows, const Matrix& centroids,
                                 std::span<const std::size_t> assignments) {
  double d = 0.0;
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    d += squared_distance(rows.row(i), centroids.row(assignments[i]));
  }
  return d;
}

namespace clustering_detail {

inline Matrix seed_plus_plus(const Matrix& rows, std::size_t k, Rng& rng) {
  const std::size_t n = rows.rows();
  Matrix centroids(0, rows.cols());
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  centroids.append_row(rows.row(first(rng)));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(rows.row(i), centroids.row(0));
  while (centroids.rows() < k) {
    double total = 0.0;
    for (double x : d2) total += x;
    std::size_t pick = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng);
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        target -= d2[i];
        if (target < 0.0 && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
      while (d2[pick] == 0.0 && pick > 0) --pick;
    } else {
      pick = first(rng);
    }
    centroids.append_row(rows.row(pick));
    const auto c = centroids.row(centroids.rows() - 1);
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(rows.row(i), c));
  }
  return centroids;
}

// Nearest centroid; ties go to the lowest index.
inline std::size_t nearest(const Matrix& centroids, std::span<const double> x, double* dist) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double d = squared_distance(x, centroids.row(c));
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (dist) *dist = best_d;
  return best;
}

struct LloydRun {
  std::vector<std::size_t> assignments;
  Matrix centroids;
  double distortion;
};

inline LloydRun lloyd(const Matrix& rows, std::size_t k, Rng& rng, std::size_t max_iterations,
                      std::size_t restart, const LloydObserver& observer) {
  const std::size_t n = rows.rows();
  const std::size_t dim = rows.cols();
  Matrix centroids = seed_plus_plus(rows, k, rng);
  std::vector<std::size_t> assign(n, k);  // k marks "unassigned"
  std::vector<double> dist(n);
  [[maybe_unused]] double previous = std::numeric_limits<double>::infinity();
  double distortion = 0.0;

  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    distortion = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      // Keep the current cluster on ties so the fixpoint test is stable.
      std::size_t c = nearest(centroids, rows.row(i), &dist[i]);
      if (assign[i] < k && assign[i] != c &&
          squared_distance(rows.row(i), centroids.row(assign[i])) <= dist[i]) {
        c = assign[i];
      }
      if (c != assign[i]) {
        assign[i] = c;
        changed = true;
      }
      distortion += dist[i];
    }
    assert(distortion <= previous * (1.0 + 1e-12) + 1e-12);
    previous = distortion;
    if (observer) observer(restart, iter, distortion);
    if (!changed) break;

    // Update step; an emptied cluster is moved onto the point farthest
    // from its centroid.
    Matrix sums(k, dim);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto s = sums.row(assign[i]);
      const auto x = rows.row(i);
      for (std::size_t j = 0; j < dim; ++j) s[j] += x[j];
      ++counts[assign[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      auto dst = centroids.row(c);
      const auto s = sums.row(c);
      for (std::size_t j = 0; j < dim; ++j) dst[j] = s[j] / static_cast<double>(counts[c]);
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[assign[i]] < 2) continue;
        const double d = squared_distance(rows.row(i), centroids.row(assign[i]));
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far_d > 0.0) {
        const auto src = rows.row(far);
        std::copy(src.begin(), src.end(), centroids.row(c).begin());
        --counts[assign[far]];
        ++counts[c];
      }
    }
  }
  // Equals the last observed value at a fixpoint; differs only when the
  // iteration cap cut the run short after an update step.
  distortion = compute_distortion(rows, centroids, assign);
  return {std::move(assign), std::move(centroids), distortion};
}

}  // namespace clustering_detail

// Lloyd's algorithm with k-means++ seeding. Restart r is seeded with
// seed + r; the lowest-distortion run wins (earliest on ties).
inline ClusterResult kmeans(const Matrix& rows, std::size_t k, std::size_t restarts = 10,
                            std::uint64_t seed = 0, const LloydObserver& observer = {},
                            std::size_t max_iterations = kMaxLloydIterations) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "K must be >= 1");
  if (rows.rows() < k) {
    throw Error(ErrorCode::kTooFewRows, std::to_string(rows.rows()) + " rows for K=" +
                                            std::to_string(k));
  }
  if (restarts < 1) restarts = 1;
  ClusterResult best;
  best.distortion = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < restarts; ++r) {
    Rng rng(seed + r);
    auto run = clustering_detail::lloyd(rows, k, rng, max_iterations, r, observer);
    if (run.distortion < best.distortion) {
      best.k = k;
      best.assignments = std::move(run.assignments);
      best.centroids = std::move(run.centroids);
      best.distortion = run.distortion;
    }
  }
  return best;
}

// Mean silhouette over all points. Points in singleton clusters score 0;
// empty cluster ids are ignored.
inline double silhouette(const Matrix& rows, std::span<const std::size_t> assignments) {
  const std::size_t n = rows.rows();
  if (assignments.size() != n) {
    throw Error(ErrorCode::kLengthMismatch, "assignments do not match rows");
  }
  std::size_t k = 0;
  for (auto a : assignments) k = std::max(k, a + 1);
  std::vector<std::size_t> sizes(k, 0);
  for (auto a : assignments) ++sizes[a];
  const auto non_empty = std::count_if(sizes.begin(), sizes.end(), [](auto s) { return s > 0; });
  if (non_empty < 2) throw Error(ErrorCode::kSingleCluster, "silhouette needs >= 2 clusters");

  std::vector<double> sums(k);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t own = assignments[i];
    if (sizes[own] == 1) continue;
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      sums[assignments[j]] += std::sqrt(squared_distance(rows.row(i), rows.row(j)));
    }
    const double a = sums[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c == own || sizes[c] == 0) continue;
      b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
    }
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

struct SelectKParams {
  std::size_t k_min = 2;
  std::size_t k_max = 10;
  std::size_t restarts = 10;
  // Per-point mean squared distance to the global centroid below which a
  // word is treated as having a single usage type.
  double dispersion_threshold = 0.05;
  std::uint64_t seed = 0;
};

inline std::size_t distinct_row_count(const Matrix& rows, std::size_t cap) {
  std::vector<std::size_t> reps;
  for (std::size_t i = 0; i < rows.rows() && reps.size() < cap; ++i) {
    bool dup = false;
    for (auto r : reps) {
      if (std::equal(rows.row(i).begin(), rows.row(i).end(), rows.row(r).begin())) {
        dup = true;
        break;
      }
    }
    if (!dup) reps.push_back(i);
  }
  return reps.size();
}

// Monosemy gate on total dispersion, otherwise the silhouette-maximising K
// in [k_min, k_max] (smaller K on ties).
inline ClusterResult select_k(const Matrix& rows, const SelectKParams& params = {}) {
  const std::size_t n = rows.rows();
  if (n < 2) throw Error(ErrorCode::kTooFewRows, "select_k needs >= 2 rows");
  if (params.k_min < 2 || params.k_max < params.k_min) {
    throw Error(ErrorCode::kInvalidArgument, "need 2 <= k_min <= k_max");
  }
  ClusterResult single = kmeans(rows, 1, 1, params.seed);
  const double per_point = single.distortion / static_cast<double>(n);
  if (single.distortion == 0.0 || per_point < params.dispersion_threshold) return single;

  const std::size_t k_hi = std::min(params.k_max, distinct_row_count(rows, params.k_max));
  std::optional<ClusterResult> best;
  for (std::size_t k = params.k_min; k <= k_hi; ++k) {
    ClusterResult r = kmeans(rows, k, params.restarts, params.seed);
    double s = -2.0;
    try {
      s = silhouette(rows, r.assignments);
    } catch (const Error&) {
      continue;  // degenerate run that collapsed to one cluster
    }
    r.silhouette = s;
    if (!best || s > *best->silhouette) best = std::move(r);
  }
  return best ? std::move(*best) : single;
}

struct UsageDistribution {
  std::string word;
  std::string time_label;
  std::vector<double> probs;
};

struct JointUsage {
  UsageDistribution t;
  UsageDistribution tprime;
  ClusterResult clusters;
};

// Clusters the pooled rows of both slices and reads off each slice's share
// of every shared cluster.
inline JointUsage usage_distributions(const std::string& word, const UsageMatrix& m_t,
                                      const UsageMatrix& m_tp, const SelectKParams& params = {}) {
  if (m_t.dim() != m_tp.dim() && !m_t.rows.empty() && !m_tp.rows.empty()) {
    throw Error(ErrorCode::kDimMismatch, word);
  }
  if (m_t.size() == 0 || m_tp.size() == 0) {
    throw Error(ErrorCode::kEmptyMatrix, word + ": both slices need at least one row");
  }
  const Matrix pooled = stack(m_t.rows, m_tp.rows);
  JointUsage out;
  out.clusters = select_k(pooled, params);
  const std::size_t k = out.clusters.k;
  out.t = {word, m_t.time_label, std::vector<double>(k, 0.0)};
  out.tprime = {word, m_tp.time_label, std::vector<double>(k, 0.0)};
  const std::size_t n_t = m_t.size();
  for (std::size_t i = 0; i < pooled.rows(); ++i) {
    auto& probs = i < n_t ? out.t.probs : out.tprime.probs;
    probs[out.clusters.assignments[i]] += 1.0;
  }
  for (double& p : out.t.probs) p /= static_cast<double>(n_t);
  for (double& p : out.tprime.probs) p /= static_cast<double>(m_tp.size());
  return out;
}

}  // namespace semshift
