#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <vector>

#include "semshift/clustering.hpp"
#include "synthetic.hpp"

namespace semshift {
namespace {

const Matrix kFourPoints{{0, 0}, {0, 1}, {10, 0}, {10, 1}};

// Same partition up to relabelling.
bool same_partition(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  if (a.size() != b.size()) return false;
  std::map<std::size_t, std::size_t> fwd, back;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto [f, f_new] = fwd.emplace(a[i], b[i]);
    auto [r, r_new] = back.emplace(b[i], a[i]);
    if (f->second != b[i] || r->second != a[i]) return false;
  }
  return true;
}

TEST(KMeans, FourPointOracle) {
  const auto r = kmeans(kFourPoints, 2, 10, 0);
  EXPECT_EQ(r.k, 2u);
  EXPECT_NEAR(r.distortion, 1.0, 1e-9);
  EXPECT_TRUE(same_partition(r.assignments, {0, 0, 1, 1}));
  EXPECT_NEAR(silhouette(kFourPoints, r.assignments), 0.9002487577582194, 1e-12);
}

TEST(KMeans, SingleCluster) {
  const auto r = kmeans(kFourPoints, 1, 3, 0);
  EXPECT_NEAR(r.distortion, 101.0, 1e-9);
  EXPECT_EQ(r.assignments, (std::vector<std::size_t>{0, 0, 0, 0}));
  EXPECT_DOUBLE_EQ(r.centroids(0, 0), 5.0);
  EXPECT_DOUBLE_EQ(r.centroids(0, 1), 0.5);
}

TEST(KMeans, OneClusterPerPoint) {
  const auto r = kmeans(kFourPoints, 4, 5, 0);
  EXPECT_NEAR(r.distortion, 0.0, 1e-12);
  auto sorted = r.assignments;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, (std::vector<std::size_t>{0, 1, 2, 3}));
}

TEST(KMeans, Errors) {
  try {
    kmeans(kFourPoints, 5);
    FAIL() << "expected TooFewRows";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooFewRows);
  }
  EXPECT_THROW(kmeans(kFourPoints, 0), Error);
}

TEST(KMeans, DeterministicForSeed) {
  Rng rng(3);
  const auto rows = testing::gaussian_blobs(3, 15, 6, 2.0, 0.8, rng);
  const auto a = kmeans(rows, 3, 4, 42);
  const auto b = kmeans(rows, 3, 4, 42);
  EXPECT_EQ(a.assignments, b.assignments);
  EXPECT_EQ(a.distortion, b.distortion);
}

TEST(KMeans, DistortionIsMinimumOverRestarts) {
  Rng rng(4);
  const auto rows = testing::gaussian_blobs(4, 10, 5, 1.0, 1.0, rng);
  const auto ten = kmeans(rows, 4, 10, 7);
  for (std::size_t r = 0; r < 10; ++r) {
    EXPECT_LE(ten.distortion, kmeans(rows, 4, 1, 7 + r).distortion + 1e-12);
  }
}

TEST(KMeans, LloydDistortionNeverIncreases) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto rows = testing::gaussian_blobs(4, 25, 8, 1.0, 1.0, rng);
    std::map<std::size_t, std::vector<double>> trace;
    kmeans(rows, 5, 3, static_cast<std::uint64_t>(trial),
           [&](std::size_t restart, std::size_t, double d) { trace[restart].push_back(d); });
    ASSERT_EQ(trace.size(), 3u);
    for (const auto& [restart, ds] : trace) {
      ASSERT_FALSE(ds.empty());
      for (std::size_t i = 1; i < ds.size(); ++i) EXPECT_LE(ds[i], ds[i - 1] + 1e-9);
    }
  }
}

TEST(Silhouette, WrongPartitionsAreNegative) {
  const std::vector<std::size_t> a = {0, 1, 0, 1};
  const std::vector<std::size_t> b = {0, 1, 1, 0};
  EXPECT_NEAR(silhouette(kFourPoints, a), -0.4475062189439555, 1e-12);
  EXPECT_NEAR(silhouette(kFourPoints, b), -0.45272954538450594, 1e-12);
}

TEST(Silhouette, SingletonsAndErrors) {
  // Singleton clusters contribute 0.
  const std::vector<std::size_t> a = {0, 0, 1, 2};
  const double s = silhouette(kFourPoints, a);
  EXPECT_GT(s, 0.0);
  EXPECT_LE(s, 0.5);
  const std::vector<std::size_t> one = {0, 0, 0, 0};
  EXPECT_THROW(silhouette(kFourPoints, one), Error);
  const std::vector<std::size_t> short_assign = {0, 1};
  EXPECT_THROW(silhouette(kFourPoints, short_assign), Error);
}

TEST(Silhouette, BoundedOnRandomPartitions) {
  Rng rng(6);
  std::uniform_int_distribution<std::size_t> lab(0, 3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto rows = testing::gaussian_blobs(2, 10, 3, 1.0, 1.0, rng);
    std::vector<std::size_t> assign(rows.rows());
    for (auto& x : assign) x = lab(rng);
    assign[0] = 0;
    assign[1] = 1;
    const double s = silhouette(rows, assign);
    EXPECT_GE(s, -1.0);
    EXPECT_LE(s, 1.0);
  }
}

TEST(SelectK, IdenticalRowsGiveOneCluster) {
  Matrix rows(0, 4);
  for (int i = 0; i < 12; ++i) rows.append_row(std::vector<double>{0.5, 0.5, 0.5, 0.5});
  const auto r = select_k(rows);
  EXPECT_EQ(r.k, 1u);
  EXPECT_FALSE(r.silhouette.has_value());
  EXPECT_EQ(r.distortion, 0.0);
}

TEST(SelectK, TightCloudBelowDispersionThreshold) {
  Rng rng(8);
  const auto rows = testing::gaussian_blobs(1, 40, 6, 1.0, 0.02, rng);
  EXPECT_EQ(select_k(rows).k, 1u);
}

TEST(SelectK, RecoversPlantedClusters) {
  for (std::size_t k : {2u, 3u, 4u}) {
    Rng rng(100 + k);
    std::vector<std::size_t> labels;
    const auto rows = testing::gaussian_blobs(k, 20, 8, 1.0, 0.08, rng, &labels);
    const auto r = select_k(rows);
    EXPECT_EQ(r.k, k);
    ASSERT_TRUE(r.silhouette.has_value());
    EXPECT_GT(*r.silhouette, 0.5);
    EXPECT_TRUE(same_partition(r.assignments, labels));
  }
}

TEST(SelectK, CapsAtDistinctRows) {
  Matrix rows{{0, 0}, {0, 0}, {1, 1}, {1, 1}, {1, 1}};
  SelectKParams p;
  p.k_max = 10;
  const auto r = select_k(rows, p);
  EXPECT_EQ(r.k, 2u);
  EXPECT_EQ(distinct_row_count(rows, 10), 2u);
  EXPECT_EQ(distinct_row_count(rows, 1), 1u);
}

TEST(SelectK, InvalidParameters) {
  SelectKParams p;
  p.k_min = 1;
  EXPECT_THROW(select_k(kFourPoints, p), Error);
  EXPECT_THROW(select_k(Matrix{{1, 2}}), Error);
}

UsageMatrix usage(const std::string& time, const Matrix& rows) {
  return UsageMatrix{"bank", time, rows, std::vector<OccurrenceRef>(rows.rows())};
}

TEST(UsageDistributions, StableAndShiftedWord) {
  Rng rng(12);
  const auto a = testing::gaussian_blobs(1, 20, 4, 1.0, 0.05, rng);
  Matrix b(0, 4);
  {
    auto shifted = testing::gaussian_blobs(2, 10, 4, 1.0, 0.05, rng);
    b = shifted;
  }
  // t: all in sense 0; t': half sense 0, half sense 1.
  const auto joint = usage_distributions("bank", usage("2015", a), usage("2021", b));
  ASSERT_EQ(joint.clusters.k, 2u);
  const std::size_t sense0 = joint.clusters.assignments[0];
  EXPECT_DOUBLE_EQ(joint.t.probs[sense0], 1.0);
  EXPECT_DOUBLE_EQ(joint.tprime.probs[sense0], 0.5);
  EXPECT_DOUBLE_EQ(joint.tprime.probs[1 - sense0], 0.5);
  EXPECT_EQ(joint.t.time_label, "2015");
  EXPECT_EQ(joint.tprime.time_label, "2021");
}

TEST(UsageDistributions, MonosemousWordIsDegenerate) {
  Rng rng(13);
  const auto a = testing::gaussian_blobs(1, 15, 4, 1.0, 0.01, rng);
  const auto b = testing::gaussian_blobs(1, 15, 4, 1.0, 0.01, rng);
  const auto joint = usage_distributions("bank", usage("t", a), usage("u", b));
  EXPECT_EQ(joint.clusters.k, 1u);
  EXPECT_EQ(joint.t.probs, (std::vector<double>{1.0}));
  EXPECT_EQ(joint.tprime.probs, (std::vector<double>{1.0}));
}

TEST(UsageDistributions, EmptySliceThrows) {
  const auto a = usage("t", Matrix{{1, 0}, {0, 1}});
  const auto empty = usage("u", Matrix(0, 2));
  try {
    usage_distributions("bank", a, empty);
    FAIL() << "expected EmptyMatrix";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyMatrix);
  }
}

}  // namespace
}  // namespace semshift
