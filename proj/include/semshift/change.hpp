#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semshift/embeddings.hpp"
#include "semshift/error.hpp"
#include "semshift/matrix.hpp"

namespace semshift {

inline constexpr double kDistributionTolerance = 1e-9;

inline void validate_distribution(std::span<const double> p) {
  double sum = 0.0;
  for (double x : p) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw Error(ErrorCode::kNotADistribution, "negative or non-finite component");
    }
    sum += x;
  }
  if (std::abs(sum - 1.0) > kDistributionTolerance) {
    throw Error(ErrorCode::kNotADistribution, "components sum to " + std::to_string(sum));
  }
}

namespace change_detail {

inline double entropy_unchecked(std::span<const double> p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log2(x);
  }
  return h;
}

inline void check_pair(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(p.size()) + " vs " + std::to_string(q.size()));
  }
  validate_distribution(p);
  validate_distribution(q);
}

}  // namespace change_detail

// Shannon entropy in bits, 0 log 0 = 0.
inline double entropy(std::span<const double> p) {
  validate_distribution(p);
  return change_detail::entropy_unchecked(p);
}

// Jensen-Shannon divergence, base 2: H((p+q)/2) - (H(p) + H(q)) / 2.
inline double jsd(std::span<const double> p, std::span<const double> q) {
  change_detail::check_pair(p, q);
  std::vector<double> mid(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) mid[i] = 0.5 * (p[i] + q[i]);
  const double value = change_detail::entropy_unchecked(mid) -
                       0.5 * (change_detail::entropy_unchecked(p) +
                              change_detail::entropy_unchecked(q));
  return std::clamp(value, 0.0, 1.0);
}

inline double entropy_difference(std::span<const double> p, std::span<const double> q) {
  change_detail::check_pair(p, q);
  return std::abs(change_detail::entropy_unchecked(p) - change_detail::entropy_unchecked(q));
}

// Mean cosine distance over all cross-period pairs of unit rows.
inline double apd(const Matrix& m_t, const Matrix& m_tp) {
  if (m_t.empty() || m_tp.empty()) throw Error(ErrorCode::kEmptyMatrix, "apd on empty matrix");
  if (m_t.cols() != m_tp.cols()) {
    throw Error(ErrorCode::kDimMismatch,
                std::to_string(m_t.cols()) + " vs " + std::to_string(m_tp.cols()));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < m_t.rows(); ++i) {
    for (std::size_t j = 0; j < m_tp.rows(); ++j) total += 1.0 - dot(m_t.row(i), m_tp.row(j));
  }
  const double mean = total / static_cast<double>(m_t.rows() * m_tp.rows());
  return std::clamp(mean, 0.0, 2.0);
}

inline double apd(const UsageMatrix& m_t, const UsageMatrix& m_tp) {
  if (m_t.size() == 0 || m_tp.size() == 0) {
    throw Error(ErrorCode::kEmptyMatrix, m_t.word.empty() ? m_tp.word : m_t.word);
  }
  return apd(m_t.rows, m_tp.rows);
}

struct ChangeScore {
  std::string word;
  double jsd = 0.0;
  double ed = 0.0;
  double apd = 0.0;
  std::size_t n_t = 0;
  std::size_t n_tprime = 0;
};

enum class ChangeMetric { kJsd, kEd, kApd };

inline std::string_view to_string(ChangeMetric m) {
  switch (m) {
    case ChangeMetric::kJsd: return "jsd";
    case ChangeMetric::kEd: return "ed";
    case ChangeMetric::kApd: return "apd";
  }
  return "jsd";
}

inline ChangeMetric parse_metric(std::string_view s) {
  if (s == "jsd") return ChangeMetric::kJsd;
  if (s == "ed") return ChangeMetric::kEd;
  if (s == "apd") return ChangeMetric::kApd;
  throw Error(ErrorCode::kInvalidArgument, "unknown metric '" + std::string(s) + "'");
}

inline double metric_value(const ChangeScore& s, ChangeMetric m) {
  switch (m) {
    case ChangeMetric::kJsd: return s.jsd;
    case ChangeMetric::kEd: return s.ed;
    case ChangeMetric::kApd: return s.apd;
  }
  return s.jsd;
}

inline constexpr std::size_t kDefaultTopK = 500;

struct MaskCandidateList {
  std::vector<std::string> words;  // descending by metric
  std::vector<double> scores;      // aligned with words
  ChangeMetric metric = ChangeMetric::kJsd;
  std::size_t k = kDefaultTopK;    // requested size; words.size() may be smaller
};

// Descending by metric with lexicographic tie-break, truncated to k.
inline MaskCandidateList rank_and_select(std::span<const ChangeScore> scores,
                                         ChangeMetric metric = ChangeMetric::kJsd,
                                         std::size_t k = kDefaultTopK) {
  std::vector<const ChangeScore*> order;
  order.reserve(scores.size());
  for (const auto& s : scores) order.push_back(&s);
  std::stable_sort(order.begin(), order.end(), [metric](const ChangeScore* a, const ChangeScore* b) {
    const double va = metric_value(*a, metric);
    const double vb = metric_value(*b, metric);
    if (va != vb) return va > vb;
    return a->word < b->word;
  });
  MaskCandidateList out;
  out.metric = metric;
  out.k = k;
  for (std::size_t i = 0; i < order.size() && i < k; ++i) {
    out.words.push_back(order[i]->word);
    out.scores.push_back(metric_value(*order[i], metric));
  }
  return out;
}

struct HistogramRow {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
  double percent = 0.0;
};

// Contiguous bins [i*w, (i+1)*w) from zero up to the bin holding the largest
// score.
inline std::vector<HistogramRow> score_distribution_report(std::span<const double> scores,
                                                           double bin_width = 0.05) {
  if (!(bin_width > 0.0)) throw Error(ErrorCode::kInvalidArgument, "bin_width must be > 0");
  std::vector<HistogramRow> rows;
  if (scores.empty()) return rows;
  auto bin_of = [bin_width](double s) {
    const double x = std::max(0.0, s) / bin_width;
    return static_cast<std::size_t>(std::floor(x + 1e-9));
  };
  std::size_t max_bin = 0;
  for (double s : scores) max_bin = std::max(max_bin, bin_of(s));
  rows.resize(max_bin + 1);
  for (std::size_t i = 0; i <= max_bin; ++i) {
    rows[i].lower = static_cast<double>(i) * bin_width;
    rows[i].upper = static_cast<double>(i + 1) * bin_width;
  }
  for (double s : scores) ++rows[bin_of(s)].count;
  for (auto& r : rows) {
    r.percent = 100.0 * static_cast<double>(r.count) / static_cast<double>(scores.size());
  }
  return rows;
}

}  // namespace semshift
