#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "semshift/corpus.hpp"
#include "semshift/error.hpp"
#include "semshift/text.hpp"

namespace semshift {

using Stoplist = std::unordered_set<std::string>;

struct KeywordScore {
  std::string word;
  double score = 0.0;  // lower is more important
  std::size_t tf = 0;
  std::string slice_label;
};

using KeywordTable = std::unordered_map<std::string, KeywordScore>;

// A word that can receive a keyword score at all: not punctuation, not the
// number placeholder and not a stoplist entry.
inline bool is_scorable_word(const std::string& token, const Stoplist& stoplist) {
  return !token.empty() && !is_punctuation_token(token) && token != kNumberToken &&
         !stoplist.count(token);
}

namespace keywords_detail {

struct WordStats {
  std::size_t tf = 0;
  std::size_t title_count = 0;
  std::size_t upper_count = 0;
  std::vector<std::size_t> sentences;  // distinct 1-based sentence indexes, ascending
  std::unordered_map<std::string, std::size_t> left;
  std::unordered_map<std::string, std::size_t> right;
  std::size_t left_total = 0;
  std::size_t right_total = 0;
};

inline bool is_title_case(const std::string& s) {
  if (s.empty() || !(s[0] >= 'A' && s[0] <= 'Z')) return false;
  return std::any_of(s.begin() + 1, s.end(), [](char c) { return c >= 'a' && c <= 'z'; }) ||
         s.size() == 1;
}

inline bool is_all_upper(const std::string& s) {
  std::size_t letters = 0;
  for (char c : s) {
    if (c >= 'a' && c <= 'z') return false;
    if (c >= 'A' && c <= 'Z') ++letters;
  }
  return letters >= 2;
}

inline double median(const std::vector<std::size_t>& sorted) {
  const std::size_t n = sorted.size();
  if (n % 2 == 1) return static_cast<double>(sorted[n / 2]);
  return 0.5 * static_cast<double>(sorted[n / 2 - 1] + sorted[n / 2]);
}

}  // namespace keywords_detail

// YAKE! unigram scores over a slice read as one concatenated document.
// Sentences end at ".", "!", "?" and at document boundaries. Casing comes
// from re-tokenizing raw_text; documents whose raw text does not align with
// their tokens contribute no casing evidence.
inline KeywordTable yake_scores(const TimeSlice& slice,
                                const Stoplist& stoplist = keyword_stoplist()) {
  using keywords_detail::WordStats;
  std::unordered_map<std::string, WordStats> stats;
  std::size_t sentence = 1;
  std::size_t sentence_count = 0;

  for (const auto& doc : slice.documents) {
    const auto& tokens = doc->tokens;
    auto cased = tokenize_cased(doc->raw_text);
    const bool has_case = cased.size() == tokens.size();
    bool sentence_open = false;
    bool at_sentence_start = true;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const auto& tok = tokens[i];
      if (is_sentence_terminal(tok)) {
        if (sentence_open) {
          ++sentence;
          ++sentence_count;
        }
        sentence_open = false;
        at_sentence_start = true;
        continue;
      }
      sentence_open = true;
      if (is_scorable_word(tok, stoplist)) {
        auto& ws = stats[tok];
        ++ws.tf;
        if (ws.sentences.empty() || ws.sentences.back() != sentence) {
          ws.sentences.push_back(sentence);
        }
        if (has_case) {
          if (keywords_detail::is_all_upper(cased[i])) {
            ++ws.upper_count;
          } else if (!at_sentence_start && keywords_detail::is_title_case(cased[i])) {
            ++ws.title_count;
          }
        }
        if (i > 0 && !is_punctuation_token(tokens[i - 1])) {
          ++ws.left[tokens[i - 1]];
          ++ws.left_total;
        }
        if (i + 1 < tokens.size() && !is_punctuation_token(tokens[i + 1])) {
          ++ws.right[tokens[i + 1]];
          ++ws.right_total;
        }
      }
      if (!is_punctuation_token(tok)) at_sentence_start = false;
    }
    if (sentence_open) {
      ++sentence;
      ++sentence_count;
    }
  }

  KeywordTable table;
  if (stats.empty()) return table;

  double mean_tf = 0.0;
  std::size_t max_tf = 0;
  for (const auto& [w, s] : stats) {
    mean_tf += static_cast<double>(s.tf);
    max_tf = std::max(max_tf, s.tf);
  }
  mean_tf /= static_cast<double>(stats.size());
  double var = 0.0;
  for (const auto& [w, s] : stats) {
    const double d = static_cast<double>(s.tf) - mean_tf;
    var += d * d;
  }
  const double std_tf = std::sqrt(var / static_cast<double>(stats.size()));

  for (const auto& [w, s] : stats) {
    const double tf = static_cast<double>(s.tf);
    const double t_case =
        static_cast<double>(std::max(s.title_count, s.upper_count)) / (1.0 + std::log(tf));
    const double t_pos = std::log2(std::log2(2.0 + keywords_detail::median(s.sentences)));
    const double t_fnorm = tf / (mean_tf + std_tf);
    const double dl = s.left_total ? static_cast<double>(s.left.size()) /
                                         static_cast<double>(s.left_total)
                                   : 0.0;
    const double dr = s.right_total ? static_cast<double>(s.right.size()) /
                                          static_cast<double>(s.right_total)
                                    : 0.0;
    const double t_rel = 1.0 + (dl + dr) * tf / static_cast<double>(max_tf);
    const double t_sent =
        static_cast<double>(s.sentences.size()) / static_cast<double>(sentence_count);
    const double score = (t_rel * t_pos) / (t_case + t_fnorm / t_rel + t_sent / t_rel);
    table.emplace(w, KeywordScore{w, score, s.tf, slice.label});
  }
  return table;
}

inline Vocab slice_counts(const TimeSlice& slice) {
  Vocab counts;
  for (const auto& doc : slice.documents) {
    for (const auto& t : doc->tokens) ++counts[t];
  }
  return counts;
}

struct Candidate {
  std::string word;
  double yake_score = 0.0;
  std::size_t count_t = 0;
  std::size_t count_tprime = 0;
};

struct CandidateSet {
  std::vector<Candidate> entries;  // ascending yake score, then word
  std::pair<std::string, std::string> slice_pair;

  std::vector<std::string> words() const {
    std::vector<std::string> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.word);
    return out;
  }
  std::size_t size() const { return entries.size(); }
};

// Cross-period candidate filter: shared words frequent enough in both
// slices, ranked by keyword importance in `slice_t`.
inline CandidateSet extract_candidates(const TimeSlice& slice_t, const TimeSlice& slice_tp,
                                       std::size_t top_n = 2000, std::size_t min_count = 5,
                                       const Stoplist& stoplist = keyword_stoplist()) {
  if (top_n < 1) throw Error(ErrorCode::kInvalidArgument, "top_n must be >= 1");
  if (min_count < 1) throw Error(ErrorCode::kInvalidArgument, "min_count must be >= 1");

  const auto counts_t = slice_counts(slice_t);
  const auto counts_tp = slice_counts(slice_tp);
  const auto scores = yake_scores(slice_t, stoplist);

  CandidateSet out;
  out.slice_pair = {slice_t.label, slice_tp.label};
  for (const auto& [word, ct] : counts_t) {
    if (ct < min_count || !is_scorable_word(word, stoplist)) continue;
    auto it = counts_tp.find(word);
    if (it == counts_tp.end() || it->second < min_count) continue;
    auto sc = scores.find(word);
    if (sc == scores.end()) continue;
    out.entries.push_back(Candidate{word, sc->second.score, ct, it->second});
  }
  if (out.entries.empty()) {
    throw Error(ErrorCode::kNoCandidates,
                "no shared candidates between '" + slice_t.label + "' and '" + slice_tp.label + "'");
  }
  std::sort(out.entries.begin(), out.entries.end(), [](const Candidate& a, const Candidate& b) {
    if (a.yake_score != b.yake_score) return a.yake_score < b.yake_score;
    return a.word < b.word;
  });
  if (out.entries.size() > top_n) out.entries.resize(top_n);
  return out;
}

}  // namespace semshift
