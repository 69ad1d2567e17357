#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "semshift/change.hpp"
#include "semshift/corpus.hpp"
#include "semshift/error.hpp"
#include "semshift/keywords.hpp"
#include "semshift/random.hpp"

namespace semshift {

inline constexpr double kDefaultMaskingRatio = 0.15;
inline constexpr std::string_view kDefaultMaskToken = "[MASK]";
inline constexpr std::string_view kMaskedFormat = "semshift-masked";

enum class MaskStrategy { kRandom, kFrequency, kImportance, kLmlm };
enum class Corruption { kAllMask, kBert801010 };

inline std::string_view to_string(MaskStrategy s) {
  switch (s) {
    case MaskStrategy::kRandom: return "random";
    case MaskStrategy::kFrequency: return "frequency";
    case MaskStrategy::kImportance: return "importance";
    case MaskStrategy::kLmlm: return "lmlm";
  }
  return "random";
}

inline MaskStrategy parse_strategy(std::string_view s) {
  if (s == "random") return MaskStrategy::kRandom;
  if (s == "frequency") return MaskStrategy::kFrequency;
  if (s == "importance") return MaskStrategy::kImportance;
  if (s == "lmlm") return MaskStrategy::kLmlm;
  throw Error(ErrorCode::kInvalidArgument, "unknown strategy '" + std::string(s) + "'");
}

inline std::string_view to_string(Corruption c) {
  return c == Corruption::kAllMask ? "all_mask" : "bert_80_10_10";
}

inline Corruption parse_corruption(std::string_view s) {
  if (s == "all_mask") return Corruption::kAllMask;
  if (s == "bert_80_10_10") return Corruption::kBert801010;
  throw Error(ErrorCode::kInvalidArgument, "unknown corruption '" + std::string(s) + "'");
}

struct MaskingPlan {
  std::string doc_id;
  std::vector<std::size_t> positions;  // strictly increasing
  std::vector<std::string> labels;     // original tokens at positions
  MaskStrategy strategy = MaskStrategy::kRandom;
  double alpha = kDefaultMaskingRatio;
};

// round-half-up(alpha * length), clamped to [1, length].
inline std::size_t masking_budget(double alpha, std::size_t length) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must be in (0, 1]");
  }
  if (length == 0) return 0;
  // The epsilon absorbs representation error such as 0.15 * 10 = 1.4999...
  const auto raw = static_cast<std::size_t>(
      std::floor(alpha * static_cast<double>(length) + 0.5 + 1e-9));
  return std::clamp<std::size_t>(raw, 1, length);
}

namespace masking_detail {

inline void require_tokens(const Document& doc) {
  if (doc.tokens.empty()) throw Error(ErrorCode::kEmptyDocument, doc.id);
}

inline MaskingPlan finish(const Document& doc, std::vector<std::size_t> positions,
                          MaskStrategy strategy, double alpha) {
  std::sort(positions.begin(), positions.end());
  MaskingPlan plan{doc.id, std::move(positions), {}, strategy, alpha};
  plan.labels.reserve(plan.positions.size());
  for (auto p : plan.positions) plan.labels.push_back(doc.tokens[p]);
  return plan;
}

// Positions ordered by `key` ascending, earlier position first on ties;
// the first `budget` are kept.
template <typename Key>
std::vector<std::size_t> take_by_key(const Document& doc, std::size_t budget, Key key) {
  std::vector<std::size_t> order(doc.tokens.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
  order.resize(budget);
  return order;
}

}  // namespace masking_detail

// Uniform sample of positions; the stream is seeded per document.
inline MaskingPlan plan_random(const Document& doc, double alpha, std::uint64_t seed) {
  masking_detail::require_tokens(doc);
  const auto budget = masking_budget(alpha, doc.tokens.size());
  std::vector<std::size_t> all(doc.tokens.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  Rng rng(derive_seed(seed, doc.id));
  return masking_detail::finish(doc, sample_without_replacement(std::move(all), budget, rng),
                                MaskStrategy::kRandom, alpha);
}

// Most frequent corpus tokens first.
inline MaskingPlan plan_frequency(const Document& doc, const Vocab& corpus_vocab, double alpha,
                                  std::uint64_t /*seed*/ = 0) {
  masking_detail::require_tokens(doc);
  const auto budget = masking_budget(alpha, doc.tokens.size());
  auto freq = [&](std::size_t pos) -> std::size_t {
    auto it = corpus_vocab.find(doc.tokens[pos]);
    return it == corpus_vocab.end() ? 0 : it->second;
  };
  auto positions = masking_detail::take_by_key(doc, budget, [&](std::size_t pos) {
    return -static_cast<double>(freq(pos));
  });
  return masking_detail::finish(doc, std::move(positions), MaskStrategy::kFrequency, alpha);
}

// Most important (lowest keyword score) tokens first; tokens without a
// score rank last.
inline MaskingPlan plan_importance(const Document& doc, const KeywordTable& scores, double alpha,
                                   std::uint64_t /*seed*/ = 0) {
  masking_detail::require_tokens(doc);
  const auto budget = masking_budget(alpha, doc.tokens.size());
  auto positions = masking_detail::take_by_key(doc, budget, [&](std::size_t pos) {
    auto it = scores.find(doc.tokens[pos]);
    return it == scores.end() ? std::numeric_limits<double>::infinity() : it->second.score;
  });
  return masking_detail::finish(doc, std::move(positions), MaskStrategy::kImportance, alpha);
}

// Occurrences of the selected changed words first (best-ranked word first,
// then by position), remaining budget filled uniformly from the other
// positions. With no candidates present this reduces to plan_random.
inline MaskingPlan plan_lmlm(const Document& doc, const MaskCandidateList& w_mask, double alpha,
                             std::uint64_t seed) {
  masking_detail::require_tokens(doc);
  const auto budget = masking_budget(alpha, doc.tokens.size());
  std::unordered_map<std::string_view, std::size_t> rank;
  for (std::size_t i = 0; i < w_mask.words.size(); ++i) rank.emplace(w_mask.words[i], i);

  std::vector<std::size_t> candidates;
  std::vector<std::size_t> others;
  for (std::size_t pos = 0; pos < doc.tokens.size(); ++pos) {
    (rank.count(doc.tokens[pos]) ? candidates : others).push_back(pos);
  }
  std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
    return rank.at(doc.tokens[a]) < rank.at(doc.tokens[b]);
  });
  if (candidates.size() > budget) candidates.resize(budget);

  Rng rng(derive_seed(seed, doc.id));
  auto fill = sample_without_replacement(std::move(others), budget - candidates.size(), rng);
  candidates.insert(candidates.end(), fill.begin(), fill.end());
  return masking_detail::finish(doc, std::move(candidates), MaskStrategy::kLmlm, alpha);
}

struct MaskedRecord {
  std::string doc_id;
  std::vector<std::string> tokens;
  std::vector<std::size_t> mask_positions;
  std::vector<std::string> labels;
};

// Applies one plan. Under 80/10/10, replacement tokens are drawn uniformly
// from `replacement_vocab`.
inline MaskedRecord apply_plan(const MaskingPlan& plan, const Document& doc,
                               std::string_view mask_token, Corruption corruption,
                               std::span<const std::string> replacement_vocab,
                               std::uint64_t seed) {
  MaskedRecord rec{doc.id, doc.tokens, plan.positions, plan.labels};
  Rng rng(derive_seed(seed, doc.id));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto pos : plan.positions) {
    if (pos >= rec.tokens.size()) {
      throw Error(ErrorCode::kInvalidArgument, doc.id + ": position out of range");
    }
    if (corruption == Corruption::kAllMask) {
      rec.tokens[pos] = mask_token;
      continue;
    }
    const double r = u(rng);
    if (r < 0.8) {
      rec.tokens[pos] = mask_token;
    } else if (r < 0.9 && !replacement_vocab.empty()) {
      std::uniform_int_distribution<std::size_t> pick(0, replacement_vocab.size() - 1);
      rec.tokens[pos] = replacement_vocab[pick(rng)];
    }
  }
  return rec;
}

inline std::vector<std::string> sorted_vocab(const Vocab& vocab) {
  std::vector<std::string> out;
  out.reserve(vocab.size());
  for (const auto& [w, c] : vocab) out.push_back(w);
  std::sort(out.begin(), out.end());
  return out;
}

inline nlohmann::json masked_header(std::string_view mask_token, Corruption corruption) {
  return {{"format", kMaskedFormat},
          {"version", 1},
          {"mask_token", mask_token},
          {"corruption", to_string(corruption)}};
}

inline nlohmann::json to_json(const MaskedRecord& r) {
  return {{"doc_id", r.doc_id},
          {"tokens", r.tokens},
          {"mask_positions", r.mask_positions},
          {"labels", r.labels}};
}

// Writes a header line followed by one record per plan. The 80/10/10
// replacement vocabulary is the sorted token set of `docs`.
inline std::size_t emit_masked_corpus(std::span<const MaskingPlan> plans,
                                      std::span<const DocumentPtr> docs,
                                      std::string_view mask_token, Corruption corruption,
                                      std::uint64_t seed, const std::filesystem::path& out_path) {
  std::unordered_map<std::string_view, const Document*> index;
  Vocab vocab;
  for (const auto& d : docs) {
    index.emplace(d->id, d.get());
    if (corruption == Corruption::kBert801010) {
      for (const auto& t : d->tokens) ++vocab[t];
    }
  }
  const auto replacement = sorted_vocab(vocab);
  std::ofstream out(out_path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + out_path.string());
  out << masked_header(mask_token, corruption).dump() << '\n';
  for (const auto& plan : plans) {
    auto it = index.find(plan.doc_id);
    if (it == index.end()) throw Error(ErrorCode::kUnknownDocId, plan.doc_id);
    out << to_json(apply_plan(plan, *it->second, mask_token, corruption, replacement, seed)).dump()
        << '\n';
  }
  return plans.size();
}

inline std::vector<MaskedRecord> read_masked_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  std::vector<MaskedRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto obj = nlohmann::json::parse(line, nullptr, false);
    if (line_no == 1 && obj.is_object() && obj.contains("format")) continue;
    try {
      MaskedRecord r;
      r.doc_id = obj.at("doc_id").get<std::string>();
      r.tokens = obj.at("tokens").get<std::vector<std::string>>();
      r.mask_positions = obj.at("mask_positions").get<std::vector<std::size_t>>();
      r.labels = obj.at("labels").get<std::vector<std::string>>();
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorCode::kMalformedRecord, path.string() + " line " + std::to_string(line_no));
    }
  }
  return out;
}

inline MaskingPlan to_plan(const MaskedRecord& r) {
  MaskingPlan p;
  p.doc_id = r.doc_id;
  p.positions = r.mask_positions;
  p.labels = r.labels;
  return p;
}

}  // namespace semshift
