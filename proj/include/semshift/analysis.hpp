#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "semshift/change.hpp"
#include "semshift/corpus.hpp"
#include "semshift/error.hpp"
#include "semshift/masking.hpp"
#include "semshift/random.hpp"

namespace semshift {

// (doc_id, position) -> natural-log probability of the original token.
using LogProbTable = std::map<std::pair<std::string, std::size_t>, double>;

inline LogProbTable read_logprob_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  LogProbTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto obj = nlohmann::json::parse(line, nullptr, false);
    const bool ok = obj.is_object() && obj.contains("doc_id") && obj["doc_id"].is_string() &&
                    obj.contains("position") && obj["position"].is_number_unsigned() &&
                    obj.contains("logprob") && obj["logprob"].is_number();
    const std::string where = path.string() + " line " + std::to_string(line_no);
    if (!ok) throw Error(ErrorCode::kMalformedRecord, where);
    const double lp = obj["logprob"].get<double>();
    if (!(lp <= 0.0)) throw Error(ErrorCode::kMalformedRecord, where + ": logprob > 0");
    auto key = std::make_pair(obj["doc_id"].get<std::string>(), obj["position"].get<std::size_t>());
    if (!table.emplace(std::move(key), lp).second) {
      throw Error(ErrorCode::kMalformedRecord, where + ": duplicate (doc_id, position)");
    }
  }
  return table;
}

// exp of the mean negative log-likelihood over every planned position.
inline double perplexity(const LogProbTable& logprobs, std::span<const MaskingPlan> plans) {
  double nll = 0.0;
  std::size_t n = 0;
  for (const auto& plan : plans) {
    for (auto pos : plan.positions) {
      auto it = logprobs.find({plan.doc_id, pos});
      if (it == logprobs.end()) {
        throw Error(ErrorCode::kMissingLogProb, plan.doc_id + ":" + std::to_string(pos));
      }
      nll -= it->second;
      ++n;
    }
  }
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "no planned positions");
  return std::exp(nll / static_cast<double>(n));
}

struct EvalSplit {
  std::vector<std::string> with_temporal;
  std::vector<std::string> without_temporal;
  std::vector<std::string> trigger_tokens;
};

inline constexpr std::size_t kDefaultTriggerCount = 100;

// Documents containing any of the top-ranked changed words versus the rest.
inline EvalSplit split_by_temporal_tokens(std::span<const DocumentPtr> docs,
                                          const MaskCandidateList& ranked,
                                          std::size_t top_n = kDefaultTriggerCount) {
  EvalSplit split;
  const std::size_t n = std::min(top_n, ranked.words.size());
  split.trigger_tokens.assign(ranked.words.begin(),
                              ranked.words.begin() + static_cast<std::ptrdiff_t>(n));
  const std::unordered_set<std::string> triggers(split.trigger_tokens.begin(),
                                                 split.trigger_tokens.end());
  for (const auto& doc : docs) {
    const bool hit = std::any_of(doc->tokens.begin(), doc->tokens.end(),
                                 [&](const std::string& t) { return triggers.count(t) > 0; });
    (hit ? split.with_temporal : split.without_temporal).push_back(doc->id);
  }
  return split;
}

enum class PerturbMode { kMask, kPad, kRep };

inline constexpr std::string_view kMaskPlaceholder = "<MASK>";
inline constexpr std::string_view kPadPlaceholder = "<PAD>";

inline PerturbMode parse_perturb_mode(std::string_view s) {
  if (s == "MASK" || s == "mask") return PerturbMode::kMask;
  if (s == "PAD" || s == "pad") return PerturbMode::kPad;
  if (s == "REP" || s == "rep") return PerturbMode::kRep;
  throw Error(ErrorCode::kInvalidArgument, "unknown perturbation mode '" + std::string(s) + "'");
}

// Replaces every trigger occurrence with a placeholder, or with a uniform
// draw from `vocab` minus the triggers in REP mode.
inline Document perturb(const Document& doc, std::span<const std::string> triggers,
                        PerturbMode mode, std::span<const std::string> vocab, std::uint64_t seed) {
  const std::unordered_set<std::string> trigger_set(triggers.begin(), triggers.end());
  std::vector<std::string> eligible;
  if (mode == PerturbMode::kRep) {
    for (const auto& w : vocab) {
      if (!trigger_set.count(w)) eligible.push_back(w);
    }
    if (eligible.empty()) throw Error(ErrorCode::kEmptyReplacementVocab, doc.id);
  }
  Document out = doc;
  Rng rng(derive_seed(seed, doc.id));
  for (auto& token : out.tokens) {
    if (!trigger_set.count(token)) continue;
    switch (mode) {
      case PerturbMode::kMask: token = kMaskPlaceholder; break;
      case PerturbMode::kPad: token = kPadPlaceholder; break;
      case PerturbMode::kRep: {
        std::uniform_int_distribution<std::size_t> pick(0, eligible.size() - 1);
        token = eligible[pick(rng)];
        break;
      }
    }
  }
  return out;
}

}  // namespace semshift
