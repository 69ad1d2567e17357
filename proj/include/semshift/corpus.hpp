#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "semshift/error.hpp"
#include "semshift/text.hpp"

namespace semshift {

struct Document {
  std::string id;
  std::string time_label;
  std::vector<std::string> tokens;  // lowercased surface tokens
  std::string raw_text;
};

using DocumentPtr = std::shared_ptr<const Document>;

inline DocumentPtr make_document(std::string id, std::string time_label,
                                 std::string raw_text) {
  auto tokens = tokenize(raw_text);
  return std::make_shared<const Document>(
      Document{std::move(id), std::move(time_label), std::move(tokens), std::move(raw_text)});
}

struct TimeSlice {
  std::string label;
  std::vector<DocumentPtr> documents;

  std::size_t token_count() const {
    std::size_t n = 0;
    for (const auto& d : documents) n += d->tokens.size();
    return n;
  }
};

using Vocab = std::unordered_map<std::string, std::size_t>;

struct Corpus {
  std::vector<DocumentPtr> documents;  // input order
  std::map<std::string, TimeSlice> slices;
  Vocab vocab;

  std::size_t token_count() const {
    std::size_t n = 0;
    for (const auto& d : documents) n += d->tokens.size();
    return n;
  }

  const Document* find(std::string_view id) const {
    for (const auto& d : documents) {
      if (d->id == id) return d.get();
    }
    return nullptr;
  }
};

enum class CorpusFormat { kJsonl };

struct CorpusOptions {
  std::size_t min_doc_tokens = 3;
  bool language_filter = true;
  double ascii_alpha_threshold = 0.8;
};

struct LoadReport {
  std::size_t lines = 0;
  std::size_t loaded = 0;
  std::size_t dropped_language = 0;
  std::size_t dropped_short = 0;
  std::vector<std::size_t> malformed_lines;  // 1-based
};

// Heuristic English filter: mostly ASCII letters and at least one common
// English function word.
inline bool detect_english(std::string_view text, double ascii_alpha_threshold = 0.8) {
  std::size_t non_space = 0;
  std::size_t ascii_alpha = 0;
  for (std::size_t pos = 0; pos < text.size();) {
    const auto cp = text_detail::decode_utf8(text, pos);
    pos += cp.length;
    if (text_detail::is_unicode_space(cp.value)) continue;
    ++non_space;
    if ((cp.value >= U'a' && cp.value <= U'z') || (cp.value >= U'A' && cp.value <= U'Z')) {
      ++ascii_alpha;
    }
  }
  if (non_space == 0) return false;
  if (static_cast<double>(ascii_alpha) < ascii_alpha_threshold * static_cast<double>(non_space)) {
    return false;
  }
  for (const auto& token : tokenize(text)) {
    if (std::find(kEnglishStopwords.begin(), kEnglishStopwords.end(), token) !=
        kEnglishStopwords.end()) {
      return true;
    }
  }
  return false;
}

// Builds slices and vocabulary. Document ids must be unique.
inline Corpus build_corpus(std::vector<DocumentPtr> documents) {
  Corpus corpus;
  std::unordered_set<std::string> seen;
  for (auto& doc : documents) {
    if (doc->id.empty()) throw Error(ErrorCode::kInvalidArgument, "document with empty id");
    if (!seen.insert(doc->id).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate document id '" + doc->id + "'");
    }
    for (const auto& t : doc->tokens) ++corpus.vocab[t];
    auto& slice = corpus.slices[doc->time_label];
    slice.label = doc->time_label;
    slice.documents.push_back(doc);
    corpus.documents.push_back(std::move(doc));
  }
  return corpus;
}

namespace corpus_detail {

inline void read_jsonl(const std::filesystem::path& path, const CorpusOptions& options,
                       std::unordered_set<std::string>& seen,
                       std::vector<DocumentPtr>& out, LoadReport& report) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    ++report.lines;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto obj = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    const bool valid = obj.is_object() && obj.contains("id") && obj["id"].is_string() &&
                       obj.contains("time") && obj["time"].is_string() &&
                       obj.contains("text") && obj["text"].is_string() &&
                       !obj["id"].get_ref<const std::string&>().empty();
    if (!valid || seen.count(obj["id"].get<std::string>())) {
      report.malformed_lines.push_back(line_no);
      continue;
    }
    auto text = obj["text"].get<std::string>();
    if (options.language_filter && !detect_english(text, options.ascii_alpha_threshold)) {
      ++report.dropped_language;
      continue;
    }
    auto doc = make_document(obj["id"].get<std::string>(), obj["time"].get<std::string>(),
                             std::move(text));
    if (doc->tokens.size() < options.min_doc_tokens || doc->tokens.empty()) {
      ++report.dropped_short;
      continue;
    }
    seen.insert(doc->id);
    out.push_back(std::move(doc));
    ++report.loaded;
  }
}

}  // namespace corpus_detail

// Loads one or more JSONL files ({"id","time","text"} per line) into a
// single corpus. Malformed lines are skipped and listed in `report`.
inline Corpus load_corpus(const std::vector<std::filesystem::path>& paths,
                          const CorpusOptions& options = {}, LoadReport* report = nullptr,
                          CorpusFormat /*format*/ = CorpusFormat::kJsonl) {
  LoadReport local;
  LoadReport& rep = report ? *report : local;
  std::unordered_set<std::string> seen;
  std::vector<DocumentPtr> docs;
  for (const auto& p : paths) {
    if (!std::filesystem::exists(p)) throw Error(ErrorCode::kMissingFile, p.string());
    corpus_detail::read_jsonl(p, options, seen, docs, rep);
  }
  if (docs.empty()) throw Error(ErrorCode::kEmptyCorpus, "no documents survived loading");
  return build_corpus(std::move(docs));
}

inline Corpus load_corpus(const std::filesystem::path& path, const CorpusOptions& options = {},
                          LoadReport* report = nullptr,
                          CorpusFormat format = CorpusFormat::kJsonl) {
  return load_corpus(std::vector<std::filesystem::path>{path}, options, report, format);
}

inline std::vector<TimeSlice> slice_by_time(const Corpus& corpus,
                                            const std::vector<std::string>& labels) {
  std::vector<TimeSlice> out;
  out.reserve(labels.size());
  for (const auto& label : labels) {
    auto it = corpus.slices.find(label);
    if (it == corpus.slices.end()) throw Error(ErrorCode::kUnknownLabel, label);
    out.push_back(it->second);
  }
  return out;
}

inline std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

}  // namespace semshift
