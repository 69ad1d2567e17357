#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "semshift/corpus.hpp"
#include "semshift/error.hpp"
#include "semshift/matrix.hpp"
#include "semshift/random.hpp"

namespace semshift {

inline constexpr std::size_t kDefaultWindowSize = 128;
inline constexpr std::string_view kEmbeddingFormat = "semshift-emb";
inline constexpr int kEmbeddingFormatVersion = 1;

struct UsageOccurrence {
  std::string word;
  std::string doc_id;
  std::size_t position = 0;          // index in the document
  std::vector<std::string> window;   // clipped context, word included
  std::size_t center = 0;            // index of the word inside `window`
  std::string time_label;
};

struct OccurrenceRef {
  std::string doc_id;
  std::size_t position = 0;

  friend bool operator==(const OccurrenceRef&, const OccurrenceRef&) = default;
};

struct UsageMatrix {
  std::string word;
  std::string time_label;
  Matrix rows;
  std::vector<OccurrenceRef> refs;  // aligned with rows

  std::size_t size() const { return rows.rows(); }
  std::size_t dim() const { return rows.cols(); }
};

using UsageKey = std::pair<std::string, std::string>;  // (word, time)
using EmbeddingTable = std::map<UsageKey, UsageMatrix>;

// Every occurrence of `word` in the slice with floor((w-1)/2) tokens of
// left context and the remainder on the right, clipped at document edges.
inline std::vector<UsageOccurrence> collect_occurrences(const TimeSlice& slice,
                                                        const std::string& word,
                                                        std::size_t window_size = kDefaultWindowSize) {
  if (window_size < 3) throw Error(ErrorCode::kInvalidArgument, "window_size must be >= 3");
  const std::size_t left = (window_size - 1) / 2;
  const std::size_t right = window_size - 1 - left;
  std::vector<UsageOccurrence> out;
  for (const auto& doc : slice.documents) {
    const auto& tokens = doc->tokens;
    for (std::size_t pos = 0; pos < tokens.size(); ++pos) {
      if (tokens[pos] != word) continue;
      const std::size_t begin = pos >= left ? pos - left : 0;
      const std::size_t end = std::min(tokens.size(), pos + right + 1);
      UsageOccurrence occ;
      occ.word = word;
      occ.doc_id = doc->id;
      occ.position = pos;
      occ.window.assign(tokens.begin() + static_cast<std::ptrdiff_t>(begin),
                        tokens.begin() + static_cast<std::ptrdiff_t>(end));
      occ.center = pos - begin;
      occ.time_label = doc->time_label;
      out.push_back(std::move(occ));
    }
  }
  if (out.empty()) {
    throw Error(ErrorCode::kWordAbsent, "'" + word + "' not found in slice '" + slice.label + "'");
  }
  return out;
}

inline UsageMatrix normalize_matrix(UsageMatrix m) {
  for (std::size_t i = 0; i < m.rows.rows(); ++i) {
    auto row = m.rows.row(i);
    const double norm = l2_norm(row);
    if (norm == 0.0 || !std::isfinite(norm)) {
      throw Error(ErrorCode::kZeroVector, m.word + " row " + std::to_string(i));
    }
    for (double& x : row) x /= norm;
  }
  return m;
}

// Signed feature hashing of the context tokens (the centre token excluded).
inline std::vector<double> fallback_embed(const UsageOccurrence& occ, std::size_t dim,
                                          std::uint64_t seed) {
  if (dim < 8) throw Error(ErrorCode::kInvalidArgument, "fallback dim must be >= 8");
  std::vector<double> v(dim, 0.0);
  const std::uint64_t salt = splitmix64(seed);
  for (std::size_t i = 0; i < occ.window.size(); ++i) {
    if (i == occ.center) continue;
    const std::uint64_t h = splitmix64(fnv1a64(occ.window[i], salt));
    const std::size_t bucket = static_cast<std::size_t>(h % dim);
    v[bucket] += (h >> 63) ? -1.0 : 1.0;
  }
  return v;
}

namespace embeddings_detail {

inline std::string format_float(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.7g", static_cast<double>(static_cast<float>(x)));
  return buf;
}

}  // namespace embeddings_detail

// Streaming writer for the embedding interchange file.
class EmbeddingWriter {
 public:
  EmbeddingWriter(std::ostream& out, std::size_t dim) : out_(out), dim_(dim) {
    nlohmann::json header = {{"format", kEmbeddingFormat},
                             {"version", kEmbeddingFormatVersion},
                             {"dim", dim}};
    out_ << header.dump() << '\n';
  }

  void write(const std::string& word, const std::string& time, const std::string& doc_id,
             std::size_t position, std::span<const double> vector) {
    if (vector.size() != dim_) {
      throw Error(ErrorCode::kDimMismatch, word + ": vector of dimension " +
                                               std::to_string(vector.size()) + ", expected " +
                                               std::to_string(dim_));
    }
    out_ << "{\"word\":" << nlohmann::json(word).dump()
         << ",\"time\":" << nlohmann::json(time).dump()
         << ",\"doc_id\":" << nlohmann::json(doc_id).dump() << ",\"position\":" << position
         << ",\"vector\":[";
    for (std::size_t i = 0; i < vector.size(); ++i) {
      if (i) out_ << ',';
      out_ << embeddings_detail::format_float(vector[i]);
    }
    out_ << "]}\n";
  }

  void write(const UsageMatrix& m) {
    for (std::size_t i = 0; i < m.size(); ++i) {
      write(m.word, m.time_label, m.refs[i].doc_id, m.refs[i].position, m.rows.row(i));
    }
  }

 private:
  std::ostream& out_;
  std::size_t dim_;
};

inline void write_embedding_file(const std::filesystem::path& path, const EmbeddingTable& table,
                                 std::size_t dim) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  EmbeddingWriter writer(out, dim);
  for (const auto& [key, m] : table) writer.write(m);
}

// Groups interchange records by (word, time) in file order. An empty file
// yields an empty table; otherwise the first line must be the header.
inline EmbeddingTable read_embedding_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  EmbeddingTable table;
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto obj = nlohmann::json::parse(line, nullptr, false);
    if (!obj.is_object()) throw Error(ErrorCode::kMalformedRecord, "line " + std::to_string(line_no));
    if (!have_header) {
      if (obj.value("format", "") != kEmbeddingFormat || !obj.contains("dim") ||
          !obj["dim"].is_number_unsigned() || obj.value("version", 0) != kEmbeddingFormatVersion) {
        throw Error(ErrorCode::kMalformedRecord, "line " + std::to_string(line_no) +
                                                     ": missing semshift-emb header");
      }
      dim = obj["dim"].get<std::size_t>();
      have_header = true;
      continue;
    }
    const bool ok = obj.contains("word") && obj["word"].is_string() && obj.contains("time") &&
                    obj["time"].is_string() && obj.contains("doc_id") &&
                    obj["doc_id"].is_string() && obj.contains("position") &&
                    obj["position"].is_number_unsigned() && obj.contains("vector") &&
                    obj["vector"].is_array();
    if (!ok) throw Error(ErrorCode::kMalformedRecord, "line " + std::to_string(line_no));
    const auto word = obj["word"].get<std::string>();
    const auto& vec = obj["vector"];
    std::vector<double> values;
    values.reserve(vec.size());
    for (const auto& x : vec) {
      if (!x.is_number()) throw Error(ErrorCode::kMalformedRecord, "line " + std::to_string(line_no));
      values.push_back(x.get<double>());
    }
    if (values.size() != dim) {
      throw Error(ErrorCode::kDimMismatch, word + " at line " + std::to_string(line_no) + ": " +
                                               std::to_string(values.size()) + " != " +
                                               std::to_string(dim));
    }
    const auto time = obj["time"].get<std::string>();
    auto& m = table[{word, time}];
    m.word = word;
    m.time_label = time;
    m.rows.append_row(values);
    m.refs.push_back({obj["doc_id"].get<std::string>(), obj["position"].get<std::size_t>()});
  }
  return table;
}

// Embeds every occurrence with the fallback embedder into one usage matrix.
inline UsageMatrix embed_occurrences(const std::vector<UsageOccurrence>& occurrences,
                                     std::size_t dim, std::uint64_t seed) {
  UsageMatrix m;
  if (occurrences.empty()) return m;
  m.word = occurrences.front().word;
  m.time_label = occurrences.front().time_label;
  m.rows = Matrix(0, dim);
  for (const auto& occ : occurrences) {
    m.rows.append_row(fallback_embed(occ, dim, seed));
    m.refs.push_back({occ.doc_id, occ.position});
  }
  return m;
}

}  // namespace semshift
