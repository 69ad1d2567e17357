#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "semshift/analysis.hpp"
#include "semshift/change.hpp"
#include "semshift/clustering.hpp"
#include "semshift/corpus.hpp"
#include "semshift/embeddings.hpp"
#include "semshift/keywords.hpp"
#include "semshift/masking.hpp"

namespace semshift {

// ---------------------------------------------------------------------------
// Configuration

struct PipelineConfig {
  std::vector<std::string> corpus;
  std::string slice_t;       // empty: inferred when the corpus has two slices
  std::string slice_tprime;
  std::string mask_slice;    // empty: slice_tprime
  std::size_t min_doc_tokens = 3;
  bool lang_filter = true;
  double lang_alpha_threshold = 0.8;  // minimum ASCII-letter share of non-space characters
  std::size_t top_n = 2000;
  std::size_t min_count = 5;
  std::size_t window_size = kDefaultWindowSize;
  std::size_t k_min = 2;
  std::size_t k_max = 10;
  std::size_t restarts = 10;
  double dispersion_threshold = 0.05;
  std::string metric = "jsd";
  std::size_t k = kDefaultTopK;
  double alpha = kDefaultMaskingRatio;
  std::uint64_t seed = 0;
  std::string embedder = "fallback";  // "fallback" | "file"
  std::string embedding_file;
  std::size_t fallback_dim = 256;
  std::string strategy = "lmlm";
  std::string corruption = "all_mask";
  std::string mask_token = std::string(kDefaultMaskToken);
  double report_bin_width = 0.05;
  std::string out_dir = "run";
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline nlohmann::json to_json(const PipelineConfig& c) {
  return {{"corpus", c.corpus},
          {"slice_t", c.slice_t},
          {"slice_tprime", c.slice_tprime},
          {"mask_slice", c.mask_slice},
          {"min_doc_tokens", c.min_doc_tokens},
          {"lang_filter", c.lang_filter},
          {"lang_alpha_threshold", c.lang_alpha_threshold},
          {"top_n", c.top_n},
          {"min_count", c.min_count},
          {"window_size", c.window_size},
          {"k_min", c.k_min},
          {"k_max", c.k_max},
          {"restarts", c.restarts},
          {"dispersion_threshold", c.dispersion_threshold},
          {"metric", c.metric},
          {"k", c.k},
          {"alpha", c.alpha},
          {"seed", c.seed},
          {"embedder", c.embedder},
          {"embedding_file", c.embedding_file},
          {"fallback_dim", c.fallback_dim},
          {"strategy", c.strategy},
          {"corruption", c.corruption},
          {"mask_token", c.mask_token},
          {"report_bin_width", c.report_bin_width},
          {"out_dir", c.out_dir}};
}

inline void validate(const PipelineConfig& c) {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (c.corpus.empty()) fail("corpus: at least one path is required");
  if (!(c.alpha > 0.0 && c.alpha <= 1.0)) fail("alpha must be in (0, 1]");
  if (c.window_size < 3) fail("window_size must be >= 3");
  if (c.k_min < 2 || c.k_max < c.k_min) fail("need 2 <= k_min <= k_max");
  if (c.restarts < 1) fail("restarts must be >= 1");
  if (c.top_n < 1 || c.min_count < 1) fail("top_n and min_count must be >= 1");
  if (c.fallback_dim < 8) fail("fallback_dim must be >= 8");
  if (!(c.lang_alpha_threshold >= 0.0 && c.lang_alpha_threshold <= 1.0)) {
    fail("lang_alpha_threshold must be in [0, 1]");
  }
  if (!(c.dispersion_threshold >= 0.0)) fail("dispersion_threshold must be >= 0");
  if (!(c.report_bin_width > 0.0)) fail("report_bin_width must be > 0");
  if (c.embedder != "fallback" && c.embedder != "file") fail("embedder must be fallback|file");
  if (c.embedder == "file" && c.embedding_file.empty()) fail("embedder=file needs embedding_file");
  try {
    parse_metric(c.metric);
    parse_strategy(c.strategy);
    parse_corruption(c.corruption);
  } catch (const Error& e) {
    fail(e.what());
  }
}

inline PipelineConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  PipelineConfig c;
  const auto known = to_json(c);
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    if (j.contains("corpus") && j["corpus"].is_string()) {
      c.corpus = {j["corpus"].get<std::string>()};
    } else {
      get("corpus", c.corpus);
    }
    get("slice_t", c.slice_t);
    get("slice_tprime", c.slice_tprime);
    get("mask_slice", c.mask_slice);
    get("min_doc_tokens", c.min_doc_tokens);
    get("lang_filter", c.lang_filter);
    get("lang_alpha_threshold", c.lang_alpha_threshold);
    get("top_n", c.top_n);
    get("min_count", c.min_count);
    get("window_size", c.window_size);
    get("k_min", c.k_min);
    get("k_max", c.k_max);
    get("restarts", c.restarts);
    get("dispersion_threshold", c.dispersion_threshold);
    get("metric", c.metric);
    get("k", c.k);
    get("alpha", c.alpha);
    get("seed", c.seed);
    get("embedder", c.embedder);
    get("embedding_file", c.embedding_file);
    get("fallback_dim", c.fallback_dim);
    get("strategy", c.strategy);
    get("corruption", c.corruption);
    get("mask_token", c.mask_token);
    get("report_bin_width", c.report_bin_width);
    get("out_dir", c.out_dir);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  return c;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config " + path.string() + " is not valid JSON");
  return config_from_json(j);
}

inline std::string config_hash(const PipelineConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(to_json(c).dump())));
  return buf;
}

// ---------------------------------------------------------------------------
// Artifact files

inline std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.8f", x);
  return buf;
}

namespace pipeline_detail {

inline std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, '\t')) out.push_back(cell);
  if (!line.empty() && line.back() == '\t') out.emplace_back();
  return out;
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + p.string());
  return out;
}

}  // namespace pipeline_detail

inline void write_candidates_tsv(const std::filesystem::path& path, const CandidateSet& set) {
  auto out = pipeline_detail::open_out(path);
  out << "word\tyake_score\tcount_t\tcount_tprime\n";
  for (const auto& e : set.entries) {
    out << e.word << '\t' << format_real(e.yake_score) << '\t' << e.count_t << '\t'
        << e.count_tprime << '\n';
  }
}

inline std::vector<Candidate> read_candidates_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  std::vector<Candidate> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto cells = pipeline_detail::split_tabs(line);
    if (line_no == 1 && !cells.empty() && cells[0] == "word") continue;
    try {
      Candidate c;
      c.word = cells.at(0);
      if (cells.size() > 1) c.yake_score = std::stod(cells[1]);
      if (cells.size() > 2) c.count_t = std::stoull(cells[2]);
      if (cells.size() > 3) c.count_tprime = std::stoull(cells[3]);
      out.push_back(std::move(c));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kMalformedRecord, path.string() + " line " + std::to_string(line_no));
    }
  }
  return out;
}

inline void write_ranked_tsv(const std::filesystem::path& path,
                             const std::vector<ChangeScore>& scores) {
  auto out = pipeline_detail::open_out(path);
  out << "word\tjsd\ted\tapd\tn_t\tn_tprime\n";
  for (const auto& s : scores) {
    out << s.word << '\t' << format_real(s.jsd) << '\t' << format_real(s.ed) << '\t'
        << format_real(s.apd) << '\t' << s.n_t << '\t' << s.n_tprime << '\n';
  }
}

// Rows in file order.
inline std::vector<ChangeScore> read_ranked_tsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  std::vector<ChangeScore> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto cells = pipeline_detail::split_tabs(line);
    if (line_no == 1 && !cells.empty() && cells[0] == "word") continue;
    try {
      ChangeScore s;
      s.word = cells.at(0);
      s.jsd = std::stod(cells.at(1));
      s.ed = std::stod(cells.at(2));
      s.apd = std::stod(cells.at(3));
      s.n_t = std::stoull(cells.at(4));
      s.n_tprime = std::stoull(cells.at(5));
      out.push_back(std::move(s));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kMalformedRecord, path.string() + " line " + std::to_string(line_no));
    }
  }
  return out;
}

// The first k rows of a ranked file, in file order.
inline MaskCandidateList top_k_from_ranked(const std::vector<ChangeScore>& ranked,
                                           ChangeMetric metric, std::size_t k) {
  MaskCandidateList out;
  out.metric = metric;
  out.k = k;
  for (std::size_t i = 0; i < ranked.size() && i < k; ++i) {
    out.words.push_back(ranked[i].word);
    out.scores.push_back(metric_value(ranked[i], metric));
  }
  return out;
}

struct ClusterRecord {
  std::string word;
  std::string time_t;
  std::string time_tprime;
  std::size_t k = 0;
  std::optional<double> silhouette;
  std::vector<double> p_t;
  std::vector<double> p_tprime;
  std::size_t n_t = 0;
  std::size_t n_tprime = 0;
};

inline nlohmann::json to_json(const ClusterRecord& r) {
  nlohmann::json j = {{"word", r.word},
                      {"K", r.k},
                      {"silhouette", nullptr},
                      {"p_t", r.p_t},
                      {"p_tprime", r.p_tprime},
                      {"time_t", r.time_t},
                      {"time_tprime", r.time_tprime},
                      {"n_t", r.n_t},
                      {"n_tprime", r.n_tprime}};
  if (r.silhouette) j["silhouette"] = *r.silhouette;
  return j;
}

inline void write_clusters_jsonl(const std::filesystem::path& path,
                                 const std::vector<ClusterRecord>& records) {
  auto out = pipeline_detail::open_out(path);
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

inline std::vector<ClusterRecord> read_clusters_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  std::vector<ClusterRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      ClusterRecord r;
      r.word = j.at("word").get<std::string>();
      r.k = j.at("K").get<std::size_t>();
      if (j.contains("silhouette") && !j["silhouette"].is_null()) {
        r.silhouette = j["silhouette"].get<double>();
      }
      r.p_t = j.at("p_t").get<std::vector<double>>();
      r.p_tprime = j.at("p_tprime").get<std::vector<double>>();
      r.time_t = j.value("time_t", "");
      r.time_tprime = j.value("time_tprime", "");
      r.n_t = j.value("n_t", std::size_t{0});
      r.n_tprime = j.value("n_tprime", std::size_t{0});
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorCode::kMalformedRecord, path.string() + " line " + std::to_string(line_no));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Per-word clustering and scoring, shared by the pipeline and the CLI.

// Drops all-zero rows, then L2-normalises. Returns the number dropped.
inline std::size_t drop_zero_rows_and_normalize(UsageMatrix& m) {
  UsageMatrix kept;
  kept.word = m.word;
  kept.time_label = m.time_label;
  kept.rows = Matrix(0, m.dim());
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (l2_norm(m.rows.row(i)) == 0.0) {
      ++dropped;
      continue;
    }
    kept.rows.append_row(m.rows.row(i));
    kept.refs.push_back(m.refs[i]);
  }
  m = normalize_matrix(std::move(kept));
  return dropped;
}

inline ClusterRecord cluster_word(const std::string& word, const UsageMatrix& m_t,
                                  const UsageMatrix& m_tp, const SelectKParams& params) {
  auto joint = usage_distributions(word, m_t, m_tp, params);
  ClusterRecord r;
  r.word = word;
  r.time_t = m_t.time_label;
  r.time_tprime = m_tp.time_label;
  r.k = joint.clusters.k;
  r.silhouette = joint.clusters.silhouette;
  r.p_t = std::move(joint.t.probs);
  r.p_tprime = std::move(joint.tprime.probs);
  r.n_t = m_t.size();
  r.n_tprime = m_tp.size();
  return r;
}

inline ChangeScore score_word(const ClusterRecord& r, const UsageMatrix* m_t,
                              const UsageMatrix* m_tp) {
  ChangeScore s;
  s.word = r.word;
  s.jsd = jsd(r.p_t, r.p_tprime);
  s.ed = entropy_difference(r.p_t, r.p_tprime);
  s.apd = (m_t && m_tp) ? apd(*m_t, *m_tp) : 0.0;
  s.n_t = r.n_t;
  s.n_tprime = r.n_tprime;
  return s;
}

// Full ranking (no truncation) by the chosen metric.
inline std::vector<ChangeScore> sort_scores(const std::vector<ChangeScore>& scores,
                                            ChangeMetric metric) {
  const auto order = rank_and_select(scores, metric, scores.size());
  std::map<std::string, const ChangeScore*> by_word;
  for (const auto& s : scores) by_word[s.word] = &s;
  std::vector<ChangeScore> out;
  out.reserve(scores.size());
  for (const auto& w : order.words) out.push_back(*by_word.at(w));
  return out;
}

// ---------------------------------------------------------------------------
// Pipeline

enum class Stage { kLoad = 1, kKeywords, kEmbeddings, kClustering, kChange, kMasking, kReport };

inline std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::kLoad: return "load";
    case Stage::kKeywords: return "keywords";
    case Stage::kEmbeddings: return "embeddings";
    case Stage::kClustering: return "clustering";
    case Stage::kChange: return "change";
    case Stage::kMasking: return "masking";
    case Stage::kReport: return "report";
  }
  return "unknown";
}

class StageError : public std::runtime_error {
 public:
  StageError(Stage stage, const std::string& message)
      : std::runtime_error("[" + std::string(to_string(stage)) + "] " + message), stage_(stage) {}

  Stage stage() const noexcept { return stage_; }
  int exit_code() const noexcept { return 3 + static_cast<int>(stage_); }

 private:
  Stage stage_;
};

struct Detection {
  Corpus corpus;
  LoadReport load;
  std::string slice_t;
  std::string slice_tprime;
  CandidateSet candidates;
  EmbeddingTable embeddings;  // raw vectors as produced or read
  std::vector<ClusterRecord> clusters;
  std::vector<ChangeScore> ranked;  // full ranking by the configured metric
  std::vector<std::string> skipped_words;
  std::size_t zero_rows = 0;
};

namespace pipeline_detail {

template <typename F>
auto in_stage(Stage stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

}  // namespace pipeline_detail

// Stages 1-5: load, candidate extraction, embeddings, clustering, scoring.
inline Detection detect(const PipelineConfig& config) {
  validate(config);
  Detection d;
  pipeline_detail::in_stage(Stage::kLoad, [&] {
    std::vector<std::filesystem::path> paths(config.corpus.begin(), config.corpus.end());
    CorpusOptions opts;
    opts.min_doc_tokens = config.min_doc_tokens;
    opts.language_filter = config.lang_filter;
    opts.ascii_alpha_threshold = config.lang_alpha_threshold;
    d.corpus = load_corpus(paths, opts, &d.load);
    d.slice_t = config.slice_t;
    d.slice_tprime = config.slice_tprime;
    if (d.slice_t.empty() || d.slice_tprime.empty()) {
      if (d.corpus.slices.size() != 2) {
        throw Error(ErrorCode::kUnknownLabel,
                    "slice_t/slice_tprime not set and corpus does not have exactly two slices");
      }
      d.slice_t = d.corpus.slices.begin()->first;
      d.slice_tprime = std::next(d.corpus.slices.begin())->first;
    }
    slice_by_time(d.corpus, {d.slice_t, d.slice_tprime});
    return 0;
  });

  const TimeSlice& st = d.corpus.slices.at(d.slice_t);
  const TimeSlice& stp = d.corpus.slices.at(d.slice_tprime);

  pipeline_detail::in_stage(Stage::kKeywords, [&] {
    d.candidates = extract_candidates(st, stp, config.top_n, config.min_count);
    return 0;
  });

  pipeline_detail::in_stage(Stage::kEmbeddings, [&] {
    if (config.embedder == "file") {
      d.embeddings = read_embedding_file(config.embedding_file);
      return 0;
    }
    for (const auto& c : d.candidates.entries) {
      for (const TimeSlice* s : {&st, &stp}) {
        auto occ = collect_occurrences(*s, c.word, config.window_size);
        d.embeddings[{c.word, s->label}] = embed_occurrences(occ, config.fallback_dim, config.seed);
      }
    }
    return 0;
  });

  std::map<std::string, std::pair<UsageMatrix, UsageMatrix>> normalized;
  pipeline_detail::in_stage(Stage::kClustering, [&] {
    SelectKParams params;
    params.k_min = config.k_min;
    params.k_max = config.k_max;
    params.restarts = config.restarts;
    params.dispersion_threshold = config.dispersion_threshold;
    for (const auto& c : d.candidates.entries) {
      auto it_t = d.embeddings.find({c.word, d.slice_t});
      auto it_tp = d.embeddings.find({c.word, d.slice_tprime});
      if (it_t == d.embeddings.end() || it_tp == d.embeddings.end()) {
        d.skipped_words.push_back(c.word);
        continue;
      }
      UsageMatrix m_t = it_t->second;
      UsageMatrix m_tp = it_tp->second;
      d.zero_rows += drop_zero_rows_and_normalize(m_t);
      d.zero_rows += drop_zero_rows_and_normalize(m_tp);
      if (m_t.size() == 0 || m_tp.size() == 0) {
        d.skipped_words.push_back(c.word);
        continue;
      }
      params.seed = derive_seed(config.seed, c.word);
      d.clusters.push_back(cluster_word(c.word, m_t, m_tp, params));
      normalized.emplace(c.word, std::make_pair(std::move(m_t), std::move(m_tp)));
    }
    std::sort(d.clusters.begin(), d.clusters.end(),
              [](const ClusterRecord& a, const ClusterRecord& b) { return a.word < b.word; });
    return 0;
  });

  pipeline_detail::in_stage(Stage::kChange, [&] {
    std::vector<ChangeScore> scores;
    scores.reserve(d.clusters.size());
    for (const auto& r : d.clusters) {
      const auto& [m_t, m_tp] = normalized.at(r.word);
      scores.push_back(score_word(r, &m_t, &m_tp));
    }
    d.ranked = sort_scores(scores, parse_metric(config.metric));
    return 0;
  });
  return d;
}

struct MaskingSummary {
  std::size_t documents = 0;
  std::size_t tokens = 0;
  std::size_t masked_positions = 0;
  std::size_t changed_word_positions = 0;  // masked positions holding a W_mask word
  std::size_t selected_words = 0;
};

// Stage 6: plans for every document of the mask slice, written to
// masked.jsonl in corpus order.
inline MaskingSummary write_masking(const Detection& d, const PipelineConfig& config,
                                    const std::filesystem::path& dir) {
  return pipeline_detail::in_stage(Stage::kMasking, [&] {
    const std::string label = config.mask_slice.empty() ? d.slice_tprime : config.mask_slice;
    const TimeSlice slice = slice_by_time(d.corpus, {label}).front();
    const auto strategy = parse_strategy(config.strategy);
    const auto w_mask = top_k_from_ranked(d.ranked, parse_metric(config.metric), config.k);
    const std::unordered_set<std::string> selected(w_mask.words.begin(), w_mask.words.end());
    KeywordTable importance;
    if (strategy == MaskStrategy::kImportance) importance = yake_scores(slice);

    MaskingSummary summary;
    summary.selected_words = w_mask.words.size();
    std::vector<MaskingPlan> plans;
    plans.reserve(slice.documents.size());
    for (const auto& doc : slice.documents) {
      MaskingPlan plan;
      switch (strategy) {
        case MaskStrategy::kRandom: plan = plan_random(*doc, config.alpha, config.seed); break;
        case MaskStrategy::kFrequency:
          plan = plan_frequency(*doc, d.corpus.vocab, config.alpha, config.seed);
          break;
        case MaskStrategy::kImportance:
          plan = plan_importance(*doc, importance, config.alpha, config.seed);
          break;
        case MaskStrategy::kLmlm: plan = plan_lmlm(*doc, w_mask, config.alpha, config.seed); break;
      }
      ++summary.documents;
      summary.tokens += doc->tokens.size();
      summary.masked_positions += plan.positions.size();
      for (const auto& l : plan.labels) summary.changed_word_positions += selected.count(l);
      plans.push_back(std::move(plan));
    }
    emit_masked_corpus(plans, slice.documents, config.mask_token,
                       parse_corruption(config.corruption), config.seed, dir / "masked.jsonl");
    return summary;
  });
}

inline void write_detection_artifacts(const Detection& d, const PipelineConfig& config,
                                      const std::filesystem::path& dir) {
  pipeline_detail::in_stage(Stage::kReport, [&] {
    std::filesystem::create_directories(dir);
    write_candidates_tsv(dir / "candidates.tsv", d.candidates);
    if (config.embedder == "fallback") {
      std::ofstream out = pipeline_detail::open_out(dir / "emb.jsonl");
      EmbeddingWriter writer(out, config.fallback_dim);
      for (const auto& [key, m] : d.embeddings) writer.write(m);
    }
    write_clusters_jsonl(dir / "clusters.jsonl", d.clusters);
    write_ranked_tsv(dir / "ranked.tsv", d.ranked);
    return 0;
  });
}

inline nlohmann::json histogram_json(const std::vector<HistogramRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{"lower", r.lower}, {"upper", r.upper}, {"count", r.count}, {"percent", r.percent}});
  }
  return out;
}

inline void write_report(const Detection& d, const PipelineConfig& config,
                         const MaskingSummary& masking, const std::filesystem::path& dir) {
  pipeline_detail::in_stage(Stage::kReport, [&] {
    std::vector<double> values;
    const auto metric = parse_metric(config.metric);
    for (const auto& s : d.ranked) values.push_back(metric_value(s, metric));
    nlohmann::json report = {
        {"config", to_json(config)},
        {"config_hash", config_hash(config)},
        {"seed", config.seed},
        {"slices", {d.slice_t, d.slice_tprime}},
        {"corpus",
         {{"documents", d.corpus.documents.size()},
          {"tokens", d.corpus.token_count()},
          {"dropped_language", d.load.dropped_language},
          {"dropped_short", d.load.dropped_short},
          {"malformed_lines", d.load.malformed_lines}}},
        {"candidates", d.candidates.size()},
        {"scored_words", d.ranked.size()},
        {"skipped_words", d.skipped_words},
        {"zero_vectors_dropped", d.zero_rows},
        {"metric", config.metric},
        {"histogram", histogram_json(score_distribution_report(values, config.report_bin_width))},
        {"masking",
         {{"strategy", config.strategy},
          {"alpha", config.alpha},
          {"k", config.k},
          {"selected_words", masking.selected_words},
          {"documents", masking.documents},
          {"tokens", masking.tokens},
          {"masked_positions", masking.masked_positions},
          {"changed_word_positions", masking.changed_word_positions}}}};
    auto out = pipeline_detail::open_out(dir / "report.json");
    out << report.dump(2) << '\n';
    return 0;
  });
}

// Writes candidates.tsv, emb.jsonl (fallback embedder), clusters.jsonl,
// ranked.tsv, masked.jsonl and report.json into config.out_dir.
inline std::filesystem::path run_pipeline(const PipelineConfig& config) {
  const Detection d = detect(config);
  const std::filesystem::path dir = config.out_dir;
  write_detection_artifacts(d, config, dir);
  const auto masking = write_masking(d, config, dir);
  write_report(d, config, masking, dir);
  return dir;
}

struct SweepCell {
  double alpha = 0.0;
  std::size_t k = 0;
  std::filesystem::path dir;
  bool ok = false;
  std::string error;
  MaskingSummary masking;
};

inline std::string sweep_cell_name(double alpha, std::size_t k) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "alpha_%.2f_k_%zu", alpha, k);
  return buf;
}

// One run directory per (alpha, k) cell under config.out_dir plus
// summary.tsv. Detection is shared; cells only differ in masking.
inline std::vector<SweepCell> sweep(const PipelineConfig& config, const std::vector<double>& alphas,
                                    const std::vector<std::size_t>& ks) {
  if (alphas.empty() || ks.empty()) throw ConfigError("sweep needs non-empty alpha and k grids");
  for (double a : alphas) {
    if (!(a > 0.0 && a <= 1.0)) throw ConfigError("alpha grid values must be in (0, 1]");
  }
  const Detection d = detect(config);
  const std::filesystem::path root = config.out_dir;
  std::filesystem::create_directories(root);
  std::vector<SweepCell> cells;
  for (double alpha : alphas) {
    for (std::size_t k : ks) {
      SweepCell cell;
      cell.alpha = alpha;
      cell.k = k;
      cell.dir = root / sweep_cell_name(alpha, k);
      PipelineConfig cfg = config;
      cfg.alpha = alpha;
      cfg.k = k;
      cfg.out_dir = cell.dir.string();
      try {
        write_detection_artifacts(d, cfg, cell.dir);
        cell.masking = write_masking(d, cfg, cell.dir);
        write_report(d, cfg, cell.masking, cell.dir);
        cell.ok = true;
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      cells.push_back(std::move(cell));
    }
  }
  auto out = pipeline_detail::open_out(root / "summary.tsv");
  out << "alpha\tk\trun_dir\tstatus\tselected_words\tmasked_positions\tchanged_word_positions"
         "\tchanged_word_fraction\n";
  for (const auto& c : cells) {
    const double frac = c.masking.masked_positions
                            ? static_cast<double>(c.masking.changed_word_positions) /
                                  static_cast<double>(c.masking.masked_positions)
                            : 0.0;
    out << format_real(c.alpha) << '\t' << c.k << '\t' << c.dir.filename().string() << '\t'
        << (c.ok ? "ok" : "failed") << '\t' << c.masking.selected_words << '\t'
        << c.masking.masked_positions << '\t' << c.masking.changed_word_positions << '\t'
        << format_real(frac) << '\n';
  }
  return cells;
}

}  // namespace semshift
