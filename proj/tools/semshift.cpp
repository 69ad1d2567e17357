// semshift: lexical semantic change detection and masked-corpus compiler.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "semshift/semshift.hpp"

namespace {

using namespace semshift;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

struct CorpusFlags {
  std::vector<std::string> paths;
  std::size_t min_doc_tokens = 3;
  bool no_lang_filter = false;

  void add(CLI::App* app) {
    app->add_option("--corpus", paths, "Corpus JSONL file(s)")->required();
    app->add_option("--min-doc-tokens", min_doc_tokens, "Drop documents with fewer tokens")
        ->capture_default_str();
    app->add_flag("--no-lang-filter", no_lang_filter, "Keep non-English documents");
  }

  Corpus load() const {
    CorpusOptions opts;
    opts.min_doc_tokens = min_doc_tokens;
    opts.language_filter = !no_lang_filter;
    LoadReport report;
    std::vector<std::filesystem::path> p(paths.begin(), paths.end());
    Corpus corpus = load_corpus(p, opts, &report);
    std::cerr << "loaded " << report.loaded << " documents (" << report.dropped_language
              << " non-English, " << report.dropped_short << " too short, "
              << report.malformed_lines.size() << " malformed lines)\n";
    for (auto line : report.malformed_lines) std::cerr << "  malformed line " << line << '\n';
    return corpus;
  }
};

std::ofstream open_or_throw(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  return out;
}

// "0.15,0.3" -> {0.15, 0.3}
std::vector<double> parse_real_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

// "100..1000:100" or "100,200,500"
std::vector<std::size_t> parse_count_grid(const std::string& s) {
  std::vector<std::size_t> out;
  const auto dots = s.find("..");
  if (dots != std::string::npos) {
    const auto colon = s.find(':', dots);
    const std::size_t lo = std::stoull(s.substr(0, dots));
    const std::size_t hi = std::stoull(s.substr(dots + 2, colon - dots - 2));
    const std::size_t step = colon == std::string::npos ? 1 : std::stoull(s.substr(colon + 1));
    if (step == 0) throw ConfigError("grid step must be > 0");
    for (std::size_t v = lo; v <= hi; v += step) out.push_back(v);
    return out;
  }
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoull(item));
  }
  return out;
}

std::pair<std::string, std::string> resolve_slices(const std::set<std::string>& labels,
                                                   std::string t, std::string tp) {
  if (!t.empty() && !tp.empty()) return {t, tp};
  if (labels.size() != 2) {
    throw ConfigError("--slice/--slice-prime required unless exactly two time labels exist");
  }
  return {*labels.begin(), *std::next(labels.begin())};
}

int cmd_keywords(const CorpusFlags& cf, const std::string& slice, const std::string& slice_prime,
                 std::size_t top_n, std::size_t min_count, const std::string& out) {
  const Corpus corpus = cf.load();
  std::set<std::string> labels;
  for (const auto& [l, s] : corpus.slices) labels.insert(l);
  const auto [t, tp] = resolve_slices(labels, slice, slice_prime);
  const auto slices = slice_by_time(corpus, {t, tp});
  const auto set = extract_candidates(slices[0], slices[1], top_n, min_count);
  write_candidates_tsv(out, set);
  std::cerr << set.size() << " candidates written to " << out << '\n';
  return kExitOk;
}

int cmd_embed(const CorpusFlags& cf, const std::string& candidates, const std::string& slice,
              const std::string& slice_prime, std::size_t dim, std::size_t window,
              std::uint64_t seed, const std::string& out_path) {
  const Corpus corpus = cf.load();
  std::set<std::string> labels;
  for (const auto& [l, s] : corpus.slices) labels.insert(l);
  const auto [t, tp] = resolve_slices(labels, slice, slice_prime);
  const auto slices = slice_by_time(corpus, {t, tp});
  auto out = open_or_throw(out_path);
  EmbeddingWriter writer(out, dim);
  std::size_t records = 0;
  for (const auto& c : read_candidates_tsv(candidates)) {
    for (const auto& s : slices) {
      try {
        auto m = embed_occurrences(collect_occurrences(s, c.word, window), dim, seed);
        writer.write(m);
        records += m.size();
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kWordAbsent) throw;
        std::cerr << "warning: '" << c.word << "' absent from slice " << s.label << '\n';
      }
    }
  }
  std::cerr << records << " occurrence vectors written to " << out_path << '\n';
  return kExitOk;
}

int cmd_cluster(const std::string& emb, std::string slice, std::string slice_prime,
                const SelectKParams& base, const std::string& out_path) {
  const auto table = read_embedding_file(emb);
  std::set<std::string> labels;
  std::set<std::string> words;
  for (const auto& [key, m] : table) {
    words.insert(key.first);
    labels.insert(key.second);
  }
  const auto [t, tp] = resolve_slices(labels, slice, slice_prime);
  std::vector<ClusterRecord> records;
  for (const auto& w : words) {
    auto it_t = table.find({w, t});
    auto it_tp = table.find({w, tp});
    if (it_t == table.end() || it_tp == table.end()) {
      std::cerr << "warning: '" << w << "' lacks vectors for both slices, skipped\n";
      continue;
    }
    UsageMatrix m_t = it_t->second;
    UsageMatrix m_tp = it_tp->second;
    drop_zero_rows_and_normalize(m_t);
    drop_zero_rows_and_normalize(m_tp);
    if (m_t.size() == 0 || m_tp.size() == 0) continue;
    SelectKParams params = base;
    params.seed = derive_seed(base.seed, w);
    records.push_back(cluster_word(w, m_t, m_tp, params));
  }
  write_clusters_jsonl(out_path, records);
  std::cerr << records.size() << " words clustered into " << out_path << '\n';
  return kExitOk;
}

int cmd_quantify(const std::string& clusters_path, const std::string& emb,
                 const std::string& metric_name, std::size_t k, const std::string& out_path,
                 double report_bins) {
  const auto metric = parse_metric(metric_name);
  const auto clusters = read_clusters_jsonl(clusters_path);
  EmbeddingTable table;
  if (!emb.empty()) table = read_embedding_file(emb);
  std::vector<ChangeScore> scores;
  for (const auto& r : clusters) {
    std::optional<UsageMatrix> m_t;
    std::optional<UsageMatrix> m_tp;
    if (auto it = table.find({r.word, r.time_t}); it != table.end()) m_t = it->second;
    if (auto it = table.find({r.word, r.time_tprime}); it != table.end()) m_tp = it->second;
    if (m_t && m_tp) {
      drop_zero_rows_and_normalize(*m_t);
      drop_zero_rows_and_normalize(*m_tp);
    }
    const bool have_apd = m_t && m_tp && m_t->size() && m_tp->size();
    scores.push_back(score_word(r, have_apd ? &*m_t : nullptr, have_apd ? &*m_tp : nullptr));
  }
  auto ranked = sort_scores(scores, metric);
  if (k > 0 && ranked.size() > k) ranked.resize(k);
  if (k > scores.size()) {
    std::cerr << "warning: requested k=" << k << " but only " << scores.size()
              << " words are scored\n";
  }
  write_ranked_tsv(out_path, ranked);
  if (report_bins > 0.0) {
    std::vector<double> values;
    for (const auto& s : scores) values.push_back(metric_value(s, metric));
    std::printf("range\tcount\tpercent\n");
    for (const auto& row : score_distribution_report(values, report_bins)) {
      std::printf("%.2f~%.2f\t%zu\t%.1f%%\n", row.lower, row.upper, row.count, row.percent);
    }
  }
  return kExitOk;
}

int cmd_mask(const CorpusFlags& cf, const std::string& strategy_name, const std::string& ranked,
             std::size_t k, double alpha, std::uint64_t seed, const std::string& corruption,
             const std::string& mask_token, const std::string& slice, const std::string& out) {
  const auto strategy = parse_strategy(strategy_name);
  const Corpus corpus = cf.load();
  std::vector<DocumentPtr> docs = corpus.documents;
  if (!slice.empty()) docs = slice_by_time(corpus, {slice}).front().documents;

  MaskCandidateList w_mask;
  if (strategy == MaskStrategy::kLmlm) {
    if (ranked.empty()) throw ConfigError("--candidates is required for the lmlm strategy");
    w_mask = top_k_from_ranked(read_ranked_tsv(ranked), ChangeMetric::kJsd, k);
    if (w_mask.words.size() < k) {
      std::cerr << "warning: requested k=" << k << " but " << ranked << " holds "
                << w_mask.words.size() << " words\n";
    }
  }
  KeywordTable importance;
  if (strategy == MaskStrategy::kImportance) {
    importance = yake_scores(TimeSlice{slice.empty() ? "all" : slice, docs});
  }
  std::vector<MaskingPlan> plans;
  for (const auto& d : docs) {
    switch (strategy) {
      case MaskStrategy::kRandom: plans.push_back(plan_random(*d, alpha, seed)); break;
      case MaskStrategy::kFrequency:
        plans.push_back(plan_frequency(*d, corpus.vocab, alpha, seed));
        break;
      case MaskStrategy::kImportance:
        plans.push_back(plan_importance(*d, importance, alpha, seed));
        break;
      case MaskStrategy::kLmlm: plans.push_back(plan_lmlm(*d, w_mask, alpha, seed)); break;
    }
  }
  emit_masked_corpus(plans, docs, mask_token, parse_corruption(corruption), seed, out);
  std::cerr << plans.size() << " masked documents written to " << out << '\n';
  return kExitOk;
}

int cmd_ppl(const std::string& logprobs, const std::string& plans_path) {
  const auto table = read_logprob_file(logprobs);
  std::vector<MaskingPlan> plans;
  for (const auto& r : read_masked_corpus(plans_path)) plans.push_back(to_plan(r));
  std::printf("%.6f\n", perplexity(table, plans));
  return kExitOk;
}

int cmd_split_eval(const CorpusFlags& cf, const std::string& ranked, std::size_t top,
                   const std::string& out_path) {
  const Corpus corpus = cf.load();
  const auto list = top_k_from_ranked(read_ranked_tsv(ranked), ChangeMetric::kJsd, top);
  if (list.words.size() < top) {
    std::cerr << "warning: only " << list.words.size() << " ranked words available\n";
  }
  const auto split = split_by_temporal_tokens(corpus.documents, list, top);
  nlohmann::json j = {{"trigger_tokens", split.trigger_tokens},
                      {"with_temporal", split.with_temporal},
                      {"without_temporal", split.without_temporal}};
  open_or_throw(out_path) << j.dump(2) << '\n';
  std::cerr << split.with_temporal.size() << " with / " << split.without_temporal.size()
            << " without temporal tokens\n";
  return kExitOk;
}

int cmd_perturb(const CorpusFlags& cf, const std::string& ranked, std::size_t top,
                const std::string& mode_name, std::uint64_t seed, const std::string& out_path) {
  const auto mode = parse_perturb_mode(mode_name);
  const Corpus corpus = cf.load();
  const auto list = top_k_from_ranked(read_ranked_tsv(ranked), ChangeMetric::kJsd, top);
  const auto vocab = sorted_vocab(corpus.vocab);
  auto out = open_or_throw(out_path);
  for (const auto& d : corpus.documents) {
    const Document p = perturb(*d, list.words, mode, vocab, seed);
    nlohmann::json j = {{"id", p.id}, {"time", p.time_label}, {"text", join_tokens(p.tokens)},
                        {"tokens", p.tokens}};
    out << j.dump() << '\n';
  }
  return kExitOk;
}

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<double> alpha;
  std::optional<std::size_t> k;
  std::optional<std::string> metric;
  std::optional<std::string> strategy;
  std::optional<std::string> embedder;
  std::optional<std::string> emb_file;
  std::vector<std::string> corpus;

  void add(CLI::App* app) {
    app->add_option("--seed", seed, "Override the config seed");
    app->add_option("--out-dir", out_dir, "Override the run directory");
    app->add_option("--alpha", alpha, "Override the masking ratio");
    app->add_option("--k", k, "Override the number of selected changed words");
    app->add_option("--metric", metric, "Override the change metric (jsd|ed|apd)");
    app->add_option("--strategy", strategy, "Override the masking strategy");
    app->add_option("--embedder", embedder, "Override the embedder (fallback|file)");
    app->add_option("--emb-file", emb_file, "Embedding interchange file for embedder=file");
    app->add_option("--corpus", corpus, "Override the corpus paths");
  }

  PipelineConfig apply(PipelineConfig c) const {
    if (seed) c.seed = *seed;
    if (out_dir) c.out_dir = *out_dir;
    if (alpha) c.alpha = *alpha;
    if (k) c.k = *k;
    if (metric) c.metric = *metric;
    if (strategy) c.strategy = *strategy;
    if (embedder) c.embedder = *embedder;
    if (emb_file) c.embedding_file = *emb_file;
    if (!corpus.empty()) c.corpus = corpus;
    validate(c);
    return c;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semshift: lexical semantic change detection and masked-corpus compiler"};
  app.require_subcommand(1);

  // keywords
  CorpusFlags kw_corpus;
  std::string kw_slice, kw_slice_prime, kw_out;
  std::size_t kw_top_n = 2000, kw_min_count = 5;
  auto* kw = app.add_subcommand("keywords", "Extract cross-period candidate words");
  kw_corpus.add(kw);
  kw->add_option("--slice", kw_slice, "Time label t");
  kw->add_option("--slice-prime", kw_slice_prime, "Time label t'");
  kw->add_option("--top-n", kw_top_n)->capture_default_str();
  kw->add_option("--min-count", kw_min_count)->capture_default_str();
  kw->add_option("--out", kw_out)->required();

  // embed
  CorpusFlags em_corpus;
  std::string em_candidates, em_slice, em_slice_prime, em_out;
  std::size_t em_dim = 256, em_window = kDefaultWindowSize;
  std::uint64_t em_seed = 0;
  auto* em = app.add_subcommand("embed", "Write fallback (hashed-context) embeddings");
  em_corpus.add(em);
  em->add_option("--candidates", em_candidates, "candidates.tsv")->required();
  em->add_option("--slice", em_slice);
  em->add_option("--slice-prime", em_slice_prime);
  em->add_option("--dim", em_dim)->capture_default_str();
  em->add_option("--window", em_window)->capture_default_str();
  em->add_option("--seed", em_seed)->capture_default_str();
  em->add_option("--out", em_out)->required();

  // cluster
  std::string cl_emb, cl_slice, cl_slice_prime, cl_out;
  SelectKParams cl_params;
  auto* cl = app.add_subcommand("cluster", "Cluster usage vectors and derive usage distributions");
  cl->add_option("--emb", cl_emb)->required();
  cl->add_option("--slice", cl_slice);
  cl->add_option("--slice-prime", cl_slice_prime);
  cl->add_option("--k-min", cl_params.k_min)->capture_default_str();
  cl->add_option("--k-max", cl_params.k_max)->capture_default_str();
  cl->add_option("--restarts", cl_params.restarts)->capture_default_str();
  cl->add_option("--dispersion-threshold", cl_params.dispersion_threshold)->capture_default_str();
  cl->add_option("--seed", cl_params.seed)->capture_default_str();
  cl->add_option("--out", cl_out)->required();

  // quantify
  std::string qu_clusters, qu_emb, qu_metric = "jsd", qu_out;
  std::size_t qu_k = 0;
  double qu_bins = 0.0;
  auto* qu = app.add_subcommand("quantify", "Score and rank semantic change");
  qu->add_option("--clusters", qu_clusters)->required();
  qu->add_option("--emb", qu_emb, "Embedding file (needed for APD)");
  qu->add_option("--metric", qu_metric)->capture_default_str();
  qu->add_option("--k", qu_k, "Keep the top k rows (0 keeps all)")->capture_default_str();
  qu->add_option("--out", qu_out)->required();
  qu->add_option("--report-bins", qu_bins, "Print a score histogram with this bin width");

  // mask
  CorpusFlags ma_corpus;
  std::string ma_strategy = "lmlm", ma_candidates, ma_corruption = "all_mask",
              ma_mask_token(kDefaultMaskToken), ma_slice, ma_out;
  std::size_t ma_k = kDefaultTopK;
  double ma_alpha = kDefaultMaskingRatio;
  std::uint64_t ma_seed = 0;
  auto* ma = app.add_subcommand("mask", "Compile a masked corpus");
  ma_corpus.add(ma);
  ma->add_option("--strategy", ma_strategy, "random|frequency|importance|lmlm")
      ->capture_default_str();
  ma->add_option("--candidates", ma_candidates, "ranked.tsv (lmlm)");
  ma->add_option("--k", ma_k)->capture_default_str();
  ma->add_option("--alpha", ma_alpha)->capture_default_str();
  ma->add_option("--seed", ma_seed)->capture_default_str();
  ma->add_option("--corruption", ma_corruption, "all_mask|bert_80_10_10")->capture_default_str();
  ma->add_option("--mask-token", ma_mask_token)->capture_default_str();
  ma->add_option("--slice", ma_slice, "Only mask documents of this time label");
  ma->add_option("--out", ma_out)->required();

  // ppl
  std::string pp_logprobs, pp_plans;
  auto* pp = app.add_subcommand("ppl", "Perplexity over masked positions");
  pp->add_option("--logprobs", pp_logprobs)->required();
  pp->add_option("--plans", pp_plans, "masked.jsonl")->required();

  // split-eval
  CorpusFlags se_corpus;
  std::string se_ranked, se_out;
  std::size_t se_top = kDefaultTriggerCount;
  auto* se = app.add_subcommand("split-eval", "Split documents by changed-word presence");
  se_corpus.add(se);
  se->add_option("--ranked", se_ranked)->required();
  se->add_option("--top", se_top)->capture_default_str();
  se->add_option("--out", se_out)->required();

  // perturb
  CorpusFlags pt_corpus;
  std::string pt_ranked, pt_mode = "MASK", pt_out;
  std::size_t pt_top = kDefaultTriggerCount;
  std::uint64_t pt_seed = 0;
  auto* pt = app.add_subcommand("perturb", "Replace changed words with MASK/PAD/REP");
  pt_corpus.add(pt);
  pt->add_option("--ranked", pt_ranked)->required();
  pt->add_option("--top", pt_top)->capture_default_str();
  pt->add_option("--mode", pt_mode, "MASK|PAD|REP")->capture_default_str();
  pt->add_option("--seed", pt_seed)->capture_default_str();
  pt->add_option("--out", pt_out)->required();

  // run
  std::string run_config;
  RunOverrides run_over;
  auto* run = app.add_subcommand("run", "Run the full pipeline from a config file");
  run->add_option("--config", run_config)->required();
  run_over.add(run);

  // sweep
  std::string sw_config, sw_alphas, sw_ks;
  RunOverrides sw_over;
  auto* sw = app.add_subcommand("sweep", "Run the pipeline over an (alpha, k) grid");
  sw->add_option("--config", sw_config)->required();
  sw->add_option("--alphas", sw_alphas, "e.g. 0.15,0.3")->required();
  sw->add_option("--ks", sw_ks, "e.g. 100..1000:100")->required();
  sw_over.add(sw);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*kw) return cmd_keywords(kw_corpus, kw_slice, kw_slice_prime, kw_top_n, kw_min_count, kw_out);
    if (*em) {
      return cmd_embed(em_corpus, em_candidates, em_slice, em_slice_prime, em_dim, em_window,
                       em_seed, em_out);
    }
    if (*cl) return cmd_cluster(cl_emb, cl_slice, cl_slice_prime, cl_params, cl_out);
    if (*qu) return cmd_quantify(qu_clusters, qu_emb, qu_metric, qu_k, qu_out, qu_bins);
    if (*ma) {
      return cmd_mask(ma_corpus, ma_strategy, ma_candidates, ma_k, ma_alpha, ma_seed,
                      ma_corruption, ma_mask_token, ma_slice, ma_out);
    }
    if (*pp) return cmd_ppl(pp_logprobs, pp_plans);
    if (*se) return cmd_split_eval(se_corpus, se_ranked, se_top, se_out);
    if (*pt) return cmd_perturb(pt_corpus, pt_ranked, pt_top, pt_mode, pt_seed, pt_out);
    if (*run) {
      const auto config = run_over.apply(load_config(run_config));
      const auto dir = run_pipeline(config);
      std::cerr << "run written to " << dir.string() << '\n';
      return kExitOk;
    }
    if (*sw) {
      const auto config = sw_over.apply(load_config(sw_config));
      const auto cells = sweep(config, parse_real_list(sw_alphas), parse_count_grid(sw_ks));
      std::size_t failed = 0;
      for (const auto& c : cells) {
        if (!c.ok) {
          ++failed;
          std::cerr << "cell " << c.dir.string() << " failed: " << c.error << '\n';
        }
      }
      std::cerr << cells.size() - failed << "/" << cells.size() << " cells written under "
                << config.out_dir << '\n';
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}
