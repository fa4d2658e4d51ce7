// End-to-end orchestration of the four model variants.
//
//   mode single, fixed seeds  -> X-SABSA
//   mode single, auto seeds   -> AX-SABSA
//   mode multi,  fixed seeds  -> X-MABSA
//   mode multi,  auto seeds   -> AX-MABSA
//
// Stages: load -> vocabulary -> (auto seeds) representative-word selection ->
// class reps -> document reps -> ACD and sentiment alignment -> one tuple per
// sentence -> (multi) dependency-pair generator -> write -> (gold) evaluate.

#ifndef AXABSA_PIPELINE_HPP_
#define AXABSA_PIPELINE_HPP_

#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "axabsa/common.hpp"
#include "axabsa/corpus_io.hpp"
#include "axabsa/evaluation.hpp"
#include "axabsa/multilabel.hpp"
#include "axabsa/numerics.hpp"
#include "axabsa/representation.hpp"
#include "axabsa/rng.hpp"
#include "axabsa/seed_selection.hpp"

namespace axabsa {

enum class Mode { kSingle, kMulti };

inline Mode parse_mode(std::string_view s) {
  if (s == "single") return Mode::kSingle;
  if (s == "multi") return Mode::kMulti;
  throw ValidationError("unknown mode '" + std::string(s) + "' (expected single|multi)");
}

inline std::string_view to_string(Mode m) { return m == Mode::kSingle ? "single" : "multi"; }

inline OccurrenceMode parse_occurrences(std::string_view s) {
  if (s == "tokens") return OccurrenceMode::kTokens;
  if (s == "sentences") return OccurrenceMode::kSentences;
  throw ValidationError("unknown occurrence mode '" + std::string(s) +
                        "' (expected tokens|sentences)");
}

inline std::string variant_name(Mode mode, bool auto_seeds) {
  std::string name = auto_seeds ? "AX-" : "X-";
  return name + (mode == Mode::kSingle ? "SABSA" : "MABSA");
}

struct PipelineConfig {
  std::string corpus_path;
  std::string embeddings_path;
  std::string seeds_path;
  std::string standalone_path;  // optional vectors for seeds absent from the corpus
  std::string gold_path;        // optional; enables evaluation
  std::string output_path;
  std::string metrics_path;     // defaults to <output>.metrics.json when gold is given
  std::string trace_path;       // optional seed-selection trace
  std::string debug_path;       // optional per-sentence generator records (JSONL)

  Mode mode = Mode::kSingle;
  bool auto_seeds = false;
  ClusterKind acd_algorithm = ClusterKind::kMiniBatchKMeans;
  ClusterKind sentiment_algorithm = ClusterKind::kGmm;
  Index pca_dim = kDefaultPcaDim;
  std::size_t batch_size = kDefaultBatchSize;
  double threshold = kDefaultThreshold;
  std::size_t top_t = kDefaultTopT;
  std::size_t min_count = kDefaultMinCount;
  std::uint64_t rng_seed = kDefaultSeed;
  std::size_t max_expansion = kDefaultMaxExpansion;
  double temperature = 1.0;
  bool use_single_fppair = false;
  OccurrenceMode occurrences = OccurrenceMode::kTokens;
  unsigned threads = 1;

  std::string variant() const { return variant_name(mode, auto_seeds); }

  AlignConfig align_config(Task task) const {
    AlignConfig c = AlignConfig::defaults_for(task);
    c.algorithm = task == Task::kAcd ? acd_algorithm : sentiment_algorithm;
    c.pca_dim = pca_dim;
    c.batch_size = batch_size;
    c.seed = rng_seed;
    c.threads = threads;
    return c;
  }
};

// Applies a JSON object whose keys mirror the long CLI flag names.
inline void apply_config_json(PipelineConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("config: expected a JSON object");
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "corpus") c.corpus_path = v.get<std::string>();
      else if (key == "emb" || key == "embeddings") c.embeddings_path = v.get<std::string>();
      else if (key == "seeds") c.seeds_path = v.get<std::string>();
      else if (key == "standalone") c.standalone_path = v.get<std::string>();
      else if (key == "gold") c.gold_path = v.get<std::string>();
      else if (key == "out" || key == "output") c.output_path = v.get<std::string>();
      else if (key == "metrics") c.metrics_path = v.get<std::string>();
      else if (key == "trace") c.trace_path = v.get<std::string>();
      else if (key == "debug-fppairs") c.debug_path = v.get<std::string>();
      else if (key == "mode") c.mode = parse_mode(v.get<std::string>());
      else if (key == "auto-seeds") c.auto_seeds = v.get<bool>();
      else if (key == "acd-algorithm") c.acd_algorithm = parse_cluster_kind(v.get<std::string>());
      else if (key == "sentiment-algorithm")
        c.sentiment_algorithm = parse_cluster_kind(v.get<std::string>());
      else if (key == "pca-dim") c.pca_dim = v.get<Index>();
      else if (key == "batch") c.batch_size = v.get<std::size_t>();
      else if (key == "threshold") c.threshold = v.get<double>();
      else if (key == "top-t") c.top_t = v.get<std::size_t>();
      else if (key == "min-count") c.min_count = v.get<std::size_t>();
      else if (key == "seed") c.rng_seed = v.get<std::uint64_t>();
      else if (key == "max-expansion") c.max_expansion = v.get<std::size_t>();
      else if (key == "temperature") c.temperature = v.get<double>();
      else if (key == "use-single-fppair") c.use_single_fppair = v.get<bool>();
      else if (key == "occurrences") c.occurrences = parse_occurrences(v.get<std::string>());
      else if (key == "threads") c.threads = v.get<unsigned>();
      else throw ValidationError("config: unknown key '" + key + "'");
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("config: bad value for '" + key + "': " + e.what());
    }
  }
}

inline void validate_config(const PipelineConfig& c) {
  if (c.pca_dim < 1) throw ValidationError("pca-dim must be >= 1");
  if (c.batch_size < 1) throw ValidationError("batch must be >= 1");
  if (c.top_t < 1) throw ValidationError("top-t must be >= 1");
  if (c.min_count < 1) throw ValidationError("min-count must be >= 1");
  if (c.max_expansion < 1) throw ValidationError("max-expansion must be >= 1");
  if (!(c.temperature > 0.0)) throw ValidationError("temperature must be > 0");
}

// Runs fn and prefixes any error with the stage name, keeping its category.
template <typename Fn>
auto run_stage(std::string_view stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ValidationError& e) {
    throw ValidationError("stage " + std::string(stage) + ": " + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error("stage " + std::string(stage) + ": " + e.what());
  }
}

struct SeedSelection {
  SeedConfig seeds;
  AcssaTrace aspect_trace;
  AcssaTrace sentiment_trace;
};

// Replaces aspect seeds with nouns and sentiment seeds with adjectives.
inline SeedSelection select_seeds(const Vocabulary& vocab, const SeedConfig& seeds,
                                  std::size_t top_t, OccurrenceMode occurrences) {
  AcssaResult aspects = acssa_select({"NOUN", &vocab, seeds.aspect_seeds, top_t, occurrences});
  AcssaResult sentiments =
      acssa_select({"ADJ", &vocab, seeds.sentiment_seeds, top_t, occurrences});
  return {{aspects.selection, sentiments.selection},
          std::move(aspects.trace),
          std::move(sentiments.trace)};
}

inline nlohmann::ordered_json to_json(const SeedSelection& s) {
  return {{"aspects", to_json(s.aspect_trace)}, {"sentiments", to_json(s.sentiment_trace)}};
}

struct Representations {
  std::vector<ClassRep> aspect_classes;
  std::vector<ClassRep> sentiment_classes;
  std::vector<DocRep> aspect_docs;     // guided by aspect class reps
  std::vector<DocRep> sentiment_docs;  // guided by sentiment class reps

  std::vector<std::string> aspect_names() const {
    std::vector<std::string> out;
    for (const auto& c : aspect_classes) out.push_back(c.class_name);
    return out;
  }
  std::vector<std::string> sentiment_names() const {
    std::vector<std::string> out;
    for (const auto& c : sentiment_classes) out.push_back(c.class_name);
    return out;
  }
};

inline Representations represent(std::span<const TokenizedSentence> corpus,
                                 const TokenEmbeddingStore& embeddings, const Vocabulary& vocab,
                                 const SeedConfig& seeds, std::size_t max_expansion,
                                 double temperature, unsigned threads) {
  Representations r;
  r.aspect_classes = expand_classes(seeds.aspect_seeds, vocab, max_expansion);
  r.sentiment_classes = expand_classes(seeds.sentiment_seeds, vocab, max_expansion);
  r.aspect_docs = document_reps(corpus, embeddings, r.aspect_classes, temperature, threads);
  r.sentiment_docs = document_reps(corpus, embeddings, r.sentiment_classes, temperature, threads);
  return r;
}

struct Alignment {
  AlignResult acd;
  AlignResult sentiment;
};

inline Alignment cluster(const Representations& reps, const PipelineConfig& config) {
  Alignment a;
  a.acd = align(stack_rows(std::span<const DocRep>(reps.aspect_docs)),
                stack_rows(std::span<const ClassRep>(reps.aspect_classes)),
                config.align_config(Task::kAcd));
  a.sentiment = align(stack_rows(std::span<const DocRep>(reps.sentiment_docs)),
                      stack_rows(std::span<const ClassRep>(reps.sentiment_classes)),
                      config.align_config(Task::kSentiment));
  return a;
}

// The single-label tuple of sentence k: (ACD cluster, sentiment cluster).
inline std::vector<LabelTuple> single_label_tuples(const Representations& reps,
                                                   const Alignment& alignment) {
  const auto aspects = reps.aspect_names();
  const auto sentiments = reps.sentiment_names();
  std::vector<LabelTuple> out;
  const auto& acd = alignment.acd.assignment.labels;
  const auto& sen = alignment.sentiment.assignment.labels;
  for (std::size_t k = 0; k < acd.size(); ++k)
    out.push_back({aspects[static_cast<std::size_t>(acd[k])],
                   sentiments[static_cast<std::size_t>(sen[k])]});
  return out;
}

struct Predictions {
  std::vector<PredictionRecord> records;
  std::vector<nlohmann::ordered_json> debug;  // multi mode only
};

inline Predictions predict(std::span<const TokenizedSentence> corpus,
                           const TokenEmbeddingStore& embeddings, const Vocabulary& vocab,
                           const Representations& reps, std::span<const LabelTuple> fallback,
                           Mode mode, const GeneratorOptions& options) {
  if (fallback.size() != corpus.size())
    throw ValidationError("predict: clustering output does not cover the corpus");
  Predictions out;
  const auto aspects = reps.aspect_names();
  const auto sentiments = reps.sentiment_names();
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    if (mode == Mode::kSingle) {
      out.records.push_back({corpus[k].id, {fallback[k]}});
      continue;
    }
    const auto pairs = extract_ppairs(corpus[k]);
    const auto scores = score_words(pairs, corpus[k], embeddings.sentences[k], vocab,
                                    reps.aspect_classes, reps.sentiment_classes);
    auto result = generate_labels(pairs, scores, aspects, sentiments, fallback[k], options);
    out.debug.push_back(fppair_debug_record(corpus[k].id, result, aspects, sentiments));
    out.records.push_back({corpus[k].id, std::move(result.labels)});
  }
  return out;
}

// One uniformly random (aspect, sentiment) tuple per sentence.
inline std::vector<PredictionRecord> random_baseline(std::span<const TokenizedSentence> corpus,
                                                     const SeedConfig& seeds,
                                                     std::uint64_t rng_seed = kDefaultSeed) {
  const std::size_t na = seeds.aspect_seeds.size();
  const std::size_t ns = seeds.sentiment_seeds.size();
  if (na == 0 || ns == 0) throw ValidationError("random baseline needs at least one class");
  Rng rng(rng_seed);
  std::vector<PredictionRecord> out;
  out.reserve(corpus.size());
  for (const auto& s : corpus) {
    const auto idx = static_cast<std::size_t>(rng.uniform_index(na * ns));
    out.push_back({s.id, {{seeds.aspect_seeds[idx / ns].first,
                           seeds.sentiment_seeds[idx % ns].first}}});
  }
  return out;
}

inline void write_json_file(const std::string& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path, std::ios::out | std::ios::trunc | std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

struct PipelineResult {
  std::string predictions_path;
  std::string metrics_path;  // empty when no gold was given
  SeedConfig effective_seeds;
  std::optional<SeedSelection> selection;
  std::vector<PredictionRecord> predictions;
  std::optional<MetricsReport> metrics;
  std::vector<std::string> warnings;
};

inline std::vector<std::string> alignment_warnings(const Alignment& a) {
  std::vector<std::string> out;
  auto check = [&](const char* task, const PcaModel& pca) {
    if (pca.truncated())
      out.push_back(std::string(task) + ": PCA kept " + std::to_string(pca.components.rows()) +
                    " of " + std::to_string(pca.requested_dim) +
                    " requested components (data rank or size is lower)");
  };
  check("acd", a.acd.pca);
  check("sentiment", a.sentiment.pca);
  return out;
}

inline PipelineResult run(const PipelineConfig& config) {
  validate_config(config);
  if (config.output_path.empty()) throw ValidationError("no output path given");

  const Corpus corpus = run_stage("load", [&] { return read_corpus(config.corpus_path); });
  if (corpus.empty()) throw ValidationError("stage load: corpus is empty");
  const TokenEmbeddingStore embeddings =
      run_stage("load", [&] { return read_embeddings(config.embeddings_path, corpus); });
  const SeedConfig seeds = run_stage("load", [&] { return read_seeds(config.seeds_path); });
  const StandaloneVectors standalone = run_stage("load", [&] {
    return config.standalone_path.empty() ? StandaloneVectors{}
                                          : read_standalone_vectors(config.standalone_path);
  });

  const Vocabulary vocab = run_stage("vocabulary", [&] {
    return build_vocabulary(corpus, embeddings, config.min_count, seeds, standalone);
  });

  PipelineResult result;
  result.effective_seeds = seeds;
  if (config.auto_seeds) {
    result.selection = run_stage("select-seeds", [&] {
      return select_seeds(vocab, seeds, config.top_t, config.occurrences);
    });
    result.effective_seeds = result.selection->seeds;
    if (!config.trace_path.empty())
      run_stage("select-seeds", [&] { write_json_file(config.trace_path, to_json(*result.selection)); });
  }

  const Representations reps = run_stage("represent", [&] {
    return represent(corpus, embeddings, vocab, result.effective_seeds, config.max_expansion,
                     config.temperature, config.threads);
  });
  const Alignment alignment = run_stage("cluster", [&] { return cluster(reps, config); });
  const auto fallback = single_label_tuples(reps, alignment);
  result.warnings = alignment_warnings(alignment);

  Predictions preds = run_stage("predict", [&] {
    return predict(corpus, embeddings, vocab, reps, fallback, config.mode,
                   {config.threshold, config.use_single_fppair});
  });

  run_stage("write", [&] {
    write_predictions(config.output_path, preds.records);
    if (!config.debug_path.empty()) {
      std::ofstream dbg(config.debug_path, std::ios::out | std::ios::trunc | std::ios::binary);
      if (!dbg) throw std::runtime_error("cannot open '" + config.debug_path + "'");
      for (const auto& j : preds.debug) dbg << j.dump() << '\n';
    }
  });
  result.predictions_path = config.output_path;

  if (!config.gold_path.empty()) {
    result.metrics = run_stage("evaluate", [&] {
      const auto gold = read_predictions(config.gold_path);
      return evaluate(gold, preds.records);
    });
    result.metrics_path =
        config.metrics_path.empty() ? config.output_path + ".metrics.json" : config.metrics_path;
    auto j = to_json(*result.metrics);
    j["variant"] = config.variant();
    run_stage("write", [&] { write_json_file(result.metrics_path, j); });
  }
  result.predictions = std::move(preds.records);
  return result;
}

}  // namespace axabsa

#endif  // AXABSA_PIPELINE_HPP_
