// axabsa command-line tool.
//
// Exit codes: 0 success, 1 validation error (bad input or flags), 2 runtime
// error.

#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "axabsa/axabsa.hpp"

namespace {

using namespace axabsa;
using nlohmann::ordered_json;

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct Inputs {
  std::string corpus;
  std::string emb;
  std::string seeds;
  std::string standalone;
  std::size_t min_count = kDefaultMinCount;
};

void add_input_flags(CLI::App* cmd, Inputs& in, bool with_embeddings = true) {
  cmd->add_option("--corpus", in.corpus, "Corpus JSONL")->required();
  if (with_embeddings) {
    cmd->add_option("--emb", in.emb, "AXEB embedding file")->required();
    cmd->add_option("--standalone", in.standalone, "Standalone vectors for absent seeds (JSON)");
    cmd->add_option("--min-count", in.min_count, "Minimum occurrences to keep a word")
        ->capture_default_str();
  }
  cmd->add_option("--seeds", in.seeds, "Seeds JSON")->required();
}

struct Loaded {
  Corpus corpus;
  TokenEmbeddingStore embeddings;
  SeedConfig seeds;
  Vocabulary vocab;
};

Loaded load(const Inputs& in) {
  Loaded l;
  l.corpus = read_corpus(in.corpus);
  l.embeddings = read_embeddings(in.emb, l.corpus);
  l.seeds = read_seeds(in.seeds);
  const StandaloneVectors standalone =
      in.standalone.empty() ? StandaloneVectors{} : read_standalone_vectors(in.standalone);
  l.vocab = build_vocabulary(l.corpus, l.embeddings, in.min_count, l.seeds, standalone);
  return l;
}

std::vector<double> as_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector as_vector(const nlohmann::json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + ": malformed JSON: " + e.what());
  }
}

// --- representation file ---------------------------------------------------

ordered_json reps_to_json(const Representations& r) {
  auto classes = [](const std::vector<ClassRep>& cs) {
    ordered_json out = ordered_json::array();
    for (const auto& c : cs)
      out.push_back({{"class", c.class_name},
                     {"seed", c.seed_word},
                     {"expansion", c.expansion},
                     {"vector", as_std(c.vector)}});
    return out;
  };
  auto docs = [](const std::vector<DocRep>& ds) {
    ordered_json out = ordered_json::array();
    for (const auto& d : ds) out.push_back({{"id", d.sentence_id}, {"vector", as_std(d.vector)}});
    return out;
  };
  return {{"aspects", {{"classes", classes(r.aspect_classes)}, {"docs", docs(r.aspect_docs)}}},
          {"sentiments",
           {{"classes", classes(r.sentiment_classes)}, {"docs", docs(r.sentiment_docs)}}}};
}

Representations reps_from_json(const nlohmann::json& j) {
  auto classes = [](const nlohmann::json& cs) {
    std::vector<ClassRep> out;
    for (const auto& c : cs)
      out.push_back({c.at("class").get<std::string>(), c.at("seed").get<std::string>(),
                     c.at("expansion").get<std::vector<std::string>>(),
                     as_vector(c.at("vector"))});
    return out;
  };
  auto docs = [](const nlohmann::json& ds) {
    std::vector<DocRep> out;
    for (const auto& d : ds) out.push_back({d.at("id").get<std::string>(), as_vector(d.at("vector")), {}});
    return out;
  };
  try {
    Representations r;
    r.aspect_classes = classes(j.at("aspects").at("classes"));
    r.aspect_docs = docs(j.at("aspects").at("docs"));
    r.sentiment_classes = classes(j.at("sentiments").at("classes"));
    r.sentiment_docs = docs(j.at("sentiments").at("docs"));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("representation file: ") + e.what());
  }
}

// --- subcommands -------------------------------------------------------------

int cmd_vocab(const Inputs& in, const std::string& out, bool with_vectors) {
  const Loaded l = load(in);
  ordered_json entries = ordered_json::object();
  for (const auto& [word, rep] : l.vocab.entries()) {
    ordered_json e = {{"count", rep.occurrence_count},
                      {"sentences", rep.sentence_count},
                      {"pos", rep.dominant_pos},
                      {"injected", rep.injected},
                      {"forced", rep.forced}};
    if (with_vectors) e["vector"] = as_std(rep.vector);
    entries[word] = std::move(e);
  }
  write_json_file(out, {{"dim", l.vocab.dim()},
                        {"min_count", l.vocab.min_count()},
                        {"size", l.vocab.size()},
                        {"entries", std::move(entries)}});
  return 0;
}

int cmd_select_seeds(const Inputs& in, std::size_t top_t, const std::string& occurrences,
                     const std::string& out, const std::string& trace) {
  const Loaded l = load(in);
  const SeedSelection s = select_seeds(l.vocab, l.seeds, top_t, parse_occurrences(occurrences));
  write_seeds(out, s.seeds);
  if (!trace.empty()) write_json_file(trace, to_json(s));
  return 0;
}

int cmd_represent(const Inputs& in, std::size_t max_expansion, double temperature,
                  unsigned threads, const std::string& out) {
  const Loaded l = load(in);
  const Representations r =
      represent(l.corpus, l.embeddings, l.vocab, l.seeds, max_expansion, temperature, threads);
  write_json_file(out, reps_to_json(r));
  return 0;
}

int cmd_cluster(const std::string& reps_path, const PipelineConfig& config,
                const std::string& out, const std::string& single_out) {
  const Representations reps = reps_from_json(read_json(reps_path));
  const Alignment a = cluster(reps, config);
  for (const auto& w : alignment_warnings(a)) std::cerr << "warning: " << w << '\n';
  const auto tuples = single_label_tuples(reps, a);
  ordered_json rows = ordered_json::array();
  std::vector<PredictionRecord> single;
  for (std::size_t k = 0; k < tuples.size(); ++k) {
    rows.push_back({{"id", reps.aspect_docs[k].sentence_id},
                    {"aspect", tuples[k].aspect},
                    {"sentiment", tuples[k].sentiment}});
    single.push_back({reps.aspect_docs[k].sentence_id, {tuples[k]}});
  }
  write_json_file(out, {{"acd_algorithm", to_string(config.acd_algorithm)},
                        {"sentiment_algorithm", to_string(config.sentiment_algorithm)},
                        {"pca_dim", a.acd.pca.components.rows()},
                        {"assignments", std::move(rows)}});
  if (!single_out.empty()) write_predictions(single_out, single);
  return 0;
}

int cmd_predict(const Inputs& in, const std::string& reps_path, const std::string& assign_path,
                const PipelineConfig& config, const std::string& out,
                const std::string& debug_path) {
  const Loaded l = load(in);
  const Representations reps = reps_from_json(read_json(reps_path));
  const auto assignments = read_json(assign_path);
  std::map<std::string, LabelTuple> by_id;
  try {
    for (const auto& row : assignments.at("assignments"))
      by_id[row.at("id").get<std::string>()] = {row.at("aspect").get<std::string>(),
                                                row.at("sentiment").get<std::string>()};
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(assign_path + ": " + e.what());
  }
  std::vector<LabelTuple> fallback;
  for (const auto& s : l.corpus) {
    auto it = by_id.find(s.id);
    if (it == by_id.end()) throw ValidationError("no cluster assignment for sentence '" + s.id + "'");
    fallback.push_back(it->second);
  }
  const Predictions p = predict(l.corpus, l.embeddings, l.vocab, reps, fallback, config.mode,
                                {config.threshold, config.use_single_fppair});
  write_predictions(out, p.records);
  if (!debug_path.empty()) {
    std::ofstream dbg(debug_path, std::ios::out | std::ios::trunc | std::ios::binary);
    for (const auto& j : p.debug) dbg << j.dump() << '\n';
  }
  return 0;
}

int cmd_baseline(const std::string& corpus_path, const std::string& seeds_path,
                 std::uint64_t seed, const std::string& out) {
  const Corpus corpus = read_corpus(corpus_path);
  const SeedConfig seeds = read_seeds(seeds_path);
  write_predictions(out, random_baseline(corpus, seeds, seed));
  return 0;
}

int cmd_evaluate(const std::string& gold_path, const std::vector<std::string>& preds,
                 const std::string& out, const std::string& format) {
  const auto gold = read_predictions(gold_path);
  std::vector<MetricsReport> reports;
  for (const auto& p : preds) reports.push_back(evaluate(gold, read_predictions(p)));
  if (format == "table") {
    std::cout << format_table(preds, reports);
  } else {
    ordered_json j;
    if (reports.size() == 1) {
      j = to_json(reports.front());
    } else {
      j = ordered_json::array();
      for (std::size_t i = 0; i < reports.size(); ++i) {
        auto r = to_json(reports[i]);
        r["predictions"] = preds[i];
        j.push_back(std::move(r));
      }
    }
    if (out.empty()) std::cout << j.dump(2) << '\n';
    else write_json_file(out, j);
  }
  if (!out.empty() && format == "table") {
    ordered_json j = ordered_json::array();
    for (std::size_t i = 0; i < reports.size(); ++i) {
      auto r = to_json(reports[i]);
      r["predictions"] = preds[i];
      j.push_back(std::move(r));
    }
    write_json_file(out, j);
  }
  return 0;
}

// Pipeline flags are applied on top of the config file, so each one records
// how to write itself into a PipelineConfig.
class PipelineFlags {
 public:
  explicit PipelineFlags(CLI::App* cmd) : cmd_(cmd) {
    cmd->add_option("--config", config_path_, "JSON config (keys mirror flag names)");
    str("--corpus", &PipelineConfig::corpus_path, "Corpus JSONL");
    str("--emb", &PipelineConfig::embeddings_path, "AXEB embedding file");
    str("--seeds", &PipelineConfig::seeds_path, "Seeds JSON");
    str("--standalone", &PipelineConfig::standalone_path, "Standalone vectors JSON");
    str("--gold", &PipelineConfig::gold_path, "Gold labels JSONL (enables evaluation)");
    str("--out", &PipelineConfig::output_path, "Predictions JSONL");
    str("--metrics", &PipelineConfig::metrics_path, "Metrics JSON");
    str("--trace", &PipelineConfig::trace_path, "Seed-selection trace JSON");
    str("--debug-fppairs", &PipelineConfig::debug_path, "Per-sentence generator records JSONL");
    add<std::string>("--mode", "single|multi", "single",
                     [](PipelineConfig& c, const std::string& v) { c.mode = parse_mode(v); });
    auto* flag = cmd->add_flag("--auto-seeds", auto_seeds_, "Replace seeds automatically");
    appliers_.emplace_back(flag, [this](PipelineConfig& c) { c.auto_seeds = auto_seeds_; });
    auto* single = cmd->add_flag("--use-single-fppair", single_fppair_,
                                 "Use a lone surviving pair instead of the clustering fallback");
    appliers_.emplace_back(single,
                           [this](PipelineConfig& c) { c.use_single_fppair = single_fppair_; });
    add<std::string>("--acd-algorithm", "mkmeans|kmeans|gmm", "mkmeans",
                     [](PipelineConfig& c, const std::string& v) {
                       c.acd_algorithm = parse_cluster_kind(v);
                     });
    add<std::string>("--sentiment-algorithm", "mkmeans|kmeans|gmm", "gmm",
                     [](PipelineConfig& c, const std::string& v) {
                       c.sentiment_algorithm = parse_cluster_kind(v);
                     });
    add<double>("--threshold", "Aspect cosine threshold", kDefaultThreshold,
                [](PipelineConfig& c, double v) { c.threshold = v; });
    add<Index>("--pca-dim", "PCA target dimension", kDefaultPcaDim,
               [](PipelineConfig& c, Index v) { c.pca_dim = v; });
    add<std::size_t>("--batch", "Mini-batch size", kDefaultBatchSize,
                     [](PipelineConfig& c, std::size_t v) { c.batch_size = v; });
    add<std::uint64_t>("--seed", "Random seed", kDefaultSeed,
                       [](PipelineConfig& c, std::uint64_t v) { c.rng_seed = v; });
    add<std::size_t>("--top-t", "Top-T list size for seed selection", kDefaultTopT,
                     [](PipelineConfig& c, std::size_t v) { c.top_t = v; });
    add<std::size_t>("--min-count", "Minimum occurrences to keep a word", kDefaultMinCount,
                     [](PipelineConfig& c, std::size_t v) { c.min_count = v; });
    add<std::size_t>("--max-expansion", "Class expansion cap", kDefaultMaxExpansion,
                     [](PipelineConfig& c, std::size_t v) { c.max_expansion = v; });
    add<double>("--temperature", "Attention softmax temperature", 1.0,
                [](PipelineConfig& c, double v) { c.temperature = v; });
    add<std::string>("--occurrences", "tokens|sentences", "tokens",
                     [](PipelineConfig& c, const std::string& v) {
                       c.occurrences = parse_occurrences(v);
                     });
    add<unsigned>("--threads", "Worker threads", 1u,
                  [](PipelineConfig& c, unsigned v) { c.threads = v; });
  }

  PipelineConfig resolve() const {
    PipelineConfig c;
    if (!config_path_.empty()) apply_config_json(c, read_json(config_path_));
    for (const auto& [opt, apply] : appliers_)
      if (opt->count() > 0) apply(c);
    return c;
  }

 private:
  void str(const std::string& name, std::string PipelineConfig::*field, const std::string& help) {
    auto holder = std::make_shared<std::string>();
    auto* opt = cmd_->add_option(name, *holder, help);
    appliers_.emplace_back(opt, [holder, field](PipelineConfig& c) { c.*field = *holder; });
  }

  template <typename T, typename Fn>
  void add(const std::string& name, const std::string& help, T def, Fn fn) {
    auto holder = std::make_shared<T>(def);
    auto* opt = cmd_->add_option(name, *holder, help)->capture_default_str();
    appliers_.emplace_back(opt, [holder, fn](PipelineConfig& c) { fn(c, *holder); });
  }

  CLI::App* cmd_;
  std::string config_path_;
  bool auto_seeds_ = false;
  bool single_fppair_ = false;
  std::vector<std::pair<CLI::Option*, std::function<void(PipelineConfig&)>>> appliers_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weakly supervised multi-label aspect-category sentiment analysis"};
  app.require_subcommand(1);

  // vocab
  Inputs vocab_in;
  std::string vocab_out;
  bool vocab_vectors = false;
  auto* vocab = app.add_subcommand("vocab", "Build the vocabulary and static word reps");
  add_input_flags(vocab, vocab_in);
  vocab->add_option("--out", vocab_out, "Vocabulary JSON")->required();
  vocab->add_flag("--with-vectors", vocab_vectors, "Include static vectors");

  // select-seeds
  Inputs sel_in;
  std::size_t sel_top_t = kDefaultTopT;
  std::string sel_occ = "tokens", sel_out, sel_trace;
  auto* sel = app.add_subcommand("select-seeds", "Pick representative seed words");
  add_input_flags(sel, sel_in);
  sel->add_option("--top-t", sel_top_t, "Top-T list size")->capture_default_str();
  sel->add_option("--occurrences", sel_occ, "tokens|sentences")->capture_default_str();
  sel->add_option("--out", sel_out, "Selected seeds JSON")->required();
  sel->add_option("--trace", sel_trace, "Selection trace JSON");

  // represent
  Inputs rep_in;
  std::size_t rep_max = kDefaultMaxExpansion;
  double rep_temp = 1.0;
  unsigned rep_threads = 1;
  std::string rep_out;
  auto* rep = app.add_subcommand("represent", "Build class and document representations");
  add_input_flags(rep, rep_in);
  rep->add_option("--max-expansion", rep_max, "Class expansion cap")->capture_default_str();
  rep->add_option("--temperature", rep_temp, "Attention temperature")->capture_default_str();
  rep->add_option("--threads", rep_threads, "Worker threads")->capture_default_str();
  rep->add_option("--out", rep_out, "Representations JSON")->required();

  // cluster
  std::string clu_reps, clu_out, clu_single, clu_acd = "mkmeans", clu_sen = "gmm";
  PipelineConfig clu_cfg;
  auto* clu = app.add_subcommand("cluster", "Align documents to classes");
  clu->add_option("--reps", clu_reps, "Representations JSON")->required();
  clu->add_option("--pca-dim", clu_cfg.pca_dim, "PCA target dimension")->capture_default_str();
  clu->add_option("--batch", clu_cfg.batch_size, "Mini-batch size")->capture_default_str();
  clu->add_option("--seed", clu_cfg.rng_seed, "Random seed")->capture_default_str();
  clu->add_option("--threads", clu_cfg.threads, "Worker threads")->capture_default_str();
  clu->add_option("--acd-algorithm", clu_acd, "mkmeans|kmeans|gmm")->capture_default_str();
  clu->add_option("--sentiment-algorithm", clu_sen, "mkmeans|kmeans|gmm")->capture_default_str();
  clu->add_option("--out", clu_out, "Assignments JSON")->required();
  clu->add_option("--predictions", clu_single, "Also write single-label predictions JSONL");

  // predict
  Inputs pre_in;
  std::string pre_reps, pre_assign, pre_out, pre_debug, pre_mode = "multi";
  PipelineConfig pre_cfg;
  auto* pre = app.add_subcommand("predict", "Generate labels from cluster assignments");
  add_input_flags(pre, pre_in);
  pre->add_option("--reps", pre_reps, "Representations JSON")->required();
  pre->add_option("--assignments", pre_assign, "Assignments JSON")->required();
  pre->add_option("--mode", pre_mode, "single|multi")->capture_default_str();
  pre->add_option("--threshold", pre_cfg.threshold, "Aspect cosine threshold")
      ->capture_default_str();
  pre->add_flag("--use-single-fppair", pre_cfg.use_single_fppair,
                "Use a lone surviving pair instead of the clustering fallback");
  pre->add_option("--out", pre_out, "Predictions JSONL")->required();
  pre->add_option("--debug-fppairs", pre_debug, "Per-sentence generator records JSONL");

  // baseline-random
  std::string base_corpus, base_seeds, base_out;
  std::uint64_t base_seed = kDefaultSeed;
  auto* base = app.add_subcommand("baseline-random", "Uniform random tuple per sentence");
  base->add_option("--corpus", base_corpus, "Corpus JSONL")->required();
  base->add_option("--seeds", base_seeds, "Seeds JSON")->required();
  base->add_option("--seed", base_seed, "Random seed")->capture_default_str();
  base->add_option("--out", base_out, "Predictions JSONL")->required();

  // evaluate
  std::string eval_gold, eval_out, eval_format = "json";
  std::vector<std::string> eval_preds;
  auto* eval = app.add_subcommand("evaluate", "Score predictions against gold labels");
  eval->add_option("--gold", eval_gold, "Gold JSONL")->required();
  eval->add_option("--pred", eval_preds, "Prediction JSONL (repeatable)")->required();
  eval->add_option("--out", eval_out, "Metrics JSON");
  eval->add_option("--format", eval_format, "json|table")
      ->check(CLI::IsMember({"json", "table"}))
      ->capture_default_str();

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "Run every stage end to end");
  PipelineFlags pipe_flags(pipe);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*vocab) return cmd_vocab(vocab_in, vocab_out, vocab_vectors);
    if (*sel) return cmd_select_seeds(sel_in, sel_top_t, sel_occ, sel_out, sel_trace);
    if (*rep) return cmd_represent(rep_in, rep_max, rep_temp, rep_threads, rep_out);
    if (*clu) {
      clu_cfg.acd_algorithm = parse_cluster_kind(clu_acd);
      clu_cfg.sentiment_algorithm = parse_cluster_kind(clu_sen);
      validate_config(clu_cfg);
      return cmd_cluster(clu_reps, clu_cfg, clu_out, clu_single);
    }
    if (*pre) {
      pre_cfg.mode = parse_mode(pre_mode);
      return cmd_predict(pre_in, pre_reps, pre_assign, pre_cfg, pre_out, pre_debug);
    }
    if (*base) return cmd_baseline(base_corpus, base_seeds, base_seed, base_out);
    if (*eval) return cmd_evaluate(eval_gold, eval_preds, eval_out, eval_format);
    if (*pipe) {
      const PipelineConfig config = pipe_flags.resolve();
      const PipelineResult r = run(config);
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
      std::cerr << config.variant() << ": wrote " << r.predictions_path;
      if (r.metrics) {
        std::cerr << "; ACD F1-macro " << r.metrics->acd_f1_macro << ", ACSA F1-PN macro "
                  << r.metrics->acsa_f1_pn_macro << " (" << r.metrics_path << ")";
      }
      std::cerr << '\n';
      return 0;
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
