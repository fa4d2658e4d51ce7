// Test fixtures, random instance generators and independent oracles.
//
// Oracles here recompute quantities by the most direct route available
// (re-scans, enumeration, quadrature) and never call the code under test.

#ifndef AXABSA_TESTS_FIXTURES_HPP_
#define AXABSA_TESTS_FIXTURES_HPP_

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "axabsa/axabsa.hpp"

namespace axabsa::testing {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "axabsa-XXXXXX").string();
    if (mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

inline Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

// ---------------------------------------------------------------------------
// Random instances

// A random valid dependency tree over n tokens.
inline std::vector<int> random_heads(std::mt19937_64& gen, int n) {
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i + 1;
  std::shuffle(order.begin(), order.end(), gen);
  std::vector<int> heads(n, 0);
  for (int k = 1; k < n; ++k) {
    std::uniform_int_distribution<int> pick(0, k - 1);
    heads[order[k] - 1] = order[pick(gen)];
  }
  return heads;
}

struct RandomCorpus {
  Corpus corpus;
  TokenEmbeddingStore embeddings;
};

inline RandomCorpus random_corpus(std::mt19937_64& gen, int sentences, int vocab_size, Index dim,
                                  int max_len = 8) {
  static const std::vector<std::string> tags = {"NOUN", "ADJ", "VERB", "DET", "ADV"};
  std::uniform_int_distribution<int> len(1, max_len);
  std::uniform_int_distribution<int> word(0, vocab_size - 1);
  std::uniform_int_distribution<int> tag(0, static_cast<int>(tags.size()) - 1);
  std::uniform_int_distribution<int> caps(0, 3);
  std::normal_distribution<double> normal(0.0, 1.0);
  RandomCorpus rc;
  rc.embeddings.dim = dim;
  for (int s = 0; s < sentences; ++s) {
    TokenizedSentence ts;
    ts.id = "s" + std::to_string(s);
    const int n = len(gen);
    const auto heads = random_heads(gen, n);
    Matrix m(n, dim);
    for (int i = 0; i < n; ++i) {
      std::string form = "w" + std::to_string(word(gen));
      if (caps(gen) == 0) form[0] = 'W';  // case folding must merge these
      ts.tokens.push_back({form, tags[static_cast<std::size_t>(tag(gen))], heads[i]});
      for (Index c = 0; c < dim; ++c) m(i, c) = normal(gen);
      ts.text += (i ? " " : "") + form;
    }
    rc.corpus.push_back(std::move(ts));
    rc.embeddings.sentences.push_back(std::move(m));
  }
  return rc;
}

inline std::vector<PredictionRecord> random_records(std::mt19937_64& gen, int sentences,
                                                    int aspects, bool allow_empty,
                                                    bool with_neutral) {
  std::vector<std::string> pols = {"positive", "negative"};
  if (with_neutral) pols.push_back("neutral");
  std::uniform_int_distribution<int> count(allow_empty ? 0 : 1, 3);
  std::uniform_int_distribution<int> a(0, aspects - 1);
  std::uniform_int_distribution<int> p(0, static_cast<int>(pols.size()) - 1);
  std::vector<PredictionRecord> out;
  for (int s = 0; s < sentences; ++s) {
    PredictionRecord r{"s" + std::to_string(s), {}};
    const int k = count(gen);
    for (int i = 0; i < k; ++i)
      r.labels.insert({"a" + std::to_string(a(gen)), pols[static_cast<std::size_t>(p(gen))]});
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Oracles

// Static rep of `word` by re-scanning every occurrence.
inline Vector brute_force_mean(const Corpus& corpus, const TokenEmbeddingStore& emb,
                               const std::string& word, std::size_t* count = nullptr) {
  Vector sum = Vector::Zero(emb.dim);
  std::size_t n = 0;
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    for (std::size_t i = 0; i < corpus[k].tokens.size(); ++i) {
      std::string f = corpus[k].tokens[i].form;
      for (auto& ch : f) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      if (f != word) continue;
      sum += emb.sentences[k].row(static_cast<Index>(i)).transpose();
      ++n;
    }
  }
  if (count) *count = n;
  return n ? Vector(sum / static_cast<double>(n)) : sum;
}

// Independent confusion-matrix scoring: enumerates every class ever seen and
// walks the sentences once per class.
struct OracleScores {
  double acd = 0.0;
  double pn = 0.0;
};

inline OracleScores brute_force_metrics(const std::vector<PredictionRecord>& gold,
                                        const std::vector<PredictionRecord>& pred) {
  auto find_pred = [&](const std::string& id) -> const PredictionRecord& {
    for (const auto& p : pred)
      if (p.id == id) return p;
    throw std::runtime_error("missing id");
  };
  std::set<std::string> aspect_classes;
  std::set<std::pair<std::string, std::string>> pn_classes;
  for (const auto& g : gold)
    for (const auto& t : g.labels) {
      aspect_classes.insert(t.aspect);
      if (t.sentiment == "positive" || t.sentiment == "negative")
        pn_classes.insert({t.aspect, t.sentiment});
    }
  auto f1 = [](double tp, double fp, double fn) {
    const double p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double r = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
  };
  OracleScores out;
  for (const auto& a : aspect_classes) {
    double tp = 0, fp = 0, fn = 0;
    for (const auto& g : gold) {
      bool in_g = false, in_p = false;
      for (const auto& t : g.labels) in_g = in_g || t.aspect == a;
      for (const auto& t : find_pred(g.id).labels) in_p = in_p || t.aspect == a;
      tp += in_g && in_p;
      fp += !in_g && in_p;
      fn += in_g && !in_p;
    }
    out.acd += f1(tp, fp, fn);
  }
  if (!aspect_classes.empty()) out.acd /= static_cast<double>(aspect_classes.size());
  for (const auto& [a, s] : pn_classes) {
    double tp = 0, fp = 0, fn = 0;
    for (const auto& g : gold) {
      const bool in_g = g.labels.contains({a, s});
      const bool in_p = find_pred(g.id).labels.contains({a, s});
      tp += in_g && in_p;
      fp += !in_g && in_p;
      fn += in_g && !in_p;
    }
    out.pn += f1(tp, fp, fn);
  }
  if (!pn_classes.empty()) out.pn /= static_cast<double>(pn_classes.size());
  return out;
}

// Two-sided p-value of Student's t by composite Simpson quadrature of the
// density over [0, |t|].
inline double t_two_sided_p_quadrature(double t, double dof, int intervals = 200000) {
  const double log_c = std::lgamma((dof + 1) / 2) - std::lgamma(dof / 2) -
                       0.5 * std::log(dof * 3.14159265358979323846);
  auto pdf = [&](double x) {
    return std::exp(log_c - (dof + 1) / 2 * std::log1p(x * x / dof));
  };
  const double b = std::abs(t);
  const double h = b / intervals;
  double s = pdf(0) + pdf(b);
  for (int i = 1; i < intervals; ++i) s += (i % 2 ? 4.0 : 2.0) * pdf(i * h);
  const double half_mass = s * h / 3.0;  // integral over [0, |t|]
  return 2.0 * (0.5 - half_mass);
}

// Label of each point by the nearest of a set of known true centers.
inline std::vector<Index> nearest_center_labels(const Matrix& data, const Matrix& centers) {
  std::vector<Index> out;
  for (Index i = 0; i < data.rows(); ++i) {
    Index best = 0;
    double bd = 1e300;
    for (Index j = 0; j < centers.rows(); ++j) {
      const double d = (data.row(i) - centers.row(j)).squaredNorm();
      if (d < bd) {
        bd = d;
        best = j;
      }
    }
    out.push_back(best);
  }
  return out;
}

// Points drawn around the given centers with isotropic noise; labels are the
// generating center.
inline std::pair<Matrix, std::vector<Index>> blobs(std::mt19937_64& gen, const Matrix& centers,
                                                   int per_center, double sigma) {
  std::normal_distribution<double> normal(0.0, sigma);
  Matrix x(centers.rows() * per_center, centers.cols());
  std::vector<Index> labels;
  Index r = 0;
  for (Index c = 0; c < centers.rows(); ++c)
    for (int i = 0; i < per_center; ++i, ++r) {
      for (Index d = 0; d < centers.cols(); ++d) x(r, d) = centers(c, d) + normal(gen);
      labels.push_back(c);
    }
  return {x, labels};
}

// ---------------------------------------------------------------------------
// Synthetic end-to-end inputs

struct SyntheticData {
  Corpus corpus;
  TokenEmbeddingStore embeddings;
  SeedConfig seeds;
  StandaloneVectors standalone;
  std::vector<PredictionRecord> gold;
};

struct SyntheticPaths {
  std::string corpus, embeddings, seeds, standalone, gold;
};

inline SyntheticPaths write_synthetic(const TempDir& dir, const SyntheticData& d) {
  SyntheticPaths p{dir.file("corpus.jsonl"), dir.file("emb.axeb"), dir.file("seeds.json"),
                   dir.file("standalone.json"), dir.file("gold.jsonl")};
  write_corpus(p.corpus, d.corpus);
  write_embeddings(p.embeddings, d.embeddings);
  write_seeds(p.seeds, d.seeds);
  write_standalone_vectors(p.standalone, d.standalone);
  write_predictions(p.gold, d.gold);
  return p;
}

// One-token sentences, one noun per sentence. Aspect class a has three nouns
// whose token vectors are `separation` * e_a plus N(0, sigma) noise, so the
// document rep of a sentence is a point drawn around its class mean. The
// sentiment seeds are absent from the corpus and come from standalone
// vectors pointing away from every aspect direction.
inline SyntheticData synthetic_one_token(std::mt19937_64& gen, int per_class, Index dim,
                                         double sigma = 1.0, double separation = 10.0) {
  static const std::vector<std::vector<std::string>> words = {
      {"food", "pizza", "pasta"}, {"service", "waiter", "staff"}, {"ambience", "music", "decor"}};
  std::normal_distribution<double> noise(0.0, sigma);
  std::uniform_int_distribution<int> pick(0, 2);
  SyntheticData d;
  d.embeddings.dim = dim;
  for (const auto& w : words) d.seeds.aspect_seeds.emplace_back(w[0], w[0]);
  d.seeds.sentiment_seeds = {{"positive", "good"}, {"negative", "bad"}};
  const Vector away = -Vector::Ones(dim) / std::sqrt(static_cast<double>(dim));
  Vector polar = Vector::Zero(dim);
  polar(dim - 1) = 1.0;
  d.standalone["good"] = {5.0 * (away + polar), "ADJ"};
  d.standalone["bad"] = {5.0 * (away - polar), "ADJ"};
  int id = 0;
  for (int i = 0; i < per_class; ++i) {
    for (std::size_t a = 0; a < words.size(); ++a) {
      // The seed word leads so every class keeps its anchor in the corpus.
      const std::string& w = i == 0 ? words[a][0] : words[a][static_cast<std::size_t>(pick(gen))];
      const std::string sid = "s" + std::to_string(id++);
      d.corpus.push_back({sid, w, {{w, "NOUN", 0}}});
      Matrix m(1, dim);
      for (Index c = 0; c < dim; ++c) m(0, c) = noise(gen);
      m(0, static_cast<Index>(a)) += separation;
      d.embeddings.sentences.push_back(m);
      d.gold.push_back({sid, {{words[a][0], "positive"}}});
    }
  }
  return d;
}

// Short parsed reviews: "the NOUN was ADJ" and, for some sentences, a second
// clause "but the NOUN was ADJ" attached to the first adjective. Nouns of
// aspect a sit at e_a, positive adjectives at e_3, negative at e_4, function
// words at e_5, all with unit noise.
inline SyntheticData synthetic_reviews(std::mt19937_64& gen, int sentences, Index dim = 12,
                                       double compound_share = 0.3) {
  static const std::vector<std::vector<std::string>> nouns = {
      {"food", "pizza", "pasta"}, {"service", "waiter", "staff"}, {"ambience", "music", "decor"}};
  static const std::vector<std::vector<std::string>> adjs = {{"good", "great", "tasty"},
                                                             {"bad", "awful", "rude"}};
  static const std::vector<std::string> polarity = {"positive", "negative"};
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_int_distribution<int> three(0, 2), two(0, 1);
  std::bernoulli_distribution compound(compound_share);
  SyntheticData d;
  d.embeddings.dim = dim;
  for (const auto& n : nouns) d.seeds.aspect_seeds.emplace_back(n[0], n[0]);
  d.seeds.sentiment_seeds = {{"positive", "good"}, {"negative", "bad"}};

  auto row = [&](Index axis) {
    Vector v(dim);
    for (Index c = 0; c < dim; ++c) v(c) = noise(gen);
    v(axis) += 10.0;
    return v;
  };
  for (int s = 0; s < sentences; ++s) {
    TokenizedSentence ts;
    ts.id = "r" + std::to_string(s);
    std::vector<Vector> vecs;
    std::set<LabelTuple> labels;
    auto clause = [&](int base, int head_of_adj) {
      const int a = three(gen), p = two(gen);
      const std::string& n = nouns[static_cast<std::size_t>(a)][static_cast<std::size_t>(three(gen))];
      const std::string& j = adjs[static_cast<std::size_t>(p)][static_cast<std::size_t>(three(gen))];
      ts.tokens.push_back({"the", "DET", base + 2});
      ts.tokens.push_back({n, "NOUN", base + 4});
      ts.tokens.push_back({"was", "AUX", base + 4});
      ts.tokens.push_back({j, "ADJ", head_of_adj});
      vecs.push_back(row(5));
      vecs.push_back(row(a));
      vecs.push_back(row(5));
      vecs.push_back(row(3 + p));
      labels.insert({nouns[static_cast<std::size_t>(a)][0], polarity[static_cast<std::size_t>(p)]});
    };
    clause(0, 0);
    if (compound(gen)) {
      ts.tokens.push_back({"but", "CCONJ", 9});
      vecs.push_back(row(5));
      clause(5, 4);
    }
    for (const auto& t : ts.tokens) ts.text += (ts.text.empty() ? "" : " ") + t.form;
    Matrix m(static_cast<Index>(vecs.size()), dim);
    for (std::size_t i = 0; i < vecs.size(); ++i) m.row(static_cast<Index>(i)) = vecs[i].transpose();
    d.corpus.push_back(std::move(ts));
    d.embeddings.sentences.push_back(std::move(m));
    d.gold.push_back({d.corpus.back().id, std::move(labels)});
  }
  return d;
}

// ---------------------------------------------------------------------------
// Worked multi-label example

// "The food was good, but it's not worth the wait or the lousy service",
// parsed the way a UD parser attaches it: food -> good, wait -> worth,
// service -> wait (conj).
inline TokenizedSentence wait_review_sentence() {
  TokenizedSentence s;
  s.id = "wait-review";
  s.text = "The food was good, but it's not worth the wait or the lousy service";
  s.tokens = {{"The", "DET", 2},     {"food", "NOUN", 4},   {"was", "AUX", 4},
              {"good", "ADJ", 0},    {",", "PUNCT", 10},    {"but", "CCONJ", 10},
              {"it", "PRON", 10},    {"'s", "AUX", 10},     {"not", "PART", 10},
              {"worth", "ADJ", 4},   {"the", "DET", 12},    {"wait", "NOUN", 10},
              {"or", "CCONJ", 16},   {"the", "DET", 16},    {"lousy", "ADJ", 16},
              {"service", "NOUN", 12}};
  return s;
}

// Engineered 6-d vectors: aspect classes food = e0, service = e1; sentiment
// classes positive = e2, negative = e3. Word vectors are unit length with the
// stated cosines: food->food .9, service->service .8, wait->service .3,
// good->positive, worth->positive, wait->negative.
struct WaitReviewSetup {
  TokenizedSentence sentence;
  Vocabulary vocab;
  std::vector<ClassRep> aspects;
  std::vector<ClassRep> sentiments;
  Matrix token_vectors;
};

inline WaitReviewSetup wait_review_setup() {
  WaitReviewSetup f;
  f.sentence = wait_review_sentence();
  auto e = [](Index i) {
    Vector v = Vector::Zero(6);
    v(i) = 1.0;
    return v;
  };
  f.aspects = {{"food", "food", {"food"}, e(0)}, {"service", "service", {"service"}, e(1)}};
  f.sentiments = {{"negative", "bad", {"bad"}, e(3)}, {"positive", "good", {"good"}, e(2)}};
  f.vocab = Vocabulary(6, 1);
  auto add = [&](const std::string& w, Vector v) {
    StaticWordRep r;
    r.vector = std::move(v);
    r.occurrence_count = 1;
    f.vocab.insert(w, std::move(r));
  };
  add("food", 0.9 * e(0) + std::sqrt(1 - 0.81) * e(4));
  add("service", 0.8 * e(1) + 0.6 * e(4));
  add("wait", 0.3 * e(1) + 0.5 * e(3) + std::sqrt(1 - 0.09 - 0.25) * e(5));
  add("good", 0.95 * e(2) + std::sqrt(1 - 0.9025) * e(5));
  add("worth", 0.7 * e(2) + std::sqrt(1 - 0.49) * e(4));
  add("lousy", 0.9 * e(3) + std::sqrt(1 - 0.81) * e(5));
  add("the", e(5));
  f.token_vectors = Matrix::Zero(static_cast<Index>(f.sentence.tokens.size()), 6);
  return f;
}

}  // namespace axabsa::testing

#endif  // AXABSA_TESTS_FIXTURES_HPP_
