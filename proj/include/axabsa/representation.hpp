// Vocabulary with static word representations, seed-anchored class
// representations and class-guided sentence representations.

#ifndef AXABSA_REPRESENTATION_HPP_
#define AXABSA_REPRESENTATION_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "axabsa/common.hpp"
#include "axabsa/corpus_io.hpp"
#include "axabsa/parallel.hpp"

namespace axabsa {

inline constexpr std::size_t kDefaultMinCount = 3;
inline constexpr std::size_t kDefaultMaxExpansion = 100;

// Majority tag; ties resolve NOUN > VERB > ADJ > remaining tags alphabetically.
inline std::string dominant_tag(const std::map<std::string, std::size_t>& tag_counts) {
  auto rank = [](const std::string& tag) {
    if (tag == "NOUN") return 0;
    if (tag == "VERB") return 1;
    if (tag == "ADJ") return 2;
    return 3;
  };
  std::string best;
  std::size_t best_count = 0;
  for (const auto& [tag, count] : tag_counts) {  // alphabetical
    if (best.empty() || count > best_count ||
        (count == best_count && rank(tag) < rank(best))) {
      best = tag;
      best_count = count;
    }
  }
  return best;
}

// Dominant UPOS of a word over its (case-folded) corpus occurrences. Empty
// string when the word does not occur.
inline std::string dominant_pos(std::string_view word, std::span<const TokenizedSentence> corpus) {
  const std::string key = to_lower(word);
  std::map<std::string, std::size_t> counts;
  for (const auto& s : corpus)
    for (const auto& t : s.tokens)
      if (to_lower(t.form) == key) ++counts[t.upos];
  return dominant_tag(counts);
}

struct StaticWordRep {
  Vector vector;
  std::size_t occurrence_count = 0;   // token occurrences
  std::size_t sentence_count = 0;     // sentences containing the word
  std::map<std::string, std::size_t> tag_counts;
  std::string dominant_pos;
  bool injected = false;  // seed absent from the corpus, vector supplied externally
  bool forced = false;    // seed kept despite occurring fewer than min_count times
};

class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(Index dim, std::size_t min_count) : dim_(dim), min_count_(min_count) {}

  Index dim() const { return dim_; }
  std::size_t min_count() const { return min_count_; }
  std::size_t size() const { return entries_.size(); }

  const std::map<std::string, StaticWordRep>& entries() const { return entries_; }

  const StaticWordRep* find(std::string_view word) const {
    auto it = entries_.find(to_lower(word));
    return it == entries_.end() ? nullptr : &it->second;
  }

  bool contains(std::string_view word) const { return find(word) != nullptr; }

  const StaticWordRep& at(std::string_view word) const {
    if (const auto* rep = find(word)) return *rep;
    throw ValidationError("word '" + std::string(word) + "' is not in the vocabulary");
  }

  void insert(std::string word, StaticWordRep rep) {
    if (dim_ == 0) dim_ = rep.vector.size();
    if (rep.vector.size() != dim_)
      throw std::invalid_argument("vocabulary entry '" + word + "' has wrong dimension");
    entries_.insert_or_assign(to_lower(word), std::move(rep));
  }

 private:
  Index dim_ = 0;
  std::size_t min_count_ = 1;
  std::map<std::string, StaticWordRep> entries_;
};

// Static representation of each word: the mean of its contextual vectors over
// all case-folded corpus occurrences. Sums run in corpus order, so the result
// is reproducible bit for bit. Seed words are always kept; seeds absent from
// the corpus take their vector from `standalone`.
inline Vocabulary build_vocabulary(std::span<const TokenizedSentence> corpus,
                                   const TokenEmbeddingStore& embeddings,
                                   std::size_t min_count, const SeedConfig& seeds,
                                   const StandaloneVectors& standalone = {}) {
  if (min_count < 1) throw ValidationError("min_count must be >= 1");
  if (embeddings.sentences.size() != corpus.size())
    throw ValidationError("embeddings are not aligned with the corpus");

  std::map<std::string, StaticWordRep> acc;
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    const auto& s = corpus[k];
    const Matrix& z = embeddings.sentences[k];
    if (static_cast<std::size_t>(z.rows()) != s.tokens.size())
      throw ValidationError("embeddings row-count mismatch at sentence '" + s.id + "'");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      const std::string key = to_lower(s.tokens[i].form);
      auto& e = acc[key];
      if (e.occurrence_count == 0) e.vector = Vector::Zero(embeddings.dim);
      e.vector += z.row(static_cast<Index>(i)).transpose();
      ++e.occurrence_count;
      ++e.tag_counts[s.tokens[i].upos];
      if (seen.insert(key).second) ++e.sentence_count;
    }
  }

  std::set<std::string> seed_words;
  for (const auto& [name, word] : seeds.aspect_seeds) seed_words.insert(to_lower(word));
  for (const auto& [name, word] : seeds.sentiment_seeds) seed_words.insert(to_lower(word));

  Vocabulary vocab(embeddings.dim, min_count);
  for (auto& [word, e] : acc) {
    const bool is_seed = seed_words.contains(word);
    if (e.occurrence_count < min_count && !is_seed) continue;
    e.vector /= static_cast<double>(e.occurrence_count);
    e.dominant_pos = dominant_tag(e.tag_counts);
    e.forced = e.occurrence_count < min_count;
    vocab.insert(word, std::move(e));
  }

  for (const auto& word : seed_words) {
    if (vocab.contains(word)) continue;
    auto it = standalone.find(word);
    if (it == standalone.end())
      throw ValidationError("seed word '" + word +
                            "' does not occur in the corpus and no standalone vector was "
                            "provided for it");
    if (it->second.vector.size() != embeddings.dim)
      throw ValidationError("standalone vector for '" + word + "' has dimension " +
                            std::to_string(it->second.vector.size()) + ", expected " +
                            std::to_string(embeddings.dim));
    StaticWordRep rep;
    rep.vector = it->second.vector;
    rep.dominant_pos = it->second.upos;
    rep.injected = true;
    vocab.insert(word, std::move(rep));
  }
  return vocab;
}

// Cosine similarity; 0 when either vector is zero.
inline double cosine(const Vector& u, const Vector& v) {
  if (u.size() != v.size())
    throw std::invalid_argument("cosine: dimension mismatch (" + std::to_string(u.size()) +
                                " vs " + std::to_string(v.size()) + ")");
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
}

struct ClassRep {
  std::string class_name;
  std::string seed_word;
  std::vector<std::string> expansion;  // expansion[0] is the seed
  Vector vector;
};

// Grows a class's word list greedily. Starting from the seed's static rep, the
// vocabulary word closest (cosine) to the current rep is appended and the rep
// becomes the mean of the list. Growth stops at `max_expansion` words, when
// no candidate remains, or when the best candidate is at least as similar to
// another class's seed rep as to this class's current rep. Other seeds are
// never candidates.
inline ClassRep expand_class(std::string_view class_name, std::string_view seed,
                             const Vocabulary& vocab, std::span<const std::string> all_seeds,
                             std::size_t max_expansion = kDefaultMaxExpansion) {
  if (max_expansion < 1) throw std::invalid_argument("max_expansion must be >= 1");
  const std::string seed_key = to_lower(seed);
  const auto* seed_rep = vocab.find(seed_key);
  if (seed_rep == nullptr)
    throw ValidationError("seed '" + seed_key + "' for class '" + std::string(class_name) +
                          "' is not in the vocabulary");

  ClassRep out{std::string(class_name), seed_key, {seed_key}, seed_rep->vector};

  std::set<std::string> excluded{seed_key};
  std::vector<Vector> others;
  for (const auto& s : all_seeds) {
    const std::string key = to_lower(s);
    excluded.insert(key);
    if (key == seed_key) continue;
    others.push_back(vocab.at(key).vector);
  }

  std::vector<const std::string*> words;
  std::vector<const Vector*> reps;
  for (const auto& [word, rep] : vocab.entries()) {
    if (excluded.contains(word)) continue;
    words.push_back(&word);
    reps.push_back(&rep.vector);
  }
  std::vector<bool> used(words.size(), false);
  Vector sum = seed_rep->vector;

  while (out.expansion.size() < max_expansion) {
    std::optional<std::size_t> best;
    double best_sim = -std::numeric_limits<double>::infinity();
    for (std::size_t w = 0; w < words.size(); ++w) {
      if (used[w]) continue;
      const double sim = cosine(*reps[w], out.vector);
      if (sim > best_sim) {
        best_sim = sim;
        best = w;
      }
    }
    if (!best) break;
    const bool conflicts = std::any_of(others.begin(), others.end(), [&](const Vector& o) {
      return cosine(*reps[*best], o) >= best_sim;
    });
    if (conflicts) break;
    used[*best] = true;
    out.expansion.push_back(*words[*best]);
    sum += *reps[*best];
    out.vector = sum / static_cast<double>(out.expansion.size());
  }
  return out;
}

// Expands every class of one seed list against the others in the same list.
inline std::vector<ClassRep> expand_classes(const SeedList& seeds, const Vocabulary& vocab,
                                            std::size_t max_expansion = kDefaultMaxExpansion) {
  std::vector<std::string> all;
  for (const auto& [name, word] : seeds) all.push_back(word);
  std::vector<ClassRep> out;
  for (const auto& [name, word] : seeds)
    out.push_back(expand_class(name, word, vocab, all, max_expansion));
  return out;
}

struct DocRep {
  std::string sentence_id;
  Vector vector;
  Vector weights;  // attention weight per token
};

// Attention over a sentence's tokens: a token's score is its best cosine to any
// class rep, weights are softmax(score / temperature), and the sentence rep is
// the weighted sum of its token vectors.
inline std::vector<DocRep> document_reps(std::span<const TokenizedSentence> corpus,
                                         const TokenEmbeddingStore& embeddings,
                                         std::span<const ClassRep> class_reps,
                                         double temperature = 1.0, unsigned threads = 1) {
  if (class_reps.empty()) throw std::invalid_argument("document_reps: no class reps");
  if (!(temperature > 0.0)) throw std::invalid_argument("document_reps: temperature must be > 0");
  std::vector<DocRep> out(corpus.size());
  parallel_for(corpus.size(), threads, [&](std::size_t k) {
    const Matrix& z = embeddings.sentences[k];
    Vector score(z.rows());
    for (Index t = 0; t < z.rows(); ++t) {
      const Vector token = z.row(t).transpose();
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& c : class_reps) best = std::max(best, cosine(token, c.vector));
      score(t) = best / temperature;
    }
    Vector w = (score.array() - score.maxCoeff()).exp().matrix();
    w /= w.sum();
    out[k] = DocRep{corpus[k].id, z.transpose() * w, std::move(w)};
  });
  return out;
}

inline Matrix stack_rows(std::span<const DocRep> docs) {
  if (docs.empty()) return {};
  Matrix m(static_cast<Index>(docs.size()), docs.front().vector.size());
  for (std::size_t i = 0; i < docs.size(); ++i) m.row(static_cast<Index>(i)) = docs[i].vector;
  return m;
}

inline Matrix stack_rows(std::span<const ClassRep> classes) {
  if (classes.empty()) return {};
  Matrix m(static_cast<Index>(classes.size()), classes.front().vector.size());
  for (std::size_t i = 0; i < classes.size(); ++i)
    m.row(static_cast<Index>(i)) = classes[i].vector;
  return m;
}

}  // namespace axabsa

#endif  // AXABSA_REPRESENTATION_HPP_
