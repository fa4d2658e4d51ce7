// Multi-label generation from dependency pairs.
//
// Candidate (aspect word, sentiment word) pairs come from dependency edges
// whose dependent is a noun. A pair survives when its aspect word is close
// enough to some aspect class; surviving pairs map to (closest aspect class,
// closest sentiment class). Sentences with fewer than two surviving pairs
// take the clustering prediction instead.

#ifndef AXABSA_MULTILABEL_HPP_
#define AXABSA_MULTILABEL_HPP_

#include <algorithm>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "axabsa/common.hpp"
#include "axabsa/corpus_io.hpp"
#include "axabsa/representation.hpp"

namespace axabsa {

inline constexpr double kDefaultThreshold = 0.45;

struct PPair {
  std::size_t aspect_index = 0;     // 0-based token index of the noun dependent
  std::size_t sentiment_index = 0;  // 0-based token index of its governor
  std::string aspect_word;
  std::string sentiment_word;

  friend bool operator==(const PPair&, const PPair&) = default;
};

inline std::vector<PPair> extract_ppairs(const TokenizedSentence& sentence) {
  std::vector<PPair> pairs;
  for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
    const Token& t = sentence.tokens[i];
    if (t.head == 0 || t.upos != "NOUN") continue;
    const auto g = static_cast<std::size_t>(t.head - 1);
    PPair p{i, g, t.form, sentence.tokens[g].form};
    if (std::find(pairs.begin(), pairs.end(), p) == pairs.end()) pairs.push_back(std::move(p));
  }
  return pairs;
}

// Rows are pairs; aspect-side columns are aspect classes, sentiment-side
// columns are sentiment classes.
struct PairScores {
  Matrix aspect;
  Matrix sentiment;
};

// Word vectors are static reps; a word missing from the vocabulary uses its
// contextual vector from `token_vectors` (row = token index).
inline PairScores score_words(std::span<const PPair> pairs, const TokenizedSentence& sentence,
                              const Matrix& token_vectors, const Vocabulary& vocab,
                              std::span<const ClassRep> aspect_reps,
                              std::span<const ClassRep> sentiment_reps) {
  auto word_vector = [&](std::size_t index) -> Vector {
    if (const auto* rep = vocab.find(sentence.tokens[index].form)) return rep->vector;
    return token_vectors.row(static_cast<Index>(index)).transpose();
  };
  PairScores s;
  s.aspect.resize(static_cast<Index>(pairs.size()), static_cast<Index>(aspect_reps.size()));
  s.sentiment.resize(static_cast<Index>(pairs.size()), static_cast<Index>(sentiment_reps.size()));
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto r = static_cast<Index>(p);
    const Vector a = word_vector(pairs[p].aspect_index);
    const Vector o = word_vector(pairs[p].sentiment_index);
    for (std::size_t c = 0; c < aspect_reps.size(); ++c)
      s.aspect(r, static_cast<Index>(c)) = cosine(a, aspect_reps[c].vector);
    for (std::size_t c = 0; c < sentiment_reps.size(); ++c)
      s.sentiment(r, static_cast<Index>(c)) = cosine(o, sentiment_reps[c].vector);
  }
  return s;
}

struct FPPair {
  PPair pair;
  std::size_t aspect_class = 0;
  double aspect_score = 0.0;
  std::size_t sentiment_class = 0;
  double sentiment_score = 0.0;
};

struct GeneratorOptions {
  double threshold = kDefaultThreshold;
  // Use a lone surviving pair instead of falling back to clustering.
  bool use_single_fppair = false;
};

struct GeneratorResult {
  std::set<LabelTuple> labels;
  std::vector<FPPair> fppairs;
  bool used_fallback = false;
};

inline GeneratorResult generate_labels(std::span<const PPair> pairs, const PairScores& scores,
                                       std::span<const std::string> aspect_names,
                                       std::span<const std::string> sentiment_names,
                                       const LabelTuple& clustering_fallback,
                                       const GeneratorOptions& options = {}) {
  GeneratorResult out;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto r = static_cast<Index>(p);
    if (scores.aspect.cols() == 0 || scores.sentiment.cols() == 0) break;
    Index a = 0;
    Index s = 0;
    for (Index c = 1; c < scores.aspect.cols(); ++c)
      if (scores.aspect(r, c) > scores.aspect(r, a)) a = c;
    for (Index c = 1; c < scores.sentiment.cols(); ++c)
      if (scores.sentiment(r, c) > scores.sentiment(r, s)) s = c;
    if (!(scores.aspect(r, a) > options.threshold)) continue;
    out.fppairs.push_back({pairs[p], static_cast<std::size_t>(a), scores.aspect(r, a),
                           static_cast<std::size_t>(s), scores.sentiment(r, s)});
  }
  const std::size_t needed = options.use_single_fppair ? 1 : 2;
  if (out.fppairs.size() < needed) {
    out.labels = {clustering_fallback};
    out.used_fallback = true;
    return out;
  }
  for (const auto& f : out.fppairs)
    out.labels.insert({aspect_names[f.aspect_class], sentiment_names[f.sentiment_class]});
  return out;
}

inline nlohmann::ordered_json fppair_debug_record(const std::string& sentence_id,
                                                  const GeneratorResult& result,
                                                  std::span<const std::string> aspect_names,
                                                  std::span<const std::string> sentiment_names) {
  nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
  for (const auto& f : result.fppairs) {
    pairs.push_back({{"aspect_word", f.pair.aspect_word},
                     {"sentiment_word", f.pair.sentiment_word},
                     {"aspect_class", aspect_names[f.aspect_class]},
                     {"aspect_score", f.aspect_score},
                     {"sentiment_class", sentiment_names[f.sentiment_class]},
                     {"sentiment_score", f.sentiment_score}});
  }
  nlohmann::ordered_json labels = nlohmann::ordered_json::array();
  for (const auto& t : result.labels) labels.push_back({t.aspect, t.sentiment});
  return {{"id", sentence_id},
          {"fppairs", std::move(pairs)},
          {"fallback", result.used_fallback},
          {"labels", std::move(labels)}};
}

}  // namespace axabsa

#endif  // AXABSA_MULTILABEL_HPP_
