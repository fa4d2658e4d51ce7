// Automatic class-representative word selection.
//
// For each class, candidate words (vocabulary words whose dominant POS is the
// target tag) are ranked by cosine to the class vector. A class keeps the part
// of its top-T list that no other class has in its own top-T, orders it by
// corpus occurrence count and picks the first word.

#ifndef AXABSA_SEED_SELECTION_HPP_
#define AXABSA_SEED_SELECTION_HPP_

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "axabsa/common.hpp"
#include "axabsa/corpus_io.hpp"
#include "axabsa/representation.hpp"

namespace axabsa {

inline constexpr std::size_t kDefaultTopT = 10;

// Whether "occurrences" means token occurrences or number of sentences.
enum class OccurrenceMode { kTokens, kSentences };

struct AcssaClassTrace {
  std::string class_name;
  std::string original;  // the seed word the class started with
  std::vector<std::string> source;  // this class's top-T, cosine order
  std::vector<std::string> target;  // union of the other classes' top-T
  std::vector<std::string> inter;   // source minus target, cosine order
  std::vector<std::string> goal;    // inter sorted by occurrence
  std::vector<double> goal_counts;
  std::string selected;
  bool fallback = false;  // inter was empty; selected = original
};

struct AcssaTrace {
  std::string target_pos;
  std::size_t top_t = kDefaultTopT;
  std::size_t candidate_count = 0;  // |uV|
  std::vector<AcssaClassTrace> classes;
};

struct AcssaResult {
  SeedList selection;  // class name -> selected word, class order preserved
  AcssaTrace trace;
};

// Selection over precomputed similarities. `similarity(i, w)` is the cosine
// of class i to candidate w; `counts[w]` its occurrence count.
//
// Ranking ties (equal cosine) fall back to lexicographic word order; goal
// ordering ties fall back to higher cosine, then lexicographic order.
inline AcssaResult acssa_rank_select(const SeedList& classes,
                                     std::span<const std::string> candidates,
                                     std::span<const double> counts, const Matrix& similarity,
                                     std::size_t top_t) {
  if (top_t < 1) throw std::invalid_argument("acssa: top_t must be >= 1");
  const std::size_t n_classes = classes.size();
  const std::size_t n_words = candidates.size();
  if (counts.size() != n_words || static_cast<std::size_t>(similarity.rows()) != n_classes ||
      static_cast<std::size_t>(similarity.cols()) != n_words)
    throw std::invalid_argument("acssa: inconsistent input sizes");

  // Every class's ranked top-T, built before any selection.
  std::vector<std::vector<std::size_t>> top(n_classes);
  for (std::size_t i = 0; i < n_classes; ++i) {
    std::vector<std::size_t> order(n_words);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto row = static_cast<Index>(i);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double sa = similarity(row, static_cast<Index>(a));
      const double sb = similarity(row, static_cast<Index>(b));
      if (sa != sb) return sa > sb;
      return candidates[a] < candidates[b];
    });
    order.resize(std::min(top_t, n_words));
    top[i] = std::move(order);
  }

  AcssaResult out;
  out.trace.top_t = top_t;
  out.trace.candidate_count = n_words;
  for (std::size_t i = 0; i < n_classes; ++i) {
    AcssaClassTrace ct;
    ct.class_name = classes[i].first;
    ct.original = classes[i].second;

    std::set<std::size_t> target;
    for (std::size_t j = 0; j < n_classes; ++j)
      if (j != i) target.insert(top[j].begin(), top[j].end());

    std::vector<std::size_t> inter;
    for (std::size_t w : top[i]) {
      ct.source.push_back(candidates[w]);
      if (!target.contains(w)) inter.push_back(w);
    }
    for (std::size_t w : target) ct.target.push_back(candidates[w]);
    std::sort(ct.target.begin(), ct.target.end());
    for (std::size_t w : inter) ct.inter.push_back(candidates[w]);

    const auto row = static_cast<Index>(i);
    std::stable_sort(inter.begin(), inter.end(), [&](std::size_t a, std::size_t b) {
      if (counts[a] != counts[b]) return counts[a] > counts[b];
      const double sa = similarity(row, static_cast<Index>(a));
      const double sb = similarity(row, static_cast<Index>(b));
      if (sa != sb) return sa > sb;
      return candidates[a] < candidates[b];
    });
    for (std::size_t w : inter) {
      ct.goal.push_back(candidates[w]);
      ct.goal_counts.push_back(counts[w]);
    }

    if (ct.goal.empty()) {
      ct.selected = ct.original;
      ct.fallback = true;
    } else {
      ct.selected = ct.goal.front();
    }
    out.selection.emplace_back(ct.class_name, ct.selected);
    out.trace.classes.push_back(std::move(ct));
  }
  return out;
}

struct AcssaInput {
  std::string target_pos;  // NOUN for aspects, ADJ for sentiments
  const Vocabulary* vocab = nullptr;
  SeedList classes;  // class name -> current seed word (the class vector source)
  std::size_t top_t = kDefaultTopT;
  OccurrenceMode occurrences = OccurrenceMode::kTokens;
};

// Candidates are vocabulary words occurring in the corpus whose dominant POS
// equals the target tag. Class vectors are the static reps of the seeds.
inline AcssaResult acssa_select(const AcssaInput& input) {
  if (input.vocab == nullptr) throw std::invalid_argument("acssa: no vocabulary");
  const Vocabulary& vocab = *input.vocab;

  std::vector<std::string> words;
  std::vector<double> counts;
  std::vector<const Vector*> reps;
  for (const auto& [word, rep] : vocab.entries()) {
    if (rep.injected || rep.dominant_pos != input.target_pos) continue;
    words.push_back(word);
    counts.push_back(static_cast<double>(input.occurrences == OccurrenceMode::kTokens
                                             ? rep.occurrence_count
                                             : rep.sentence_count));
    reps.push_back(&rep.vector);
  }
  if (words.empty())
    throw ValidationError("acssa: no vocabulary word has dominant POS '" + input.target_pos + "'");

  Matrix sim(static_cast<Index>(input.classes.size()), static_cast<Index>(words.size()));
  for (std::size_t i = 0; i < input.classes.size(); ++i) {
    const Vector& cv = vocab.at(input.classes[i].second).vector;
    for (std::size_t w = 0; w < words.size(); ++w)
      sim(static_cast<Index>(i), static_cast<Index>(w)) = cosine(cv, *reps[w]);
  }
  AcssaResult out = acssa_rank_select(input.classes, words, counts, sim, input.top_t);
  out.trace.target_pos = input.target_pos;
  return out;
}

inline nlohmann::ordered_json to_json(const AcssaTrace& trace) {
  nlohmann::ordered_json classes = nlohmann::ordered_json::array();
  for (const auto& c : trace.classes) {
    classes.push_back({{"class", c.class_name},
                       {"original", c.original},
                       {"source", c.source},
                       {"target", c.target},
                       {"inter", c.inter},
                       {"goal", c.goal},
                       {"goal_counts", c.goal_counts},
                       {"selected", c.selected},
                       {"fallback", c.fallback}});
  }
  return {{"target_pos", trace.target_pos},
          {"top_t", trace.top_t},
          {"candidates", trace.candidate_count},
          {"classes", std::move(classes)}};
}

}  // namespace axabsa

#endif  // AXABSA_SEED_SELECTION_HPP_
