// File formats consumed and produced by the core.
//
//   corpus JSONL     {"id": str, "text": str, "tokens": [{"form", "upos", "head"}, ...]}
//   AXEB v1 binary   per-token contextual vectors aligned with the corpus
//   seeds JSON       {"aspects": {class: seed}, "sentiments": {polarity: seed}}
//   labels JSONL     {"id": str, "labels": [[aspect, sentiment], ...]}
//   standalone JSON  {word: {"upos": str, "vector": [float, ...]}}
//
// AXEB v1 layout, all integers and floats little-endian:
//   "AXEB" magic, u16 version (=1), u32 dim, u32 n_sentences,
//   then per sentence: u32 n_tokens, n_tokens * dim f32 values (row-major).

#ifndef AXABSA_CORPUS_IO_HPP_
#define AXABSA_CORPUS_IO_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"

#include "axabsa/common.hpp"

namespace axabsa {

struct Token {
  std::string form;
  std::string upos;
  int head = 0;  // 1-based governor index, 0 = root

  friend bool operator==(const Token&, const Token&) = default;
};

struct TokenizedSentence {
  std::string id;
  std::string text;
  std::vector<Token> tokens;

  friend bool operator==(const TokenizedSentence&, const TokenizedSentence&) = default;
};

using Corpus = std::vector<TokenizedSentence>;

struct TokenEmbeddingStore {
  Index dim = 0;
  std::vector<Matrix> sentences;  // row i = vector of token i
};

// Class name -> seed word, in file order. File order is the class order used
// for centroid rows and output labels.
using SeedList = std::vector<std::pair<std::string, std::string>>;

struct SeedConfig {
  SeedList aspect_seeds;
  SeedList sentiment_seeds;

  friend bool operator==(const SeedConfig&, const SeedConfig&) = default;
};

struct PredictionRecord {
  std::string id;
  std::set<LabelTuple> labels;

  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

// A vector for a word that may not occur in the corpus, produced by encoding
// the word on its own.
struct StandaloneVector {
  Vector vector;
  std::string upos;
};

using StandaloneVectors = std::map<std::string, StandaloneVector>;

namespace detail {

inline std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  return in;
}

inline std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

inline void check_written(const std::ofstream& out, const std::string& path) {
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace detail

// Throws ValidationError naming the sentence when an invariant is violated.
inline void validate_sentence(const TokenizedSentence& s) {
  const std::string where = "sentence '" + s.id + "': ";
  if (s.id.empty()) throw ValidationError("sentence with empty id");
  if (s.tokens.empty()) throw ValidationError(where + "token list is empty");
  const int n = static_cast<int>(s.tokens.size());
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    const Token& t = s.tokens[i];
    if (t.head < 0 || t.head > n)
      throw ValidationError(where + "head out of range (token " + std::to_string(i + 1) +
                            " has head " + std::to_string(t.head) + ", n = " +
                            std::to_string(n) + ")");
    if (t.head == i + 1)
      throw ValidationError(where + "token " + std::to_string(i + 1) + " is its own head");
    if (!is_upos(t.upos))
      throw ValidationError(where + "unknown UPOS tag '" + t.upos + "'");
    if (t.head == 0) ++roots;
  }
  if (roots != 1)
    throw ValidationError(where + "expected exactly one root, found " + std::to_string(roots));
}

inline TokenizedSentence sentence_from_json(const nlohmann::json& j) {
  TokenizedSentence s;
  s.id = j.at("id").get<std::string>();
  s.text = j.value("text", std::string{});
  for (const auto& tj : j.at("tokens")) {
    Token t;
    t.form = tj.at("form").get<std::string>();
    t.upos = tj.at("upos").get<std::string>();
    t.head = tj.at("head").get<int>();
    s.tokens.push_back(std::move(t));
  }
  return s;
}

inline nlohmann::ordered_json sentence_to_json(const TokenizedSentence& s) {
  nlohmann::ordered_json tokens = nlohmann::ordered_json::array();
  for (const auto& t : s.tokens)
    tokens.push_back({{"form", t.form}, {"upos", t.upos}, {"head", t.head}});
  return {{"id", s.id}, {"text", s.text}, {"tokens", std::move(tokens)}};
}

inline Corpus read_corpus(const std::string& path) {
  auto in = detail::open_in(path);
  Corpus corpus;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    TokenizedSentence s;
    try {
      s = sentence_from_json(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": malformed record: " +
                            e.what());
    }
    try {
      validate_sentence(s);
    } catch (const ValidationError& e) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!ids.insert(s.id).second)
      throw ValidationError(path + ":" + std::to_string(line_no) + ": duplicate id '" + s.id +
                            "'");
    corpus.push_back(std::move(s));
  }
  return corpus;
}

inline void write_corpus(const std::string& path, std::span<const TokenizedSentence> corpus) {
  auto out = detail::open_out(path);
  for (const auto& s : corpus) out << sentence_to_json(s).dump() << '\n';
  detail::check_written(out, path);
}

// ---------------------------------------------------------------------------
// AXEB v1

inline constexpr std::array<unsigned char, 4> kAxebMagic = {0x41, 0x58, 0x45, 0x42};
inline constexpr std::uint16_t kAxebVersion = 1;

namespace detail {

class LeReader {
 public:
  LeReader(std::istream& in, std::string path) : in_(in), path_(std::move(path)) {}

  void bytes(void* dst, std::size_t n) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n)
      throw ValidationError(path_ + ": truncated embedding file");
  }

  template <typename UInt>
  UInt uint() {
    std::array<unsigned char, sizeof(UInt)> b{};
    bytes(b.data(), b.size());
    UInt v = 0;
    for (std::size_t i = 0; i < b.size(); ++i) v |= static_cast<UInt>(b[i]) << (8 * i);
    return v;
  }

  float f32() {
    const std::uint32_t bits = uint<std::uint32_t>();
    float f;
    std::memcpy(&f, &bits, sizeof f);
    return f;
  }

 private:
  std::istream& in_;
  std::string path_;
};

template <typename UInt>
void put_uint(std::ostream& out, UInt v) {
  std::array<char, sizeof(UInt)> b{};
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b.data(), b.size());
}

inline void put_f32(std::ostream& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, sizeof bits);
  put_uint(out, bits);
}

}  // namespace detail

// Reads an AXEB file and checks it against the companion corpus. Values are
// widened to double.
inline TokenEmbeddingStore read_embeddings(const std::string& path,
                                           std::span<const TokenizedSentence> corpus) {
  auto in = detail::open_in(path, std::ios::binary);
  detail::LeReader rd(in, path);
  std::array<unsigned char, 4> magic{};
  try {
    rd.bytes(magic.data(), magic.size());
  } catch (const ValidationError&) {
    throw ValidationError(path + ": unrecognized format (file too short for magic)");
  }
  if (magic != kAxebMagic) throw ValidationError(path + ": unrecognized format (bad magic)");
  const auto version = rd.uint<std::uint16_t>();
  if (version != kAxebVersion)
    throw ValidationError(path + ": unsupported AXEB version " + std::to_string(version));
  const auto dim = rd.uint<std::uint32_t>();
  if (dim == 0) throw ValidationError(path + ": dim = 0");
  const auto n_sentences = rd.uint<std::uint32_t>();
  if (n_sentences != corpus.size())
    throw ValidationError(path + ": sentence count " + std::to_string(n_sentences) +
                          " does not match corpus (" + std::to_string(corpus.size()) + ")");

  TokenEmbeddingStore store;
  store.dim = dim;
  store.sentences.reserve(n_sentences);
  for (std::uint32_t k = 0; k < n_sentences; ++k) {
    const auto n_tokens = rd.uint<std::uint32_t>();
    if (n_tokens != corpus[k].tokens.size())
      throw ValidationError(path + ": row-count mismatch at sentence " + std::to_string(k) +
                            " ('" + corpus[k].id + "'): " + std::to_string(n_tokens) +
                            " vectors for " + std::to_string(corpus[k].tokens.size()) +
                            " tokens");
    Matrix m(n_tokens, dim);
    for (std::uint32_t r = 0; r < n_tokens; ++r) {
      for (std::uint32_t c = 0; c < dim; ++c) {
        const float v = rd.f32();
        if (!std::isfinite(v))
          throw ValidationError(path + ": NaN/Inf detected in sentence '" + corpus[k].id +
                                "' token " + std::to_string(r + 1));
        m(r, c) = static_cast<double>(v);
      }
    }
    store.sentences.push_back(std::move(m));
  }
  if (in.peek() != std::char_traits<char>::eof())
    throw ValidationError(path + ": trailing bytes after last sentence");
  return store;
}

inline void write_embeddings(const std::string& path, const TokenEmbeddingStore& store) {
  if (store.dim <= 0) throw ValidationError("cannot write embeddings with dim = 0");
  auto out = detail::open_out(path, std::ios::out | std::ios::binary);
  out.write(reinterpret_cast<const char*>(kAxebMagic.data()), kAxebMagic.size());
  detail::put_uint<std::uint16_t>(out, kAxebVersion);
  detail::put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(store.dim));
  detail::put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(store.sentences.size()));
  for (const Matrix& m : store.sentences) {
    if (m.cols() != store.dim) throw ValidationError("embedding matrix with wrong dimension");
    detail::put_uint<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
    for (Index r = 0; r < m.rows(); ++r)
      for (Index c = 0; c < m.cols(); ++c) detail::put_f32(out, static_cast<float>(m(r, c)));
  }
  detail::check_written(out, path);
}

// ---------------------------------------------------------------------------
// Seeds

namespace detail {

inline SeedList parse_seed_block(const nlohmann::ordered_json& block, const std::string& what) {
  if (!block.is_object()) throw ValidationError("seeds: '" + what + "' must be an object");
  SeedList out;
  std::set<std::string> names;
  for (const auto& [name, seed] : block.items()) {
    if (!seed.is_string())
      throw ValidationError("seeds: " + what + "." + name + " must be a string");
    const auto word = seed.get<std::string>();
    if (word.empty()) throw ValidationError("seeds: " + what + "." + name + " is empty");
    if (!is_lowercase(word))
      throw ValidationError("seeds: " + what + "." + name + " seed '" + word +
                            "' is not lowercase");
    if (!names.insert(name).second)
      throw ValidationError("seeds: duplicate class name '" + name + "'");
    out.emplace_back(name, word);
  }
  if (out.empty()) throw ValidationError("seeds: '" + what + "' has no classes");
  return out;
}

inline nlohmann::ordered_json seed_block_to_json(const SeedList& seeds) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [name, word] : seeds) j[name] = word;
  return j;
}

}  // namespace detail

inline SeedConfig parse_seeds(const std::string& text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("seeds: malformed JSON: ") + e.what());
  }
  if (!j.contains("aspects") || !j.contains("sentiments"))
    throw ValidationError("seeds: expected 'aspects' and 'sentiments' objects");
  return {detail::parse_seed_block(j["aspects"], "aspects"),
          detail::parse_seed_block(j["sentiments"], "sentiments")};
}

inline SeedConfig read_seeds(const std::string& path) {
  auto in = detail::open_in(path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_seeds(text);
}

inline void write_seeds(const std::string& path, const SeedConfig& seeds) {
  nlohmann::ordered_json j = {{"aspects", detail::seed_block_to_json(seeds.aspect_seeds)},
                              {"sentiments", detail::seed_block_to_json(seeds.sentiment_seeds)}};
  auto out = detail::open_out(path);
  out << j.dump(2) << '\n';
  detail::check_written(out, path);
}

// ---------------------------------------------------------------------------
// Gold / prediction labels

inline std::string prediction_line(const PredictionRecord& r) {
  nlohmann::ordered_json labels = nlohmann::ordered_json::array();
  for (const auto& t : r.labels) labels.push_back({t.aspect, t.sentiment});
  nlohmann::ordered_json j = {{"id", r.id}, {"labels", std::move(labels)}};
  return j.dump();
}

// Labels are emitted in (aspect, sentiment) lexicographic order, which is the
// iteration order of the record's set.
inline void write_predictions(const std::string& path,
                              std::span<const PredictionRecord> records) {
  auto out = detail::open_out(path, std::ios::out | std::ios::binary);
  for (const auto& r : records) out << prediction_line(r) << '\n';
  detail::check_written(out, path);
}

// Reads gold or prediction records. Duplicate tuples within a record collapse.
inline std::vector<PredictionRecord> read_predictions(const std::string& path) {
  auto in = detail::open_in(path);
  std::vector<PredictionRecord> records;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(line_no) + ": ";
    PredictionRecord r;
    try {
      const auto j = nlohmann::json::parse(line);
      r.id = j.at("id").get<std::string>();
      for (const auto& pair : j.at("labels")) {
        if (!pair.is_array() || pair.size() != 2)
          throw ValidationError(where + "label must be an [aspect, sentiment] pair");
        r.labels.insert({pair[0].get<std::string>(), pair[1].get<std::string>()});
      }
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(where + "malformed record: " + e.what());
    }
    if (!ids.insert(r.id).second) throw ValidationError(where + "duplicate id '" + r.id + "'");
    records.push_back(std::move(r));
  }
  return records;
}

inline StandaloneVectors read_standalone_vectors(const std::string& path) {
  auto in = detail::open_in(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + ": malformed JSON: " + e.what());
  }
  StandaloneVectors out;
  Index dim = -1;
  for (const auto& [word, entry] : j.items()) {
    try {
      const auto values = entry.at("vector").get<std::vector<double>>();
      if (values.empty()) throw ValidationError(path + ": empty vector for '" + word + "'");
      if (dim >= 0 && static_cast<Index>(values.size()) != dim)
        throw ValidationError(path + ": inconsistent vector dimension for '" + word + "'");
      dim = static_cast<Index>(values.size());
      StandaloneVector sv;
      sv.vector = Eigen::Map<const Vector>(values.data(), dim);
      sv.upos = entry.value("upos", std::string{});
      if (!sv.upos.empty() && !is_upos(sv.upos))
        throw ValidationError(path + ": unknown UPOS tag '" + sv.upos + "' for '" + word + "'");
      if (!sv.vector.allFinite())
        throw ValidationError(path + ": NaN/Inf in vector for '" + word + "'");
      out.emplace(to_lower(word), std::move(sv));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path + ": malformed entry '" + word + "': " + e.what());
    }
  }
  return out;
}

inline void write_standalone_vectors(const std::string& path, const StandaloneVectors& vectors) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [word, sv] : vectors) {
    std::vector<double> v(sv.vector.data(), sv.vector.data() + sv.vector.size());
    j[word] = {{"upos", sv.upos}, {"vector", v}};
  }
  auto out = detail::open_out(path);
  out << j.dump() << '\n';
  detail::check_written(out, path);
}

}  // namespace axabsa

#endif  // AXABSA_CORPUS_IO_HPP_
