#include <gtest/gtest.h>

#include <random>

#include "support/fixtures.hpp"

using namespace axabsa;
using namespace axabsa::testing;

namespace {

std::string minimal_line(int head_of_third = 2) {
  return R"({"id":"a","text":"great food here","tokens":[)"
         R"({"form":"great","upos":"ADJ","head":2},)"
         R"({"form":"food","upos":"NOUN","head":0},)"
         R"({"form":"here","upos":"ADV","head":)" +
         std::to_string(head_of_third) + "}]}\n";
}

template <typename Fn>
std::string error_of(Fn&& fn) {
  try {
    fn();
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(ReadCorpus, MinimalRecord) {
  TempDir dir;
  spit(dir.file("c.jsonl"), minimal_line());
  const Corpus c = read_corpus(dir.file("c.jsonl"));
  ASSERT_EQ(c.size(), 1u);
  ASSERT_EQ(c[0].tokens.size(), 3u);
  EXPECT_EQ(c[0].tokens[1].head, 0);  // root is token 2
  EXPECT_EQ(c[0].tokens[1].form, "food");
}

TEST(ReadCorpus, HeadOutOfRange) {
  TempDir dir;
  spit(dir.file("c.jsonl"), minimal_line(9));
  const auto msg = error_of([&] { read_corpus(dir.file("c.jsonl")); });
  EXPECT_NE(msg.find("head out of range"), std::string::npos) << msg;
  EXPECT_NE(msg.find("'a'"), std::string::npos) << msg;
}

TEST(ReadCorpus, EmptyFileIsEmptyCorpus) {
  TempDir dir;
  spit(dir.file("c.jsonl"), "");
  EXPECT_TRUE(read_corpus(dir.file("c.jsonl")).empty());
}

TEST(ReadCorpus, MalformedLineReportsLineNumber) {
  TempDir dir;
  spit(dir.file("c.jsonl"), minimal_line() + "{not json\n");
  const auto msg = error_of([&] { read_corpus(dir.file("c.jsonl")); });
  EXPECT_NE(msg.find(":2:"), std::string::npos) << msg;
}

TEST(ReadCorpus, DuplicateId) {
  TempDir dir;
  spit(dir.file("c.jsonl"), minimal_line() + minimal_line());
  const auto msg = error_of([&] { read_corpus(dir.file("c.jsonl")); });
  EXPECT_NE(msg.find("duplicate id"), std::string::npos) << msg;
}

TEST(ValidateSentence, RejectsInvariantViolations) {
  TokenizedSentence s{"x", "", {{"a", "NOUN", 0}, {"b", "ADJ", 0}}};
  EXPECT_NE(error_of([&] { validate_sentence(s); }).find("exactly one root"), std::string::npos);
  s.tokens = {{"a", "NOUN", 1}};
  EXPECT_NE(error_of([&] { validate_sentence(s); }).find("own head"), std::string::npos);
  s.tokens = {{"a", "NOUNISH", 0}};
  EXPECT_NE(error_of([&] { validate_sentence(s); }).find("UPOS"), std::string::npos);
  s.tokens.clear();
  EXPECT_NE(error_of([&] { validate_sentence(s); }).find("empty"), std::string::npos);
}

TEST(Embeddings, WriterOutputRoundTrips) {
  TempDir dir;
  Corpus corpus = {{"a", "", {{"x", "NOUN", 0}, {"y", "ADJ", 1}, {"z", "DET", 1}}}};
  TokenEmbeddingStore store;
  store.dim = 4;
  Matrix m(3, 4);
  for (Index i = 0; i < 12; ++i) m(i / 4, i % 4) = 0.25 * static_cast<double>(i) - 1.0;
  store.sentences.push_back(m);
  write_embeddings(dir.file("e.axeb"), store);
  EXPECT_EQ(fs::file_size(dir.file("e.axeb")), 4u + 2u + 4u + 4u + 4u + 12u * 4u);

  const auto back = read_embeddings(dir.file("e.axeb"), corpus);
  EXPECT_EQ(back.dim, 4);
  ASSERT_EQ(back.sentences.size(), 1u);
  EXPECT_EQ(back.sentences[0], m);
}

TEST(Embeddings, HeaderBytesAreLittleEndian) {
  TempDir dir;
  TokenEmbeddingStore store;
  store.dim = 2;
  store.sentences.push_back(Matrix::Constant(1, 2, 1.0));
  write_embeddings(dir.file("e.axeb"), store);
  const std::string bytes = slurp(dir.file("e.axeb"));
  const std::string expected_header("\x41\x58\x45\x42\x01\x00\x02\x00\x00\x00\x01\x00\x00\x00", 14);
  EXPECT_EQ(bytes.substr(0, 14), expected_header);
  // n_tokens = 1, then 1.0f = 0x3F800000 little-endian
  EXPECT_EQ(bytes.substr(14), std::string("\x01\x00\x00\x00\x00\x00\x80\x3F\x00\x00\x80\x3F", 12));
}

TEST(Embeddings, RowCountMismatchNamesSentence) {
  TempDir dir;
  Corpus corpus = {{"first", "", {{"x", "NOUN", 0}}}, {"second", "", {{"x", "NOUN", 0}, {"y", "ADJ", 1}}}};
  TokenEmbeddingStore store;
  store.dim = 3;
  store.sentences = {Matrix::Zero(1, 3), Matrix::Zero(3, 3)};
  write_embeddings(dir.file("e.axeb"), store);
  const auto msg = error_of([&] { read_embeddings(dir.file("e.axeb"), corpus); });
  EXPECT_NE(msg.find("row-count mismatch at sentence 1"), std::string::npos) << msg;
  EXPECT_NE(msg.find("'second'"), std::string::npos) << msg;
}

TEST(Embeddings, CorruptedMagic) {
  TempDir dir;
  TokenEmbeddingStore store;
  store.dim = 2;
  store.sentences.push_back(Matrix::Zero(1, 2));
  write_embeddings(dir.file("e.axeb"), store);
  std::string bytes = slurp(dir.file("e.axeb"));
  bytes[0] = 'X';
  spit(dir.file("e.axeb"), bytes);
  Corpus corpus = {{"a", "", {{"x", "NOUN", 0}}}};
  EXPECT_NE(error_of([&] { read_embeddings(dir.file("e.axeb"), corpus); })
                .find("unrecognized format"),
            std::string::npos);
}

TEST(Embeddings, ZeroDimAndNaNRejected) {
  TempDir dir;
  Corpus corpus = {{"a", "", {{"x", "NOUN", 0}}}};
  std::string header("\x41\x58\x45\x42\x01\x00\x00\x00\x00\x00\x01\x00\x00\x00", 14);
  spit(dir.file("zero.axeb"), header);
  EXPECT_NE(error_of([&] { read_embeddings(dir.file("zero.axeb"), corpus); }).find("dim = 0"),
            std::string::npos);

  TokenEmbeddingStore store;
  store.dim = 2;
  store.sentences.push_back(Matrix::Zero(1, 2));
  store.sentences[0](0, 1) = std::numeric_limits<double>::quiet_NaN();
  write_embeddings(dir.file("nan.axeb"), store);
  EXPECT_NE(error_of([&] { read_embeddings(dir.file("nan.axeb"), corpus); }).find("NaN"),
            std::string::npos);
}

TEST(Predictions, LabelsSortedForByteDeterminism) {
  TempDir dir;
  std::vector<PredictionRecord> recs = {{"a", {{"service", "negative"}, {"food", "positive"}}}};
  write_predictions(dir.file("p.jsonl"), recs);
  EXPECT_EQ(slurp(dir.file("p.jsonl")),
            "{\"id\":\"a\",\"labels\":[[\"food\",\"positive\"],[\"service\",\"negative\"]]}\n");
}

TEST(Predictions, EmptyListWritesEmptyFile) {
  TempDir dir;
  write_predictions(dir.file("p.jsonl"), std::vector<PredictionRecord>{});
  EXPECT_EQ(slurp(dir.file("p.jsonl")), "");
}

TEST(Seeds, PreservesFileOrderAndValidates) {
  const auto s = parse_seeds(
      R"({"aspects": {"service": "service", "food": "food"}, "sentiments": {"positive": "good", "negative": "bad"}})");
  ASSERT_EQ(s.aspect_seeds.size(), 2u);
  EXPECT_EQ(s.aspect_seeds[0].first, "service");
  EXPECT_EQ(s.sentiment_seeds[1].second, "bad");
  EXPECT_THROW(parse_seeds(R"({"aspects": {"food": "Food"}, "sentiments": {"p": "good"}})"),
               ValidationError);
  EXPECT_THROW(parse_seeds(R"({"aspects": {"food": ""}, "sentiments": {"p": "good"}})"),
               ValidationError);
  EXPECT_THROW(parse_seeds(R"({"aspects": {"food": "food"}})"), ValidationError);
}

// read(write(x)) == x for random valid instances of every format.
TEST(RoundTrip, RandomInstancesAllFormats) {
  std::mt19937_64 gen(7);
  TempDir dir;
  for (int trial = 0; trial < 25; ++trial) {
    auto rc = random_corpus(gen, 1 + trial % 6, 12, 1 + trial % 5);
    write_corpus(dir.file("c.jsonl"), rc.corpus);
    EXPECT_EQ(read_corpus(dir.file("c.jsonl")), rc.corpus);

    // Values representable in f32 survive exactly.
    for (auto& m : rc.embeddings.sentences) m = m.cast<float>().cast<double>();
    write_embeddings(dir.file("e.axeb"), rc.embeddings);
    const auto emb = read_embeddings(dir.file("e.axeb"), rc.corpus);
    ASSERT_EQ(emb.sentences.size(), rc.embeddings.sentences.size());
    for (std::size_t k = 0; k < emb.sentences.size(); ++k)
      EXPECT_EQ(emb.sentences[k], rc.embeddings.sentences[k]);

    auto recs = random_records(gen, 1 + trial % 7, 4, false, true);
    write_predictions(dir.file("p.jsonl"), recs);
    EXPECT_EQ(read_predictions(dir.file("p.jsonl")), recs);

    SeedConfig seeds{{{"c" + std::to_string(trial), "w1"}, {"other", "w2"}}, {{"positive", "good"}}};
    write_seeds(dir.file("s.json"), seeds);
    EXPECT_EQ(read_seeds(dir.file("s.json")), seeds);
  }
}

TEST(Standalone, RoundTripAndDimensionCheck) {
  TempDir dir;
  StandaloneVectors sv;
  sv["miscellaneous"] = {vec({0.5, -1.0, 2.0}), "NOUN"};
  write_standalone_vectors(dir.file("s.json"), sv);
  const auto back = read_standalone_vectors(dir.file("s.json"));
  ASSERT_TRUE(back.contains("miscellaneous"));
  EXPECT_EQ(back.at("miscellaneous").vector, sv["miscellaneous"].vector);
  EXPECT_EQ(back.at("miscellaneous").upos, "NOUN");

  spit(dir.file("bad.json"), R"({"a": {"vector": [1, 2]}, "b": {"vector": [1]}})");
  EXPECT_THROW(read_standalone_vectors(dir.file("bad.json")), ValidationError);
}
