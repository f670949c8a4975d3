#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "support/synthetic.hpp"
#include "tgeval/embedding.hpp"
#include "tgeval/errors.hpp"

namespace tgeval {
namespace {

std::string error_of(std::string_view text) {
  try {
    parse_embeddings(text);
  } catch (const DataError& e) {
    return e.what();
  }
  return {};
}

TEST(LoadEmbeddings, ParsesRows) {
  const auto e = parse_embeddings("2 3\n1 0 0\n0 1 0\n");
  ASSERT_EQ(e.size(), 2);
  ASSERT_EQ(e.dim(), 3);
  EXPECT_EQ(e.vectors(1, 1), 1.0);
  EXPECT_EQ(e.vectors(0, 1), 0.0);
}

TEST(LoadEmbeddings, Errors) {
  EXPECT_NE(error_of("1 2\n1 2 3\n").find("row 1"), std::string::npos);
  EXPECT_NE(error_of("1 1\nnan\n"), "");
  EXPECT_NE(error_of("1 1\ninf\n"), "");
  EXPECT_NE(error_of("x y\n1\n"), "");
  EXPECT_NE(error_of("2 1\n1\n"), "");
  EXPECT_NE(error_of("1 1\n1\n2\n"), "");
  EXPECT_NE(error_of(""), "");
  EXPECT_THROW(load_embeddings("/nonexistent/tgeval.emb"), DataError);
}

TEST(LoadEmbeddings, FormatRoundTripIsExact) {
  HashEmbedderConfig cfg;
  cfg.dim = 16;
  const auto e = hash_embed_corpus(testing_support::plain_corpus(3, 4, 1), cfg);
  const auto back = parse_embeddings(format_embeddings(e));
  EXPECT_EQ(back.vectors, e.vectors);
}

TEST(HashEmbedder, MatchesGoldenVectors) {
  std::ifstream in(std::string(TGEVAL_FIXTURE_DIR) + "/hash_golden.txt");
  ASSERT_TRUE(in) << "missing fixture";
  std::string line;
  int cases = 0;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string feature, dim, seed, values;
    std::getline(fields, feature, '\t');
    std::getline(fields, dim, '\t');
    std::getline(fields, seed, '\t');
    std::getline(fields, values);
    HashEmbedderConfig cfg;
    cfg.dim = std::stoi(dim);
    cfg.seed = RngSeed{std::stoull(seed)};
    const auto v = feature_vector(feature, cfg);
    std::istringstream nums(values);
    for (int i = 0; i < cfg.dim; ++i) {
      double expected = 0.0;
      nums >> expected;
      EXPECT_NEAR(v(i), expected, 1e-12) << feature << " [" << i << "]";
    }
    ++cases;
  }
  EXPECT_GE(cases, 5);
}

TEST(HashEmbedder, DeterministicAndPositionIndependent) {
  const auto c = testing_support::plain_corpus(4, 10, 2);
  HashEmbedderConfig cfg;
  cfg.dim = 32;
  cfg.seed = RngSeed{9};
  EXPECT_EQ(hash_embed_corpus(c, cfg).vectors, hash_embed_corpus(c, cfg).vectors);
  EXPECT_EQ(feature_vector("cat", cfg), feature_vector("cat", cfg));
  cfg.seed = RngSeed{10};
  EXPECT_NE(feature_vector("cat", cfg), (feature_vector("cat", HashEmbedderConfig{32})));
}

TEST(HashEmbedder, SingleTokenSentenceIsTokenVector) {
  HashEmbedderConfig cfg;
  cfg.dim = 24;
  const auto e = hash_embed_corpus(Corpus({tokenize("zebra")}), cfg);
  EXPECT_EQ(Eigen::VectorXd(e.vectors.row(0).transpose()), feature_vector("zebra", cfg));
}

TEST(HashEmbedder, EmptySentenceIsZero) {
  HashEmbedderConfig cfg;
  cfg.dim = 8;
  const auto e = hash_embed_corpus(Corpus({Sentence{}, tokenize("a")}), cfg);
  EXPECT_TRUE(e.vectors.row(0).isZero(0.0));
}

TEST(HashEmbedder, MeanAndMaxPooling) {
  HashEmbedderConfig cfg;
  cfg.dim = 8;
  cfg.use_bigrams = true;
  const auto a = feature_vector("a", cfg), b = feature_vector("b", cfg),
             ab = feature_vector("a b", cfg);
  const auto mean = hash_embed_corpus(Corpus({tokenize("a b")}), cfg);
  const Eigen::VectorXd expected_mean = (a + b + ab) / 3.0;
  EXPECT_LT((mean.vectors.row(0).transpose() - expected_mean).norm(), 1e-15);
  cfg.pooling = Pooling::kMax;
  const auto max = hash_embed_corpus(Corpus({tokenize("a b")}), cfg);
  const Eigen::VectorXd expected_max = a.cwiseMax(b).cwiseMax(ab);
  EXPECT_EQ(Eigen::VectorXd(max.vectors.row(0).transpose()), expected_max);
}

TEST(HashEmbedder, BagOfWordsSymmetryWithoutBigrams) {
  HashEmbedderConfig cfg;
  cfg.dim = 64;
  cfg.use_bigrams = false;
  const auto e = hash_embed_corpus(
      Corpus({tokenize("the quick brown fox jumps"), tokenize("jumps fox the brown quick")}), cfg);
  EXPECT_EQ(e.vectors.row(0), e.vectors.row(1));
}

TEST(HashEmbedder, BigramsSeeNonAdjacentSwaps) {
  HashEmbedderConfig cfg;
  cfg.dim = 64;
  const auto e = hash_embed_corpus(
      Corpus({tokenize("the quick brown fox jumps"), tokenize("fox quick brown the jumps")}), cfg);
  EXPECT_GT((e.vectors.row(0) - e.vectors.row(1)).norm(), 1e-3);
}

TEST(HashEmbedder, EntriesAreStandardNormal) {
  HashEmbedderConfig cfg;
  cfg.dim = 100;
  double sum = 0.0, sum_sq = 0.0;
  std::size_t n = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto v = feature_vector("tok" + std::to_string(t), cfg);
    sum += v.sum();
    sum_sq += v.squaredNorm();
    n += static_cast<std::size_t>(v.size());
  }
  const double mean = sum / static_cast<double>(n);
  const double var = sum_sq / static_cast<double>(n) - mean * mean;
  EXPECT_GE(n, 100000u);
  EXPECT_LT(std::abs(mean), 0.05);
  EXPECT_LT(std::abs(var - 1.0), 0.1);
}

TEST(HashEmbedder, ConfigValidation) {
  HashEmbedderConfig cfg;
  cfg.dim = 1;
  EXPECT_THROW(cfg.validate(), UsageError);
  EXPECT_THROW(parse_pooling("median"), UsageError);
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

}  // namespace
}  // namespace tgeval
