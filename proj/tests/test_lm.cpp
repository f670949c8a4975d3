#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support/kn_oracle.hpp"
#include "support/synthetic.hpp"
#include "tgeval/errors.hpp"
#include "tgeval/lm.hpp"
#include "tgeval/perturb.hpp"

namespace tgeval {
namespace {

using Tokens = std::vector<std::string>;

Corpus lines(std::initializer_list<const char*> texts) {
  std::vector<Sentence> out;
  for (const auto* t : texts) out.push_back(tokenize(t));
  return Corpus(std::move(out));
}

std::vector<Tokens> raw(const Corpus& c) {
  std::vector<Tokens> out;
  for (const auto& s : c.sentences()) out.push_back(s.tokens);
  return out;
}

Corpus random_corpus(std::mt19937_64& gen, int max_tokens) {
  static const Tokens kVocab = {"a", "b", "c", "d", "e", "f"};
  std::uniform_int_distribution<std::size_t> word(0, kVocab.size() - 1);
  std::uniform_int_distribution<int> len(0, 7);
  std::vector<Sentence> out;
  int used = 0;
  while (true) {
    const int n = len(gen);
    if (used + n > max_tokens) break;
    Sentence s;
    for (int i = 0; i < n; ++i) s.tokens.push_back(kVocab[word(gen)]);
    out.push_back(std::move(s));
    used += n;
  }
  if (out.empty() || used == 0) out.push_back(tokenize("a b"));
  return Corpus(std::move(out));
}

double next_token_mass(const NGramModel& m, const Tokens& history) {
  double sum = 0.0;
  for (const auto& w : m.predictable_vocab()) {
    const double p = m.prob(history, w);
    EXPECT_GT(p, 0.0);
    EXPECT_LE(p, 1.0);
    sum += p;
  }
  return sum;
}

TEST(NGramModel, UnigramNormalization) {
  const auto m = NGramModel::train(lines({"a a b"}), 1);
  const Tokens none;
  const double sum = m.prob(none, "a") + m.prob(none, "b") + m.prob(none, "<unk>") +
                     m.prob(none, "</s>");
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_EQ(m.predictable_vocab().size(), 4u);
}

TEST(NGramModel, EveryObservedHistoryIsNormalized) {
  const auto corpus = testing_support::plain_corpus(3, 20, 4);
  for (int order = 1; order <= NGramModel::kMaxOrder; ++order) {
    for (int min_count : {1, 3}) {
      const auto m = NGramModel::train(corpus, order, min_count);
      const auto histories = m.observed_histories();
      ASSERT_FALSE(histories.empty());
      for (const auto& h : histories) {
        EXPECT_NEAR(next_token_mass(m, h), 1.0, 1e-9) << "order " << order;
      }
      // Unseen histories fall back to lower orders and stay normalized.
      EXPECT_NEAR(next_token_mass(m, Tokens(static_cast<std::size_t>(order), "zzz")), 1.0, 1e-9);
    }
  }
}

TEST(NGramModel, MatchesBruteForceKneserNey) {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 30; ++trial) {
    const auto corpus = random_corpus(gen, 50);
    const int order = 1 + trial % 3;
    const int min_count = trial % 4 == 3 ? 2 : trial % 4 == 2 ? 9 : 1;
    const auto m = NGramModel::train(corpus, order, min_count);
    const oracle::BruteKn brute(raw(corpus), order, min_count);

    const auto predictable = m.predictable_vocab();
    ASSERT_EQ(std::set<std::string>(predictable.begin(), predictable.end()), brute.predictable());
    for (int k = 1; k <= order; ++k) EXPECT_NEAR(m.discount(k), brute.discount(k), 1e-15);

    // Every history over the vocabulary plus <s>.
    std::vector<std::string> alphabet = predictable;
    alphabet.push_back("<s>");
    std::vector<Tokens> histories{{}};
    for (int k = 1; k < order; ++k) {
      std::vector<Tokens> longer;
      for (const auto& h : histories) {
        for (const auto& w : alphabet) {
          auto next = h;
          next.push_back(w);
          longer.push_back(std::move(next));
        }
      }
      histories = std::move(longer);
    }
    for (const auto& h : histories) {
      for (const auto& w : predictable) {
        EXPECT_NEAR(m.prob(h, w), brute.prob(h, w), 1e-10) << trial;
      }
    }
  }
}

TEST(NGramModel, RepeatedSentenceIsMostLikelyOfItsLength) {
  const auto sentence = tokenize("b a c");
  const auto m = NGramModel::train(Corpus({sentence, sentence, sentence}), 2);
  const Tokens words = {"a", "b", "c", "<unk>"};
  double best = -INFINITY;
  Sentence argmax;
  for (const auto& x : words) {
    for (const auto& y : words) {
      for (const auto& z : words) {
        const Sentence s{{x, y, z}};
        const double lp = m.log_prob_sentence(s);
        if (lp > best) {
          best = lp;
          argmax = s;
        }
      }
    }
  }
  EXPECT_EQ(argmax, sentence);
}

TEST(NGramModel, EmptyAndOovSentences) {
  const auto m = NGramModel::train(lines({"a b c", "a c"}), 3);
  EXPECT_DOUBLE_EQ(m.log_prob_sentence(Sentence{}), std::log(m.prob(Tokens{"<s>", "<s>"}, "</s>")));
  const double oov = m.log_prob_sentence(tokenize("ü ∑ qqq <s> </s>"));
  EXPECT_TRUE(std::isfinite(oov));
  EXPECT_LT(oov, 0.0);
  EXPECT_TRUE(m.is_unknown("qqq"));
  EXPECT_TRUE(m.is_unknown("<s>"));
  EXPECT_FALSE(m.is_unknown("a"));
}

TEST(NGramModel, ArbitraryBytesNeverScoreMinusInfinity) {
  const auto m = NGramModel::train(testing_support::plain_corpus(2, 10, 1), 4);
  std::mt19937_64 gen(3);
  std::uniform_int_distribution<int> byte(33, 126);
  for (int trial = 0; trial < 100; ++trial) {
    Sentence s;
    for (int i = 0; i < trial % 15; ++i) s.tokens.push_back(std::string(1 + i % 3, static_cast<char>(byte(gen))));
    EXPECT_TRUE(std::isfinite(m.log_prob_sentence(s)));
  }
}

TEST(NGramModel, MinCountMapsRareTokensToUnk) {
  const auto m = NGramModel::train(lines({"a a b", "a c"}), 2, 2);
  EXPECT_TRUE(m.is_unknown("b"));
  EXPECT_FALSE(m.is_unknown("a"));
  EXPECT_EQ(m.prob(Tokens{"a"}, "b"), m.prob(Tokens{"a"}, "<unk>"));
}

TEST(NGramModel, Errors) {
  EXPECT_THROW(NGramModel::train(Corpus(), 2), DataError);
  EXPECT_THROW(NGramModel::train(lines({"a"}), 0), UsageError);
  EXPECT_THROW(NGramModel::train(lines({"a"}), 6), UsageError);
  EXPECT_THROW(NGramModel::deserialize("not a model"), DataError);
}

TEST(NGramModel, SerializationRoundTripIsExact) {
  const auto corpus = testing_support::plain_corpus(3, 15, 8);
  const auto m = NGramModel::train(corpus, 3, 2);
  const auto text = m.serialize();
  const auto back = NGramModel::deserialize(text);
  EXPECT_EQ(back.serialize(), text);
  EXPECT_EQ(back.vocab(), m.vocab());
  for (int k = 1; k <= 3; ++k) EXPECT_EQ(back.discount(k), m.discount(k));
  for (const auto& s : corpus.sentences()) {
    EXPECT_EQ(back.log_prob_sentence(s), m.log_prob_sentence(s));
  }
}

TEST(LmScore, PerplexityDefinitionAndOov) {
  const auto m = NGramModel::train(lines({"a b", "b a"}), 2);
  const auto samples = lines({"a b x"});
  const auto r = lm_score(m, samples);
  EXPECT_EQ(r.token_count, 4);
  EXPECT_DOUBLE_EQ(r.oov_rate, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.total_log_prob, m.log_prob_sentence(samples[0]));
  EXPECT_DOUBLE_EQ(r.per_token_ppl, std::exp(-r.total_log_prob / 4.0));
  EXPECT_THROW(lm_score(m, Corpus()), DataError);
}

TEST(LmScore, TrainingSamplesBeatRandomStrings) {
  const auto train = testing_support::plain_corpus(4, 50, 2);
  const auto m = NGramModel::train(train, 3);
  std::vector<Sentence> random;
  SplitMix64 rng(5);
  const auto vocab = m.predictable_vocab();
  for (const auto& s : train.sentences()) {
    Sentence r;
    for (std::size_t i = 0; i < s.size(); ++i) r.tokens.push_back(vocab[rng.below(vocab.size())]);
    random.push_back(std::move(r));
  }
  const double real = lm_score(m, train).per_token_ppl;
  EXPECT_LT(real, lm_score(m, Corpus(random)).per_token_ppl);
  // Perturbed copies of the training set are all worse.
  EXPECT_LT(real, lm_score(m, word_dropout(train, 0.3, RngSeed{1})).per_token_ppl);
  EXPECT_LT(real, lm_score(m, word_swap(train, 0.5, RngSeed{1})).per_token_ppl);
}

TEST(LmScore, RepeatedSentenceMatchesLogProb) {
  const auto train = testing_support::plain_corpus(2, 10, 3);
  const auto m = NGramModel::train(train, 3);
  const Corpus repeated({train[0], train[0], train[0]});
  const double lp = m.log_prob_sentence(train[0]);
  const auto tokens = static_cast<double>(train[0].size() + 1);
  EXPECT_NEAR(lm_score(m, repeated).per_token_ppl, std::exp(-lp / tokens), 1e-12);
}

TEST(ReverseLmScore, Orderings) {
  const auto corpus = testing_support::plain_corpus(5, 200, 6);
  const auto [half_a, half_b] = split_corpus(corpus, 0.5, RngSeed{2});
  const Corpus degenerate(std::vector<Sentence>(half_a.size(), half_a[0]));
  const double halves = reverse_lm_score(half_a, half_b).per_token_ppl;
  EXPECT_LT(halves, reverse_lm_score(degenerate, half_b).per_token_ppl);
  const double dropped = reverse_lm_score(word_dropout(half_a, 0.9, RngSeed{3}), half_b).per_token_ppl;
  EXPECT_GT(dropped, halves);
  const double self = reverse_lm_score(half_b, half_b).per_token_ppl;
  EXPECT_LT(self, halves);
  EXPECT_LT(self, dropped);
}

TEST(ReverseLmScore, HigherOrderFitsTrainingDataBetter) {
  const auto corpus = testing_support::plain_corpus(3, 100, 7);
  const double unigram = lm_score(NGramModel::train(corpus, 1), corpus).per_token_ppl;
  for (int order = 2; order <= 5; ++order) {
    EXPECT_LE(lm_score(NGramModel::train(corpus, order), corpus).per_token_ppl, unigram);
  }
}

TEST(ExternalScores, Examples) {
  const auto two = parse_external_scores("-2.0\t2\n-4.0\t2\n");
  EXPECT_DOUBLE_EQ(aggregate_external_scores(two).per_token_ppl, std::exp(6.0 / 4.0));
  const auto certain = parse_external_scores("-0.0\t1\n");
  EXPECT_DOUBLE_EQ(aggregate_external_scores(certain).per_token_ppl, 1.0);
  EXPECT_THROW(parse_external_scores("1.0\t1\n"), DataError);
  EXPECT_THROW(parse_external_scores("abc\t1\n"), DataError);
  EXPECT_THROW(parse_external_scores("-1.0\t-2\n"), DataError);
}

}  // namespace
}  // namespace tgeval
