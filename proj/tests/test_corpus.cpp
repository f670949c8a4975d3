#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "support/synthetic.hpp"
#include "tgeval/corpus.hpp"
#include "tgeval/errors.hpp"

namespace tgeval {
namespace {

Corpus lines(std::initializer_list<const char*> texts) {
  std::vector<Sentence> out;
  for (const auto* t : texts) out.push_back(tokenize(t));
  return Corpus(std::move(out));
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / ("tgeval_test_" + name);
  std::ofstream(path, std::ios::binary) << content;
  return path;
}

TEST(Tokenize, SplitsOnWhitespaceRuns) {
  EXPECT_EQ(tokenize("a man is walking").tokens,
            (std::vector<std::string>{"a", "man", "is", "walking"}));
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_EQ(tokenize("  a\tb  ").tokens, (std::vector<std::string>{"a", "b"}));
}

TEST(Tokenize, UnicodeWhitespaceAndNoNormalization) {
  // U+00A0, U+3000 and U+2009 separate; case and punctuation survive.
  EXPECT_EQ(tokenize("A b,　C. d").tokens,
            (std::vector<std::string>{"A", "b,", "C.", "d"}));
  // Non-space multibyte characters are kept intact.
  EXPECT_EQ(tokenize("café à").tokens, (std::vector<std::string>{"café", "à"}));
}

TEST(Tokenize, DetokenizeIsIdempotent) {
  for (const char* text : {"  a  b\tc ", "x", "", "　y z  "}) {
    const auto once = tokenize(text);
    EXPECT_EQ(tokenize(detokenize(once)), once) << text;
  }
}

TEST(LoadCorpus, LinesFormat) {
  const auto c = parse_corpus("a b\nc d\n");
  ASSERT_EQ(c.size(), 2u);
  EXPECT_FALSE(c.has_topics());
  EXPECT_EQ(c[1].tokens, (std::vector<std::string>{"c", "d"}));
}

TEST(LoadCorpus, CrlfAndBlankLinesSkipped) {
  const auto c = parse_corpus("a b\r\n\r\n  \nc\r\n");
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].tokens, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(c[1].tokens, (std::vector<std::string>{"c"}));
}

TEST(LoadCorpus, TopicTsv) {
  const auto c = parse_corpus("t1\ta b\nt2\tc\n", CorpusFormat::kTopicTsv);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.topics(), (std::vector<std::string>{"t1", "t2"}));
  EXPECT_EQ(c[0].tokens, (std::vector<std::string>{"a", "b"}));
}

TEST(LoadCorpus, TopicTsvMissingTabNamesLine) {
  try {
    parse_corpus("t1\tok\nt1 a b\n", CorpusFormat::kTopicTsv);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_corpus("t1 a b\n", CorpusFormat::kTopicTsv), DataError);
}

TEST(LoadCorpus, MissingFileIsDataError) {
  EXPECT_THROW(load_corpus("/nonexistent/tgeval/corpus.txt"), DataError);
}

TEST(LoadCorpus, SaveLoadRoundTripBothFormats) {
  const auto topics = testing_support::topic_corpus(3, 5, 11);
  const auto tsv = temp_file("roundtrip.tsv", "");
  save_corpus(topics, tsv, CorpusFormat::kTopicTsv);
  EXPECT_EQ(load_corpus(tsv, CorpusFormat::kTopicTsv), topics);

  const auto plain = testing_support::plain_corpus(3, 5, 12);
  const auto txt = temp_file("roundtrip.txt", "");
  save_corpus(plain, txt);
  EXPECT_EQ(load_corpus(txt), plain);
}

TEST(LoadCorpus, TopicTsvKeepsEmptySentences) {
  Corpus c({Sentence{}, tokenize("a")}, {"x", "y"});
  EXPECT_EQ(parse_corpus(format_corpus(c, CorpusFormat::kTopicTsv), CorpusFormat::kTopicTsv), c);
}

TEST(Corpus, TopicLengthMismatchRejected) {
  EXPECT_THROW(Corpus({tokenize("a")}, {"x", "y"}), UsageError);
}

TEST(SplitCorpus, SizesAndRounding) {
  const auto c = testing_support::plain_corpus(1, 10, 3);
  const auto [a, b] = split_corpus(c, 0.5, RngSeed{1});
  EXPECT_EQ(a.size(), 5u);
  EXPECT_EQ(b.size(), 5u);

  const auto three = lines({"a", "b", "c"});
  const auto [x, y] = split_corpus(three, 0.5, RngSeed{9});
  EXPECT_EQ(x.size(), 2u);  // 1.5 rounds up
  EXPECT_EQ(y.size(), 1u);
}

TEST(SplitCorpus, DeterministicDisjointExhaustive) {
  auto c = testing_support::topic_corpus(4, 25, 5);
  const auto first = split_corpus(c, 0.3, RngSeed{77});
  const auto again = split_corpus(c, 0.3, RngSeed{77});
  EXPECT_EQ(first.first, again.first);
  EXPECT_EQ(first.second, again.second);
  EXPECT_EQ(first.first.size(), 30u);

  // Label every sentence uniquely through its topic to check the partition.
  std::vector<std::string> ids(c.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = std::to_string(i);
  const Corpus labelled(c.sentences(), ids);
  const auto [a, b] = split_corpus(labelled, 0.3, RngSeed{77});
  std::vector<std::string> all = a.topics();
  all.insert(all.end(), b.topics().begin(), b.topics().end());
  std::ranges::sort(all);
  auto expected = ids;
  std::ranges::sort(expected);
  EXPECT_EQ(all, expected);
  // Topics travel with their sentences.
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i], c[static_cast<std::size_t>(std::stoul(a.topics()[i]))]);
  }
}

TEST(SplitCorpus, Errors) {
  const auto c = lines({"a", "b"});
  EXPECT_THROW(split_corpus(c, 0.0, RngSeed{}), UsageError);
  EXPECT_THROW(split_corpus(c, 1.0, RngSeed{}), UsageError);
  EXPECT_THROW(split_corpus(Corpus(), 0.5, RngSeed{}), DataError);
}

TEST(FilterTopics, KeepsOrderAndReportsMissing) {
  Corpus c({tokenize("a1"), tokenize("b1"), tokenize("a2"), tokenize("c1")},
           {"A", "B", "A", "C"});
  const auto only_a = filter_topics(c, {"A"});
  EXPECT_EQ(only_a.corpus.size(), 2u);
  EXPECT_EQ(only_a.corpus[1].tokens.front(), "a2");
  EXPECT_TRUE(only_a.missing_topics.empty());

  EXPECT_EQ(filter_topics(c, {"A", "B", "C"}).corpus, c);
  EXPECT_TRUE(filter_topics(c, {}).corpus.empty());

  const auto with_missing = filter_topics(c, {"A", "Z"});
  EXPECT_EQ(with_missing.missing_topics, (std::vector<std::string>{"Z"}));
  EXPECT_THROW(filter_topics(lines({"x"}), {"A"}), UsageError);
}

TEST(FilterTopics, MonotoneInKeepSet) {
  const auto c = testing_support::topic_corpus(5, 7, 2);
  std::set<std::string> keep;
  std::size_t previous = 0;
  for (const auto& topic : c.topic_set()) {
    keep.insert(topic);
    const auto size = filter_topics(c, keep).corpus.size();
    EXPECT_GE(size, previous);
    previous = size;
  }
  EXPECT_EQ(previous, c.size());
}

}  // namespace
}  // namespace tgeval
