#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tgeval/rng.hpp"

namespace tgeval {

struct Sentence {
  std::vector<std::string> tokens;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

/// Ordered sentences with an optional parallel list of topic labels.
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<Sentence> sentences);
  /// Throws UsageError if the two lists differ in length.
  Corpus(std::vector<Sentence> sentences, std::vector<std::string> topics);

  std::size_t size() const { return sentences_.size(); }
  bool empty() const { return sentences_.empty(); }

  const std::vector<Sentence>& sentences() const { return sentences_; }
  const Sentence& operator[](std::size_t i) const { return sentences_[i]; }

  bool has_topics() const { return topics_.has_value(); }
  /// Throws UsageError when the corpus carries no topics.
  const std::vector<std::string>& topics() const;
  /// Distinct topic labels in sorted order.
  std::vector<std::string> topic_set() const;

  std::size_t token_count() const;

  /// Copies the sentences at `indices` (with their topics) in the given order.
  Corpus select(const std::vector<std::size_t>& indices) const;

  friend bool operator==(const Corpus&, const Corpus&) = default;

 private:
  std::vector<Sentence> sentences_;
  std::optional<std::vector<std::string>> topics_;
};

enum class CorpusFormat { kLines, kTopicTsv };

CorpusFormat parse_corpus_format(std::string_view name);

/// Splits on runs of Unicode whitespace. No other normalization.
Sentence tokenize(std::string_view line);

/// Joins tokens with single spaces.
std::string detokenize(const Sentence& s);

Corpus load_corpus(const std::filesystem::path& path,
                   CorpusFormat format = CorpusFormat::kLines);
Corpus parse_corpus(std::string_view text,
                    CorpusFormat format = CorpusFormat::kLines);

void save_corpus(const Corpus& c, const std::filesystem::path& path,
                 CorpusFormat format = CorpusFormat::kLines);
std::string format_corpus(const Corpus& c,
                          CorpusFormat format = CorpusFormat::kLines);

/// Seeded shuffle, then the first round(fraction * N) sentences (half up)
/// go to the first part.
std::pair<Corpus, Corpus> split_corpus(const Corpus& c, double fraction,
                                       RngSeed seed);

struct FilterResult {
  Corpus corpus;
  /// Requested labels that never occur in the input.
  std::vector<std::string> missing_topics;
};

/// Keeps sentences whose topic is in `keep`, original order preserved.
FilterResult filter_topics(const Corpus& c, const std::set<std::string>& keep);

}  // namespace tgeval
