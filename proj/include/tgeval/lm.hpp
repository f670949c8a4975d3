#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tgeval/corpus.hpp"

namespace tgeval {

inline constexpr std::string_view kUnk = "<unk>";
inline constexpr std::string_view kBos = "<s>";
inline constexpr std::string_view kEos = "</s>";

/// Interpolated Kneser-Ney n-gram model with one discount per order.
///
/// The highest order uses raw counts, lower orders use continuation counts
/// (number of distinct left neighbours). Sentences are padded with order-1
/// <s> and one </s>. The unigram level interpolates with a uniform
/// distribution over every predictable token (vocabulary minus <s>), so no
/// token ever gets zero probability.
class NGramModel {
 public:
  static constexpr int kMaxOrder = 5;

  /// Tokens seen fewer than `min_count` times become <unk>. Throws
  /// DataError on an empty corpus and UsageError on a bad order.
  static NGramModel train(const Corpus& corpus, int order = 4, int min_count = 1);

  int order() const { return order_; }
  int min_count() const { return min_count_; }
  /// Sorted vocabulary including <unk>, <s> and </s>.
  const std::vector<std::string>& vocab() const { return vocab_; }
  /// Vocabulary minus <s>: the support of every next-token distribution.
  std::vector<std::string> predictable_vocab() const;
  /// Discount of order k (1-based).
  double discount(int k) const { return discounts_.at(static_cast<std::size_t>(k - 1)); }

  /// p(word | history). Only the last order-1 history tokens are used; a
  /// shorter history is left-padded with <s>. <s> and </s> name the markers
  /// here; any other unknown token maps to <unk>.
  double prob(std::span<const std::string> history, std::string_view word) const;

  /// Natural-log probability of the padded sentence including </s>.
  double log_prob_sentence(const Sentence& s) const;

  /// Every (order-1)-token history that occurs in training.
  std::vector<std::vector<std::string>> observed_histories() const;

  /// Versioned text dump of the highest-order counts, sorted. Lower-order
  /// tables and discounts are rebuilt on load.
  std::string serialize() const;
  static NGramModel deserialize(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static NGramModel load(const std::filesystem::path& path);

  /// Token id (<unk> for unknown or reserved-but-unpredictable input).
  std::uint32_t id_of(std::string_view token) const;
  bool is_unknown(std::string_view token) const;

 private:
  struct ContextStats {
    std::int64_t total = 0;
    std::int64_t distinct = 0;
  };
  using Key = std::string;  // packed 32-bit ids

  NGramModel() = default;
  void set_vocab(std::vector<std::string> vocab);
  void build(std::unordered_map<Key, std::int64_t> top_counts);
  double prob_ids(std::span<const std::uint32_t> history, std::uint32_t word) const;

  int order_ = 4;
  int min_count_ = 1;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, std::uint32_t> ids_;
  std::uint32_t unk_ = 0;
  std::uint32_t bos_ = 0;
  std::uint32_t eos_ = 0;
  // Index k-1 holds order k.
  std::vector<std::unordered_map<Key, std::int64_t>> counts_;
  std::vector<std::unordered_map<Key, ContextStats>> contexts_;
  std::vector<double> discounts_;
};

struct ScoreReport {
  double per_token_ppl = 1.0;
  double total_log_prob = 0.0;
  std::int64_t token_count = 0;  // includes </s>, excludes <s>
  double oov_rate = 0.0;         // over real tokens, </s> excluded
  std::size_t sentences = 0;
};

/// Perplexity of samples under a model trained on real data.
ScoreReport lm_score(const NGramModel& model_trained_on_real, const Corpus& samples);

/// Trains on the samples and reports perplexity of held-out real text.
ScoreReport reverse_lm_score(const Corpus& samples, const Corpus& real_heldout,
                             int order = 4, int min_count = 1);

/// One externally computed sentence score.
struct ExternalScore {
  double log_prob = 0.0;
  std::int64_t tokens = 0;
};

/// Parses "logprob<TAB>ntokens" lines. Throws DataError on positive
/// log-probabilities, malformed lines or negative token counts.
std::vector<ExternalScore> parse_external_scores(std::string_view text);
std::vector<ExternalScore> load_external_scores(const std::filesystem::path& path);
ScoreReport aggregate_external_scores(std::span<const ExternalScore> scores);

}  // namespace tgeval
