#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tgeval/corpus.hpp"

namespace tgeval {

/// Distinct n-grams of one order with their occurrence counts. Keys are the
/// tokens joined by single spaces, which is unambiguous because tokens never
/// contain whitespace.
class NGramCounts {
 public:
  explicit NGramCounts(int order);

  void add(const Sentence& s);

  int order() const { return order_; }
  std::size_t distinct() const { return counts_.size(); }
  std::int64_t count(std::string_view key) const;
  const std::unordered_map<std::string, std::int64_t>& counts() const {
    return counts_;
  }

 private:
  int order_;
  std::unordered_map<std::string, std::int64_t> counts_;
};

/// The n-gram of `order` starting at token `pos`, joined by spaces.
std::string ngram_key(const Sentence& s, std::size_t pos, int order);

NGramCounts count_ngrams(const Sentence& s, int order);
NGramCounts count_ngrams(const Corpus& c, int order);

enum class Smoothing { kNone, kEpsilon };

Smoothing parse_smoothing(std::string_view name);

struct BleuConfig {
  int max_order = 4;
  Smoothing smoothing = Smoothing::kEpsilon;
  double epsilon = 1e-9;

  /// Throws UsageError unless 1 <= max_order <= 9 and epsilon > 0.
  void validate() const;
};

struct ClippedCount {
  std::int64_t clipped = 0;
  std::int64_t total = 0;
};

ClippedCount modified_precision(const Sentence& hypothesis,
                                std::span<const Sentence> references,
                                int order);

/// Per-order maximum reference counts and the sorted reference lengths of a
/// whole reference corpus, built once and shared by every hypothesis.
class BleuReference {
 public:
  BleuReference(const Corpus& reference, int max_order);

  int max_order() const { return static_cast<int>(max_counts_.size()); }
  ClippedCount clip(const Sentence& hypothesis, int order) const;
  /// Reference length closest to `length`; ties go to the shorter one.
  std::size_t closest_length(std::size_t length) const;

 private:
  std::vector<std::unordered_map<std::string, std::int64_t>> max_counts_;
  std::vector<std::size_t> lengths_;
};

struct SentenceBleu {
  double score = 0.0;
  double brevity_penalty = 0.0;
  std::vector<ClippedCount> counts;  // index k holds order k+1
};

SentenceBleu sentence_bleu(const Sentence& hypothesis, const BleuReference& ref,
                           const BleuConfig& cfg);

struct BleuResult {
  double score = 0.0;
  /// Average over sample sentences of the raw per-order precision
  /// (0 where the sentence has no n-gram of that order).
  std::vector<double> mean_precision;
  std::vector<std::int64_t> clipped;
  std::vector<std::int64_t> total;
  double mean_brevity_penalty = 0.0;
  std::size_t sentences = 0;
};

/// Mean over sample sentences of sentence BLEU, each scored against the whole
/// reference corpus as its reference set.
BleuResult corpus_bleu(const Corpus& samples, const Corpus& reference,
                       const BleuConfig& cfg = {});

BleuResult corpus_bleu(const Corpus& samples, const BleuReference& reference,
                       const BleuConfig& cfg = {});

/// BLEU of one sample set against a second set drawn from the same model.
BleuResult self_bleu(const Corpus& set_a, const Corpus& set_b,
                     const BleuConfig& cfg = {});

std::size_t unique_ngrams(const Corpus& c, int order);

}  // namespace tgeval
