#include "tgeval/ngram_metrics.hpp"

#include <algorithm>
#include <cmath>

#include "tgeval/errors.hpp"

namespace tgeval {

NGramCounts::NGramCounts(int order) : order_(order) {
  if (order < 1) throw UsageError("n-gram order must be at least 1");
}

void NGramCounts::add(const Sentence& s) {
  const auto n = static_cast<std::size_t>(order_);
  if (s.size() < n) return;
  for (std::size_t i = 0; i + n <= s.size(); ++i) ++counts_[ngram_key(s, i, order_)];
}

std::int64_t NGramCounts::count(std::string_view key) const {
  auto it = counts_.find(std::string(key));
  return it == counts_.end() ? 0 : it->second;
}

std::string ngram_key(const Sentence& s, std::size_t pos, int order) {
  std::string key = s.tokens[pos];
  for (int k = 1; k < order; ++k) {
    key += ' ';
    key += s.tokens[pos + static_cast<std::size_t>(k)];
  }
  return key;
}

NGramCounts count_ngrams(const Sentence& s, int order) {
  NGramCounts counts(order);
  counts.add(s);
  return counts;
}

NGramCounts count_ngrams(const Corpus& c, int order) {
  NGramCounts counts(order);
  for (const auto& s : c.sentences()) counts.add(s);
  return counts;
}

Smoothing parse_smoothing(std::string_view name) {
  if (name == "none") return Smoothing::kNone;
  if (name == "epsilon") return Smoothing::kEpsilon;
  throw UsageError("unknown smoothing '" + std::string(name) +
                   "' (expected none or epsilon)");
}

void BleuConfig::validate() const {
  if (max_order < 1 || max_order > 9) {
    throw UsageError("BLEU max order must lie in [1, 9]");
  }
  if (!(epsilon > 0.0)) throw UsageError("BLEU epsilon must be positive");
}

ClippedCount modified_precision(const Sentence& hypothesis,
                                std::span<const Sentence> references,
                                int order) {
  if (order < 1) throw UsageError("n-gram order must be at least 1");
  ClippedCount result;
  const auto n = static_cast<std::size_t>(order);
  if (hypothesis.size() < n) return result;
  result.total = static_cast<std::int64_t>(hypothesis.size() - n + 1);

  const auto hyp_counts = count_ngrams(hypothesis, order);
  std::unordered_map<std::string, std::int64_t> max_ref;
  for (const auto& ref : references) {
    const auto ref_counts = count_ngrams(ref, order);
    for (const auto& [key, count] : ref_counts.counts()) {
      if (!hyp_counts.counts().contains(key)) continue;
      auto& slot = max_ref[key];
      slot = std::max(slot, count);
    }
  }
  for (const auto& [key, count] : hyp_counts.counts()) {
    auto it = max_ref.find(key);
    if (it != max_ref.end()) result.clipped += std::min(count, it->second);
  }
  return result;
}

BleuReference::BleuReference(const Corpus& reference, int max_order)
    : max_counts_(static_cast<std::size_t>(max_order)) {
  if (reference.empty()) throw DataError("BLEU reference corpus is empty");
  for (const auto& s : reference.sentences()) {
    for (int order = 1; order <= max_order; ++order) {
      auto& table = max_counts_[static_cast<std::size_t>(order - 1)];
      const auto counts = count_ngrams(s, order);
      for (const auto& [key, count] : counts.counts()) {
        auto& slot = table[key];
        slot = std::max(slot, count);
      }
    }
    lengths_.push_back(s.size());
  }
  std::ranges::sort(lengths_);
  lengths_.erase(std::unique(lengths_.begin(), lengths_.end()), lengths_.end());
}

ClippedCount BleuReference::clip(const Sentence& hypothesis, int order) const {
  ClippedCount result;
  const auto n = static_cast<std::size_t>(order);
  if (hypothesis.size() < n) return result;
  result.total = static_cast<std::int64_t>(hypothesis.size() - n + 1);
  const auto& table = max_counts_.at(static_cast<std::size_t>(order - 1));
  const auto counts = count_ngrams(hypothesis, order);
  for (const auto& [key, count] : counts.counts()) {
    auto it = table.find(key);
    if (it != table.end()) result.clipped += std::min(count, it->second);
  }
  return result;
}

std::size_t BleuReference::closest_length(std::size_t length) const {
  auto it = std::ranges::lower_bound(lengths_, length);
  if (it == lengths_.end()) return lengths_.back();
  if (*it == length || it == lengths_.begin()) return *it;
  const std::size_t above = *it;
  const std::size_t below = *std::prev(it);
  return (above - length < length - below) ? above : below;
}

SentenceBleu sentence_bleu(const Sentence& hypothesis, const BleuReference& ref,
                           const BleuConfig& cfg) {
  SentenceBleu out;
  out.counts.reserve(static_cast<std::size_t>(cfg.max_order));
  for (int order = 1; order <= cfg.max_order; ++order) {
    out.counts.push_back(ref.clip(hypothesis, order));
  }
  // A zero-length hypothesis has an infinite brevity penalty exponent.
  if (hypothesis.empty()) return out;

  const double c = static_cast<double>(hypothesis.size());
  const double r = static_cast<double>(ref.closest_length(hypothesis.size()));
  out.brevity_penalty = c < r ? std::exp(1.0 - r / c) : 1.0;

  double log_sum = 0.0;
  for (const auto& counts : out.counts) {
    double precision = counts.total > 0 ? static_cast<double>(counts.clipped) /
                                              static_cast<double>(counts.total)
                                        : 0.0;
    if (precision == 0.0) {
      if (cfg.smoothing == Smoothing::kNone) return out;
      precision = cfg.epsilon;
    }
    log_sum += std::log(precision);
  }
  out.score = out.brevity_penalty *
              std::exp(log_sum / static_cast<double>(cfg.max_order));
  return out;
}

BleuResult corpus_bleu(const Corpus& samples, const BleuReference& reference,
                       const BleuConfig& cfg) {
  cfg.validate();
  if (samples.empty()) throw DataError("BLEU sample corpus is empty");
  if (reference.max_order() < cfg.max_order) {
    throw UsageError("BLEU reference was built for a lower max order");
  }
  const auto orders = static_cast<std::size_t>(cfg.max_order);
  BleuResult result;
  result.sentences = samples.size();
  result.mean_precision.assign(orders, 0.0);
  result.clipped.assign(orders, 0);
  result.total.assign(orders, 0);

  double score_sum = 0.0;
  double bp_sum = 0.0;
  for (const auto& hyp : samples.sentences()) {
    const auto s = sentence_bleu(hyp, reference, cfg);
    score_sum += s.score;
    bp_sum += s.brevity_penalty;
    for (std::size_t k = 0; k < orders; ++k) {
      result.clipped[k] += s.counts[k].clipped;
      result.total[k] += s.counts[k].total;
      if (s.counts[k].total > 0) {
        result.mean_precision[k] += static_cast<double>(s.counts[k].clipped) /
                                    static_cast<double>(s.counts[k].total);
      }
    }
  }
  const double n = static_cast<double>(samples.size());
  result.score = score_sum / n;
  result.mean_brevity_penalty = bp_sum / n;
  for (auto& p : result.mean_precision) p /= n;
  return result;
}

BleuResult corpus_bleu(const Corpus& samples, const Corpus& reference,
                       const BleuConfig& cfg) {
  cfg.validate();
  if (samples.empty()) throw DataError("BLEU sample corpus is empty");
  return corpus_bleu(samples, BleuReference(reference, cfg.max_order), cfg);
}

BleuResult self_bleu(const Corpus& set_a, const Corpus& set_b,
                     const BleuConfig& cfg) {
  return corpus_bleu(set_a, set_b, cfg);
}

std::size_t unique_ngrams(const Corpus& c, int order) {
  return count_ngrams(c, order).distinct();
}

}  // namespace tgeval
