#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tgeval/corpus.hpp"
#include "tgeval/embedding.hpp"
#include "tgeval/frechet.hpp"
#include "tgeval/lm.hpp"
#include "tgeval/ngram_metrics.hpp"

namespace tgeval {

/// The metric set, in canonical (report column) order.
enum class Metric { kFd, kBleu4, kSelfBleu4, kUnique4grams, kLmScore, kReverseLmScore };

inline constexpr Metric kAllMetrics[] = {
    Metric::kFd,           Metric::kBleu4,   Metric::kSelfBleu4,
    Metric::kUnique4grams, Metric::kLmScore, Metric::kReverseLmScore};

std::string_view metric_name(Metric m);
/// Accepts canonical names plus short aliases (bleu, selfbleu, ngrams, lm,
/// revlm). Throws UsageError on anything else.
Metric parse_metric(std::string_view name);
/// Comma-separated list, deduplicated, returned in canonical order.
std::vector<Metric> parse_metric_list(std::string_view list);
bool higher_is_better(Metric m);
/// Value rescaled so that lower is always better.
double objective_value(Metric m, double raw);

struct SuiteConfig {
  HashEmbedderConfig embedder{};
  BleuConfig bleu{};
  int ngram_order = 4;
  int lm_order = 4;
  int lm_min_count = 1;
};

struct MetricValues {
  std::map<std::string, double> values;
  /// Numerical interventions worth surfacing (jitter, eigenvalue clamps).
  std::vector<std::string> notes;
};

/// Computes a fixed selection of metrics for sample sets against one
/// reference and one held-out corpus. Everything derived from the real data
/// (BLEU reference tables, Gaussian fit, real-data LM) is built once.
class MetricSuite {
 public:
  /// `heldout` may be empty, in which case the reference doubles as held-out
  /// text for the reverse LM score.
  MetricSuite(Corpus reference, Corpus heldout, std::vector<Metric> metrics,
              SuiteConfig cfg = {});

  const std::vector<Metric>& metrics() const { return metrics_; }
  bool wants(Metric m) const;
  const SuiteConfig& config() const { return cfg_; }
  const Corpus& reference() const { return reference_; }

  /// `second_samples` feeds self-BLEU; without it the samples are split in
  /// half with `split_seed`.
  MetricValues evaluate(const Corpus& samples, const Corpus* second_samples = nullptr,
                        RngSeed split_seed = {}) const;

 private:
  Corpus reference_;
  Corpus heldout_;
  std::vector<Metric> metrics_;
  SuiteConfig cfg_;
  std::optional<BleuReference> bleu_reference_;
  std::optional<GaussianStats> reference_stats_;
  std::optional<NGramModel> real_lm_;
};

}  // namespace tgeval
