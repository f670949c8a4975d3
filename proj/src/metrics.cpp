#include "tgeval/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "tgeval/errors.hpp"

namespace tgeval {

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::kFd: return "fd";
    case Metric::kBleu4: return "bleu4";
    case Metric::kSelfBleu4: return "self_bleu4";
    case Metric::kUnique4grams: return "unique_4grams";
    case Metric::kLmScore: return "lm_score";
    case Metric::kReverseLmScore: return "reverse_lm_score";
  }
  return "unknown";
}

Metric parse_metric(std::string_view name) {
  for (auto m : kAllMetrics) {
    if (metric_name(m) == name) return m;
  }
  if (name == "bleu") return Metric::kBleu4;
  if (name == "selfbleu" || name == "self_bleu") return Metric::kSelfBleu4;
  if (name == "ngrams" || name == "unique") return Metric::kUnique4grams;
  if (name == "lm") return Metric::kLmScore;
  if (name == "revlm" || name == "reverse_lm") return Metric::kReverseLmScore;
  throw UsageError("unknown metric '" + std::string(name) + "'");
}

std::vector<Metric> parse_metric_list(std::string_view list) {
  std::set<Metric> chosen;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    auto end = list.find(',', pos);
    if (end == std::string_view::npos) end = list.size();
    const auto item = list.substr(pos, end - pos);
    if (!item.empty()) chosen.insert(parse_metric(item));
    pos = end + 1;
  }
  if (chosen.empty()) throw UsageError("metric selection is empty");
  return {chosen.begin(), chosen.end()};
}

bool higher_is_better(Metric m) {
  return m == Metric::kBleu4 || m == Metric::kUnique4grams;
}

double objective_value(Metric m, double raw) { return higher_is_better(m) ? -raw : raw; }

MetricSuite::MetricSuite(Corpus reference, Corpus heldout, std::vector<Metric> metrics,
                         SuiteConfig cfg)
    : reference_(std::move(reference)),
      heldout_(std::move(heldout)),
      metrics_(std::move(metrics)),
      cfg_(cfg) {
  if (reference_.empty()) throw DataError("reference corpus is empty");
  if (metrics_.empty()) throw UsageError("metric selection is empty");
  std::ranges::sort(metrics_);
  metrics_.erase(std::unique(metrics_.begin(), metrics_.end()), metrics_.end());
  cfg_.bleu.validate();
  cfg_.embedder.validate();
  if (wants(Metric::kBleu4)) bleu_reference_.emplace(reference_, cfg_.bleu.max_order);
  if (wants(Metric::kFd)) {
    reference_stats_ = fit_gaussian(hash_embed_corpus(reference_, cfg_.embedder));
  }
  if (wants(Metric::kLmScore)) {
    real_lm_ = NGramModel::train(reference_, cfg_.lm_order, cfg_.lm_min_count);
  }
}

bool MetricSuite::wants(Metric m) const {
  return std::ranges::find(metrics_, m) != metrics_.end();
}

MetricValues MetricSuite::evaluate(const Corpus& samples, const Corpus* second_samples,
                                   RngSeed split_seed) const {
  if (samples.empty()) throw DataError("sample corpus is empty");
  MetricValues out;
  for (auto m : metrics_) {
    double value = 0.0;
    switch (m) {
      case Metric::kFd: {
        const auto stats = fit_gaussian(hash_embed_corpus(samples, cfg_.embedder));
        const auto fd = frechet_distance(*reference_stats_, stats);
        if (fd.jitter_applied) {
          char buf[96];
          std::snprintf(buf, sizeof buf, "fd: jitter %.3g added to near-singular covariance",
                        fd.jitter);
          out.notes.emplace_back(buf);
        }
        if (fd.eigenvalue_floor_hits > 0) {
          out.notes.push_back("fd: " + std::to_string(fd.eigenvalue_floor_hits) +
                              " negative eigenvalues clamped to zero");
        }
        value = fd.value;
        break;
      }
      case Metric::kBleu4:
        value = corpus_bleu(samples, *bleu_reference_, cfg_.bleu).score;
        break;
      case Metric::kSelfBleu4:
        if (second_samples != nullptr) {
          value = self_bleu(samples, *second_samples, cfg_.bleu).score;
        } else {
          if (samples.size() < 2) throw DataError("self-BLEU needs at least 2 samples to split");
          const auto [a, b] = split_corpus(samples, 0.5, split_seed);
          value = self_bleu(a, b, cfg_.bleu).score;
        }
        break;
      case Metric::kUnique4grams:
        value = static_cast<double>(unique_ngrams(samples, cfg_.ngram_order));
        break;
      case Metric::kLmScore:
        value = lm_score(*real_lm_, samples).per_token_ppl;
        break;
      case Metric::kReverseLmScore:
        value = reverse_lm_score(samples, heldout_.empty() ? reference_ : heldout_,
                                 cfg_.lm_order, cfg_.lm_min_count)
                    .per_token_ppl;
        break;
    }
    out.values.emplace(metric_name(m), value);
  }
  return out;
}

}  // namespace tgeval
