#include "tgeval/mode_drop.hpp"

#include <algorithm>
#include <set>

#include "tgeval/errors.hpp"
#include "tgeval/parallel.hpp"
#include "tgeval/perturb.hpp"

namespace tgeval {

ModeDropReport mode_drop_eval(const Corpus& train, const MetricSuite& suite,
                              const ModeDropOptions& options) {
  if (!train.has_topics()) throw DataError("mode-drop training corpus has no topics");
  if (options.repeats < 1) throw UsageError("mode-drop repeats must be at least 1");
  if (options.sample_n < 1) throw UsageError("mode-drop sample size must be at least 1");
  const auto all_topics = train.topic_set();
  if (options.keep_k < 1 || options.keep_k > all_topics.size()) {
    throw UsageError("keep_k=" + std::to_string(options.keep_k) + " but the corpus has " +
                     std::to_string(all_topics.size()) + " topics");
  }

  ModeDropReport report;
  report.keep_k = options.keep_k;
  report.sample_n = options.sample_n;
  report.repeats.resize(static_cast<std::size_t>(options.repeats));

  parallel_for(report.repeats.size(), options.parallelism, [&](std::size_t r) {
    const auto repeat_seed = derive_seed(options.seed, r);
    SplitMix64 rng(derive_seed(repeat_seed, 0));
    const auto chosen = sample_indices(all_topics.size(), options.keep_k, false, rng);
    std::set<std::string> keep;
    for (auto i : chosen) keep.insert(all_topics[i]);

    const auto filtered = filter_topics(train, keep).corpus;
    auto& out = report.repeats[r];
    out.topics.assign(keep.begin(), keep.end());
    out.with_replacement = options.sample_n > filtered.size();
    SplitMix64 draw(derive_seed(repeat_seed, 1));
    const auto samples = filtered.select(
        sample_indices(filtered.size(), options.sample_n, out.with_replacement, draw));
    out.metrics = suite.evaluate(samples, nullptr, derive_seed(repeat_seed, 2));
  });

  for (auto m : suite.metrics()) {
    const std::string name(metric_name(m));
    double sum = 0.0;
    for (const auto& rep : report.repeats) sum += rep.metrics.values.at(name);
    report.mean[name] = sum / static_cast<double>(report.repeats.size());
  }
  return report;
}

}  // namespace tgeval
