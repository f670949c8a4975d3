#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "tgeval/corpus.hpp"
#include "tgeval/metrics.hpp"
#include "tgeval/rng.hpp"

namespace tgeval {

struct ModeDropOptions {
  std::size_t keep_k = 1;
  int repeats = 5;
  std::size_t sample_n = 2000;
  RngSeed seed{};
  int parallelism = 1;
};

struct ModeDropRepeat {
  std::vector<std::string> topics;  // the kept topics, sorted
  bool with_replacement = false;
  MetricValues metrics;
};

struct ModeDropReport {
  std::size_t keep_k = 0;
  std::size_t sample_n = 0;
  std::map<std::string, double> mean;  // per metric, over repeats
  std::vector<ModeDropRepeat> repeats;
};

/// Emulates mode dropping: each repeat keeps keep_k random topics of the
/// topic-labelled training corpus, draws a fixed-size sample from what is
/// left and scores it against the full-topic reference held by `suite`.
/// Sampling falls back to with-replacement when the filtered corpus is
/// smaller than sample_n; the repeat records this.
ModeDropReport mode_drop_eval(const Corpus& train, const MetricSuite& suite,
                              const ModeDropOptions& options);

}  // namespace tgeval
