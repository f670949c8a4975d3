#pragma once

#include <cstddef>

#include "tgeval/corpus.hpp"
#include "tgeval/rng.hpp"

namespace tgeval {

struct PerturbationConfig {
  double dropout_p = 0.0;
  double swap_fraction = 0.0;
  RngSeed seed{};

  void validate() const;
};

/// Removes each token independently with probability p. Sentences that end
/// up empty stay in the corpus; topics are untouched.
Corpus word_dropout(const Corpus& c, double p, RngSeed seed);

/// Per sentence of length L, picks k = round(fraction * L) positions without
/// replacement and shuffles the tokens among them. k <= 1 leaves the
/// sentence as is.
Corpus word_swap(const Corpus& c, double fraction, RngSeed seed);

/// Bootstrap-resamples n sentences from the reference, then applies
/// word_dropout and word_swap. (0, 0) reproduces the reference distribution.
Corpus synthetic_sampler(const Corpus& reference, const PerturbationConfig& cfg,
                         std::size_t n);

/// n indices drawn uniformly from [0, size): without replacement when
/// n <= size, with replacement otherwise.
std::vector<std::size_t> sample_indices(std::size_t size, std::size_t n,
                                        bool with_replacement, SplitMix64& rng);

}  // namespace tgeval
