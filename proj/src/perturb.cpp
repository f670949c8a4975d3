#include "tgeval/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "tgeval/errors.hpp"

namespace tgeval {

namespace {

void check_rate(double value, const char* what) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw UsageError(std::string(what) + " must lie in [0, 1]");
  }
}

Corpus with_sentences(const Corpus& like, std::vector<Sentence> sentences) {
  if (like.has_topics()) return Corpus(std::move(sentences), like.topics());
  return Corpus(std::move(sentences));
}

}  // namespace

void PerturbationConfig::validate() const {
  check_rate(dropout_p, "dropout probability");
  check_rate(swap_fraction, "swap fraction");
}

Corpus word_dropout(const Corpus& c, double p, RngSeed seed) {
  check_rate(p, "dropout probability");
  SplitMix64 rng(seed);
  std::vector<Sentence> out;
  out.reserve(c.size());
  for (const auto& s : c.sentences()) {
    Sentence kept;
    for (const auto& t : s.tokens) {
      if (rng.uniform() >= p) kept.tokens.push_back(t);
    }
    out.push_back(std::move(kept));
  }
  return with_sentences(c, std::move(out));
}

Corpus word_swap(const Corpus& c, double fraction, RngSeed seed) {
  check_rate(fraction, "swap fraction");
  SplitMix64 rng(seed);
  std::vector<Sentence> out;
  out.reserve(c.size());
  std::vector<std::size_t> positions;
  std::vector<std::string> selected;
  for (const auto& s : c.sentences()) {
    Sentence swapped = s;
    const std::size_t length = s.size();
    const auto k = static_cast<std::size_t>(
        std::floor(fraction * static_cast<double>(length) + 0.5));
    if (k > 1) {
      positions.resize(length);
      std::iota(positions.begin(), positions.end(), std::size_t{0});
      for (std::size_t i = 0; i < k; ++i) {
        std::swap(positions[i], positions[i + rng.below(length - i)]);
      }
      positions.resize(k);
      std::ranges::sort(positions);
      selected.clear();
      for (auto pos : positions) selected.push_back(s.tokens[pos]);
      for (std::size_t i = k; i > 1; --i) {
        std::swap(selected[i - 1], selected[rng.below(i)]);
      }
      for (std::size_t i = 0; i < k; ++i) {
        swapped.tokens[positions[i]] = std::move(selected[i]);
      }
    }
    out.push_back(std::move(swapped));
  }
  return with_sentences(c, std::move(out));
}

std::vector<std::size_t> sample_indices(std::size_t size, std::size_t n,
                                        bool with_replacement, SplitMix64& rng) {
  std::vector<std::size_t> indices;
  if (with_replacement) {
    indices.reserve(n);
    for (std::size_t i = 0; i < n; ++i) indices.push_back(rng.below(size));
    return indices;
  }
  if (n > size) throw UsageError("cannot draw more items than exist without replacement");
  indices.resize(size);
  std::iota(indices.begin(), indices.end(), std::size_t{0});
  for (std::size_t i = 0; i < n; ++i) {
    std::swap(indices[i], indices[i + rng.below(size - i)]);
  }
  indices.resize(n);
  return indices;
}

Corpus synthetic_sampler(const Corpus& reference, const PerturbationConfig& cfg,
                         std::size_t n) {
  cfg.validate();
  if (reference.empty()) throw DataError("synthetic sampler needs a nonempty reference");
  if (n == 0) throw UsageError("synthetic sampler needs n >= 1");
  SplitMix64 rng(derive_seed(cfg.seed, 0));
  const auto drawn = reference.select(sample_indices(reference.size(), n, true, rng));
  const auto dropped = word_dropout(drawn, cfg.dropout_p, derive_seed(cfg.seed, 1));
  return word_swap(dropped, cfg.swap_fraction, derive_seed(cfg.seed, 2));
}

}  // namespace tgeval
