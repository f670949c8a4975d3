#pragma once

// Naive BLEU: enumerates n-grams as token vectors and counts by linear scan.
// Shares no code with the library.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

namespace oracle {

using Tokens = std::vector<std::string>;

inline std::vector<Tokens> all_ngrams(const Tokens& s, int n) {
  std::vector<Tokens> out;
  for (int i = 0; i + n <= static_cast<int>(s.size()); ++i) {
    out.emplace_back(s.begin() + i, s.begin() + i + n);
  }
  return out;
}

inline long occurrences(const std::vector<Tokens>& grams, const Tokens& g) {
  return std::count(grams.begin(), grams.end(), g);
}

inline void clipped_precision(const Tokens& hyp, const std::vector<Tokens>& refs, int n,
                              long& clipped, long& total) {
  const auto hyp_grams = all_ngrams(hyp, n);
  total = static_cast<long>(hyp_grams.size());
  clipped = 0;
  std::vector<Tokens> done;
  for (const auto& g : hyp_grams) {
    if (std::find(done.begin(), done.end(), g) != done.end()) continue;
    done.push_back(g);
    long best = 0;
    for (const auto& r : refs) best = std::max(best, occurrences(all_ngrams(r, n), g));
    clipped += std::min(occurrences(hyp_grams, g), best);
  }
}

inline double sentence_bleu(const Tokens& hyp, const std::vector<Tokens>& refs, int max_order,
                            bool smooth, double epsilon) {
  if (hyp.empty()) return 0.0;
  double log_sum = 0.0;
  for (int n = 1; n <= max_order; ++n) {
    long clipped = 0, total = 0;
    clipped_precision(hyp, refs, n, clipped, total);
    double p = total == 0 ? 0.0 : static_cast<double>(clipped) / static_cast<double>(total);
    if (p == 0.0) {
      if (!smooth) return 0.0;
      p = epsilon;
    }
    log_sum += std::log(p);
  }
  const long c = static_cast<long>(hyp.size());
  long r = -1;
  for (const auto& ref : refs) {
    const long len = static_cast<long>(ref.size());
    if (r < 0 || std::labs(len - c) < std::labs(r - c) ||
        (std::labs(len - c) == std::labs(r - c) && len < r)) {
      r = len;
    }
  }
  const double bp = c < r ? std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c)) : 1.0;
  return bp * std::exp(log_sum / max_order);
}

inline double corpus_bleu(const std::vector<Tokens>& samples, const std::vector<Tokens>& refs,
                          int max_order, bool smooth, double epsilon) {
  double sum = 0.0;
  for (const auto& h : samples) sum += sentence_bleu(h, refs, max_order, smooth, epsilon);
  return sum / static_cast<double>(samples.size());
}

}  // namespace oracle
