#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "tgeval/corpus.hpp"
#include "tgeval/rng.hpp"

namespace tgeval {

/// One row per sentence; every entry finite.
struct EmbeddingSet {
  Eigen::MatrixXd vectors;
  std::string source_tag;

  Eigen::Index dim() const { return vectors.cols(); }
  Eigen::Index size() const { return vectors.rows(); }
};

/// Parses "<N> <dim>" followed by N rows of dim reals.
EmbeddingSet parse_embeddings(std::string_view text,
                              std::string source_tag = "memory");
EmbeddingSet load_embeddings(const std::filesystem::path& path);

/// Writes the same text format with 17 significant digits (exact round trip).
std::string format_embeddings(const EmbeddingSet& e);
void save_embeddings(const EmbeddingSet& e, const std::filesystem::path& path);

enum class Pooling { kMean, kMax };

Pooling parse_pooling(std::string_view name);

struct HashEmbedderConfig {
  int dim = 256;
  Pooling pooling = Pooling::kMean;
  bool use_bigrams = true;
  RngSeed seed{};

  void validate() const;
};

std::uint64_t fnv1a64(std::string_view bytes);

/// Pseudo-Gaussian vector of a token or bigram ("left right"). FNV-1a of the
/// feature, xored with the mixed config seed, starts a splitmix64 stream that
/// Box-Muller turns into `dim` standard normals.
Eigen::VectorXd feature_vector(std::string_view feature,
                               const HashEmbedderConfig& cfg);

/// Mean- or max-pools the token (and bigram) feature vectors of every
/// sentence. Empty sentences map to the zero vector.
EmbeddingSet hash_embed_corpus(const Corpus& c, const HashEmbedderConfig& cfg);

}  // namespace tgeval
