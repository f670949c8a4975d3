#pragma once

#include <cstddef>

#include <Eigen/Core>

#include "tgeval/embedding.hpp"

namespace tgeval {

/// Mean and unbiased covariance of an embedding set.
struct GaussianStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  std::size_t n = 0;

  Eigen::Index dim() const { return mean.size(); }
};

/// Column mean and (n-1)-normalized covariance, symmetrized. Requires n >= 2.
GaussianStats fit_gaussian(const Eigen::MatrixXd& rows);
GaussianStats fit_gaussian(const EmbeddingSet& e);

struct SqrtmResult {
  Eigen::MatrixXd root;
  /// Eigenvalues below zero that were treated as rounding noise.
  int clamped_eigenvalues = 0;
  double min_eigenvalue = 0.0;
};

// Tolerances shared by sqrtm_psd and frechet_distance.
inline constexpr double kSymmetryTolerance = 1e-8;
inline constexpr double kNegativeEigenTolerance = 1e-6;
inline constexpr double kSingularityRatio = 1e-10;
inline constexpr double kJitterScale = 1e-6;
inline constexpr double kNegativeResultTolerance = 1e-8;

/// Principal square root of a symmetric PSD matrix through a symmetric
/// eigendecomposition. Eigenvalues in [-1e-6 * max|lambda|, 0) are clamped
/// to zero; anything more negative throws NumericalError, as does an
/// asymmetric input.
SqrtmResult sqrtm_psd_detailed(const Eigen::MatrixXd& m);
Eigen::MatrixXd sqrtm_psd(const Eigen::MatrixXd& m);

struct FrechetResult {
  double value = 0.0;  // clamped at zero
  double raw = 0.0;    // before clamping
  double mean_term = 0.0;
  double trace_term = 0.0;
  bool jitter_applied = false;
  double jitter = 0.0;
  int eigenvalue_floor_hits = 0;
};

/// ||mu_r - mu_g||^2 + Tr(S_r + S_g - 2 (S_r S_g)^{1/2}). The cross term is
/// evaluated through symmetric square roots only, so the result is real and
/// symmetric in its arguments up to rounding. If either covariance has
/// smallest/largest eigenvalue below 1e-10, both get 1e-6 * mean(diag) added
/// to their diagonals and the result records it.
FrechetResult frechet_distance(const GaussianStats& r, const GaussianStats& g);

}  // namespace tgeval
