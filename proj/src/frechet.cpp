#include "tgeval/frechet.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "tgeval/errors.hpp"

namespace tgeval {

namespace {

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

// Clamps eigenvalues in place. Returns the number clamped.
int floor_eigenvalues(Eigen::VectorXd& eigenvalues) {
  const double scale = eigenvalues.cwiseAbs().maxCoeff();
  int clamped = 0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    if (eigenvalues(i) >= 0.0) continue;
    if (eigenvalues(i) < -kNegativeEigenTolerance * scale) {
      throw NumericalError("matrix is not positive semidefinite: eigenvalue " +
                           std::to_string(eigenvalues(i)) + " vs scale " +
                           std::to_string(scale));
    }
    eigenvalues(i) = 0.0;
    ++clamped;
  }
  return clamped;
}

void check_square_symmetric(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw NumericalError("matrix is not square");
  if (m.size() == 0) return;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asymmetry = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asymmetry > kSymmetryTolerance * scale) {
    throw NumericalError("matrix is not symmetric (max asymmetry " +
                         std::to_string(asymmetry) + ")");
  }
}

bool near_singular(const Eigen::MatrixXd& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov, Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();  // ascending
  return ev(0) < kSingularityRatio * ev(ev.size() - 1);
}

}  // namespace

GaussianStats fit_gaussian(const Eigen::MatrixXd& rows) {
  if (rows.rows() < 2) {
    throw DataError("need at least 2 embeddings to fit a Gaussian, got " +
                    std::to_string(rows.rows()));
  }
  GaussianStats stats;
  stats.n = static_cast<std::size_t>(rows.rows());
  stats.mean = rows.colwise().mean().transpose();
  const Eigen::MatrixXd centered = rows.rowwise() - stats.mean.transpose();
  stats.cov = symmetrized((centered.transpose() * centered) /
                          static_cast<double>(rows.rows() - 1));
  return stats;
}

GaussianStats fit_gaussian(const EmbeddingSet& e) { return fit_gaussian(e.vectors); }

SqrtmResult sqrtm_psd_detailed(const Eigen::MatrixXd& m) {
  check_square_symmetric(m);
  SqrtmResult result;
  if (m.size() == 0) return result;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetrized(m));
  if (solver.info() != Eigen::Success) {
    throw NumericalError("symmetric eigendecomposition did not converge");
  }
  Eigen::VectorXd eigenvalues = solver.eigenvalues();
  result.min_eigenvalue = eigenvalues.minCoeff();
  result.clamped_eigenvalues = floor_eigenvalues(eigenvalues);
  const auto& q = solver.eigenvectors();
  result.root = symmetrized(q * eigenvalues.cwiseSqrt().asDiagonal() * q.transpose());
  return result;
}

Eigen::MatrixXd sqrtm_psd(const Eigen::MatrixXd& m) {
  return sqrtm_psd_detailed(m).root;
}

FrechetResult frechet_distance(const GaussianStats& r, const GaussianStats& g) {
  if (r.dim() != g.dim() || r.cov.rows() != r.dim() || g.cov.rows() != g.dim()) {
    throw UsageError("Frechet distance dimension mismatch: " +
                     std::to_string(r.dim()) + " vs " + std::to_string(g.dim()));
  }
  FrechetResult result;
  Eigen::MatrixXd cov_r = r.cov;
  Eigen::MatrixXd cov_g = g.cov;
  if (near_singular(cov_r) || near_singular(cov_g)) {
    const auto dim = static_cast<double>(r.dim());
    result.jitter = kJitterScale * (cov_r.trace() + cov_g.trace()) / (2.0 * dim);
    result.jitter_applied = true;
    cov_r.diagonal().array() += result.jitter;
    cov_g.diagonal().array() += result.jitter;
  }

  // Tr((S_r S_g)^{1/2}) equals the sum of singular values of
  // sqrtm(S_r) * sqrtm(S_g): the eigenvalues of S_r S_g are those of
  // (A B)(A B)^T for A = sqrtm(S_r), B = sqrtm(S_g). Singular values keep
  // absolute accuracy where an eigendecomposition of A S_g A followed by a
  // square root would amplify rounding in the small eigenvalues.
  const auto root_r = sqrtm_psd_detailed(cov_r);
  const auto root_g = sqrtm_psd_detailed(cov_g);
  result.eigenvalue_floor_hits = root_r.clamped_eigenvalues + root_g.clamped_eigenvalues;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(root_r.root * root_g.root);
  const double cross = svd.singularValues().sum();

  result.mean_term = (r.mean - g.mean).squaredNorm();
  result.trace_term = cov_r.trace() + cov_g.trace() - 2.0 * cross;
  result.raw = result.mean_term + result.trace_term;
  result.value = result.raw;
  if (result.raw < 0.0) {
    const double tolerance =
        kNegativeResultTolerance * std::max(1.0, cov_r.trace() + cov_g.trace());
    if (-result.raw > tolerance) {
      throw NumericalError("Frechet distance is negative beyond rounding: " +
                           std::to_string(result.raw));
    }
    result.value = 0.0;
  }
  return result;
}

}  // namespace tgeval
