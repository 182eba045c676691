#ifndef PME_KLEPCA_HPP
#define PME_KLEPCA_HPP

#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "pme/geometry.hpp"
#include "pme/sampling.hpp"

namespace pme
{

// Geometric modal basis from the weighted PCA of a snapshot set. Modes are
// normalized to Z^T (G W) Z = I and signed so each column's
// largest-magnitude entry is positive (ties broken by lowest index).
struct ModalBasis
{
  Eigen::MatrixXd modes;        // 3L x rank
  Eigen::VectorXd eigenvalues;  // rank, descending, strictly positive
  double sigma2 = 0.0;          // total geometric variance (spectrum trace)
  int retained = 0;             // N: minimal count covering confidence * sigma2
  double confidence = 0.0;      // l used for N selection
  std::uint64_t provenance_hash = 0;
  std::string normalization = "Zt*G*W*Z=I";
  std::string sign_convention = "max-abs-entry-positive";

  int rank() const { return static_cast<int>(eigenvalues.size()); }
};

// Latent coordinates in a modal basis.
struct ReducedVector
{
  Eigen::VectorXd values;
};

// Solves the generalized PCA eigenproblem of the snapshot covariance via
// the symmetric S x S snapshot Gram problem (method of snapshots), keeping
// the nonzero spectrum. N is the minimal count with cumulative variance at
// least l * sigma2 (equality at machine precision counts).
ModalBasis solve_kle(const SnapshotSet& set, const DiscreteShape& shape, double confidence);

// x_k = z_k^T (G W) d_hat for the retained modes; d_hat must be centered.
ReducedVector project(const ModalBasis& basis, const DisplacementField& d_hat,
                      const DiscreteShape& shape);

// mean_delta + sum_k x_k z_k; accepts any x no longer than the retained
// count.
DisplacementField reconstruct_shape(const ModalBasis& basis, const ReducedVector& x,
                                    const Eigen::VectorXd& mean_delta);

// Normalized mean squared reconstruction error of the training set with the
// leading n_modes modes: sum_j ||d_j - rec_j||^2 / sum_j ||d_j||^2 in the
// weighted metric.
double nmse(const ModalBasis& basis, const SnapshotSet& set, const DiscreteShape& shape,
            int n_modes);

// Per-sample normalized squared error: ||d_j - rec_j||^2 / (sum_j ||d_j||^2 / S).
Eigen::VectorXd nse_per_sample(const ModalBasis& basis, const SnapshotSet& set,
                               const DiscreteShape& shape, int n_modes);

}  // namespace pme

#endif  // PME_KLEPCA_HPP
