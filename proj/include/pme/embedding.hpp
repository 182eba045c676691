#ifndef PME_EMBEDDING_HPP
#define PME_EMBEDDING_HPP

#include <cstdint>

#include <Eigen/Dense>

#include "pme/klepca.hpp"

namespace pme
{

// Design-variable embedding attached to a geometric modal basis: one
// embedding vector per retained mode maps latent coordinates back to the
// original parameters, with empirical latent bounds covering every training
// sample.
struct Embedding
{
  ModalBasis basis;
  Eigen::MatrixXd V;         // M x N embedding vectors
  Eigen::VectorXd mean_u;    // M
  Eigen::VectorXd u_lower;   // M, original box
  Eigen::VectorXd u_upper;   // M
  Eigen::VectorXd x_lower;   // N, inf over training projections
  Eigen::VectorXd x_upper;   // N, sup over training projections
  std::uint64_t provenance_hash = 0;

  int dv_count() const { return static_cast<int>(mean_u.size()); }
  int retained() const { return basis.retained; }
};

// Builds the embedding by the closed form V = (1/S) U D^T (G W) Z L^{-1}
// over the retained modes, and latent bounds as componentwise inf/sup of
// the training projections. The basis must have been solved from the same
// snapshot set (provenance hashes are checked).
Embedding embed(const SnapshotSet& set, const ModalBasis& basis, const DiscreteShape& shape);

// u_hat = <u> + V x, carrying the original box bounds. The result may lie
// outside the box; that is what bound_violation measures.
DesignVector reconstruct_u(const Embedding& emb, const ReducedVector& x);

// sum_j max(lower_j - u_j, u_j - upper_j, 0); zero iff the point is inside
// the closed box.
double bound_violation(const DesignVector& u_hat);

// Dense eigensolve of the explicitly assembled augmented problem on the
// stacked data [D; U] with zero weight on the design-variable block. This
// is the verification oracle for embed, restricted to small instances.
struct AugmentedEigenSolution
{
  Eigen::VectorXd eigenvalues;  // 3L + M values, descending
  Eigen::MatrixXd vectors;      // (3L + M) x (3L + M), columns match order
  int retained = 0;             // N by the same cumulative-variance rule
  Eigen::Index geometry_rows = 0;
};
AugmentedEigenSolution solve_pme_direct(const SnapshotSet& set, const DiscreteShape& shape,
                                        double confidence, Eigen::Index size_cap = 600);

// Rescales an augmented eigenvector so its geometry block has unit weighted
// norm and carries the basis sign convention; returns the scaled column.
Eigen::VectorXd normalize_augmented_mode(const Eigen::VectorXd& column,
                                         const DiscreteShape& shape);

// Per-sample shape-reconstruction error computed through the augmented
// route: stacked snapshots projected with the zero-weighted block and
// reconstructed from the geometry blocks of [Z; V]. Matches the plain modal
// path to round-off; kept separate as an independent code path.
Eigen::VectorXd nse_per_sample_augmented(const Embedding& emb, const SnapshotSet& set,
                                         const DiscreteShape& shape, int n_modes);

}  // namespace pme

#endif  // PME_EMBEDDING_HPP
