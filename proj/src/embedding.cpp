#include "pme/embedding.hpp"

#include <algorithm>
#include <cmath>

namespace pme
{

Embedding embed(const SnapshotSet& set, const ModalBasis& basis, const DiscreteShape& shape)
{
  if (basis.provenance_hash != set.content_hash())
  {
    throw ProvenanceError("embed: basis was not solved from this snapshot set");
  }
  const Eigen::VectorXd gw3 = shape.metric3();
  if (gw3.size() != set.D.rows())
  {
    throw DimensionError("embed: shape does not conform to snapshot set");
  }

  Embedding emb;
  emb.basis = basis;
  const int N = basis.retained;
  const auto Zn = basis.modes.leftCols(N);

  // Training projections; the zero weight on the design-variable block
  // reduces the augmented projection to the geometric one.
  const Eigen::MatrixXd alpha = Zn.transpose() * (gw3.asDiagonal() * set.D);  // N x S
  emb.x_lower = alpha.rowwise().minCoeff();
  emb.x_upper = alpha.rowwise().maxCoeff();

  // Closed-form embedding: V = (1/S) U D^T (G W) Z L^{-1} on the retained
  // spectrum.
  emb.V = (set.U * alpha.transpose()) / static_cast<double>(set.samples);
  for (int k = 0; k < N; ++k)
  {
    emb.V.col(k) /= basis.eigenvalues(k);
  }

  emb.mean_u = set.mean_u;
  emb.u_lower = set.u_lower;
  emb.u_upper = set.u_upper;
  emb.provenance_hash = set.content_hash();
  return emb;
}

DesignVector reconstruct_u(const Embedding& emb, const ReducedVector& x)
{
  if (x.values.size() != emb.retained())
  {
    throw DimensionError("reconstruct_u: latent vector length " +
                         std::to_string(x.values.size()) + " does not match N = " +
                         std::to_string(emb.retained()));
  }
  return {emb.mean_u + emb.V * x.values, emb.u_lower, emb.u_upper};
}

double bound_violation(const DesignVector& u_hat)
{
  if (u_hat.lower.size() != u_hat.values.size() || u_hat.upper.size() != u_hat.values.size())
  {
    throw DimensionError("bound_violation: missing or mismatched bounds");
  }
  double acc = 0.0;
  for (Eigen::Index j = 0; j < u_hat.values.size(); ++j)
  {
    acc += std::max({u_hat.lower(j) - u_hat.values(j), u_hat.values(j) - u_hat.upper(j), 0.0});
  }
  return acc;
}

AugmentedEigenSolution solve_pme_direct(const SnapshotSet& set, const DiscreteShape& shape,
                                        double confidence, Eigen::Index size_cap)
{
  const Eigen::Index rows3L = set.D.rows();
  const Eigen::Index M = set.U.rows();
  const Eigen::Index n = rows3L + M;
  if (n > size_cap)
  {
    throw ValidationError("solve_pme_direct: augmented size " + std::to_string(n) +
                          " exceeds the oracle cap " + std::to_string(size_cap));
  }
  const Eigen::VectorXd gw3 = shape.metric3();
  if (gw3.size() != rows3L)
  {
    throw DimensionError("solve_pme_direct: shape does not conform to snapshot set");
  }

  // T = (1/S) P P^T diag(G, I) diag(W, 0): the design-variable block only
  // contributes zero columns, so the nonzero spectrum is the geometric one.
  const double S = static_cast<double>(set.samples);
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
  T.topLeftCorner(rows3L, rows3L) = (set.D * (set.D.transpose() * gw3.asDiagonal())) / S;
  T.bottomLeftCorner(M, rows3L) = (set.U * (set.D.transpose() * gw3.asDiagonal())) / S;

  Eigen::EigenSolver<Eigen::MatrixXd> eig(T);
  if (eig.info() != Eigen::Success)
  {
    throw SpectrumError("solve_pme_direct: eigensolver failed");
  }

  // Nonzero eigenvalues of this problem are real; discard imaginary noise
  // after checking it is noise-sized.
  const Eigen::VectorXcd vals = eig.eigenvalues();
  const double scale = vals.cwiseAbs().maxCoeff();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
  {
    order[static_cast<std::size_t>(i)] = i;
  }
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return vals(a).real() > vals(b).real(); });

  AugmentedEigenSolution out;
  out.eigenvalues.resize(n);
  out.vectors.resize(n, n);
  out.geometry_rows = rows3L;
  for (Eigen::Index i = 0; i < n; ++i)
  {
    const Eigen::Index src = order[static_cast<std::size_t>(i)];
    const std::complex<double> lambda = vals(src);
    if (std::abs(lambda.imag()) > 1.0e-8 * std::max(scale, 1.0) &&
        std::abs(lambda.real()) > 1.0e-10 * std::max(scale, 1.0))
    {
      throw SpectrumError("solve_pme_direct: unexpected complex eigenvalue");
    }
    out.eigenvalues(i) = lambda.real();
    out.vectors.col(i) = eig.eigenvectors().col(src).real();
  }

  const double sigma2 = out.eigenvalues.array().max(0.0).sum();
  const double target = confidence * sigma2 * (1.0 - 1.0e-12);
  double cum = 0.0;
  out.retained = 0;
  for (Eigen::Index k = 0; k < n; ++k)
  {
    if (out.eigenvalues(k) <= 1.0e-12 * out.eigenvalues(0))
    {
      break;
    }
    cum += out.eigenvalues(k);
    out.retained = static_cast<int>(k) + 1;
    if (cum >= target)
    {
      break;
    }
  }
  return out;
}

Eigen::VectorXd normalize_augmented_mode(const Eigen::VectorXd& column,
                                         const DiscreteShape& shape)
{
  const Eigen::VectorXd gw3 = shape.metric3();
  const Eigen::Index rows3L = gw3.size();
  if (column.size() < rows3L)
  {
    throw DimensionError("normalize_augmented_mode: column shorter than geometry block");
  }
  const auto geom = column.head(rows3L);
  const double norm2 = (geom.array().square() * gw3.array()).sum();
  if (!(norm2 > 0.0))
  {
    throw SpectrumError("normalize_augmented_mode: zero geometry block");
  }
  Eigen::VectorXd scaled = column / std::sqrt(norm2);
  // Same sign convention as the modal basis, applied to the geometry block.
  Eigen::Index arg = 0;
  double best = 0.0;
  for (Eigen::Index i = 0; i < rows3L; ++i)
  {
    const double a = std::abs(scaled(i));
    if (a > best)
    {
      best = a;
      arg = i;
    }
  }
  if (scaled(arg) < 0.0)
  {
    scaled = -scaled;
  }
  return scaled;
}

Eigen::VectorXd nse_per_sample_augmented(const Embedding& emb, const SnapshotSet& set,
                                         const DiscreteShape& shape, int n_modes)
{
  if (n_modes < 0 || n_modes > emb.retained())
  {
    throw ValidationError("nse_per_sample_augmented: mode count out of range");
  }
  const Eigen::Index rows3L = set.D.rows();
  const Eigen::Index M = set.U.rows();
  const Eigen::VectorXd gw3 = shape.metric3();
  if (gw3.size() != rows3L || emb.basis.modes.rows() != rows3L)
  {
    throw DimensionError("nse_per_sample_augmented: set/shape/embedding do not conform");
  }

  // Stacked data and modes with the zero-weighted design-variable block,
  // assembled literally.
  Eigen::MatrixXd P(rows3L + M, set.samples);
  P.topRows(rows3L) = set.D;
  P.bottomRows(M) = set.U;
  Eigen::MatrixXd Zt(rows3L + M, n_modes);
  Zt.topRows(rows3L) = emb.basis.modes.leftCols(n_modes);
  Zt.bottomRows(M) = emb.V.leftCols(n_modes);
  Eigen::VectorXd gw_aug(rows3L + M);
  gw_aug.head(rows3L) = gw3;
  gw_aug.tail(M).setZero();

  const Eigen::MatrixXd coords = Zt.transpose() * (gw_aug.asDiagonal() * P);  // n x S
  double denom = 0.0;
  Eigen::VectorXd errs(set.samples);
  for (Eigen::Index j = 0; j < set.samples; ++j)
  {
    const Eigen::VectorXd resid = P.col(j) - Zt * coords.col(j);
    errs(j) = (resid.head(rows3L).array().square() * gw3.array()).sum();
    denom += (P.col(j).head(rows3L).array().square() * gw3.array()).sum();
  }
  denom /= static_cast<double>(set.samples);
  if (!(denom > 0.0))
  {
    throw SpectrumError("nse_per_sample_augmented: snapshot set has zero energy");
  }
  return errs / denom;
}

}  // namespace pme
