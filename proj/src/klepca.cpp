#include "pme/klepca.hpp"

#include <cmath>

namespace pme
{

namespace
{

constexpr double kRankCutoff = 1.0e-12;  // relative to the largest eigenvalue

// Flip each column so its largest-magnitude entry is positive; strict
// comparison keeps the lowest index on ties.
void fix_signs(Eigen::MatrixXd& modes)
{
  for (Eigen::Index k = 0; k < modes.cols(); ++k)
  {
    Eigen::Index arg = 0;
    double best = 0.0;
    for (Eigen::Index i = 0; i < modes.rows(); ++i)
    {
      const double a = std::abs(modes(i, k));
      if (a > best)
      {
        best = a;
        arg = i;
      }
    }
    if (modes(arg, k) < 0.0)
    {
      modes.col(k) = -modes.col(k);
    }
  }
}

}  // namespace

ModalBasis solve_kle(const SnapshotSet& set, const DiscreteShape& shape, double confidence)
{
  if (!(confidence > 0.0) || confidence > 1.0)
  {
    throw ValidationError("solve_kle: confidence must be in (0, 1]");
  }
  if (set.samples < 2)
  {
    throw ValidationError("solve_kle: need at least 2 snapshots");
  }
  const Eigen::VectorXd gw3 = shape.metric3();
  if (gw3.size() != set.D.rows())
  {
    throw DimensionError("solve_kle: shape does not conform to snapshot set");
  }

  // Method of snapshots: K = (1/S) D^T (G W) D shares the nonzero spectrum
  // of the 3L x 3L covariance problem and is symmetric positive
  // semidefinite. Modes are recovered as Z = D Y (S Lambda)^{-1/2}.
  const Eigen::Index S = set.samples;
  const Eigen::MatrixXd WD = gw3.asDiagonal() * set.D;
  Eigen::MatrixXd gram = (set.D.transpose() * WD) / static_cast<double>(S);
  gram = 0.5 * (gram + gram.transpose());  // enforce exact symmetry

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success)
  {
    throw SpectrumError("solve_kle: eigensolver failed");
  }
  const Eigen::VectorXd all = eig.eigenvalues();  // ascending
  const double lambda_max = all(S - 1);
  if (!(lambda_max > 0.0))
  {
    throw SpectrumError("solve_kle: snapshot matrix has no variance (degenerate spectrum)");
  }

  int rank = 0;
  for (Eigen::Index i = 0; i < S; ++i)
  {
    if (all(i) > kRankCutoff * lambda_max)
    {
      ++rank;
    }
  }

  ModalBasis basis;
  basis.sigma2 = all.sum();
  basis.eigenvalues.resize(rank);
  basis.modes.resize(set.D.rows(), rank);
  for (int k = 0; k < rank; ++k)
  {
    const Eigen::Index src = S - 1 - k;  // descending order
    const double lambda = all(src);
    basis.eigenvalues(k) = lambda;
    basis.modes.col(k) =
        set.D * eig.eigenvectors().col(src) / std::sqrt(static_cast<double>(S) * lambda);
  }
  fix_signs(basis.modes);

  // Minimal N with cumulative variance >= l * sigma2; tiny slack so exact
  // equality at machine precision counts as satisfied.
  const double target = confidence * basis.sigma2 * (1.0 - 1.0e-12);
  double cum = 0.0;
  basis.retained = rank;
  for (int k = 0; k < rank; ++k)
  {
    cum += basis.eigenvalues(k);
    if (cum >= target)
    {
      basis.retained = k + 1;
      break;
    }
  }
  basis.confidence = confidence;
  basis.provenance_hash = set.content_hash();
  return basis;
}

ReducedVector project(const ModalBasis& basis, const DisplacementField& d_hat,
                      const DiscreteShape& shape)
{
  const Eigen::VectorXd gw3 = shape.metric3();
  if (d_hat.size() != basis.modes.rows() || gw3.size() != basis.modes.rows())
  {
    throw DimensionError("project: field/shape do not conform to basis");
  }
  ReducedVector x;
  x.values = basis.modes.leftCols(basis.retained).transpose() *
             (gw3.asDiagonal() * d_hat.values);
  return x;
}

DisplacementField reconstruct_shape(const ModalBasis& basis, const ReducedVector& x,
                                    const Eigen::VectorXd& mean_delta)
{
  if (x.values.size() > basis.retained)
  {
    throw DimensionError("reconstruct_shape: more coordinates than retained modes");
  }
  if (mean_delta.size() != basis.modes.rows())
  {
    throw DimensionError("reconstruct_shape: mean field does not conform to basis");
  }
  return DisplacementField(mean_delta + basis.modes.leftCols(x.values.size()) * x.values);
}

namespace
{

// Weighted squared reconstruction residual per training sample with the
// leading n modes.
Eigen::VectorXd squared_residuals(const ModalBasis& basis, const SnapshotSet& set,
                                  const DiscreteShape& shape, int n_modes)
{
  if (n_modes < 0 || n_modes > basis.rank())
  {
    throw ValidationError("reconstruction error: mode count out of range");
  }
  const Eigen::VectorXd gw3 = shape.metric3();
  if (gw3.size() != set.D.rows() || set.D.rows() != basis.modes.rows())
  {
    throw DimensionError("reconstruction error: set/shape/basis do not conform");
  }
  const auto Zn = basis.modes.leftCols(n_modes);
  const Eigen::MatrixXd coords = Zn.transpose() * (gw3.asDiagonal() * set.D);  // n x S
  Eigen::VectorXd errs(set.samples);
  for (Eigen::Index j = 0; j < set.samples; ++j)
  {
    const Eigen::VectorXd resid = set.D.col(j) - Zn * coords.col(j);
    errs(j) = (resid.array().square() * gw3.array()).sum();
  }
  return errs;
}

double total_energy(const SnapshotSet& set, const DiscreteShape& shape)
{
  const Eigen::VectorXd gw3 = shape.metric3();
  double acc = 0.0;
  for (Eigen::Index j = 0; j < set.samples; ++j)
  {
    acc += (set.D.col(j).array().square() * gw3.array()).sum();
  }
  return acc;
}

}  // namespace

double nmse(const ModalBasis& basis, const SnapshotSet& set, const DiscreteShape& shape,
            int n_modes)
{
  const double denom = total_energy(set, shape);
  if (!(denom > 0.0))
  {
    throw SpectrumError("nmse: snapshot set has zero energy");
  }
  return squared_residuals(basis, set, shape, n_modes).sum() / denom;
}

Eigen::VectorXd nse_per_sample(const ModalBasis& basis, const SnapshotSet& set,
                               const DiscreteShape& shape, int n_modes)
{
  const double denom = total_energy(set, shape) / static_cast<double>(set.samples);
  if (!(denom > 0.0))
  {
    throw SpectrumError("nse_per_sample: snapshot set has zero energy");
  }
  return squared_residuals(basis, set, shape, n_modes) / denom;
}

}  // namespace pme
