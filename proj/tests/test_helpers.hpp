#ifndef PME_TEST_HELPERS_HPP
#define PME_TEST_HELPERS_HPP

#include <random>

#include <Eigen/Dense>

#include "pme/geometry.hpp"

namespace pme::test
{

// Seeded uniform in [lo, hi); fixed mapping so expected values are stable.
inline double uniform(std::mt19937_64& rng, double lo = 0.0, double hi = 1.0)
{
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

inline Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index n, double lo = -1.0,
                                     double hi = 1.0)
{
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i)
  {
    v(i) = uniform(rng, lo, hi);
  }
  return v;
}

// Small free-form shape with positive measures/weights on a rows x cols grid.
inline DiscreteShape random_shape(std::mt19937_64& rng, int rows, int cols)
{
  DiscreteShape s;
  const Eigen::Index L = static_cast<Eigen::Index>(rows) * cols;
  s.nodes.resize(L, 3);
  s.measures.resize(L);
  s.weights.resize(L);
  s.grid_rows = rows;
  s.grid_cols = cols;
  for (Eigen::Index i = 0; i < L; ++i)
  {
    s.nodes(i, 0) = uniform(rng, -1.0, 1.0);
    s.nodes(i, 1) = uniform(rng, -1.0, 1.0);
    s.nodes(i, 2) = uniform(rng, -1.0, 1.0);
    s.measures(i) = uniform(rng, 0.1, 2.0);
    s.weights(i) = uniform(rng, 0.1, 2.0);
  }
  return s;
}

// Axis-aligned unit cube surface as one structured grid: a closed ring of
// side walls (seam column duplicated) with the caps collapsed onto center
// points, so the panel surface is closed for volume summation.
inline DiscreteShape cube_surface(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi)
{
  DiscreteShape s;
  const int rows = 4;  // bottom center ring, bottom ring, top ring, top center ring
  const int cols = 5;  // 4 corners + seam
  s.nodes.resize(rows * cols, 3);
  s.grid_rows = rows;
  s.grid_cols = cols;
  const double cx = 0.5 * (lo.x() + hi.x());
  const double cy = 0.5 * (lo.y() + hi.y());
  const double corners[5][2] = {{lo.x(), lo.y()},
                                {hi.x(), lo.y()},
                                {hi.x(), hi.y()},
                                {lo.x(), hi.y()},
                                {lo.x(), lo.y()}};
  for (int c = 0; c < cols; ++c)
  {
    s.nodes.row(0 * cols + c) << cx, cy, lo.z();
    s.nodes.row(1 * cols + c) << corners[c][0], corners[c][1], lo.z();
    s.nodes.row(2 * cols + c) << corners[c][0], corners[c][1], hi.z();
    s.nodes.row(3 * cols + c) << cx, cy, hi.z();
  }
  s.measures = uniform_measures(s.node_count());
  s.weights = uniform_weights(s.node_count());
  return s;
}

}  // namespace pme::test

#include "pme/sampling.hpp"

namespace pme::test
{

// Synthetic linear snapshot set: displacements are B u for a random B, with
// uniform designs in [-1, 1]^M. Used for eigenproblem oracles.
struct ToyProblem
{
  DiscreteShape shape;
  Eigen::MatrixXd B;  // 3L x M
  SnapshotSet set;
};

inline ToyProblem make_toy_problem(std::mt19937_64& rng, int L, int M, int S)
{
  ToyProblem toy;
  toy.shape = random_shape(rng, 1, L);
  toy.B = Eigen::MatrixXd(3 * L, M);
  for (Eigen::Index i = 0; i < toy.B.rows(); ++i)
  {
    for (Eigen::Index j = 0; j < toy.B.cols(); ++j)
    {
      toy.B(i, j) = uniform(rng, -1.0, 1.0);
    }
  }
  Eigen::MatrixXd U(M, S);
  for (Eigen::Index j = 0; j < S; ++j)
  {
    U.col(j) = random_vector(rng, M, -1.0, 1.0);
  }
  Eigen::MatrixXd D = toy.B * U;

  SnapshotSet& set = toy.set;
  set.mean_delta = D.rowwise().mean();
  set.mean_u = U.rowwise().mean();
  set.D = D.colwise() - set.mean_delta;
  set.U = U.colwise() - set.mean_u;
  set.u_lower = Eigen::VectorXd::Constant(M, -1.0);
  set.u_upper = Eigen::VectorXd::Constant(M, 1.0);
  set.seed = rng();
  set.samples = S;
  set.spec_hash = 0x70f1e5;
  return toy;
}

}  // namespace pme::test

#endif  // PME_TEST_HELPERS_HPP
