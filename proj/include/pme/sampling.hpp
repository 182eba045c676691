#ifndef PME_SAMPLING_HPP
#define PME_SAMPLING_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "pme/parameterization.hpp"

namespace pme
{

// Centered snapshot data: columns of D are displacement snapshots minus
// their mean, columns of U are the matching design vectors minus theirs.
struct SnapshotSet
{
  Eigen::MatrixXd D;           // 3L x S
  Eigen::MatrixXd U;           // M x S
  Eigen::VectorXd mean_delta;  // 3L
  Eigen::VectorXd mean_u;      // M
  Eigen::VectorXd u_lower;     // M, original box
  Eigen::VectorXd u_upper;     // M
  std::uint64_t seed = 0;
  Eigen::Index samples = 0;
  std::uint64_t spec_hash = 0;

  // Provenance fingerprint tying downstream artifacts to this set.
  std::uint64_t content_hash() const;
};

// S i.i.d. uniform draws from the design box. The generator is fixed by
// contract: std::mt19937_64 seeded as given, one draw per component in
// sample-major order, each mapped to [0,1) by taking the top 53 bits
// ((word >> 11) * 2^-53), so streams replicate across platforms.
std::vector<DesignVector> sample_designs(const ParameterizationSpec& spec, Eigen::Index S,
                                         std::uint64_t seed);

// Evaluates all deformations and assembles the centered matrices. Means are
// computed in a first pass and subtracted in a second.
SnapshotSet assemble(const ParameterizationSpec& spec, const DiscreteShape& baseline,
                     const std::vector<DesignVector>& designs, std::uint64_t seed);

// Sample geometric variance over the first S' snapshots, each checkpoint
// recentered on its own mean: sigma^2(S') = (1/S') sum_j ||d_j - m'||^2 in
// the weighted metric.
std::vector<std::pair<Eigen::Index, double>> variance_convergence(
    const SnapshotSet& set, const DiscreteShape& shape,
    const std::vector<Eigen::Index>& checkpoints);

}  // namespace pme

#endif  // PME_SAMPLING_HPP
