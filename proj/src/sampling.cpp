#include "pme/sampling.hpp"

#include <random>

#include "pme/io.hpp"

namespace pme
{

std::uint64_t SnapshotSet::content_hash() const
{
  std::string key = "snapshots:";
  key += std::to_string(seed);
  key += ':';
  key += std::to_string(samples);
  key += ':';
  key += std::to_string(D.rows());
  key += ':';
  key += std::to_string(U.rows());
  key += ':';
  key += io::hash_hex(spec_hash);
  return io::fnv1a64(key);
}

std::vector<DesignVector> sample_designs(const ParameterizationSpec& spec, Eigen::Index S,
                                         std::uint64_t seed)
{
  if (S < 2)
  {
    throw ValidationError("sample_designs: need at least 2 samples");
  }
  std::mt19937_64 rng(seed);
  const int M = spec.dv_count();
  std::vector<DesignVector> designs;
  designs.reserve(static_cast<std::size_t>(S));
  for (Eigen::Index s = 0; s < S; ++s)
  {
    Eigen::VectorXd v(M);
    for (int m = 0; m < M; ++m)
    {
      // Top 53 bits to [0,1); avoids the unspecified distribution adaptors.
      const double r = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      v(m) = spec.lower(m) + r * (spec.upper(m) - spec.lower(m));
    }
    designs.push_back(spec.design(std::move(v)));
  }
  return designs;
}

SnapshotSet assemble(const ParameterizationSpec& spec, const DiscreteShape& baseline,
                     const std::vector<DesignVector>& designs, std::uint64_t seed)
{
  if (designs.empty())
  {
    throw ValidationError("assemble: no designs");
  }
  const Eigen::Index S = static_cast<Eigen::Index>(designs.size());
  const Eigen::Index rows3L = 3 * baseline.node_count();
  const int M = spec.dv_count();

  SnapshotSet set;
  set.D.resize(rows3L, S);
  set.U.resize(M, S);
  for (Eigen::Index j = 0; j < S; ++j)
  {
    const DesignVector& u = designs[static_cast<std::size_t>(j)];
    try
    {
      set.D.col(j) = deform(spec, baseline, u).values;
    }
    catch (const Error& e)
    {
      throw ValidationError("assemble: deform failed for sample " + std::to_string(j) + ": " +
                            e.what());
    }
    set.U.col(j) = u.values;
  }

  set.mean_delta = set.D.rowwise().mean();
  set.mean_u = set.U.rowwise().mean();
  set.D.colwise() -= set.mean_delta;
  set.U.colwise() -= set.mean_u;

  set.u_lower = spec.lower;
  set.u_upper = spec.upper;
  set.seed = seed;
  set.samples = S;
  set.spec_hash = spec.content_hash();
  return set;
}

std::vector<std::pair<Eigen::Index, double>> variance_convergence(
    const SnapshotSet& set, const DiscreteShape& shape,
    const std::vector<Eigen::Index>& checkpoints)
{
  const Eigen::VectorXd gw3 = shape.metric3();
  if (gw3.size() != set.D.rows())
  {
    throw DimensionError("variance_convergence: shape does not conform to snapshot set");
  }
  std::vector<std::pair<Eigen::Index, double>> out;
  out.reserve(checkpoints.size());
  Eigen::Index prev = 0;
  for (const Eigen::Index s : checkpoints)
  {
    if (s < 1 || s > set.samples || s < prev)
    {
      throw ValidationError("variance_convergence: checkpoints must be increasing and <= S");
    }
    prev = s;
    const auto block = set.D.leftCols(s);
    const Eigen::VectorXd mean = block.rowwise().mean();
    double acc = 0.0;
    for (Eigen::Index j = 0; j < s; ++j)
    {
      acc += ((block.col(j) - mean).array().square() * gw3.array()).sum();
    }
    out.emplace_back(s, acc / static_cast<double>(s));
  }
  return out;
}

}  // namespace pme
