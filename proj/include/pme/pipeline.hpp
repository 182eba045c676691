#ifndef PME_PIPELINE_HPP
#define PME_PIPELINE_HPP

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pme/io.hpp"
#include "pme/optimize.hpp"
#include "pme/sampling.hpp"

namespace pme
{

// Everything a full run needs, resolvable from JSON. Presets
// "airfoil-bezier14" and "hull-ffd22" encode the two bundled studies.
struct PipelineConfig
{
  std::string name = "custom";
  nlohmann::json geometry;           // generator spec or {"file": path}
  nlohmann::json parameterization;   // kind-specific, possibly unresolved
  Eigen::Index samples = 1000;
  std::uint64_t seed = 20220901;
  double confidence = 0.95;
  std::string weight_scheme = "uniform";  // uniform | waterline-mask | file
  std::string weight_file;
  std::string measure_mode = "uniform";  // uniform | voronoi
  PsoConfig pso;
  double penalty_c = 1000.0;
  DemoProblemConfig demo;
  std::vector<double> drops = {0.25, 0.30, 0.35};

  nlohmann::json to_json() const;
  static PipelineConfig from_json(const nlohmann::json& j);
  static PipelineConfig preset(const std::string& name);
  static std::vector<std::string> preset_names();

  std::uint64_t hash() const { return io::fnv1a64(to_json().dump()); }
};

// In-memory artifacts per stage.
struct SnapshotArtifacts
{
  DiscreteShape shape;
  ParameterizationSpec spec;
  SnapshotSet set;
  std::vector<std::pair<Eigen::Index, double>> convergence;
  std::uint64_t config_hash = 0;
};

struct BasisArtifacts
{
  ModalBasis basis;
  std::uint64_t config_hash = 0;

  std::uint64_t content_hash() const;
};

struct EmbeddingArtifacts
{
  Embedding embedding;
  Eigen::VectorXd nse_kle;  // per-sample, modal path
  Eigen::VectorXd nse_pme;  // per-sample, augmented path
  std::uint64_t basis_hash = 0;
  std::uint64_t config_hash = 0;
};

struct RunArtifacts
{
  SearchSpace space = SearchSpace::original;
  PsoResult result;
  Eigen::VectorXd u_star;  // planted optimum of the demo problem
  double planted_value = 0.0;
  std::uint64_t config_hash = 0;
};

// Stage builders (pure, deterministic).
SnapshotArtifacts build_snapshots(const PipelineConfig& config);
BasisArtifacts build_basis(const SnapshotArtifacts& snapshots, double confidence,
                           std::uint64_t config_hash);
EmbeddingArtifacts build_embedding(const SnapshotArtifacts& snapshots,
                                   const BasisArtifacts& basis, std::uint64_t config_hash);
RunArtifacts run_optimization(const PipelineConfig& config, SearchSpace space,
                              const SnapshotArtifacts& snapshots, const BasisArtifacts& basis,
                              const EmbeddingArtifacts& embedding);

// Archive I/O. Directories are created; provenance hashes are validated on
// load and on every stage that consumes an upstream archive.
void write_snapshot_archive(const std::filesystem::path& dir, const SnapshotArtifacts& a);
SnapshotArtifacts load_snapshot_archive(const std::filesystem::path& dir);

void write_basis_archive(const std::filesystem::path& dir, const BasisArtifacts& a,
                         const SnapshotArtifacts& snapshots);
BasisArtifacts load_basis_archive(const std::filesystem::path& dir);

void write_embedding_archive(const std::filesystem::path& dir, const EmbeddingArtifacts& a);
EmbeddingArtifacts load_embedding_archive(const std::filesystem::path& dir,
                                          const BasisArtifacts& basis);

void write_run_archive(const std::filesystem::path& dir, const RunArtifacts& a,
                       const SnapshotArtifacts& snapshots);

// CLI-facing commands; each returns the archive directory it wrote.
std::filesystem::path cmd_sample(const PipelineConfig& config,
                                 const std::filesystem::path& out_root, std::ostream& log);
std::filesystem::path cmd_reduce(const std::filesystem::path& snapshot_dir, double confidence,
                                 const std::filesystem::path& out_root, std::ostream& log);
std::filesystem::path cmd_embed(const std::filesystem::path& snapshot_dir,
                                const std::filesystem::path& basis_dir,
                                const std::filesystem::path& out_root, std::ostream& log);
std::filesystem::path cmd_optimize(const PipelineConfig& config, SearchSpace space,
                                   const std::filesystem::path& snapshot_dir,
                                   const std::filesystem::path& basis_dir,
                                   const std::filesystem::path& embedding_dir,
                                   const std::filesystem::path& out_root, std::ostream& log);
std::filesystem::path cmd_report(const std::vector<std::filesystem::path>& run_dirs,
                                 const std::filesystem::path& out_root, std::ostream& log);

}  // namespace pme

#endif  // PME_PIPELINE_HPP
