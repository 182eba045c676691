#include "pme/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

namespace pme
{

namespace fs = std::filesystem;
using nlohmann::json;

namespace
{

std::vector<double> to_std(const Eigen::VectorXd& v)
{
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd from_std(const std::vector<double>& v)
{
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void ensure_dir(const fs::path& dir)
{
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
  {
    throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  }
}

json load_meta(const fs::path& dir, const std::string& schema)
{
  const fs::path meta_path = dir / "meta.json";
  if (!fs::exists(meta_path))
  {
    throw ValidationError("missing archive: " + dir.string() +
                          " has no meta.json (run the producing stage first)");
  }
  json meta = io::read_json(meta_path);
  if (meta.value("schema", "") != schema)
  {
    throw ValidationError(dir.string() + ": expected schema '" + schema + "', found '" +
                          meta.value("schema", "<none>") + "'");
  }
  return meta;
}

std::vector<Eigen::Index> default_checkpoints(Eigen::Index S)
{
  std::vector<Eigen::Index> cps;
  for (int i = 1; i <= 10; ++i)
  {
    const Eigen::Index s = std::max<Eigen::Index>(2, S * i / 10);
    if (cps.empty() || s > cps.back())
    {
      cps.push_back(s);
    }
  }
  return cps;
}

// Names of displacement component blocks that are identically zero.
std::vector<std::string> zero_blocks(const SnapshotSet& set)
{
  const Eigen::Index L = set.D.rows() / 3;
  std::vector<std::string> names;
  for (int b = 0; b < 3; ++b)
  {
    if (set.D.middleRows(b * L, L).isZero(0.0) && set.mean_delta.segment(b * L, L).isZero(0.0))
    {
      names.push_back("xi" + std::to_string(b + 1));
    }
  }
  return names;
}

}  // namespace

json PipelineConfig::to_json() const
{
  json j;
  j["name"] = name;
  j["geometry"] = geometry;
  j["parameterization"] = parameterization;
  j["sampling"] = {{"samples", samples}, {"seed", seed}};
  j["confidence"] = confidence;
  j["weights"] = weight_scheme == "file" ? json{{"file", weight_file}} : json(weight_scheme);
  j["measures"] = measure_mode;
  j["optimizer"] = {{"budget", pso.budget},
                    {"seed", pso.seed},
                    {"swarm_size", pso.swarm_size},
                    {"inertia", pso.inertia},
                    {"cognitive", pso.cognitive},
                    {"social", pso.social},
                    {"polish", pso.polish},
                    {"polish_period", pso.polish_period},
                    {"penalty_c", penalty_c}};
  j["demo_problem"] = {{"roughness_weight", demo.rough_weight},
                       {"box_margin", demo.box_margin}};
  j["report"] = {{"objective_drops", drops}};
  return j;
}

PipelineConfig PipelineConfig::from_json(const json& j)
{
  PipelineConfig c;
  c.name = j.value("name", "custom");
  c.geometry = j.at("geometry");
  c.parameterization = j.at("parameterization");
  if (j.contains("sampling"))
  {
    c.samples = j["sampling"].value("samples", c.samples);
    c.seed = j["sampling"].value("seed", c.seed);
  }
  c.confidence = j.value("confidence", c.confidence);
  if (j.contains("weights"))
  {
    if (j["weights"].is_object())
    {
      c.weight_scheme = "file";
      c.weight_file = j["weights"].at("file").get<std::string>();
    }
    else
    {
      c.weight_scheme = j["weights"].get<std::string>();
    }
  }
  c.measure_mode = j.value("measures", c.measure_mode);
  if (j.contains("optimizer"))
  {
    const json& o = j["optimizer"];
    c.pso.budget = o.value("budget", c.pso.budget);
    c.pso.seed = o.value("seed", c.pso.seed);
    c.pso.swarm_size = o.value("swarm_size", c.pso.swarm_size);
    c.pso.inertia = o.value("inertia", c.pso.inertia);
    c.pso.cognitive = o.value("cognitive", c.pso.cognitive);
    c.pso.social = o.value("social", c.pso.social);
    c.pso.polish = o.value("polish", c.pso.polish);
    c.pso.polish_period = o.value("polish_period", c.pso.polish_period);
    c.penalty_c = o.value("penalty_c", c.penalty_c);
  }
  if (j.contains("demo_problem"))
  {
    c.demo.rough_weight = j["demo_problem"].value("roughness_weight", c.demo.rough_weight);
    c.demo.box_margin = j["demo_problem"].value("box_margin", c.demo.box_margin);
  }
  if (j.contains("report"))
  {
    c.drops = j["report"].value("objective_drops", c.drops);
  }
  if (!(c.confidence > 0.0) || c.confidence > 1.0)
  {
    throw ValidationError("config: confidence must be in (0, 1]");
  }
  if (c.weight_scheme != "uniform" && c.weight_scheme != "waterline-mask" &&
      c.weight_scheme != "file")
  {
    throw ValidationError("config: unknown weight scheme '" + c.weight_scheme + "'");
  }
  if (c.measure_mode != "uniform" && c.measure_mode != "voronoi")
  {
    throw ValidationError("config: unknown measure mode '" + c.measure_mode + "'");
  }
  if (!(c.penalty_c > 0.0))
  {
    throw ValidationError("config: penalty_c must be positive");
  }
  return c;
}

std::vector<std::string> PipelineConfig::preset_names()
{
  return {"airfoil-bezier14", "hull-ffd22"};
}

PipelineConfig PipelineConfig::preset(const std::string& name)
{
  PipelineConfig c;
  c.name = name;
  if (name == "airfoil-bezier14")
  {
    c.geometry = {{"generator", "naca0012-bezier"}};
    c.parameterization = {{"kind", "bezier-airfoil"}, {"nodes_per_side", 91}};
    c.samples = 1000;
    c.seed = 20220901;
    c.confidence = 0.95;
    c.weight_scheme = "uniform";
    c.measure_mode = "uniform";
    c.pso.budget = 500;
    c.pso.seed = 7;
    c.pso.polish = true;
    c.drops = {0.25, 0.30, 0.35};
    return c;
  }
  if (name == "hull-ffd22")
  {
    c.geometry = {{"generator", "demo-hull"}, {"rows", 90},      {"cols", 25},
                  {"length", 5.72},           {"beam", 0.76},    {"draught", 0.25},
                  {"freeboard", 0.05}};
    c.parameterization = {{"kind", "ffd-lattice"},
                          {"dims", {9, 3, 3}},
                          {"box", "fit"},
                          {"active", "hull-default"}};
    c.samples = 1000;
    c.seed = 20220901;
    c.confidence = 0.95;
    c.weight_scheme = "waterline-mask";
    c.measure_mode = "uniform";
    c.pso.budget = 1000;
    c.pso.seed = 7;
    c.pso.polish = true;
    c.drops = {0.05, 0.075, 0.10};
    return c;
  }
  throw ValidationError("unknown preset '" + name + "'; available: airfoil-bezier14, hull-ffd22");
}

std::uint64_t BasisArtifacts::content_hash() const
{
  std::string key = "basis:";
  key += io::hash_hex(basis.provenance_hash);
  key += ':';
  key += std::to_string(basis.retained);
  key += ':';
  key += std::to_string(basis.rank());
  key += ':';
  key += io::format_double(basis.sigma2);
  for (int k = 0; k < basis.rank(); ++k)
  {
    key += ',';
    key += io::format_double(basis.eigenvalues(k));
  }
  return io::fnv1a64(key);
}

namespace
{

// Resolves geometry + parameterization from the config. Weights are applied
// after generation according to the weight scheme.
std::pair<DiscreteShape, ParameterizationSpec> resolve_geometry(const PipelineConfig& config)
{
  const MeasureMode measures =
      config.measure_mode == "voronoi" ? MeasureMode::voronoi : MeasureMode::uniform;

  DiscreteShape shape;
  ParameterizationSpec spec;
  if (config.geometry.contains("file"))
  {
    shape = read_geometry_file(config.geometry.at("file").get<std::string>());
    spec = register_spec(config.parameterization, shape);
  }
  else
  {
    const std::string generator = config.geometry.value("generator", "");
    if (generator == "naca0012-bezier")
    {
      const int nodes = config.parameterization.value("nodes_per_side", 91);
      BezierAirfoil airfoil = make_bezier_airfoil(nodes, measures);
      shape = std::move(airfoil.baseline);
      spec = std::move(airfoil.spec);
    }
    else if (generator == "demo-hull")
    {
      DemoHullParams params;
      params.rows = config.geometry.value("rows", params.rows);
      params.cols = config.geometry.value("cols", params.cols);
      params.length = config.geometry.value("length", params.length);
      params.beam = config.geometry.value("beam", params.beam);
      params.draught = config.geometry.value("draught", params.draught);
      params.freeboard = config.geometry.value("freeboard", params.freeboard);
      shape = make_demo_hull(params, measures);

      json pjson = config.parameterization;
      if (pjson.value("kind", "") != "ffd-lattice")
      {
        throw ValidationError("demo-hull geometry needs an ffd-lattice parameterization");
      }
      if (pjson.contains("box") && pjson["box"].is_string() && pjson["box"] == "fit")
      {
        const Eigen::Vector3d lo = shape.nodes.colwise().minCoeff();
        const Eigen::Vector3d hi = shape.nodes.colwise().maxCoeff();
        pjson["box"] = {{"lo", {lo.x(), lo.y(), lo.z()}}, {"hi", {hi.x(), hi.y(), hi.z()}}};
      }
      if (pjson.contains("active") && pjson["active"].is_string() &&
          pjson["active"] == "hull-default")
      {
        json rows = json::array();
        for (const FfdActiveDof& d : default_hull_active_table())
        {
          rows.push_back({{"i", d.i},
                          {"j", d.j},
                          {"k", d.k},
                          {"dof", d.axis + 1},
                          {"lower", d.lower},
                          {"upper", d.upper}});
        }
        pjson["active"] = rows;
      }
      spec = register_spec(pjson, shape);
    }
    else
    {
      throw ValidationError("config: unknown geometry generator '" + generator + "'");
    }
  }

  if (config.weight_scheme == "uniform")
  {
    shape.weights = uniform_weights(shape.node_count());
  }
  else if (config.weight_scheme == "waterline-mask")
  {
    shape.weights = waterline_mask_weights(shape.nodes);
  }
  else
  {
    shape.weights = io::read_vector_csv(config.weight_file);
    if (shape.weights.size() != shape.node_count())
    {
      throw ValidationError("weight file length does not match node count");
    }
  }
  shape.validate();
  return {std::move(shape), std::move(spec)};
}

}  // namespace

SnapshotArtifacts build_snapshots(const PipelineConfig& config)
{
  SnapshotArtifacts a;
  std::tie(a.shape, a.spec) = resolve_geometry(config);
  const auto designs = sample_designs(a.spec, config.samples, config.seed);
  a.set = assemble(a.spec, a.shape, designs, config.seed);
  a.convergence = variance_convergence(a.set, a.shape, default_checkpoints(config.samples));
  a.config_hash = config.hash();
  return a;
}

BasisArtifacts build_basis(const SnapshotArtifacts& snapshots, double confidence,
                           std::uint64_t config_hash)
{
  BasisArtifacts b;
  b.basis = solve_kle(snapshots.set, snapshots.shape, confidence);
  b.config_hash = config_hash;
  return b;
}

EmbeddingArtifacts build_embedding(const SnapshotArtifacts& snapshots,
                                   const BasisArtifacts& basis, std::uint64_t config_hash)
{
  EmbeddingArtifacts e;
  e.embedding = embed(snapshots.set, basis.basis, snapshots.shape);
  e.nse_kle = nse_per_sample(basis.basis, snapshots.set, snapshots.shape, basis.basis.retained);
  e.nse_pme = nse_per_sample_augmented(e.embedding, snapshots.set, snapshots.shape,
                                       basis.basis.retained);
  e.basis_hash = basis.content_hash();
  e.config_hash = config_hash;
  return e;
}

RunArtifacts run_optimization(const PipelineConfig& config, SearchSpace space,
                              const SnapshotArtifacts& snapshots, const BasisArtifacts& basis,
                              const EmbeddingArtifacts& embedding)
{
  if (basis.basis.provenance_hash != snapshots.set.content_hash() ||
      embedding.embedding.provenance_hash != snapshots.set.content_hash())
  {
    throw ProvenanceError("optimize: embedding does not belong to this snapshot set");
  }
  const DemoProblem problem =
      make_demo_problem(snapshots.spec, snapshots.shape, embedding.embedding, config.demo);

  SpaceContext ctx;
  ctx.problem = &problem;
  ctx.embedding = &embedding.embedding;
  ctx.mean_delta = snapshots.set.mean_delta;
  ctx.penalty_c = config.penalty_c;

  const auto [lo, hi] = space_bounds(space, snapshots.spec, embedding.embedding);
  const Evaluator evaluate = make_space_evaluator(space, ctx, space == SearchSpace::pme);

  RunArtifacts r;
  r.space = space;
  r.result = pso_minimize(evaluate, lo, hi, config.pso);
  r.u_star = problem.u_star;
  r.planted_value = problem.rough_weight;
  r.config_hash = config.hash();
  return r;
}

void write_snapshot_archive(const fs::path& dir, const SnapshotArtifacts& a)
{
  ensure_dir(dir);
  write_geometry_file(dir / "geometry.txt", a.shape);
  io::write_json(dir / "spec.json", a.spec.to_json());
  io::write_matrix_csv(dir / "D.csv", a.set.D);
  io::write_matrix_csv(dir / "U.csv", a.set.U);
  io::write_rows_csv(dir / "means.csv", {a.set.mean_delta, a.set.mean_u});
  std::vector<Eigen::VectorXd> conv;
  for (const auto& [s, v] : a.convergence)
  {
    conv.push_back((Eigen::VectorXd(2) << static_cast<double>(s), v).finished());
  }
  io::write_rows_csv(dir / "convergence.csv", conv);

  json meta;
  meta["schema"] = "pme-snapshots";
  meta["seed"] = a.set.seed;
  meta["samples"] = a.set.samples;
  meta["nodes"] = a.shape.node_count();
  meta["grid"] = {a.shape.grid_rows, a.shape.grid_cols};
  meta["design_variables"] = a.set.U.rows();
  meta["spec_hash"] = io::hash_hex(a.set.spec_hash);
  meta["content_hash"] = io::hash_hex(a.set.content_hash());
  meta["config_hash"] = io::hash_hex(a.config_hash);
  meta["zero_blocks"] = zero_blocks(a.set);
  io::write_json(dir / "meta.json", meta);
}

SnapshotArtifacts load_snapshot_archive(const fs::path& dir)
{
  const json meta = load_meta(dir, "pme-snapshots");
  SnapshotArtifacts a;
  a.shape = read_geometry_file(dir / "geometry.txt");
  a.spec = register_spec(io::read_json(dir / "spec.json"), a.shape);
  a.set.D = io::read_matrix_csv(dir / "D.csv");
  a.set.U = io::read_matrix_csv(dir / "U.csv");
  const auto means = io::read_rows_csv(dir / "means.csv");
  if (means.size() != 2)
  {
    throw IoError(dir.string() + "/means.csv: expected two rows");
  }
  a.set.mean_delta = means[0];
  a.set.mean_u = means[1];
  a.set.u_lower = a.spec.lower;
  a.set.u_upper = a.spec.upper;
  a.set.seed = meta.at("seed").get<std::uint64_t>();
  a.set.samples = meta.at("samples").get<Eigen::Index>();
  a.set.spec_hash = a.spec.content_hash();
  a.config_hash = std::stoull(meta.at("config_hash").get<std::string>(), nullptr, 16);

  if (a.set.D.rows() != 3 * a.shape.node_count() || a.set.D.cols() != a.set.samples ||
      a.set.U.cols() != a.set.samples || a.set.U.rows() != a.spec.dv_count() ||
      a.set.mean_delta.size() != a.set.D.rows() || a.set.mean_u.size() != a.set.U.rows())
  {
    throw ValidationError(dir.string() + ": snapshot archive dimensions are inconsistent");
  }
  if (meta.at("spec_hash").get<std::string>() != io::hash_hex(a.set.spec_hash))
  {
    throw ProvenanceError(dir.string() + ": spec.json does not match recorded spec hash");
  }
  if (meta.at("content_hash").get<std::string>() != io::hash_hex(a.set.content_hash()))
  {
    throw ProvenanceError(dir.string() + ": archive content hash mismatch");
  }
  const auto conv = io::read_rows_csv(dir / "convergence.csv");
  for (const auto& row : conv)
  {
    if (row.size() == 2)
    {
      a.convergence.emplace_back(static_cast<Eigen::Index>(row(0)), row(1));
    }
  }
  return a;
}

void write_basis_archive(const fs::path& dir, const BasisArtifacts& a,
                         const SnapshotArtifacts& snapshots)
{
  ensure_dir(dir);
  io::write_vector_csv(dir / "eigenvalues.csv", a.basis.eigenvalues);
  io::write_matrix_csv(dir / "Z.csv", a.basis.modes);

  // Spectrum report: eigenvalue, cumulative variance fraction, and training
  // NMSE for every truncation order.
  std::vector<Eigen::VectorXd> rows;
  double cum = 0.0;
  for (int k = 0; k < a.basis.rank(); ++k)
  {
    cum += a.basis.eigenvalues(k);
    Eigen::VectorXd row(4);
    row << static_cast<double>(k + 1), a.basis.eigenvalues(k), cum / a.basis.sigma2,
        nmse(a.basis, snapshots.set, snapshots.shape, k + 1);
    rows.push_back(row);
  }
  io::write_rows_csv(dir / "spectrum.csv", rows);

  json meta;
  meta["schema"] = "pme-basis";
  meta["confidence"] = a.basis.confidence;
  meta["retained"] = a.basis.retained;
  meta["rank"] = a.basis.rank();
  meta["sigma2"] = a.basis.sigma2;
  meta["normalization"] = a.basis.normalization;
  meta["sign_convention"] = a.basis.sign_convention;
  meta["provenance_hash"] = io::hash_hex(a.basis.provenance_hash);
  meta["content_hash"] = io::hash_hex(a.content_hash());
  meta["config_hash"] = io::hash_hex(a.config_hash);
  io::write_json(dir / "meta.json", meta);
}

BasisArtifacts load_basis_archive(const fs::path& dir)
{
  const json meta = load_meta(dir, "pme-basis");
  BasisArtifacts a;
  a.basis.eigenvalues = io::read_vector_csv(dir / "eigenvalues.csv");
  a.basis.modes = io::read_matrix_csv(dir / "Z.csv");
  a.basis.sigma2 = meta.at("sigma2").get<double>();
  a.basis.retained = meta.at("retained").get<int>();
  a.basis.confidence = meta.at("confidence").get<double>();
  a.basis.normalization = meta.value("normalization", a.basis.normalization);
  a.basis.sign_convention = meta.value("sign_convention", a.basis.sign_convention);
  a.basis.provenance_hash =
      std::stoull(meta.at("provenance_hash").get<std::string>(), nullptr, 16);
  a.config_hash = std::stoull(meta.at("config_hash").get<std::string>(), nullptr, 16);
  if (a.basis.modes.cols() != a.basis.rank() || a.basis.retained > a.basis.rank() ||
      a.basis.retained < 1)
  {
    throw ValidationError(dir.string() + ": basis archive dimensions are inconsistent");
  }
  if (meta.at("content_hash").get<std::string>() != io::hash_hex(a.content_hash()))
  {
    throw ProvenanceError(dir.string() + ": basis content hash mismatch");
  }
  return a;
}

void write_embedding_archive(const fs::path& dir, const EmbeddingArtifacts& a)
{
  ensure_dir(dir);
  io::write_matrix_csv(dir / "V.csv", a.embedding.V);
  io::write_vector_csv(dir / "mean_u.csv", a.embedding.mean_u);
  io::write_rows_csv(dir / "x_bounds.csv", {a.embedding.x_lower, a.embedding.x_upper});
  std::vector<Eigen::VectorXd> rows;
  for (Eigen::Index j = 0; j < a.nse_kle.size(); ++j)
  {
    rows.push_back(
        (Eigen::VectorXd(3) << static_cast<double>(j + 1), a.nse_kle(j), a.nse_pme(j))
            .finished());
  }
  io::write_rows_csv(dir / "nse.csv", rows);

  json meta;
  meta["schema"] = "pme-embedding";
  meta["retained"] = a.embedding.retained();
  meta["design_variables"] = a.embedding.dv_count();
  meta["u_lower"] = to_std(a.embedding.u_lower);
  meta["u_upper"] = to_std(a.embedding.u_upper);
  meta["provenance_hash"] = io::hash_hex(a.embedding.provenance_hash);
  meta["basis_hash"] = io::hash_hex(a.basis_hash);
  meta["config_hash"] = io::hash_hex(a.config_hash);
  io::write_json(dir / "meta.json", meta);
}

EmbeddingArtifacts load_embedding_archive(const fs::path& dir, const BasisArtifacts& basis)
{
  const json meta = load_meta(dir, "pme-embedding");
  EmbeddingArtifacts a;
  a.basis_hash = std::stoull(meta.at("basis_hash").get<std::string>(), nullptr, 16);
  if (a.basis_hash != basis.content_hash())
  {
    throw ProvenanceError(dir.string() + ": embedding was built from a different basis");
  }
  a.embedding.basis = basis.basis;
  a.embedding.V = io::read_matrix_csv(dir / "V.csv");
  a.embedding.mean_u = io::read_vector_csv(dir / "mean_u.csv");
  const auto bounds = io::read_rows_csv(dir / "x_bounds.csv");
  if (bounds.size() != 2)
  {
    throw IoError(dir.string() + "/x_bounds.csv: expected two rows");
  }
  a.embedding.x_lower = bounds[0];
  a.embedding.x_upper = bounds[1];
  a.embedding.u_lower = from_std(meta.at("u_lower").get<std::vector<double>>());
  a.embedding.u_upper = from_std(meta.at("u_upper").get<std::vector<double>>());
  a.embedding.provenance_hash =
      std::stoull(meta.at("provenance_hash").get<std::string>(), nullptr, 16);
  a.config_hash = std::stoull(meta.at("config_hash").get<std::string>(), nullptr, 16);

  const auto nse = io::read_rows_csv(dir / "nse.csv");
  a.nse_kle.resize(static_cast<Eigen::Index>(nse.size()));
  a.nse_pme.resize(static_cast<Eigen::Index>(nse.size()));
  for (std::size_t j = 0; j < nse.size(); ++j)
  {
    a.nse_kle(static_cast<Eigen::Index>(j)) = nse[j](1);
    a.nse_pme(static_cast<Eigen::Index>(j)) = nse[j](2);
  }
  if (a.embedding.V.cols() != a.embedding.retained() ||
      a.embedding.V.rows() != a.embedding.dv_count() ||
      a.embedding.x_lower.size() != a.embedding.retained())
  {
    throw ValidationError(dir.string() + ": embedding archive dimensions are inconsistent");
  }
  return a;
}

namespace
{

std::string trace_to_csv(const OptimizationTrace& trace)
{
  std::string out;
  if (trace.records.empty())
  {
    return out;
  }
  const Eigen::Index n = trace.records.front().point.size();
  const Eigen::Index m = trace.records.front().u_hat.size();
  out += "eval,iteration,particle";
  for (Eigen::Index d = 0; d < n; ++d)
  {
    out += ",point_" + std::to_string(d);
  }
  for (Eigen::Index d = 0; d < m; ++d)
  {
    out += ",uhat_" + std::to_string(d);
  }
  out += ",objective,penalty,penalized,running_best,box_feasible,constraints_feasible\n";
  for (const EvalRecord& rec : trace.records)
  {
    out += std::to_string(rec.eval);
    out += ',';
    out += std::to_string(rec.iteration);
    out += ',';
    out += std::to_string(rec.particle);
    for (Eigen::Index d = 0; d < n; ++d)
    {
      out += ',';
      out += io::format_double(rec.point(d));
    }
    for (Eigen::Index d = 0; d < m; ++d)
    {
      out += ',';
      out += io::format_double(rec.u_hat(d));
    }
    out += ',';
    out += io::format_double(rec.objective);
    out += ',';
    out += io::format_double(rec.penalty);
    out += ',';
    out += io::format_double(rec.penalized);
    out += ',';
    out += io::format_double(rec.running_best);
    out += ',';
    out += rec.box_feasible ? '1' : '0';
    out += ',';
    out += rec.constraints_feasible ? '1' : '0';
    out += '\n';
  }
  return out;
}

}  // namespace

void write_run_archive(const fs::path& dir, const RunArtifacts& a,
                       const SnapshotArtifacts& snapshots)
{
  ensure_dir(dir);
  {
    std::ofstream f(dir / "trace.csv", std::ios::binary);
    if (!f)
    {
      throw IoError("cannot open " + (dir / "trace.csv").string());
    }
    f << trace_to_csv(a.result.trace);
  }
  io::write_vector_csv(dir / "best_u.csv", a.result.best.u_hat);

  // Best deformed shape as a geometry file, rebuilt through the original
  // parameterization from the reconstructed design.
  const DisplacementField delta =
      deform(snapshots.spec, snapshots.shape, snapshots.spec.design(a.result.best.u_hat));
  write_geometry_file(dir / "best_shape.txt", apply(snapshots.shape, delta));

  json best;
  best["schema"] = "pme-run";
  best["space"] = to_string(a.space);
  best["best_penalized"] = a.result.best_penalized;
  best["objective"] = a.result.best.objective;
  best["penalty"] = a.result.best.penalty;
  best["box_feasible"] = a.result.best.box_feasible;
  best["constraints_feasible"] = a.result.best.constraints_feasible;
  best["point"] = to_std(a.result.best_point);
  best["u_hat"] = to_std(a.result.best.u_hat);
  best["u_star"] = to_std(a.u_star);
  best["planted_value"] = a.planted_value;
  best["evaluations"] = a.result.trace.records.size();
  best["config_hash"] = io::hash_hex(a.config_hash);
  best["snapshot_hash"] = io::hash_hex(snapshots.set.content_hash());
  io::write_json(dir / "best.json", best);
}

std::filesystem::path cmd_sample(const PipelineConfig& config, const fs::path& out_root,
                                 std::ostream& log)
{
  const SnapshotArtifacts a = build_snapshots(config);
  const fs::path dir = out_root / "snapshots";
  write_snapshot_archive(dir, a);
  log << "snapshot archive: " << dir.string() << "\n";
  log << "D: " << a.set.D.rows() << " x " << a.set.D.cols() << ", U: " << a.set.U.rows()
      << " x " << a.set.U.cols() << "\n";
  log << "variance convergence:\n  S'  sigma2\n";
  for (const auto& [s, v] : a.convergence)
  {
    log << "  " << s << "  " << io::format_double(v) << "\n";
  }
  return dir;
}

std::filesystem::path cmd_reduce(const fs::path& snapshot_dir, double confidence,
                                 const fs::path& out_root, std::ostream& log)
{
  const SnapshotArtifacts snapshots = load_snapshot_archive(snapshot_dir);
  const BasisArtifacts basis = build_basis(snapshots, confidence, snapshots.config_hash);
  const fs::path dir = out_root / "basis";
  write_basis_archive(dir, basis, snapshots);
  log << "basis archive: " << dir.string() << "\n";
  log << "rank " << basis.basis.rank() << ", retained N = " << basis.basis.retained
      << " at confidence " << io::format_double(confidence) << "\n";
  log << "sigma2 = " << io::format_double(basis.basis.sigma2)
      << ", NMSE(N) = " << io::format_double(nmse(basis.basis, snapshots.set, snapshots.shape,
                                                  basis.basis.retained))
      << "\n";
  return dir;
}

std::filesystem::path cmd_embed(const fs::path& snapshot_dir, const fs::path& basis_dir,
                                const fs::path& out_root, std::ostream& log)
{
  const SnapshotArtifacts snapshots = load_snapshot_archive(snapshot_dir);
  const BasisArtifacts basis = load_basis_archive(basis_dir);
  const EmbeddingArtifacts emb = build_embedding(snapshots, basis, basis.config_hash);
  const fs::path dir = out_root / "embedding";
  write_embedding_archive(dir, emb);
  log << "embedding archive: " << dir.string() << "\n";
  log << "V: " << emb.embedding.V.rows() << " x " << emb.embedding.V.cols() << "\n";
  log << "max |NSE_kle - NSE_pme| = "
      << io::format_double((emb.nse_kle - emb.nse_pme).cwiseAbs().maxCoeff()) << "\n";
  return dir;
}

std::filesystem::path cmd_optimize(const PipelineConfig& config, SearchSpace space,
                                   const fs::path& snapshot_dir, const fs::path& basis_dir,
                                   const fs::path& embedding_dir, const fs::path& out_root,
                                   std::ostream& log)
{
  const SnapshotArtifacts snapshots = load_snapshot_archive(snapshot_dir);
  const BasisArtifacts basis = load_basis_archive(basis_dir);
  const EmbeddingArtifacts embedding = load_embedding_archive(embedding_dir, basis);
  const RunArtifacts run = run_optimization(config, space, snapshots, basis, embedding);
  const fs::path dir = out_root / ("opt-" + to_string(space));
  write_run_archive(dir, run, snapshots);
  log << "run archive: " << dir.string() << "\n";
  log << "best penalized objective = " << io::format_double(run.result.best_penalized)
      << " after " << run.result.trace.records.size() << " evaluations\n";
  log << "box feasible: " << (run.result.best.box_feasible ? "yes" : "no")
      << ", constraints feasible: " << (run.result.best.constraints_feasible ? "yes" : "no")
      << "\n";
  return dir;
}

std::filesystem::path cmd_report(const std::vector<fs::path>& run_dirs,
                                 const fs::path& out_root, std::ostream& log)
{
  if (run_dirs.empty())
  {
    throw ValidationError("report: no run directories given");
  }
  struct Run
  {
    json best;
    std::vector<double> running_best;  // per evaluation
    std::vector<bool> box_feasible;
  };
  std::vector<Run> runs;
  for (const fs::path& dir : run_dirs)
  {
    if (!fs::exists(dir / "best.json") || !fs::exists(dir / "trace.csv"))
    {
      throw ValidationError("report: " + dir.string() +
                            " is not a run archive (missing best.json or trace.csv)");
    }
    Run run;
    run.best = io::read_json(dir / "best.json");
    std::ifstream f(dir / "trace.csv");
    std::string line;
    std::getline(f, line);  // header
    std::vector<std::string> header;
    {
      std::stringstream ss(line);
      std::string tok;
      while (std::getline(ss, tok, ','))
      {
        header.push_back(tok);
      }
    }
    const auto col_of = [&](const std::string& name) -> int
    {
      for (std::size_t i = 0; i < header.size(); ++i)
      {
        if (header[i] == name)
        {
          return static_cast<int>(i);
        }
      }
      throw ValidationError("report: trace.csv missing column " + name);
    };
    const int rb_col = col_of("running_best");
    const int bf_col = col_of("box_feasible");
    while (std::getline(f, line))
    {
      if (line.empty())
      {
        continue;
      }
      std::stringstream ss(line);
      std::string tok;
      int idx = 0;
      double rb = 0.0;
      bool bf = true;
      while (std::getline(ss, tok, ','))
      {
        if (idx == rb_col)
        {
          rb = io::parse_double(tok);
        }
        if (idx == bf_col)
        {
          bf = tok == "1";
        }
        ++idx;
      }
      run.running_best.push_back(rb);
      run.box_feasible.push_back(bf);
    }
    runs.push_back(std::move(run));
  }

  ensure_dir(out_root);

  // Per-space summary.
  {
    std::string out = "space,best_penalized,objective,penalty,box_feasible,constraints_"
                      "feasible,evaluations\n";
    for (const Run& run : runs)
    {
      out += run.best.at("space").get<std::string>();
      out += ',';
      out += io::format_double(run.best.at("best_penalized").get<double>());
      out += ',';
      out += io::format_double(run.best.at("objective").get<double>());
      out += ',';
      out += io::format_double(run.best.at("penalty").get<double>());
      out += ',';
      out += run.best.at("box_feasible").get<bool>() ? '1' : '0';
      out += ',';
      out += run.best.at("constraints_feasible").get<bool>() ? '1' : '0';
      out += ',';
      out += std::to_string(run.running_best.size());
      out += '\n';
    }
    std::ofstream f(out_root / "comparison.csv", std::ios::binary);
    f << out;
  }

  // Optimal design variables side by side.
  {
    std::string out = "dv";
    std::size_t m = 0;
    for (const Run& run : runs)
    {
      out += ',' + run.best.at("space").get<std::string>();
      m = std::max(m, run.best.at("u_hat").get<std::vector<double>>().size());
    }
    out += '\n';
    for (std::size_t d = 0; d < m; ++d)
    {
      out += std::to_string(d + 1);
      for (const Run& run : runs)
      {
        const auto u = run.best.at("u_hat").get<std::vector<double>>();
        out += ',';
        out += d < u.size() ? io::format_double(u[d]) : std::string("");
      }
      out += '\n';
    }
    std::ofstream f(out_root / "optimal_dvs.csv", std::ios::binary);
    f << out;
  }

  // Evaluations to reach fixed drops below the reference (the first run's
  // initial incumbent; runs are expected in original, kle, pme order).
  {
    const std::vector<double> drops = {0.05, 0.075, 0.10, 0.25, 0.30, 0.35};
    const double reference = runs.front().running_best.empty()
                                 ? 0.0
                                 : runs.front().running_best.front();
    std::string out = "drop";
    for (const Run& run : runs)
    {
      out += ',' + run.best.at("space").get<std::string>();
    }
    out += '\n';
    for (const double drop : drops)
    {
      out += io::format_double(drop);
      const double target = reference * (1.0 - drop);
      for (const Run& run : runs)
      {
        long hit = -1;
        for (std::size_t e = 0; e < run.running_best.size(); ++e)
        {
          if (run.running_best[e] <= target)
          {
            hit = static_cast<long>(e) + 1;
            break;
          }
        }
        out += ',';
        out += std::to_string(hit);
      }
      out += '\n';
    }
    std::ofstream f(out_root / "drops.csv", std::ios::binary);
    f << out;
  }

  log << "report written to " << out_root.string() << "\n";
  for (const Run& run : runs)
  {
    log << "  " << run.best.at("space").get<std::string>() << ": best "
        << io::format_double(run.best.at("best_penalized").get<double>())
        << (run.best.at("box_feasible").get<bool>() ? " (feasible)" : " (infeasible)") << "\n";
  }
  return out_root;
}

}  // namespace pme
