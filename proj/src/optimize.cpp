#include "pme/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace pme
{

namespace
{

constexpr double kInf = std::numeric_limits<double>::infinity();

double uniform01(std::mt19937_64& rng)
{
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Kronecker lattice based on the generalized golden ratio: well spread,
// deterministic, dimension-agnostic.
Eigen::MatrixXd kronecker_lattice(int points, int dim)
{
  double phi = 1.5;
  for (int it = 0; it < 64; ++it)
  {
    phi = std::pow(1.0 + phi, 1.0 / (dim + 1));
  }
  Eigen::VectorXd alpha(dim);
  double a = 1.0;
  for (int d = 0; d < dim; ++d)
  {
    a /= phi;
    alpha(d) = a;
  }
  Eigen::MatrixXd pts(points, dim);
  for (int i = 0; i < points; ++i)
  {
    for (int d = 0; d < dim; ++d)
    {
      const double v = 0.5 + (i + 1) * alpha(d);
      pts(i, d) = v - std::floor(v);
    }
  }
  return pts;
}

}  // namespace

std::string to_string(SearchSpace space)
{
  switch (space)
  {
    case SearchSpace::original:
      return "original";
    case SearchSpace::kle:
      return "kle";
    case SearchSpace::pme:
      return "pme";
  }
  return "unknown";
}

SearchSpace search_space_from_string(const std::string& name)
{
  if (name == "original")
  {
    return SearchSpace::original;
  }
  if (name == "kle")
  {
    return SearchSpace::kle;
  }
  if (name == "pme")
  {
    return SearchSpace::pme;
  }
  throw ValidationError("unknown search space '" + name + "'");
}

double penalized_objective(double f_value, const DesignVector& u_hat, double c)
{
  if (!(c > 0.0))
  {
    throw ValidationError("penalized_objective: penalty coefficient must be positive");
  }
  const double violation = bound_violation(u_hat);
  return violation > 0.0 ? f_value + c * violation : f_value;
}

double constraint_violation(const Constraint& c, const DiscreteShape& shape)
{
  const double v = c.value(shape);
  const double scale = c.scale > 0.0 ? c.scale : 1.0;
  if (c.kind == Constraint::Kind::greater_equal)
  {
    return std::max(0.0, (c.threshold - v) / scale);
  }
  return std::max(0.0, (v - c.threshold) / scale);
}

PsoResult pso_minimize(const Evaluator& evaluate, const Eigen::VectorXd& lower,
                       const Eigen::VectorXd& upper, const PsoConfig& config)
{
  const int dim = static_cast<int>(lower.size());
  if (dim == 0 || upper.size() != dim)
  {
    throw DimensionError("pso_minimize: bad bounds");
  }
  if (!((upper.array() > lower.array()).all()) || !lower.allFinite() || !upper.allFinite())
  {
    throw ValidationError("pso_minimize: bounds must be finite with lower < upper");
  }
  const int swarm = config.swarm_size > 0 ? config.swarm_size : std::min(32, 4 * dim);
  if (config.budget < swarm)
  {
    throw ValidationError("pso_minimize: budget below swarm size");
  }

  const Eigen::VectorXd range = upper - lower;
  std::mt19937_64 rng(config.seed);

  Eigen::MatrixXd pos(swarm, dim);
  const Eigen::MatrixXd lattice = kronecker_lattice(swarm, dim);
  for (int i = 0; i < swarm; ++i)
  {
    pos.row(i) = lower.transpose() + lattice.row(i).cwiseProduct(range.transpose());
  }
  Eigen::MatrixXd vel = Eigen::MatrixXd::Zero(swarm, dim);
  Eigen::MatrixXd pbest_pos = pos;
  Eigen::VectorXd pbest_val = Eigen::VectorXd::Constant(swarm, kInf);

  PsoResult result;
  result.best_penalized = kInf;
  int evals = 0;
  int iteration = 0;

  auto record = [&](int particle, const Eigen::VectorXd& point, const Evaluation& ev)
  {
    ++evals;
    const double value = ev.penalized();
    if (value < result.best_penalized)
    {
      result.best_penalized = value;
      result.best_point = point;
      result.best = ev;
    }
    EvalRecord rec;
    rec.eval = evals;
    rec.iteration = iteration;
    rec.particle = particle;
    rec.point = point;
    rec.u_hat = ev.u_hat;
    rec.objective = ev.objective;
    rec.penalty = ev.penalty;
    rec.penalized = value;
    rec.running_best = result.best_penalized;
    rec.box_feasible = ev.box_feasible;
    rec.constraints_feasible = ev.constraints_feasible;
    result.trace.records.push_back(std::move(rec));
    return value;
  };

  // Initial sweep.
  for (int i = 0; i < swarm && evals < config.budget; ++i)
  {
    const Eigen::VectorXd point = pos.row(i).transpose();
    const double value = record(i, point, evaluate(point));
    pbest_val(i) = value;
    pbest_pos.row(i) = point.transpose();
  }

  // Pattern-search state for the optional incumbent polish.
  Eigen::VectorXd polish_step = 0.25 * range;

  while (evals < config.budget)
  {
    ++iteration;
    for (int i = 0; i < swarm; ++i)
    {
      for (int d = 0; d < dim; ++d)
      {
        const double r1 = uniform01(rng);
        const double r2 = uniform01(rng);
        vel(i, d) = config.inertia * vel(i, d) +
                    config.cognitive * r1 * (pbest_pos(i, d) - pos(i, d)) +
                    config.social * r2 * (result.best_point(d) - pos(i, d));
        double x = pos(i, d) + vel(i, d);
        if (x < lower(d))
        {
          x = lower(d);
          vel(i, d) = 0.0;
        }
        else if (x > upper(d))
        {
          x = upper(d);
          vel(i, d) = 0.0;
        }
        pos(i, d) = x;
      }
    }
    for (int i = 0; i < swarm && evals < config.budget; ++i)
    {
      const Eigen::VectorXd point = pos.row(i).transpose();
      const double value = record(i, point, evaluate(point));
      if (value < pbest_val(i))
      {
        pbest_val(i) = value;
        pbest_pos.row(i) = point.transpose();
      }
    }

    if (config.polish && config.polish_period > 0 && iteration % config.polish_period == 0)
    {
      bool improved = false;
      for (int d = 0; d < dim && evals < config.budget; ++d)
      {
        for (const double dir : {+1.0, -1.0})
        {
          if (evals >= config.budget)
          {
            break;
          }
          Eigen::VectorXd cand = result.best_point;
          cand(d) = std::clamp(cand(d) + dir * polish_step(d), lower(d), upper(d));
          if (cand(d) == result.best_point(d))
          {
            continue;  // clamped onto the incumbent, nothing to try
          }
          const double before = result.best_penalized;
          if (record(-1, cand, evaluate(cand)) < before)
          {
            improved = true;
            break;  // incumbent moved; try the next coordinate from there
          }
        }
      }
      if (!improved)
      {
        polish_step *= 0.5;
      }
    }
  }
  return result;
}

double displacement_roughness(const DisplacementField& delta, const DiscreteShape& shape)
{
  const Eigen::Index L = shape.node_count();
  if (delta.size() != 3 * L)
  {
    throw DimensionError("displacement_roughness: field does not conform to shape");
  }
  const int rows = shape.grid_rows;
  const int cols = shape.grid_cols;
  double acc = 0.0;
  for (int b = 0; b < 3; ++b)
  {
    const auto block = delta.values.segment(b * L, L);
    auto at = [&](int r, int c) { return block(static_cast<Eigen::Index>(r) * cols + c); };
    for (int r = 0; r < rows; ++r)
    {
      for (int c = 1; c + 1 < cols; ++c)
      {
        const double s = at(r, c - 1) - 2.0 * at(r, c) + at(r, c + 1);
        acc += s * s;
      }
    }
    for (int c = 0; c < cols; ++c)
    {
      for (int r = 1; r + 1 < rows; ++r)
      {
        const double s = at(r - 1, c) - 2.0 * at(r, c) + at(r + 1, c);
        acc += s * s;
      }
    }
  }
  return acc;
}

double DemoProblem::objective(const DisplacementField& delta) const
{
  // Distance to the hidden target plus a curvature-roughness penalty on the
  // deviation from it, normalized so that the value at the target is exactly
  // rough_weight (the regularizer floor) and the value at the undeformed
  // baseline is 1 + 2 * rough_weight.
  DisplacementField diff(delta.values - target_delta);
  const double dist = weighted_inner_product(diff, diff, baseline);
  const double rough = displacement_roughness(diff, baseline);
  return dist / dist_scale + rough_weight * (1.0 + rough / rough_scale);
}

namespace
{

std::vector<Constraint> demo_constraints(const DiscreteShape& baseline)
{
  const double vol0 = enclosed_volume(baseline);
  const Extents ext0 = bounding_extents(baseline);
  std::vector<Constraint> cs;
  cs.push_back({"volume", Constraint::Kind::greater_equal,
                [](const DiscreteShape& s) { return enclosed_volume(s); }, vol0,
                vol0 > 0.0 ? vol0 : 1.0});
  cs.push_back({"beam", Constraint::Kind::less_equal,
                [b0 = ext0.beam](const DiscreteShape& s)
                { return std::abs(bounding_extents(s).beam - b0); },
                0.05 * ext0.beam, ext0.beam > 0.0 ? ext0.beam : 1.0});
  cs.push_back({"draught", Constraint::Kind::less_equal,
                [t0 = ext0.draught](const DiscreteShape& s)
                { return std::abs(bounding_extents(s).draught - t0); },
                0.05 * ext0.draught, ext0.draught > 0.0 ? ext0.draught : 1.0});
  return cs;
}

bool constraints_satisfied(const std::vector<Constraint>& cs, const DiscreteShape& shape)
{
  for (const Constraint& c : cs)
  {
    if (constraint_violation(c, shape) > 0.0)
    {
      return false;
    }
  }
  return true;
}

}  // namespace

DemoProblem make_demo_problem(const ParameterizationSpec& spec, const DiscreteShape& baseline,
                              const Embedding& emb, const DemoProblemConfig& config)
{
  DemoProblem problem;
  problem.baseline = baseline;
  problem.spec = spec;
  problem.rough_weight = config.rough_weight;
  problem.constraints = demo_constraints(baseline);

  const int N = emb.retained();
  const Eigen::VectorXd margin =
      config.box_margin * (emb.u_upper - emb.u_lower);

  // Deterministic search for a latent point whose reconstruction is a valid
  // planted optimum: strictly inside the design box and satisfying the
  // geometric constraints.
  const std::vector<double> fractions = {0.5, 0.45, 0.4, 0.35, 0.3, 0.25, 0.2, 0.15, 0.1, 0.05};
  for (const double fraction : fractions)
  {
    for (int pattern = 0; pattern < 4; ++pattern)
    {
      Eigen::VectorXd x0(N);
      for (int k = 0; k < N; ++k)
      {
        bool positive = true;
        switch (pattern)
        {
          case 0:
            positive = (k % 2 == 0);
            break;
          case 1:
            positive = true;
            break;
          case 2:
            positive = (k % 2 == 1);
            break;
          default:
            positive = (k < N / 2);
            break;
        }
        x0(k) = fraction * (positive ? emb.x_upper(k) : emb.x_lower(k));
      }
      const DesignVector u_star = reconstruct_u(emb, {x0});
      const bool inside =
          (u_star.values.array() >= (emb.u_lower + margin).array()).all() &&
          (u_star.values.array() <= (emb.u_upper - margin).array()).all();
      if (!inside)
      {
        continue;
      }
      const DisplacementField target = deform(spec, baseline, u_star);
      const double dist = weighted_inner_product(target, target, baseline);
      const double rough = displacement_roughness(target, baseline);
      if (!(dist > 0.0) || !(rough > 0.0))
      {
        continue;
      }
      if (!constraints_satisfied(problem.constraints, apply(baseline, target)))
      {
        continue;
      }
      problem.u_star = u_star.values;
      problem.target_delta = target.values;
      problem.dist_scale = dist;
      problem.rough_scale = rough;
      return problem;
    }
  }
  throw ValidationError("make_demo_problem: no valid planted optimum found");
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> space_bounds(SearchSpace space,
                                                         const ParameterizationSpec& spec,
                                                         const Embedding& emb)
{
  if (space == SearchSpace::original)
  {
    return {spec.lower, spec.upper};
  }
  return {emb.x_lower, emb.x_upper};
}

Evaluator make_space_evaluator(SearchSpace space, const SpaceContext& ctx, bool bound_penalty)
{
  if (ctx.problem == nullptr)
  {
    throw ValidationError("make_space_evaluator: missing problem");
  }
  if (space != SearchSpace::original && ctx.embedding == nullptr)
  {
    throw ValidationError("make_space_evaluator: latent spaces need an embedding");
  }
  if (space != SearchSpace::original && ctx.mean_delta.size() == 0)
  {
    throw ValidationError("make_space_evaluator: latent spaces need the training mean field");
  }
  const DemoProblem* problem = ctx.problem;
  const Embedding* emb = ctx.embedding;
  const Eigen::VectorXd mean_delta = ctx.mean_delta;
  const double c = ctx.penalty_c;

  return [space, problem, emb, mean_delta, c,
          bound_penalty](const Eigen::VectorXd& point) -> Evaluation
  {
    Evaluation ev;
    try
    {
      DisplacementField delta;
      if (space == SearchSpace::original)
      {
        const DesignVector u = problem->spec.design(point);
        delta = deform(problem->spec, problem->baseline, u);
        ev.u_hat = point;
      }
      else
      {
        const ReducedVector x{point};
        delta = reconstruct_shape(emb->basis, x, mean_delta);
        ev.u_hat = reconstruct_u(*emb, x).values;
      }

      const DesignVector u_hat{ev.u_hat, problem->spec.lower, problem->spec.upper};
      ev.box_feasible = u_hat.within_bounds();
      ev.objective = problem->objective(delta);

      const DiscreteShape deformed = apply(problem->baseline, delta);
      double violation = 0.0;
      for (const Constraint& constraint : problem->constraints)
      {
        violation += constraint_violation(constraint, deformed);
      }
      ev.constraints_feasible = violation == 0.0;
      ev.penalty = c * violation;
      if (bound_penalty && !ev.box_feasible)
      {
        ev.penalty += c * bound_violation(u_hat);
      }
    }
    catch (const std::exception& e)
    {
      ev.objective = kInf;
      ev.penalty = 0.0;
      ev.note = e.what();
      if (ev.u_hat.size() == 0)
      {
        ev.u_hat = Eigen::VectorXd::Constant(problem->spec.dv_count(),
                                             std::numeric_limits<double>::quiet_NaN());
      }
      ev.box_feasible = false;
      ev.constraints_feasible = false;
    }
    return ev;
  };
}

ComparisonReport compare_spaces(const DemoProblem& problem, const Embedding& emb,
                                const Eigen::VectorXd& mean_delta, const PsoConfig& config,
                                double penalty_c, const std::vector<double>& drops)
{
  ComparisonReport report;
  report.drops = drops;

  SpaceContext ctx;
  ctx.problem = &problem;
  ctx.embedding = &emb;
  ctx.mean_delta = mean_delta;
  ctx.penalty_c = penalty_c;

  for (const SearchSpace space : {SearchSpace::original, SearchSpace::kle, SearchSpace::pme})
  {
    const auto [lo, hi] = space_bounds(space, problem.spec, emb);
    const Evaluator evaluate = make_space_evaluator(space, ctx, space == SearchSpace::pme);
    SpaceRun run;
    run.space = space;
    run.result = pso_minimize(evaluate, lo, hi, config);
    run.final_box_feasible = run.result.best.box_feasible;
    run.final_constraints_feasible = run.result.best.constraints_feasible;
    double incumbent = kInf;
    for (const EvalRecord& rec : run.result.trace.records)
    {
      if (rec.penalized < incumbent)
      {
        incumbent = rec.penalized;
        if (!rec.box_feasible)
        {
          run.any_incumbent_box_infeasible = true;
        }
      }
    }
    report.runs.push_back(std::move(run));
  }

  // Shared reference: the original-space value after its first sweep.
  const auto& original_trace = report.runs.front().result.trace.records;
  const int swarm = config.swarm_size > 0
                        ? config.swarm_size
                        : std::min(32, 4 * static_cast<int>(problem.spec.lower.size()));
  double reference = kInf;
  for (const EvalRecord& rec : original_trace)
  {
    if (rec.eval > swarm)
    {
      break;
    }
    reference = std::min(reference, rec.penalized);
  }
  report.reference = reference;

  for (const SpaceRun& run : report.runs)
  {
    std::vector<long> evals(drops.size(), -1);
    for (std::size_t t = 0; t < drops.size(); ++t)
    {
      const double target = reference * (1.0 - drops[t]);
      for (const EvalRecord& rec : run.result.trace.records)
      {
        if (rec.running_best <= target)
        {
          evals[t] = rec.eval;
          break;
        }
      }
    }
    report.evals_to_drop.push_back(std::move(evals));
  }
  return report;
}

}  // namespace pme
