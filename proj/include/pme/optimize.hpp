#ifndef PME_OPTIMIZE_HPP
#define PME_OPTIMIZE_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pme/embedding.hpp"
#include "pme/parameterization.hpp"

namespace pme
{

enum class SearchSpace
{
  original,
  kle,
  pme,
};

std::string to_string(SearchSpace space);
SearchSpace search_space_from_string(const std::string& name);

// Deterministic synchronous PSO. Every value is configuration; the defaults
// are the constriction-style coefficients used throughout.
struct PsoConfig
{
  int swarm_size = 0;  // 0 -> 4 * dimension, capped at 32
  double inertia = 0.721;
  double cognitive = 1.193;
  double social = 1.193;
  int budget = 500;
  std::uint64_t seed = 1;
  bool polish = false;     // coordinate pattern search on the incumbent
  int polish_period = 10;  // iterations between polish passes
};

// One objective evaluation in some search space.
struct Evaluation
{
  double objective = 0.0;  // raw objective (may be +inf on failure)
  double penalty = 0.0;    // bound + constraint penalties
  Eigen::VectorXd u_hat;   // reconstructed original design (= u in original space)
  bool box_feasible = true;
  bool constraints_feasible = true;
  std::string note;  // diagnostics for failures

  double penalized() const { return objective + penalty; }
};

using Evaluator = std::function<Evaluation(const Eigen::VectorXd&)>;

struct EvalRecord
{
  int eval = 0;
  int iteration = 0;
  int particle = 0;  // -1 for polish steps
  Eigen::VectorXd point;
  Eigen::VectorXd u_hat;
  double objective = 0.0;
  double penalty = 0.0;
  double penalized = 0.0;
  double running_best = 0.0;
  bool box_feasible = true;
  bool constraints_feasible = true;
};

struct OptimizationTrace
{
  std::vector<EvalRecord> records;
};

struct PsoResult
{
  Eigen::VectorXd best_point;
  Evaluation best;
  double best_penalized = 0.0;
  OptimizationTrace trace;
};

// Minimizes evaluation.penalized() over the box. Deterministic given seed
// and configuration; particles are initialized on a Kronecker
// low-discrepancy lattice, clamped to the box after every move, and
// evaluated synchronously until the budget is exhausted.
PsoResult pso_minimize(const Evaluator& evaluate, const Eigen::VectorXd& lower,
                       const Eigen::VectorXd& upper, const PsoConfig& config);

// f + c * bound_violation(u_hat) when any component is out of bounds,
// otherwise f unchanged.
double penalized_objective(double f_value, const DesignVector& u_hat, double c);

// Inequality constraint on the deformed shape, penalized with the same
// linear form as the bound penalty; violation is normalized by scale.
struct Constraint
{
  enum class Kind
  {
    greater_equal,
    less_equal,
  };

  std::string name;
  Kind kind = Kind::greater_equal;
  std::function<double(const DiscreteShape&)> value;
  double threshold = 0.0;
  double scale = 1.0;
};
double constraint_violation(const Constraint& c, const DiscreteShape& shape);

// Planted-optimum benchmark: weighted-metric distance to a hidden target
// shape generated at a known in-box design u*, plus a curvature-roughness
// regularizer on the displacement. The objective at u* is exactly
// roughness_weight; geometric constraints keep volume at least the baseline
// value and beam/draught changes within 5 percent.
struct DemoProblem
{
  DiscreteShape baseline;
  ParameterizationSpec spec;
  Eigen::VectorXd u_star;
  Eigen::VectorXd target_delta;  // deform(u*)
  double dist_scale = 1.0;       // ||target_delta||^2 in the weighted metric
  double rough_scale = 1.0;      // roughness of target_delta
  double rough_weight = 0.1;
  std::vector<Constraint> constraints;

  double objective(const DisplacementField& delta) const;
};

struct DemoProblemConfig
{
  double rough_weight = 0.1;
  double box_margin = 0.02;  // u* stays this fraction of range inside the box
};
DemoProblem make_demo_problem(const ParameterizationSpec& spec, const DiscreteShape& baseline,
                              const Embedding& emb, const DemoProblemConfig& config = {});

// Second-difference energy of a displacement field along both grid
// directions, all components.
double displacement_roughness(const DisplacementField& delta, const DiscreteShape& shape);

// Search-space plumbing: box bounds and evaluator for one space. In latent
// spaces the shape comes from the modal reconstruction and u_hat from the
// embedding; the bound penalty applies only when bound_penalty is true
// (the pme space). Evaluator failures score +inf and never throw.
struct SpaceContext
{
  const DemoProblem* problem = nullptr;
  const Embedding* embedding = nullptr;
  Eigen::VectorXd mean_delta;  // training mean field, the latent origin
  double penalty_c = 1000.0;
};
std::pair<Eigen::VectorXd, Eigen::VectorXd> space_bounds(SearchSpace space,
                                                         const ParameterizationSpec& spec,
                                                         const Embedding& emb);
Evaluator make_space_evaluator(SearchSpace space, const SpaceContext& ctx, bool bound_penalty);

// Same objective, budget, and seed across spaces; reports traces,
// feasibility flags, and evaluations needed to reach fixed drops of the
// penalized objective below the shared reference (the original-space
// initial incumbent).
struct SpaceRun
{
  SearchSpace space = SearchSpace::original;
  PsoResult result;
  bool final_box_feasible = true;
  bool final_constraints_feasible = true;
  bool any_incumbent_box_infeasible = false;
};

struct ComparisonReport
{
  std::vector<SpaceRun> runs;
  double reference = 0.0;           // original-space initial incumbent value
  std::vector<double> drops;        // requested relative drops
  std::vector<std::vector<long>> evals_to_drop;  // [run][drop], -1 if never reached
};

ComparisonReport compare_spaces(const DemoProblem& problem, const Embedding& emb,
                                const Eigen::VectorXd& mean_delta, const PsoConfig& config,
                                double penalty_c, const std::vector<double>& drops);

}  // namespace pme

#endif  // PME_OPTIMIZE_HPP
