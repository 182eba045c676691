#ifndef PME_PARAMETERIZATION_HPP
#define PME_PARAMETERIZATION_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "pme/geometry.hpp"

namespace pme
{

// Point in the original M-dimensional parametric space with box bounds.
// Out-of-bounds values are representable; the optimizer needs them.
struct DesignVector
{
  Eigen::VectorXd values;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::Index size() const { return values.size(); }
  bool within_bounds() const
  {
    return (values.array() >= lower.array()).all() && (values.array() <= upper.array()).all();
  }
};

enum class ParamKind
{
  bezier_airfoil,
  ffd_lattice,
};

enum class MeasureMode
{
  voronoi,  // panel-area share (surfaces) or arc-length share (2D sections)
  uniform,  // all element measures equal 1
};

struct BezierCurve
{
  Eigen::VectorXd cx;  // control abscissae
  Eigen::VectorXd cy;  // control ordinates
};

// One FFD design variable: a lattice node (1-based layer indices) moving
// along one axis, with bounds given in lattice-normalized units.
struct FfdActiveDof
{
  int i = 0;
  int j = 0;
  int k = 0;
  int axis = 1;  // 0 = xi1, 1 = xi2, 2 = xi3
  double lower = 0.0;
  double upper = 0.0;
};

// Shape parameterization registered against one baseline shape. Both kinds
// are linear displacement maps, so registration reduces them to a single
// 3L x M operator applied to the design vector.
struct ParameterizationSpec
{
  ParamKind kind = ParamKind::bezier_airfoil;
  Eigen::VectorXd lower;  // M
  Eigen::VectorXd upper;  // M
  Eigen::MatrixXd op;     // 3L x M
  Eigen::Index node_count = 0;

  // bezier-airfoil payload
  int nodes_per_side = 0;
  BezierCurve suction;
  BezierCurve pressure;
  std::vector<int> active_indices;  // 0-based control point indices, per side

  // ffd-lattice payload
  std::array<int, 3> lattice_dims{{0, 0, 0}};
  Eigen::Vector3d box_lo = Eigen::Vector3d::Zero();
  Eigen::Vector3d box_hi = Eigen::Vector3d::Zero();
  std::vector<FfdActiveDof> active_dofs;

  int dv_count() const { return static_cast<int>(lower.size()); }
  DesignVector design(Eigen::VectorXd values) const;
  DesignVector zero_design() const;

  nlohmann::json to_json() const;
  std::uint64_t content_hash() const;
};

// Bernstein basis polynomial binomial(n,i) t^i (1-t)^(n-i).
double bernstein(int i, int n, double t);

// Displacement field induced by a design vector; linear in u and zero at
// u = 0.
DisplacementField deform(const ParameterizationSpec& spec, const DiscreteShape& baseline,
                         const DesignVector& u);

struct BezierAirfoil
{
  ParameterizationSpec spec;
  DiscreteShape baseline;
};

// Fits two degree-10 Bezier curves to the NACA 0012 thickness law (least
// squares, clamped endpoints, pressure side mirrored from suction) and
// discretizes each side by nodes_per_side cosine-spaced parameter values.
// Control points 3..9 (1-based) of each side are active with a xi2-scaling
// degree of freedom bounded by [-0.9, 0.9]; M = 14 at the defaults.
BezierAirfoil make_bezier_airfoil(int nodes_per_side = 91,
                                  MeasureMode measures = MeasureMode::voronoi);

// Registers a trivariate Bernstein FFD lattice over the baseline. Local
// coordinates come from affine normalization of the axis-aligned box; a DoF
// value u displaces its lattice node by u * box span along the DoF axis.
ParameterizationSpec make_ffd(const std::array<int, 3>& lattice_dims,
                              const Eigen::Vector3d& box_lo, const Eigen::Vector3d& box_hi,
                              const std::vector<FfdActiveDof>& active_table,
                              const DiscreteShape& baseline);

// The default 22-variable hull lattice schedule on a 9x3x3 lattice.
std::vector<FfdActiveDof> default_hull_active_table();

// Analytic demi-hull on a structured grid: parabolic waterlines and
// sections, widths normalized so the grid extents equal (length, beam,
// draught + freeboard) exactly. The surface spans z in [-draught,
// freeboard]; weights are 1 (apply a waterline mask separately if needed).
struct DemoHullParams
{
  int rows = 90;  // longitudinal stations
  int cols = 25;  // vertical levels
  double length = 5.72;
  double beam = 0.76;
  double draught = 0.25;
  double freeboard = 0.0;
};
DiscreteShape make_demo_hull(const DemoHullParams& params,
                             MeasureMode measures = MeasureMode::voronoi);

// Rebuilds a registered spec from its JSON form against a baseline shape.
// Bezier specs verify that the baseline nodes match the stored polygons;
// FFD specs recompute local coordinates. Throws RegistrationError on
// mismatch.
ParameterizationSpec register_spec(const nlohmann::json& j, const DiscreteShape& baseline);

}  // namespace pme

#endif  // PME_PARAMETERIZATION_HPP
