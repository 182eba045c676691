#ifndef PME_GEOMETRY_HPP
#define PME_GEOMETRY_HPP

#include <filesystem>
#include <string>

#include <Eigen/Dense>

#include "pme/errors.hpp"

namespace pme
{

// Discretized shape: L nodes on a structured grid (grid_rows x grid_cols,
// row-major node order) with a per-node element measure and an arbitrary
// non-negative weight. 2D shapes carry a zero third coordinate.
struct DiscreteShape
{
  Eigen::MatrixX3d nodes;    // L x 3
  Eigen::VectorXd measures;  // L, >= 0
  Eigen::VectorXd weights;   // L, >= 0
  int grid_rows = 0;
  int grid_cols = 0;

  Eigen::Index node_count() const { return nodes.rows(); }

  // Combined metric diagonal, one entry per node: measure_i * weight_i.
  Eigen::VectorXd metric() const { return measures.cwiseProduct(weights); }

  // Metric replicated over the three component blocks (length 3L), matching
  // the displacement layout.
  Eigen::VectorXd metric3() const;

  // Throws if sizes disagree, any measure/weight is negative, or the metric
  // is identically zero.
  void validate() const;
};

// Displacement of every node of a parent shape, stored as one flat vector of
// length 3L laid out as [all xi1 components | all xi2 | all xi3].
struct DisplacementField
{
  Eigen::VectorXd values;

  DisplacementField() = default;
  explicit DisplacementField(Eigen::VectorXd v) : values(std::move(v)) {}

  static DisplacementField zero(Eigen::Index node_count)
  {
    return DisplacementField(Eigen::VectorXd::Zero(3 * node_count));
  }

  Eigen::Index size() const { return values.size(); }

  // Component block b (0,1,2) as a segment view.
  auto block(int b, Eigen::Index node_count) { return values.segment(b * node_count, node_count); }
  auto block(int b, Eigen::Index node_count) const
  {
    return values.segment(b * node_count, node_count);
  }

  // 3-vector at one node.
  Eigen::Vector3d at(Eigen::Index node, Eigen::Index node_count) const;
};

// Weighted inner product sum_i rho_i dG_i (a_i . b_i) over nodes.
double weighted_inner_product(const DisplacementField& a, const DisplacementField& b,
                              const DiscreteShape& shape);

// sqrt((a, a)) in the weighted metric.
double field_norm(const DisplacementField& a, const DiscreteShape& shape);

// Volume enclosed by the panel surface, by signed-tetrahedron summation
// about the origin. Quads are split into triangles along the fixed diagonal
// (r,c)-(r+1,c+1); the absolute value of the signed sum is returned. For a
// demi-surface whose open boundaries lie in planes through the origin the
// result is the demi-volume.
double enclosed_volume(const DiscreteShape& shape);

// Axis-aligned extents (max - min) along xi1, xi2, xi3.
struct Extents
{
  double length = 0.0;
  double beam = 0.0;
  double draught = 0.0;
};
Extents bounding_extents(const DiscreteShape& shape);

// g' = g + delta; measures, weights, and topology are copied from the
// baseline.
DiscreteShape apply(const DiscreteShape& baseline, const DisplacementField& d);

// Measure builders.
// Voronoi-like share of panel area attributed to each node (a quarter of
// every incident quad panel).
Eigen::VectorXd panel_area_measures(const Eigen::MatrixX3d& nodes, int rows, int cols);
// Per-row polyline arc length share (half of each adjacent segment); used
// for 2D section grids where rows are independent curves.
Eigen::VectorXd arc_length_measures(const Eigen::MatrixX3d& nodes, int rows, int cols);
Eigen::VectorXd uniform_measures(Eigen::Index node_count);

// Weight builders.
Eigen::VectorXd uniform_weights(Eigen::Index node_count);
// 1 for nodes with xi3 <= waterline, 0 above.
Eigen::VectorXd waterline_mask_weights(const Eigen::MatrixX3d& nodes, double waterline = 0.0);

// Plain-text structured-grid geometry file:
//   header "L rows cols", then L lines "x y z measure weight".
// Values are written in shortest round-trip decimal form and parse back
// bit-exactly.
void write_geometry_file(const std::filesystem::path& path, const DiscreteShape& shape);
DiscreteShape read_geometry_file(const std::filesystem::path& path);

}  // namespace pme

#endif  // PME_GEOMETRY_HPP
