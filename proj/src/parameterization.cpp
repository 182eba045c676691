#include "pme/parameterization.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pme/io.hpp"

namespace pme
{

namespace
{

constexpr int kBezierDegree = 10;
constexpr double kBezierBound = 0.9;
constexpr double kFitTolerance = 5.0e-4;  // max point distance, chord units

// NACA 0012 thickness ordinate (open trailing edge), chord in [0,1].
double naca0012_thickness(double x)
{
  const double sx = std::sqrt(std::max(x, 0.0));
  return 0.6 * (0.2969 * sx - 0.1260 * x - 0.3516 * x * x + 0.2843 * x * x * x -
                0.1015 * x * x * x * x);
}

Eigen::Vector2d bezier_point(const BezierCurve& c, double t)
{
  Eigen::Vector2d p = Eigen::Vector2d::Zero();
  const int n = static_cast<int>(c.cx.size()) - 1;
  for (int i = 0; i <= n; ++i)
  {
    const double b = bernstein(i, n, t);
    p.x() += b * c.cx(i);
    p.y() += b * c.cy(i);
  }
  return p;
}

Eigen::Vector2d bezier_tangent(const BezierCurve& c, double t)
{
  const int n = static_cast<int>(c.cx.size()) - 1;
  Eigen::Vector2d d = Eigen::Vector2d::Zero();
  for (int i = 0; i < n; ++i)
  {
    const double b = n * bernstein(i, n - 1, t);
    d.x() += b * (c.cx(i + 1) - c.cx(i));
    d.y() += b * (c.cy(i + 1) - c.cy(i));
  }
  return d;
}

// Least-squares Bezier fit with clamped endpoints, followed by a few rounds
// of foot-point parameter correction to tighten the fit near the leading
// edge.
BezierCurve fit_suction_side()
{
  const int samples = 241;
  Eigen::VectorXd xs(samples);
  Eigen::VectorXd ys(samples);
  for (int q = 0; q < samples; ++q)
  {
    const double x = 0.5 * (1.0 - std::cos(M_PI * q / (samples - 1)));
    xs(q) = x;
    ys(q) = naca0012_thickness(x);
  }

  // Chord-length parameterization of the sample polyline.
  Eigen::VectorXd t(samples);
  t(0) = 0.0;
  for (int q = 1; q < samples; ++q)
  {
    t(q) = t(q - 1) + std::hypot(xs(q) - xs(q - 1), ys(q) - ys(q - 1));
  }
  t /= t(samples - 1);

  BezierCurve curve;
  curve.cx.resize(kBezierDegree + 1);
  curve.cy.resize(kBezierDegree + 1);
  const Eigen::Vector2d tail(1.0, naca0012_thickness(1.0));

  // Endpoints clamped; the second control point is held on the leading-edge
  // vertical (cx = 0) so the curve meets the nose with a vertical tangent
  // and x(t) ~ t^2 resolves the square-root thickness growth.
  auto solve = [&]()
  {
    Eigen::MatrixXd Ay(samples, kBezierDegree - 1);
    Eigen::MatrixXd Ax(samples, kBezierDegree - 2);
    Eigen::VectorXd rx(samples);
    Eigen::VectorXd ry(samples);
    for (int q = 0; q < samples; ++q)
    {
      const double bn = bernstein(kBezierDegree, kBezierDegree, t(q));
      for (int i = 1; i < kBezierDegree; ++i)
      {
        Ay(q, i - 1) = bernstein(i, kBezierDegree, t(q));
      }
      for (int i = 2; i < kBezierDegree; ++i)
      {
        Ax(q, i - 2) = bernstein(i, kBezierDegree, t(q));
      }
      rx(q) = xs(q) - bn * tail.x();
      ry(q) = ys(q) - bn * tail.y();
    }
    curve.cx.setZero();
    curve.cy.setZero();
    curve.cx(kBezierDegree) = tail.x();
    curve.cy(kBezierDegree) = tail.y();
    curve.cy.segment(1, kBezierDegree - 1) = Ay.colPivHouseholderQr().solve(ry);
    curve.cx.segment(2, kBezierDegree - 2) = Ax.colPivHouseholderQr().solve(rx);
  };

  solve();
  for (int round = 0; round < 3; ++round)
  {
    // Newton foot-point correction: move t(q) toward the parameter of the
    // nearest curve point.
    for (int q = 1; q + 1 < samples; ++q)
    {
      double tq = t(q);
      for (int it = 0; it < 4; ++it)
      {
        const Eigen::Vector2d p = bezier_point(curve, tq) - Eigen::Vector2d(xs(q), ys(q));
        const Eigen::Vector2d dp = bezier_tangent(curve, tq);
        const double denom = dp.squaredNorm();
        if (denom <= 0.0)
        {
          break;
        }
        tq -= p.dot(dp) / denom;
        tq = std::clamp(tq, 0.0, 1.0);
      }
      t(q) = tq;
    }
    // Keep parameters monotone before re-solving.
    for (int q = 1; q < samples; ++q)
    {
      t(q) = std::max(t(q), t(q - 1));
    }
    solve();
  }

  double residual = 0.0;
  for (int q = 0; q < samples; ++q)
  {
    residual = std::max(residual,
                        (bezier_point(curve, t(q)) - Eigen::Vector2d(xs(q), ys(q))).norm());
  }
  if (residual > kFitTolerance)
  {
    throw FitError("bezier airfoil fit residual " + io::format_double(residual) +
                   " exceeds tolerance " + io::format_double(kFitTolerance));
  }
  return curve;
}

nlohmann::json curve_to_json(const BezierCurve& c)
{
  nlohmann::json j;
  j["cx"] = std::vector<double>(c.cx.data(), c.cx.data() + c.cx.size());
  j["cy"] = std::vector<double>(c.cy.data(), c.cy.data() + c.cy.size());
  return j;
}

BezierCurve curve_from_json(const nlohmann::json& j)
{
  const auto cx = j.at("cx").get<std::vector<double>>();
  const auto cy = j.at("cy").get<std::vector<double>>();
  if (cx.size() != cy.size() || cx.empty())
  {
    throw ValidationError("bezier curve JSON: bad control polygon");
  }
  BezierCurve c;
  c.cx = Eigen::Map<const Eigen::VectorXd>(cx.data(), static_cast<Eigen::Index>(cx.size()));
  c.cy = Eigen::Map<const Eigen::VectorXd>(cy.data(), static_cast<Eigen::Index>(cy.size()));
  return c;
}

// Cosine-spaced curve parameters, leading and trailing edge clustered.
Eigen::VectorXd cosine_parameters(int count)
{
  Eigen::VectorXd t(count);
  for (int j = 0; j < count; ++j)
  {
    t(j) = 0.5 * (1.0 - std::cos(M_PI * j / (count - 1)));
  }
  return t;
}

// Builds the 3L x M operator for a bezier-airfoil spec: active control point
// a on side s scales its ordinate, contributing B_a(t) * cy_a to the xi2
// displacement of every node of that side.
Eigen::MatrixXd bezier_operator(const ParameterizationSpec& spec)
{
  const int n = spec.nodes_per_side;
  const Eigen::Index L = 2 * static_cast<Eigen::Index>(n);
  const int per_side = static_cast<int>(spec.active_indices.size());
  Eigen::MatrixXd op = Eigen::MatrixXd::Zero(3 * L, 2 * per_side);
  const Eigen::VectorXd t = cosine_parameters(n);
  for (int side = 0; side < 2; ++side)
  {
    const BezierCurve& curve = side == 0 ? spec.suction : spec.pressure;
    for (int m = 0; m < per_side; ++m)
    {
      const int a = spec.active_indices[static_cast<std::size_t>(m)];
      const Eigen::Index col = side * per_side + m;
      for (int c = 0; c < n; ++c)
      {
        const Eigen::Index node = static_cast<Eigen::Index>(side) * n + c;
        op(L + node, col) = bernstein(a, kBezierDegree, t(c)) * curve.cy(a);
      }
    }
  }
  return op;
}

DiscreteShape bezier_baseline(const ParameterizationSpec& spec, MeasureMode measures)
{
  const int n = spec.nodes_per_side;
  const Eigen::Index L = 2 * static_cast<Eigen::Index>(n);
  DiscreteShape shape;
  shape.nodes.resize(L, 3);
  shape.grid_rows = 2;
  shape.grid_cols = n;
  const Eigen::VectorXd t = cosine_parameters(n);
  for (int side = 0; side < 2; ++side)
  {
    const BezierCurve& curve = side == 0 ? spec.suction : spec.pressure;
    for (int c = 0; c < n; ++c)
    {
      const Eigen::Vector2d p = bezier_point(curve, t(c));
      shape.nodes(side * n + c, 0) = p.x();
      shape.nodes(side * n + c, 1) = p.y();
      shape.nodes(side * n + c, 2) = 0.0;
    }
  }
  shape.measures = measures == MeasureMode::uniform
                       ? uniform_measures(L)
                       : arc_length_measures(shape.nodes, 2, n);
  shape.weights = uniform_weights(L);
  shape.validate();
  return shape;
}

Eigen::MatrixXd ffd_operator(const ParameterizationSpec& spec, const DiscreteShape& baseline)
{
  const Eigen::Index L = baseline.node_count();
  const Eigen::Vector3d span = spec.box_hi - spec.box_lo;
  for (int a = 0; a < 3; ++a)
  {
    if (!(span(a) > 0.0))
    {
      throw ValidationError("ffd lattice box has non-positive span along axis " +
                            std::to_string(a + 1));
    }
  }

  // Affine normalization into the unit cube; nodes must lie inside the box.
  Eigen::MatrixX3d local(L, 3);
  std::string offenders;
  int offender_count = 0;
  const double tol = 1.0e-9;
  for (Eigen::Index p = 0; p < L; ++p)
  {
    for (int a = 0; a < 3; ++a)
    {
      const double s = (baseline.nodes(p, a) - spec.box_lo(a)) / span(a);
      if (s < -tol || s > 1.0 + tol)
      {
        if (offender_count < 8)
        {
          offenders += " node " + std::to_string(p) + " axis " + std::to_string(a + 1);
        }
        ++offender_count;
      }
      local(p, a) = std::clamp(s, 0.0, 1.0);
    }
  }
  if (offender_count > 0)
  {
    throw RegistrationError("ffd registration: " + std::to_string(offender_count) +
                            " node coordinates outside the lattice box:" + offenders);
  }

  const int d1 = spec.lattice_dims[0] - 1;
  const int d2 = spec.lattice_dims[1] - 1;
  const int d3 = spec.lattice_dims[2] - 1;
  const int M = static_cast<int>(spec.active_dofs.size());
  Eigen::MatrixXd op = Eigen::MatrixXd::Zero(3 * L, M);
  for (int m = 0; m < M; ++m)
  {
    const FfdActiveDof& dof = spec.active_dofs[static_cast<std::size_t>(m)];
    for (Eigen::Index p = 0; p < L; ++p)
    {
      const double w = bernstein(dof.i - 1, d1, local(p, 0)) *
                       bernstein(dof.j - 1, d2, local(p, 1)) *
                       bernstein(dof.k - 1, d3, local(p, 2));
      op(static_cast<Eigen::Index>(dof.axis) * L + p, m) = w * span(dof.axis);
    }
  }
  return op;
}

void validate_ffd_table(const std::array<int, 3>& dims, const std::vector<FfdActiveDof>& table)
{
  if (table.empty())
  {
    throw ValidationError("ffd active table is empty");
  }
  for (std::size_t m = 0; m < table.size(); ++m)
  {
    const FfdActiveDof& d = table[m];
    if (d.i < 1 || d.i > dims[0] || d.j < 1 || d.j > dims[1] || d.k < 1 || d.k > dims[2])
    {
      throw ValidationError("ffd active table row " + std::to_string(m + 1) +
                            ": lattice index out of range");
    }
    if (d.axis < 0 || d.axis > 2)
    {
      throw ValidationError("ffd active table row " + std::to_string(m + 1) + ": bad DoF axis");
    }
    if (!(d.lower < d.upper))
    {
      throw ValidationError("ffd active table row " + std::to_string(m + 1) +
                            ": lower bound must be below upper bound");
    }
  }
}

}  // namespace

double bernstein(int i, int n, double t)
{
  if (i < 0 || i > n)
  {
    throw ValidationError("bernstein: index " + std::to_string(i) + " out of range [0," +
                          std::to_string(n) + "]");
  }
  // Multiplicative binomial; exact for the small degrees used here.
  double binom = 1.0;
  for (int q = 1; q <= i; ++q)
  {
    binom *= static_cast<double>(n - i + q) / q;
  }
  return binom * std::pow(t, i) * std::pow(1.0 - t, n - i);
}

DesignVector ParameterizationSpec::design(Eigen::VectorXd values) const
{
  if (values.size() != lower.size())
  {
    throw DimensionError("design vector length " + std::to_string(values.size()) +
                         " does not match M = " + std::to_string(lower.size()));
  }
  return {std::move(values), lower, upper};
}

DesignVector ParameterizationSpec::zero_design() const
{
  return {Eigen::VectorXd::Zero(lower.size()), lower, upper};
}

nlohmann::json ParameterizationSpec::to_json() const
{
  nlohmann::json j;
  if (kind == ParamKind::bezier_airfoil)
  {
    j["kind"] = "bezier-airfoil";
    j["nodes_per_side"] = nodes_per_side;
    j["suction"] = curve_to_json(suction);
    j["pressure"] = curve_to_json(pressure);
    j["active_indices"] = active_indices;
    j["lower"] = lower(0);
    j["upper"] = upper(0);
  }
  else
  {
    j["kind"] = "ffd-lattice";
    j["dims"] = lattice_dims;
    j["box"]["lo"] = {box_lo.x(), box_lo.y(), box_lo.z()};
    j["box"]["hi"] = {box_hi.x(), box_hi.y(), box_hi.z()};
    nlohmann::json rows = nlohmann::json::array();
    for (const FfdActiveDof& d : active_dofs)
    {
      rows.push_back({{"i", d.i},
                      {"j", d.j},
                      {"k", d.k},
                      {"dof", d.axis + 1},
                      {"lower", d.lower},
                      {"upper", d.upper}});
    }
    j["active"] = rows;
  }
  return j;
}

std::uint64_t ParameterizationSpec::content_hash() const
{
  return io::fnv1a64(to_json().dump());
}

DisplacementField deform(const ParameterizationSpec& spec, const DiscreteShape& baseline,
                         const DesignVector& u)
{
  if (baseline.node_count() != spec.node_count)
  {
    throw DimensionError("deform: baseline has " + std::to_string(baseline.node_count()) +
                         " nodes, spec registered for " + std::to_string(spec.node_count));
  }
  if (u.size() != spec.dv_count())
  {
    throw DimensionError("deform: design vector length " + std::to_string(u.size()) +
                         " does not match M = " + std::to_string(spec.dv_count()));
  }
  return DisplacementField(spec.op * u.values);
}

BezierAirfoil make_bezier_airfoil(int nodes_per_side, MeasureMode measures)
{
  if (nodes_per_side < 12)
  {
    throw ValidationError("make_bezier_airfoil: need at least 12 nodes per side");
  }
  ParameterizationSpec spec;
  spec.kind = ParamKind::bezier_airfoil;
  spec.nodes_per_side = nodes_per_side;
  spec.suction = fit_suction_side();
  // Symmetric baseline: pressure side is the mirrored suction polygon.
  spec.pressure.cx = spec.suction.cx;
  spec.pressure.cy = -spec.suction.cy;
  // End clusters (two control points at each end) stay fixed to preserve
  // edge position and tangency; the 7 interior points per side are active.
  spec.active_indices = {2, 3, 4, 5, 6, 7, 8};
  const int M = 2 * static_cast<int>(spec.active_indices.size());
  spec.lower = Eigen::VectorXd::Constant(M, -kBezierBound);
  spec.upper = Eigen::VectorXd::Constant(M, kBezierBound);
  spec.node_count = 2 * static_cast<Eigen::Index>(nodes_per_side);

  BezierAirfoil out;
  out.baseline = bezier_baseline(spec, measures);
  spec.op = bezier_operator(spec);
  out.spec = std::move(spec);
  return out;
}

ParameterizationSpec make_ffd(const std::array<int, 3>& lattice_dims,
                              const Eigen::Vector3d& box_lo, const Eigen::Vector3d& box_hi,
                              const std::vector<FfdActiveDof>& active_table,
                              const DiscreteShape& baseline)
{
  for (int a = 0; a < 3; ++a)
  {
    if (lattice_dims[static_cast<std::size_t>(a)] < 2)
    {
      throw ValidationError("make_ffd: lattice needs at least 2 nodes per axis");
    }
  }
  validate_ffd_table(lattice_dims, active_table);

  ParameterizationSpec spec;
  spec.kind = ParamKind::ffd_lattice;
  spec.lattice_dims = lattice_dims;
  spec.box_lo = box_lo;
  spec.box_hi = box_hi;
  spec.active_dofs = active_table;
  const int M = static_cast<int>(active_table.size());
  spec.lower.resize(M);
  spec.upper.resize(M);
  for (int m = 0; m < M; ++m)
  {
    spec.lower(m) = active_table[static_cast<std::size_t>(m)].lower;
    spec.upper(m) = active_table[static_cast<std::size_t>(m)].upper;
  }
  spec.node_count = baseline.node_count();
  spec.op = ffd_operator(spec, baseline);
  return spec;
}

std::vector<FfdActiveDof> default_hull_active_table()
{
  std::vector<FfdActiveDof> table;
  table.reserve(22);
  for (int i = 1; i <= 9; ++i)
  {
    table.push_back({i, 2, 1, 1, -0.500, 0.500});
  }
  for (int i = 1; i <= 9; ++i)
  {
    table.push_back({i, 2, 2, 1, -0.500, 0.500});
  }
  table.push_back({9, 1, 2, 2, -0.250, 0.250});
  table.push_back({9, 1, 1, 0, -0.025, 0.025});
  table.push_back({9, 1, 1, 2, -0.100, 0.100});
  table.push_back({8, 1, 1, 0, -0.025, 0.025});
  return table;
}

DiscreteShape make_demo_hull(const DemoHullParams& params, MeasureMode measures)
{
  if (params.rows < 2 || params.cols < 2)
  {
    throw ValidationError("make_demo_hull: grid needs at least 2x2 nodes");
  }
  if (!(params.length > 0.0) || !(params.beam > 0.0) || !(params.draught > 0.0))
  {
    throw ValidationError("make_demo_hull: dimensions must be positive");
  }
  if (params.freeboard < 0.0 || params.freeboard >= params.draught)
  {
    throw ValidationError("make_demo_hull: freeboard must be in [0, draught)");
  }
  const int rows = params.rows;
  const int cols = params.cols;
  DiscreteShape shape;
  shape.nodes.resize(static_cast<Eigen::Index>(rows) * cols, 3);
  shape.grid_rows = rows;
  shape.grid_cols = cols;

  // Parabolic waterlines and sections; widths rescaled afterwards so the
  // grid's maximum half-breadth is exactly the beam parameter.
  double max_width = 0.0;
  for (int r = 0; r < rows; ++r)
  {
    const double x = -0.5 * params.length + params.length * r / (rows - 1);
    const double wx = 1.0 - (2.0 * x / params.length) * (2.0 * x / params.length);
    for (int c = 0; c < cols; ++c)
    {
      const double z =
          -params.draught + (params.draught + params.freeboard) * c / (cols - 1);
      const double wz = 1.0 - (z / params.draught) * (z / params.draught);
      const Eigen::Index idx = static_cast<Eigen::Index>(r) * cols + c;
      shape.nodes(idx, 0) = x;
      shape.nodes(idx, 1) = wx * wz;
      shape.nodes(idx, 2) = z;
      max_width = std::max(max_width, wx * wz);
    }
  }
  shape.nodes.col(1) *= params.beam / max_width;

  shape.measures = measures == MeasureMode::uniform
                       ? uniform_measures(shape.node_count())
                       : panel_area_measures(shape.nodes, rows, cols);
  shape.weights = uniform_weights(shape.node_count());
  shape.validate();
  return shape;
}

ParameterizationSpec register_spec(const nlohmann::json& j, const DiscreteShape& baseline)
{
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "bezier-airfoil")
  {
    ParameterizationSpec spec;
    spec.kind = ParamKind::bezier_airfoil;
    spec.nodes_per_side = j.at("nodes_per_side").get<int>();
    spec.suction = curve_from_json(j.at("suction"));
    spec.pressure = curve_from_json(j.at("pressure"));
    spec.active_indices = j.at("active_indices").get<std::vector<int>>();
    for (const int a : spec.active_indices)
    {
      if (a < 0 || a >= spec.suction.cx.size())
      {
        throw ValidationError("bezier spec: active index out of control polygon range");
      }
    }
    const int M = 2 * static_cast<int>(spec.active_indices.size());
    spec.lower = Eigen::VectorXd::Constant(M, j.at("lower").get<double>());
    spec.upper = Eigen::VectorXd::Constant(M, j.at("upper").get<double>());
    if (!(spec.lower(0) < spec.upper(0)))
    {
      throw ValidationError("bezier spec: lower bound must be below upper bound");
    }
    spec.node_count = 2 * static_cast<Eigen::Index>(spec.nodes_per_side);

    if (baseline.grid_rows != 2 || baseline.grid_cols != spec.nodes_per_side)
    {
      throw RegistrationError("bezier registration: baseline grid is not 2 x nodes_per_side");
    }
    // Baseline nodes must be the stored polygons sampled at the canonical
    // cosine parameters.
    const Eigen::VectorXd t = cosine_parameters(spec.nodes_per_side);
    double err = 0.0;
    for (int side = 0; side < 2; ++side)
    {
      const BezierCurve& curve = side == 0 ? spec.suction : spec.pressure;
      for (int c = 0; c < spec.nodes_per_side; ++c)
      {
        const Eigen::Vector2d p = bezier_point(curve, t(c));
        const Eigen::Index idx = static_cast<Eigen::Index>(side) * spec.nodes_per_side + c;
        err = std::max(err, std::abs(p.x() - baseline.nodes(idx, 0)));
        err = std::max(err, std::abs(p.y() - baseline.nodes(idx, 1)));
        err = std::max(err, std::abs(baseline.nodes(idx, 2)));
      }
    }
    if (err > 1.0e-9)
    {
      throw RegistrationError("bezier registration: baseline nodes deviate from polygons by " +
                              io::format_double(err));
    }
    spec.op = bezier_operator(spec);
    return spec;
  }
  if (kind == "ffd-lattice")
  {
    const auto dims = j.at("dims").get<std::array<int, 3>>();
    const auto lo = j.at("box").at("lo").get<std::array<double, 3>>();
    const auto hi = j.at("box").at("hi").get<std::array<double, 3>>();
    std::vector<FfdActiveDof> table;
    for (const auto& row : j.at("active"))
    {
      FfdActiveDof d;
      d.i = row.at("i").get<int>();
      d.j = row.at("j").get<int>();
      d.k = row.at("k").get<int>();
      d.axis = row.at("dof").get<int>() - 1;
      d.lower = row.at("lower").get<double>();
      d.upper = row.at("upper").get<double>();
      table.push_back(d);
    }
    return make_ffd(dims, Eigen::Vector3d(lo[0], lo[1], lo[2]),
                    Eigen::Vector3d(hi[0], hi[1], hi[2]), table, baseline);
  }
  throw ValidationError("unknown parameterization kind '" + kind + "'");
}

}  // namespace pme
