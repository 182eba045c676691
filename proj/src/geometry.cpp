#include "pme/geometry.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace pme
{

namespace
{

void check_conformance(const DisplacementField& a, const DiscreteShape& shape,
                       const char* what)
{
  if (a.size() != 3 * shape.node_count())
  {
    throw DimensionError(std::string(what) + ": field length " + std::to_string(a.size()) +
                         " does not match 3L = " + std::to_string(3 * shape.node_count()));
  }
}

double signed_tet_volume(const Eigen::Vector3d& p0, const Eigen::Vector3d& p1,
                         const Eigen::Vector3d& p2)
{
  return p0.dot(p1.cross(p2)) / 6.0;
}

}  // namespace

Eigen::VectorXd DiscreteShape::metric3() const
{
  const Eigen::Index L = node_count();
  Eigen::VectorXd m(3 * L);
  const Eigen::VectorXd gw = metric();
  m.segment(0, L) = gw;
  m.segment(L, L) = gw;
  m.segment(2 * L, L) = gw;
  return m;
}

void DiscreteShape::validate() const
{
  const Eigen::Index L = node_count();
  if (measures.size() != L || weights.size() != L)
  {
    throw DimensionError("DiscreteShape: nodes/measures/weights length mismatch");
  }
  if (grid_rows * static_cast<Eigen::Index>(grid_cols) != L)
  {
    throw TopologyError("DiscreteShape: grid_rows*grid_cols != node count");
  }
  if ((measures.array() < 0.0).any() || (weights.array() < 0.0).any())
  {
    throw ValidationError("DiscreteShape: negative measure or weight");
  }
  if (L == 0 || metric().maxCoeff() <= 0.0)
  {
    throw ValidationError("DiscreteShape: metric is identically zero");
  }
}

Eigen::Vector3d DisplacementField::at(Eigen::Index node, Eigen::Index node_count) const
{
  return {values(node), values(node_count + node), values(2 * node_count + node)};
}

double weighted_inner_product(const DisplacementField& a, const DisplacementField& b,
                              const DiscreteShape& shape)
{
  check_conformance(a, shape, "weighted_inner_product");
  check_conformance(b, shape, "weighted_inner_product");
  return (a.values.array() * b.values.array() * shape.metric3().array()).sum();
}

double field_norm(const DisplacementField& a, const DiscreteShape& shape)
{
  return std::sqrt(weighted_inner_product(a, a, shape));
}

double enclosed_volume(const DiscreteShape& shape)
{
  if (shape.grid_rows < 2 || shape.grid_cols < 2)
  {
    throw TopologyError("enclosed_volume: structured grid needs at least 2 rows and 2 cols");
  }
  const int rows = shape.grid_rows;
  const int cols = shape.grid_cols;
  auto node = [&](int r, int c) -> Eigen::Vector3d
  { return shape.nodes.row(r * cols + c).transpose(); };

  double vol = 0.0;
  for (int r = 0; r + 1 < rows; ++r)
  {
    for (int c = 0; c + 1 < cols; ++c)
    {
      const Eigen::Vector3d p00 = node(r, c);
      const Eigen::Vector3d p10 = node(r + 1, c);
      const Eigen::Vector3d p01 = node(r, c + 1);
      const Eigen::Vector3d p11 = node(r + 1, c + 1);
      // Split along the (r,c)-(r+1,c+1) diagonal.
      vol += signed_tet_volume(p00, p10, p11);
      vol += signed_tet_volume(p00, p11, p01);
    }
  }
  return std::abs(vol);
}

Extents bounding_extents(const DiscreteShape& shape)
{
  if (shape.node_count() == 0)
  {
    throw ValidationError("bounding_extents: empty shape");
  }
  const Eigen::Vector3d lo = shape.nodes.colwise().minCoeff();
  const Eigen::Vector3d hi = shape.nodes.colwise().maxCoeff();
  return {hi.x() - lo.x(), hi.y() - lo.y(), hi.z() - lo.z()};
}

DiscreteShape apply(const DiscreteShape& baseline, const DisplacementField& d)
{
  check_conformance(d, baseline, "apply");
  const Eigen::Index L = baseline.node_count();
  DiscreteShape out = baseline;
  for (int b = 0; b < 3; ++b)
  {
    out.nodes.col(b) += d.values.segment(b * L, L);
  }
  return out;
}

Eigen::VectorXd panel_area_measures(const Eigen::MatrixX3d& nodes, int rows, int cols)
{
  if (rows < 2 || cols < 2 || nodes.rows() != static_cast<Eigen::Index>(rows) * cols)
  {
    throw TopologyError("panel_area_measures: invalid structured grid");
  }
  Eigen::VectorXd m = Eigen::VectorXd::Zero(nodes.rows());
  auto node = [&](int r, int c) -> Eigen::Vector3d { return nodes.row(r * cols + c).transpose(); };
  for (int r = 0; r + 1 < rows; ++r)
  {
    for (int c = 0; c + 1 < cols; ++c)
    {
      const Eigen::Vector3d p00 = node(r, c);
      const Eigen::Vector3d p10 = node(r + 1, c);
      const Eigen::Vector3d p01 = node(r, c + 1);
      const Eigen::Vector3d p11 = node(r + 1, c + 1);
      const double area = 0.5 * ((p10 - p00).cross(p11 - p00)).norm() +
                          0.5 * ((p11 - p00).cross(p01 - p00)).norm();
      const double share = 0.25 * area;
      m(r * cols + c) += share;
      m((r + 1) * cols + c) += share;
      m(r * cols + c + 1) += share;
      m((r + 1) * cols + c + 1) += share;
    }
  }
  return m;
}

Eigen::VectorXd arc_length_measures(const Eigen::MatrixX3d& nodes, int rows, int cols)
{
  if (rows < 1 || cols < 2 || nodes.rows() != static_cast<Eigen::Index>(rows) * cols)
  {
    throw TopologyError("arc_length_measures: invalid structured grid");
  }
  Eigen::VectorXd m = Eigen::VectorXd::Zero(nodes.rows());
  for (int r = 0; r < rows; ++r)
  {
    for (int c = 0; c + 1 < cols; ++c)
    {
      const double len =
          (nodes.row(r * cols + c + 1) - nodes.row(r * cols + c)).norm();
      m(r * cols + c) += 0.5 * len;
      m(r * cols + c + 1) += 0.5 * len;
    }
  }
  return m;
}

Eigen::VectorXd uniform_measures(Eigen::Index node_count)
{
  return Eigen::VectorXd::Ones(node_count);
}

Eigen::VectorXd uniform_weights(Eigen::Index node_count)
{
  return Eigen::VectorXd::Ones(node_count);
}

Eigen::VectorXd waterline_mask_weights(const Eigen::MatrixX3d& nodes, double waterline)
{
  Eigen::VectorXd w(nodes.rows());
  for (Eigen::Index i = 0; i < nodes.rows(); ++i)
  {
    w(i) = nodes(i, 2) > waterline ? 0.0 : 1.0;
  }
  return w;
}

namespace
{

void append_double(std::string& out, double v)
{
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

double parse_double(std::string_view token, const std::filesystem::path& path)
{
  double v = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size())
  {
    throw IoError("geometry file " + path.string() + ": bad number '" + std::string(token) + "'");
  }
  return v;
}

}  // namespace

void write_geometry_file(const std::filesystem::path& path, const DiscreteShape& shape)
{
  shape.validate();
  std::string out;
  out.reserve(static_cast<std::size_t>(shape.node_count()) * 80 + 32);
  out += std::to_string(shape.node_count());
  out += ' ';
  out += std::to_string(shape.grid_rows);
  out += ' ';
  out += std::to_string(shape.grid_cols);
  out += '\n';
  for (Eigen::Index i = 0; i < shape.node_count(); ++i)
  {
    append_double(out, shape.nodes(i, 0));
    out += ' ';
    append_double(out, shape.nodes(i, 1));
    out += ' ';
    append_double(out, shape.nodes(i, 2));
    out += ' ';
    append_double(out, shape.measures(i));
    out += ' ';
    append_double(out, shape.weights(i));
    out += '\n';
  }
  std::ofstream f(path, std::ios::binary);
  if (!f)
  {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  f << out;
  if (!f)
  {
    throw IoError("failed writing " + path.string());
  }
}

DiscreteShape read_geometry_file(const std::filesystem::path& path)
{
  std::ifstream f(path);
  if (!f)
  {
    throw IoError("cannot open geometry file " + path.string());
  }
  long long L = 0;
  int rows = 0;
  int cols = 0;
  if (!(f >> L >> rows >> cols) || L <= 0)
  {
    throw IoError("geometry file " + path.string() + ": bad header");
  }
  DiscreteShape shape;
  shape.nodes.resize(L, 3);
  shape.measures.resize(L);
  shape.weights.resize(L);
  shape.grid_rows = rows;
  shape.grid_cols = cols;
  std::string tok;
  for (long long i = 0; i < L; ++i)
  {
    double vals[5];
    for (double& v : vals)
    {
      if (!(f >> tok))
      {
        throw IoError("geometry file " + path.string() + ": truncated at node " +
                      std::to_string(i));
      }
      v = parse_double(tok, path);
    }
    shape.nodes(i, 0) = vals[0];
    shape.nodes(i, 1) = vals[1];
    shape.nodes(i, 2) = vals[2];
    shape.measures(i) = vals[3];
    shape.weights(i) = vals[4];
  }
  shape.validate();
  return shape;
}

}  // namespace pme
