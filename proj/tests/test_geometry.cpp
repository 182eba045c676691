#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "pme/geometry.hpp"
#include "pme/parameterization.hpp"
#include "test_helpers.hpp"

using namespace pme;
namespace fs = std::filesystem;

namespace
{

DiscreteShape identity_line(int L)
{
  DiscreteShape s;
  s.nodes = Eigen::MatrixX3d::Zero(L, 3);
  for (int i = 0; i < L; ++i)
  {
    s.nodes(i, 0) = i;
  }
  s.measures = uniform_measures(L);
  s.weights = uniform_weights(L);
  s.grid_rows = 1;
  s.grid_cols = L;
  return s;
}

DisplacementField unit_component_field(const DiscreteShape& s, int component)
{
  DisplacementField d = DisplacementField::zero(s.node_count());
  d.block(component, s.node_count()).setOnes();
  return d;
}

// Sphere surface on a lat-long grid; seam column duplicated, poles
// degenerate.
DiscreteShape sphere_surface(double radius, int slices, int stacks)
{
  DiscreteShape s;
  s.nodes.resize(static_cast<Eigen::Index>(slices) * stacks, 3);
  s.grid_rows = slices;
  s.grid_cols = stacks;
  for (int r = 0; r < slices; ++r)
  {
    const double theta = 2.0 * M_PI * r / (slices - 1);
    for (int c = 0; c < stacks; ++c)
    {
      const double phi = M_PI * c / (stacks - 1);
      const Eigen::Index i = static_cast<Eigen::Index>(r) * stacks + c;
      s.nodes(i, 0) = radius * std::sin(phi) * std::cos(theta);
      s.nodes(i, 1) = radius * std::sin(phi) * std::sin(theta);
      s.nodes(i, 2) = radius * std::cos(phi);
    }
  }
  s.measures = uniform_measures(s.node_count());
  s.weights = uniform_weights(s.node_count());
  return s;
}

}  // namespace

TEST_CASE("weighted inner product: stated values")
{
  DiscreteShape s = identity_line(5);
  const DisplacementField zero = DisplacementField::zero(5);
  CHECK(weighted_inner_product(zero, zero, s) == 0.0);

  const DisplacementField e2 = unit_component_field(s, 1);
  CHECK(weighted_inner_product(e2, e2, s) == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("weighted inner product matches a 3-term hand sum")
{
  std::mt19937_64 rng(11);
  DiscreteShape s = test::random_shape(rng, 1, 3);
  DisplacementField a(test::random_vector(rng, 9));
  DisplacementField b(test::random_vector(rng, 9));

  double expected = 0.0;
  for (int i = 0; i < 3; ++i)
  {
    const double dot = a.values(i) * b.values(i) + a.values(3 + i) * b.values(3 + i) +
                       a.values(6 + i) * b.values(6 + i);
    expected += s.weights(i) * s.measures(i) * dot;
  }
  CHECK(weighted_inner_product(a, b, s) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("weighted inner product: bilinearity and symmetry")
{
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial)
  {
    DiscreteShape s = test::random_shape(rng, 2, 4);
    const Eigen::Index n = 3 * s.node_count();
    DisplacementField a(test::random_vector(rng, n));
    DisplacementField b(test::random_vector(rng, n));
    DisplacementField c(test::random_vector(rng, n));
    const double ab = weighted_inner_product(a, b, s);
    CHECK(weighted_inner_product(b, a, s) == doctest::Approx(ab).epsilon(1e-14));
    DisplacementField apc(a.values + c.values);
    CHECK(weighted_inner_product(apc, b, s) ==
          doctest::Approx(ab + weighted_inner_product(c, b, s)).epsilon(1e-12));
  }
}

TEST_CASE("zero-weight nodes contribute nothing")
{
  std::mt19937_64 rng(13);
  DiscreteShape s = test::random_shape(rng, 2, 5);
  s.weights(3) = 0.0;
  s.weights(7) = 0.0;
  const Eigen::Index n = 3 * s.node_count();
  DisplacementField a(test::random_vector(rng, n));
  DisplacementField b(test::random_vector(rng, n));
  const double before = weighted_inner_product(a, b, s);
  for (int comp = 0; comp < 3; ++comp)
  {
    a.values(comp * s.node_count() + 3) += 100.0;
    a.values(comp * s.node_count() + 7) -= 50.0;
  }
  CHECK(weighted_inner_product(a, b, s) == doctest::Approx(before).epsilon(1e-14));
}

TEST_CASE("field norm: stated values and homogeneity")
{
  DiscreteShape s = identity_line(4);
  CHECK(field_norm(DisplacementField::zero(4), s) == 0.0);
  CHECK(field_norm(unit_component_field(s, 0), s) == doctest::Approx(2.0).epsilon(1e-15));

  std::mt19937_64 rng(14);
  DisplacementField a(test::random_vector(rng, 12));
  DisplacementField a3(3.0 * a.values);
  CHECK(field_norm(a3, s) == doctest::Approx(3.0 * field_norm(a, s)).epsilon(1e-14));
}

TEST_CASE("inner product rejects non-conforming fields")
{
  DiscreteShape s = identity_line(4);
  DisplacementField bad(Eigen::VectorXd::Zero(9));
  CHECK_THROWS_AS(weighted_inner_product(bad, bad, s), DimensionError);
}

TEST_CASE("enclosed volume: unit cube")
{
  const DiscreteShape cube =
      test::cube_surface(Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 1, 1));
  CHECK(enclosed_volume(cube) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("enclosed volume: translation invariance and cubic scaling")
{
  const DiscreteShape cube =
      test::cube_surface(Eigen::Vector3d(-0.3, 0.2, 5.0), Eigen::Vector3d(0.7, 1.2, 6.0));
  CHECK(enclosed_volume(cube) == doctest::Approx(1.0).epsilon(1e-12));

  const double s = 2.5;
  DiscreteShape scaled = cube;
  scaled.nodes *= s;
  CHECK(enclosed_volume(scaled) == doctest::Approx(s * s * s).epsilon(1e-12));
}

TEST_CASE("enclosed volume: sphere within 1 percent")
{
  const DiscreteShape sphere = sphere_surface(1.0, 90, 25);
  const double analytic = 4.0 * M_PI / 3.0;
  CHECK(std::abs(enclosed_volume(sphere) - analytic) / analytic < 0.01);
}

TEST_CASE("enclosed volume: mirrored demi-surface of the half cube")
{
  // Half of the unit cube cut at the x = 0 symmetry plane; the open
  // boundaries lie in planes through the origin, so the signed sum gives
  // the demi-volume.
  DiscreteShape s;
  const int rows = 4;
  const int cols = 4;
  s.nodes.resize(rows * cols, 3);
  s.grid_rows = rows;
  s.grid_cols = cols;
  const double ring[4][2] = {{0.0, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {0.0, 0.5}};
  for (int c = 0; c < cols; ++c)
  {
    s.nodes.row(0 * cols + c) << 0.0, 0.0, -0.5;
    s.nodes.row(1 * cols + c) << ring[c][0], ring[c][1], -0.5;
    s.nodes.row(2 * cols + c) << ring[c][0], ring[c][1], 0.5;
    s.nodes.row(3 * cols + c) << 0.0, 0.0, 0.5;
  }
  s.measures = uniform_measures(s.node_count());
  s.weights = uniform_weights(s.node_count());
  CHECK(enclosed_volume(s) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("enclosed volume: degenerate grid throws")
{
  DiscreteShape s = identity_line(4);
  CHECK_THROWS_AS(enclosed_volume(s), TopologyError);
}

TEST_CASE("bounding extents")
{
  const DiscreteShape cube =
      test::cube_surface(Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 1, 1));
  const Extents e = bounding_extents(cube);
  CHECK(e.length == doctest::Approx(1.0));
  CHECK(e.beam == doctest::Approx(1.0));
  CHECK(e.draught == doctest::Approx(1.0));

  DiscreteShape moved = cube;
  moved.nodes.rowwise() += Eigen::RowVector3d(3.0, -2.0, 10.0);
  const Extents m = bounding_extents(moved);
  CHECK(m.length == doctest::Approx(e.length).epsilon(1e-15));
  CHECK(m.beam == doctest::Approx(e.beam).epsilon(1e-15));
  CHECK(m.draught == doctest::Approx(e.draught).epsilon(1e-15));
}

TEST_CASE("demo hull extents match generator parameters")
{
  DemoHullParams params;
  params.rows = 90;
  params.cols = 25;
  params.length = 5.72;
  params.beam = 0.76;
  params.draught = 0.25;
  const DiscreteShape hull = make_demo_hull(params);
  const Extents e = bounding_extents(hull);
  CHECK(std::abs(e.length - params.length) < 1e-12);
  CHECK(std::abs(e.beam - params.beam) < 1e-12);
  CHECK(std::abs(e.draught - params.draught) < 1e-12);
}

TEST_CASE("apply: zero field and inverse")
{
  std::mt19937_64 rng(15);
  DiscreteShape s = test::random_shape(rng, 3, 4);
  CHECK(apply(s, DisplacementField::zero(s.node_count())).nodes.isApprox(s.nodes, 0.0));

  DisplacementField d(test::random_vector(rng, 3 * s.node_count()));
  DisplacementField neg(-d.values);
  const DiscreteShape round_trip = apply(apply(s, d), neg);
  CHECK((round_trip.nodes - s.nodes).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("geometry file round-trips bit-exactly")
{
  std::mt19937_64 rng(16);
  DiscreteShape s = test::random_shape(rng, 3, 5);
  s.nodes(0, 0) = 1.0 / 3.0;  // force long decimal expansions
  s.nodes(1, 1) = 1e-17;
  s.measures(2) = M_PI;
  const fs::path path = fs::temp_directory_path() / "pme_test_geometry.txt";
  write_geometry_file(path, s);
  const DiscreteShape r = read_geometry_file(path);
  CHECK(r.grid_rows == s.grid_rows);
  CHECK(r.grid_cols == s.grid_cols);
  CHECK((r.nodes - s.nodes).cwiseAbs().maxCoeff() == 0.0);
  CHECK((r.measures - s.measures).cwiseAbs().maxCoeff() == 0.0);
  CHECK((r.weights - s.weights).cwiseAbs().maxCoeff() == 0.0);
  fs::remove(path);
}

TEST_CASE("waterline mask zeroes nodes above the waterline")
{
  DemoHullParams params;
  params.freeboard = 0.05;
  const DiscreteShape hull = make_demo_hull(params);
  const Eigen::VectorXd w = waterline_mask_weights(hull.nodes);
  int above = 0;
  for (Eigen::Index i = 0; i < hull.node_count(); ++i)
  {
    if (hull.nodes(i, 2) > 0.0)
    {
      ++above;
      CHECK(w(i) == 0.0);
    }
    else
    {
      CHECK(w(i) == 1.0);
    }
  }
  CHECK(above > 0);
}
