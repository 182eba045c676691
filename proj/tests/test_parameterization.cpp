#include <doctest.h>

#include <cmath>
#include <random>

#include "pme/parameterization.hpp"
#include "test_helpers.hpp"

using namespace pme;

namespace
{

// Independent Bernstein evaluation by the de Casteljau recursion.
double de_casteljau_weight(int i, int n, double t)
{
  std::vector<double> coeff(static_cast<std::size_t>(n) + 1, 0.0);
  coeff[static_cast<std::size_t>(i)] = 1.0;
  for (int level = 0; level < n; ++level)
  {
    for (int q = 0; q + level < n; ++q)
    {
      coeff[static_cast<std::size_t>(q)] =
          (1.0 - t) * coeff[static_cast<std::size_t>(q)] +
          t * coeff[static_cast<std::size_t>(q) + 1];
    }
  }
  return coeff[0];
}

Eigen::Vector2d de_casteljau_point(Eigen::VectorXd cx, Eigen::VectorXd cy, double t)
{
  const int n = static_cast<int>(cx.size()) - 1;
  for (int level = 0; level < n; ++level)
  {
    for (int q = 0; q + level < n; ++q)
    {
      cx(q) = (1.0 - t) * cx(q) + t * cx(q + 1);
      cy(q) = (1.0 - t) * cy(q) + t * cy(q + 1);
    }
  }
  return {cx(0), cy(0)};
}

double naca0012(double x)
{
  const double sx = std::sqrt(x);
  return 0.6 * (0.2969 * sx - 0.1260 * x - 0.3516 * x * x + 0.2843 * x * x * x -
                0.1015 * x * x * x * x);
}

}  // namespace

TEST_CASE("bernstein: stated values")
{
  CHECK(bernstein(0, 10, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(bernstein(2, 4, 0.5) == doctest::Approx(0.375).epsilon(1e-15));

  double sum = 0.0;
  for (int i = 0; i <= 10; ++i)
  {
    sum += bernstein(i, 10, 0.37);
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));

  CHECK_THROWS_AS(bernstein(11, 10, 0.5), ValidationError);
  CHECK_THROWS_AS(bernstein(-1, 10, 0.5), ValidationError);
}

TEST_CASE("bernstein matches de Casteljau")
{
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial)
  {
    const int n = 1 + static_cast<int>(test::uniform(rng, 0.0, 12.0));
    const int i = static_cast<int>(test::uniform(rng, 0.0, n + 0.999));
    const double t = test::uniform(rng);
    CHECK(bernstein(i, n, t) == doctest::Approx(de_casteljau_weight(i, n, t)).epsilon(1e-12));
  }
}

TEST_CASE("bezier airfoil: baseline thickness and dimensions")
{
  const BezierAirfoil airfoil = make_bezier_airfoil();
  CHECK(airfoil.spec.dv_count() == 14);
  CHECK(airfoil.baseline.node_count() == 182);
  CHECK(airfoil.baseline.grid_rows == 2);

  // Max thickness against the analytic value (0.12 chords at 30 percent
  // chord), measured on the fitted curve by dense sampling.
  double max_y = 0.0;
  for (int q = 0; q <= 2000; ++q)
  {
    const double t = q / 2000.0;
    max_y = std::max(
        max_y, de_casteljau_point(airfoil.spec.suction.cx, airfoil.spec.suction.cy, t).y());
  }
  CHECK(std::abs(2.0 * max_y - 0.12) < 0.002 * 0.12);
}

TEST_CASE("bezier airfoil: symmetric control polygons")
{
  const BezierAirfoil airfoil = make_bezier_airfoil();
  CHECK((airfoil.spec.pressure.cy + airfoil.spec.suction.cy).cwiseAbs().maxCoeff() == 0.0);
  CHECK((airfoil.spec.pressure.cx - airfoil.spec.suction.cx).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("bezier airfoil: minimum node count enforced")
{
  CHECK_THROWS_AS(make_bezier_airfoil(8), ValidationError);
}

TEST_CASE("deform: zero design recovers the parent shape")
{
  const BezierAirfoil airfoil = make_bezier_airfoil(31);
  const DisplacementField d =
      deform(airfoil.spec, airfoil.baseline, airfoil.spec.zero_design());
  CHECK(d.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("deform: linearity and sign symmetry")
{
  const BezierAirfoil airfoil = make_bezier_airfoil(31);
  std::mt19937_64 rng(22);
  const int M = airfoil.spec.dv_count();
  for (int trial = 0; trial < 10; ++trial)
  {
    const Eigen::VectorXd u1 = test::random_vector(rng, M, -0.9, 0.9);
    const Eigen::VectorXd u2 = test::random_vector(rng, M, -0.9, 0.9);
    const double a = test::uniform(rng, -2.0, 2.0);
    const double b = test::uniform(rng, -2.0, 2.0);
    const Eigen::VectorXd lhs =
        deform(airfoil.spec, airfoil.baseline, airfoil.spec.design(a * u1 + b * u2)).values;
    const Eigen::VectorXd rhs =
        a * deform(airfoil.spec, airfoil.baseline, airfoil.spec.design(u1)).values +
        b * deform(airfoil.spec, airfoil.baseline, airfoil.spec.design(u2)).values;
    const double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() / scale < 1e-12);
  }

  // +e_k and -e_k give equal and opposite fields.
  for (int k = 0; k < M; ++k)
  {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(M);
    e(k) = 0.5;
    const Eigen::VectorXd plus =
        deform(airfoil.spec, airfoil.baseline, airfoil.spec.design(e)).values;
    const Eigen::VectorXd minus =
        deform(airfoil.spec, airfoil.baseline, airfoil.spec.design(-e)).values;
    CHECK((plus + minus).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("bezier deform matches perturbed-polygon evaluation")
{
  const BezierAirfoil airfoil = make_bezier_airfoil(41);
  std::mt19937_64 rng(23);
  const Eigen::VectorXd u = test::random_vector(rng, 14, -0.5, 0.5);
  const DiscreteShape deformed =
      apply(airfoil.baseline, deform(airfoil.spec, airfoil.baseline, airfoil.spec.design(u)));

  // Oracle: rebuild each side from an explicitly perturbed control polygon
  // and evaluate with de Casteljau at the node parameters.
  for (int side = 0; side < 2; ++side)
  {
    const BezierCurve& curve = side == 0 ? airfoil.spec.suction : airfoil.spec.pressure;
    Eigen::VectorXd cy = curve.cy;
    for (int m = 0; m < 7; ++m)
    {
      const int a = airfoil.spec.active_indices[static_cast<std::size_t>(m)];
      cy(a) *= 1.0 + u(side * 7 + m);
    }
    for (int c = 0; c < 41; ++c)
    {
      const double t = 0.5 * (1.0 - std::cos(M_PI * c / 40.0));
      const Eigen::Vector2d p = de_casteljau_point(curve.cx, cy, t);
      const Eigen::Index node = static_cast<Eigen::Index>(side) * 41 + c;
      CHECK(deformed.nodes(node, 0) == doctest::Approx(p.x()).epsilon(1e-12));
      CHECK(std::abs(deformed.nodes(node, 1) - p.y()) < 1e-12);
    }
  }
}

TEST_CASE("ffd: single active node matches the Bernstein tensor oracle")
{
  DemoHullParams params;
  params.rows = 12;
  params.cols = 7;
  const DiscreteShape hull = make_demo_hull(params);
  const Eigen::Vector3d lo = hull.nodes.colwise().minCoeff();
  const Eigen::Vector3d hi = hull.nodes.colwise().maxCoeff();

  const std::vector<FfdActiveDof> table = {{3, 2, 2, 1, -1.0, 1.0}};
  const ParameterizationSpec spec = make_ffd({9, 3, 3}, lo, hi, table, hull);
  const double eps = 0.37;
  const DisplacementField d =
      deform(spec, hull, spec.design(Eigen::VectorXd::Constant(1, eps)));

  const Eigen::Vector3d span = hi - lo;
  for (Eigen::Index p = 0; p < hull.node_count(); ++p)
  {
    const double s = (hull.nodes(p, 0) - lo.x()) / span.x();
    const double t = (hull.nodes(p, 1) - lo.y()) / span.y();
    const double v = (hull.nodes(p, 2) - lo.z()) / span.z();
    const double w = de_casteljau_weight(2, 8, s) * de_casteljau_weight(1, 2, t) *
                     de_casteljau_weight(1, 2, v);
    CHECK(d.values(hull.node_count() + p) ==
          doctest::Approx(eps * w * span.y()).epsilon(1e-12));
    CHECK(d.values(p) == 0.0);                          // xi1 untouched
    CHECK(d.values(2 * hull.node_count() + p) == 0.0);  // xi3 untouched
  }
}

TEST_CASE("ffd: partition of unity moves every node by the common shift")
{
  DemoHullParams params;
  params.rows = 9;
  params.cols = 6;
  const DiscreteShape hull = make_demo_hull(params);
  const Eigen::Vector3d lo = hull.nodes.colwise().minCoeff();
  const Eigen::Vector3d hi = hull.nodes.colwise().maxCoeff();

  // All lattice nodes active along xi2 with the same displacement.
  std::vector<FfdActiveDof> table;
  for (int i = 1; i <= 4; ++i)
  {
    for (int j = 1; j <= 3; ++j)
    {
      for (int k = 1; k <= 2; ++k)
      {
        table.push_back({i, j, k, 1, -1.0, 1.0});
      }
    }
  }
  const ParameterizationSpec spec = make_ffd({4, 3, 2}, lo, hi, table, hull);
  const double shift = 0.123;
  const DisplacementField d = deform(
      spec, hull, spec.design(Eigen::VectorXd::Constant(spec.dv_count(), shift)));
  const Eigen::Index L = hull.node_count();
  const double expected = shift * (hi.y() - lo.y());
  CHECK((d.values.segment(L, L).array() - expected).abs().maxCoeff() < 1e-12);
  CHECK(d.values.segment(0, L).cwiseAbs().maxCoeff() == 0.0);
  CHECK(d.values.segment(2 * L, L).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("ffd hull schedule: M = 22 and corner displacement bound")
{
  const DiscreteShape hull = make_demo_hull(DemoHullParams{});
  const Eigen::Vector3d lo = hull.nodes.colwise().minCoeff();
  const Eigen::Vector3d hi = hull.nodes.colwise().maxCoeff();
  const ParameterizationSpec spec =
      make_ffd({9, 3, 3}, lo, hi, default_hull_active_table(), hull);
  CHECK(spec.dv_count() == 22);

  // All variables at their upper bound: xi1 displacement never exceeds
  // 0.025 of the box span.
  const DisplacementField d = deform(spec, hull, spec.design(spec.upper));
  const Eigen::Index L = hull.node_count();
  const double bound = 0.025 * (hi.x() - lo.x());
  CHECK(d.values.segment(0, L).cwiseAbs().maxCoeff() <= bound + 1e-12);

  // Zero design leaves the hull untouched.
  const DisplacementField z = deform(spec, hull, spec.zero_design());
  CHECK(z.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("ffd: nodes outside the box are reported at registration")
{
  const DiscreteShape hull = make_demo_hull(DemoHullParams{});
  const Eigen::Vector3d lo = hull.nodes.colwise().minCoeff();
  Eigen::Vector3d hi = hull.nodes.colwise().maxCoeff();
  hi.x() -= 0.5;  // box no longer covers the bow
  CHECK_THROWS_AS(make_ffd({9, 3, 3}, lo, hi, default_hull_active_table(), hull),
                  RegistrationError);
}

TEST_CASE("inactive degrees of freedom never move")
{
  const BezierAirfoil airfoil = make_bezier_airfoil(31);
  std::mt19937_64 rng(24);
  const Eigen::VectorXd u = test::random_vector(rng, 14, -0.9, 0.9);
  const DisplacementField d = deform(airfoil.spec, airfoil.baseline, airfoil.spec.design(u));
  const Eigen::Index L = airfoil.baseline.node_count();
  CHECK(d.values.segment(0, L).cwiseAbs().maxCoeff() == 0.0);      // xi1 fixed
  CHECK(d.values.segment(2 * L, L).cwiseAbs().maxCoeff() == 0.0);  // xi3 fixed
}

TEST_CASE("spec JSON round-trip re-registers to the identical operator")
{
  const BezierAirfoil airfoil = make_bezier_airfoil(31);
  const ParameterizationSpec again =
      register_spec(airfoil.spec.to_json(), airfoil.baseline);
  CHECK((again.op - airfoil.spec.op).cwiseAbs().maxCoeff() == 0.0);
  CHECK(again.content_hash() == airfoil.spec.content_hash());

  const DiscreteShape hull = make_demo_hull(DemoHullParams{});
  const Eigen::Vector3d lo = hull.nodes.colwise().minCoeff();
  const Eigen::Vector3d hi = hull.nodes.colwise().maxCoeff();
  const ParameterizationSpec spec =
      make_ffd({9, 3, 3}, lo, hi, default_hull_active_table(), hull);
  const ParameterizationSpec spec2 = register_spec(spec.to_json(), hull);
  CHECK((spec2.op - spec.op).cwiseAbs().maxCoeff() == 0.0);
  CHECK(spec2.content_hash() == spec.content_hash());
}

TEST_CASE("bezier registration rejects a mismatched baseline")
{
  const BezierAirfoil airfoil = make_bezier_airfoil(31);
  DiscreteShape tampered = airfoil.baseline;
  tampered.nodes(5, 1) += 0.01;
  CHECK_THROWS_AS(register_spec(airfoil.spec.to_json(), tampered), RegistrationError);
}

TEST_CASE("naca thickness law sanity")
{
  // The analytic law the fit is checked against: max thickness 0.12 chords.
  double best = 0.0;
  for (int q = 0; q <= 5000; ++q)
  {
    best = std::max(best, 2.0 * naca0012(q / 5000.0));
  }
  CHECK(best == doctest::Approx(0.12).epsilon(2e-3));
}
