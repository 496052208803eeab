#include <doctest.h>

#include <cmath>
#include <numbers>

#include "subfinsler/example52.hpp"
#include "subfinsler/glp_lab.hpp"

using namespace subfinsler;

namespace {

Eigen::VectorXd v2(double x, double y)
{
  Eigen::VectorXd v(2);
  v << x, y;
  return v;
}

ExtremalTrace trace_for(const NormOracle & norm, const Eigen::VectorXd & dir, double k, double T)
{
  Multiplier m;
  m.lambda_init = dir / norm.dual_eval(dir);
  m.k = k;
  return integrate_extremal(norm, m, T, default_steps(T));
}

double sup_projection(const ExtremalTrace & t)
{
  double s = 0.0;
  for (const auto & g : t.curve.points()) { s = std::max(s, g.z().norm()); }
  return s;
}

}  // namespace

TEST_CASE("blow-down of a line is constant")
{
  const NormPtr n = make_pnorm(2, 2.0);
  const BlowDownReport r = blow_down(*n, trace_for(*n, v2(0.0, 1.0), 0.0, 32.0), {1, 2, 4, 8, 16, 32});
  REQUIRE(r.projection_sups.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(r.projection_sups[i] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.geodesic_residuals[i] <= 1e-9);
  }
}

TEST_CASE("Euclidean blow-down collapses like 1/k")
{
  const NormPtr n = make_pnorm(2, 2.0);
  const std::vector<int> ks = {1, 2, 4, 8, 16, 32};
  const BlowDownReport full = blow_down(*n, trace_for(*n, v2(0.3, 1.0), -0.25, 32.0), ks);
  // A short trace is extended by re-integration to the same result.
  const BlowDownReport extended = blow_down(*n, trace_for(*n, v2(0.3, 1.0), -0.25, 2.0), ks);
  for (std::size_t i = 0; i < ks.size(); ++i) {
    CHECK(full.projection_sups[i] <= 2.0 / (4.0 * 0.25 * ks[i]) * (1.0 + 1e-9));
    CHECK(full.geodesic_residuals[i] <= 1e-5);
    CHECK(extended.projection_sups[i] == doctest::Approx(full.projection_sups[i]).epsilon(1e-9));
  }
  // Past one period the sup is the circle diameter, so k * sup is constant.
  for (std::size_t i = 3; i < ks.size(); ++i) { CHECK(ks[i] * full.projection_sups[i] == doctest::Approx(2.0).epsilon(1e-6)); }
  CHECK_THROWS_AS(blow_down(*n, trace_for(*n, v2(0.3, 1.0), -0.25, 2.0), {}), std::invalid_argument);
}

TEST_CASE("Example 5.2 blow-down against its certificate")
{
  const NormPtr n = make_example52();
  const ExtremalTrace base = example52::closed_form_trace(2049);
  const BlowDownReport r = blow_down(*n, base, {1, 2, 4, 8, 16, 32});
  const BoundednessCertificate cert = boundedness_certificate(*n, integrate_extremal(*n, example52::multiplier(), 32.0, default_steps(32.0)));
  for (std::size_t i = 0; i < r.k_values.size(); ++i) {
    CHECK(r.projection_sups[i] <= cert.C / r.k_values[i]);
    CHECK(r.geodesic_residuals[i] <= 1e-4);
  }
}

TEST_CASE("certificate: Euclidean gap is the velocity gap")
{
  const NormPtr n = make_pnorm(2, 2.0);
  const ExtremalTrace t = trace_for(*n, v2(1.0, 0.4), 0.7, 10.0);
  const BoundednessCertificate cert = boundedness_certificate(*n, t);
  const auto it = std::lower_bound(t.curve.s_grid().begin(), t.curve.s_grid().end(), cert.s0);
  const std::size_t j = static_cast<std::size_t>(it - t.curve.s_grid().begin());
  CHECK(cert.c == doctest::Approx((t.v[j] - t.v.front()).norm()).epsilon(1e-6));
  CHECK(cert.c == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(cert.k_lower == doctest::Approx(cert.c / (4.0 * t.curve[j].z().norm())).epsilon(1e-12));
  CHECK(cert.k_lower <= 0.7 * (1.0 + 1e-9));
  CHECK(sup_projection(t) <= cert.C);
}

TEST_CASE("certificate: Example 5.2 and p-norms")
{
  const NormPtr e52 = make_example52();
  const ExtremalTrace t = integrate_extremal(*e52, example52::multiplier(), 100.0, default_steps(100.0));
  const BoundednessCertificate cert = boundedness_certificate(*e52, t);
  CHECK(cert.c > 0.0);
  CHECK(cert.k_lower <= 0.25);
  CHECK(sup_projection(t) <= cert.C);

  for (double p : {1.5, 3.0}) {
    const NormPtr n = make_pnorm(2, p);
    const ExtremalTrace tp = trace_for(*n, v2(0.2, 1.0), -0.7, 40.0);
    const BoundednessCertificate cp = boundedness_certificate(*n, tp);
    CHECK(cp.c > 0.0);
    CHECK(cp.k_lower <= 0.7 * (1.0 + 1e-6));
    CHECK(sup_projection(tp) <= cp.C);
  }
}

TEST_CASE("certificate rejects lines")
{
  const NormPtr n = make_pnorm(2, 2.0);
  CHECK_THROWS_WITH_AS(boundedness_certificate(*n, trace_for(*n, v2(1.0, 1.0), 0.0, 5.0)), doctest::Contains("line input"),
                       std::invalid_argument);
}

TEST_CASE("glp on Euclidean and p = 1.5 norms")
{
  const NormPtr eucl = make_pnorm(2, 2.0);
  const GlpReport r = glp_empirical(*eucl, 8, 20.0, 3);
  CHECK(r.all_pass());
  int lines = 0;
  for (const auto & row : r.trials) {
    if (row.multiplier.k == 0.0) {
      ++lines;
      REQUIRE(row.line_deviation);
      CHECK(*row.line_deviation <= 1e-8);
      CHECK(row.observed_sup == doctest::Approx(20.0).epsilon(1e-9));
    } else {
      CHECK(row.observed_sup <= 1.0 / (2.0 * std::abs(row.multiplier.k)) * (1.0 + 1e-6));
      REQUIRE(row.bound_C);
      CHECK(row.observed_sup <= *row.bound_C);
    }
  }
  CHECK(lines == 2);
  CHECK(to_json(glp_empirical(*eucl, 8, 20.0, 3)).dump() == to_json(r).dump());

  CHECK(glp_empirical(*make_pnorm(2, 1.5), 8, 20.0, 5).all_pass());
  CHECK_THROWS_AS(glp_empirical(*eucl, 0, 20.0), std::invalid_argument);
}

TEST_CASE("vertical cost factor")
{
  // Euclidean: the cheapest loop reaching height t has length sqrt(pi |t|); the factor bounds it from above.
  const double f = vertical_cost_factor(*make_pnorm(2, 2.0));
  CHECK(f >= std::sqrt(std::numbers::pi));
  CHECK(f <= 1.01 * std::sqrt(std::numbers::pi));
  CHECK(vertical_cost_factor(*make_pnorm(2, 1.0)) >= f);
}

TEST_CASE("line distance witness")
{
  std::vector<double> s;
  std::vector<Eigen::VectorXd> line, circle;
  for (int i = 0; i <= 400; ++i) {
    s.push_back(i / 400.0 * 2.0 * std::numbers::pi);
    line.push_back(v2(s.back(), -0.5 * s.back()));
    circle.push_back(v2(0.3 * (std::cos(s.back()) - 1.0), 0.3 * std::sin(s.back())));
  }
  CHECK(line_distance_lower_bound(horizontal_lift(s, line)) <= 1e-12);
  CHECK(line_distance_lower_bound(horizontal_lift(s, circle)) == doctest::Approx(0.3).epsilon(1e-4));
}

TEST_CASE("counterexamples for flat norms")
{
  const NormPtr linf = make_pnorm(2, INFINITY);
  const Counterexample cx = nonconvex_counterexample(*linf, 20.0, 3, 1, 128);
  CHECK(cx.nonlinearity > 1e-3);
  CHECK(linf->eval(cx.face_a) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(linf->eval(cx.face_b) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(linf->eval(cx.face_a + cx.face_b) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(curve_length(cx.curve, *linf) == doctest::Approx(linf->eval(cx.curve.points().back().z())).epsilon(1e-9));
  REQUIRE(cx.checks.size() == 3);
  for (const auto & c : cx.checks) {
    CHECK(c.pass);
    CHECK(c.length <= 1.01 * c.direct_length);
  }
  CHECK_THROWS_WITH_AS(nonconvex_counterexample(*make_pnorm(2, 2.0)), doctest::Contains("norm is strictly convex"),
                       std::invalid_argument);
}

TEST_CASE("Example 5.2 verification report")
{
  const Example52Report r = verify_example52();
  CHECK(r.all_pass());
  CHECK(r.checks.size() >= 8);
  for (const auto & c : r.checks) { CHECK_MESSAGE(c.pass, c.name); }
}
