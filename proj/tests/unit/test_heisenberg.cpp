#include <doctest.h>

#include <cmath>
#include <numbers>

#include "subfinsler/example52.hpp"
#include "subfinsler/heisenberg.hpp"
#include "subfinsler/norms.hpp"
#include "subfinsler/pontryagin.hpp"
#include "subfinsler/random.hpp"

using namespace subfinsler;
using std::numbers::pi;

namespace {

GroupPoint pt(double x, double y, double t)
{
  Eigen::VectorXd z(2);
  z << x, y;
  return {z, t};
}

GroupPoint random_point(Rng & rng, int n)
{
  Eigen::VectorXd z(2 * n);
  for (int i = 0; i < 2 * n; ++i) { z[i] = uniform(rng, -2.0, 2.0); }
  return {z, uniform(rng, -2.0, 2.0)};
}

double gap(const GroupPoint & a, const GroupPoint & b) { return std::max((a.z() - b.z()).norm(), std::abs(a.t() - b.t())); }

}  // namespace

TEST_CASE("group law on explicit points")
{
  const GroupPoint g = multiply(pt(1, 0, 0), pt(0, 1, 0));
  CHECK(g.x(0) == 1.0);
  CHECK(g.y(0) == 1.0);
  CHECK(g.t() == -2.0);

  const GroupPoint inv = inverse(g);
  CHECK(inv.x(0) == -1.0);
  CHECK(inv.t() == 2.0);
  CHECK(gap(multiply(g, inv), GroupPoint::identity(1)) == 0.0);

  // Equal horizontal parts do not twist.
  CHECK(multiply(pt(0.3, -0.7, 1.5), pt(0.3, -0.7, 2.0)).t() == doctest::Approx(3.5));

  const GroupPoint d = dilate(2.0, g);
  CHECK(d.x(0) == 2.0);
  CHECK(d.y(0) == 2.0);
  CHECK(d.t() == -8.0);
  CHECK_THROWS_AS(dilate(0.0, g), std::invalid_argument);
}

TEST_CASE("dimension mismatch is rejected")
{
  Rng rng(3);
  CHECK_THROWS_AS(multiply(random_point(rng, 1), random_point(rng, 2)), std::invalid_argument);
}

TEST_CASE("group axioms and dilation homomorphism on random points")
{
  Rng rng(11);
  for (int n : {1, 2, 3}) {
    for (int trial = 0; trial < 200; ++trial) {
      const GroupPoint a = random_point(rng, n), b = random_point(rng, n), c = random_point(rng, n);
      CHECK(gap(multiply(multiply(a, b), c), multiply(a, multiply(b, c))) <= 1e-12 * 16.0);
      CHECK(gap(multiply(a, GroupPoint::identity(n)), a) == 0.0);
      CHECK(gap(inverse(inverse(a)), a) == 0.0);
      const double lam = uniform(rng, 0.1, 3.0);
      CHECK(gap(dilate(lam, multiply(a, b)), multiply(dilate(lam, a), dilate(lam, b))) <= 1e-12 * 64.0);
      CHECK(gap(dilate(1.0 / lam, dilate(lam, a)), a) <= 1e-14 * 16.0);
    }
  }
}

TEST_CASE("horizontal lift of a ray stays at height zero")
{
  std::vector<double> s;
  std::vector<Eigen::VectorXd> planar;
  for (int i = 0; i <= 50; ++i) {
    s.push_back(i / 50.0);
    planar.push_back(Eigen::Vector2d(0.6, -1.3) * s.back());
  }
  const SampledCurve c = horizontal_lift(s, planar, 0.0);
  for (const auto & g : c.points()) { CHECK(g.t() == doctest::Approx(0.0).epsilon(1e-15)); }
  CHECK(c.horizontality_residual() <= 1e-15);
}

TEST_CASE("horizontal lift of a circle matches the area relation")
{
  // z(s) = (cos s - 1, sin s): t' = 2 (x' y - y' x) = 2 (cos s - 1), so t(s) = 2 (sin s - s).
  const int m = 4000;
  std::vector<double> s;
  std::vector<Eigen::VectorXd> planar;
  for (int i = 0; i <= m; ++i) {
    s.push_back(2.0 * pi * i / m);
    planar.push_back(Eigen::Vector2d(std::cos(s.back()) - 1.0, std::sin(s.back())));
  }
  const SampledCurve c = horizontal_lift(s, planar, 0.0);
  CHECK(c.points().back().t() == doctest::Approx(-4.0 * pi).epsilon(1e-5));
  CHECK(c.points()[m / 2].t() == doctest::Approx(2.0 * (std::sin(pi) - pi)).epsilon(1e-5));
  CHECK_THROWS_AS(horizontal_lift({0.0}, {Eigen::Vector2d(0, 0)}, 0.0), std::invalid_argument);
}

TEST_CASE("lift of the Example 5.2 projection on the first unit interval")
{
  std::vector<double> s;
  std::vector<Eigen::VectorXd> planar;
  for (int i = 0; i <= 100; ++i) {
    s.push_back(i / 100.0);
    planar.push_back(example52::closed_form(s.back()).g.z());
  }
  const SampledCurve c = horizontal_lift(s, planar, 0.0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(c[i].x(0) == 0.0);
    CHECK(c[i].y(0) == doctest::Approx(-s[i]));
    CHECK(c[i].t() == 0.0);
  }
}

TEST_CASE("curve length of segments and the Example 5.2 loop")
{
  const NormPtr eucl = make_pnorm(2, 2.0);
  std::vector<double> s;
  std::vector<Eigen::VectorXd> planar;
  for (int i = 0; i <= 10; ++i) {
    s.push_back(i / 10.0);
    planar.push_back(Eigen::Vector2d(3.0, 4.0) * s.back());
  }
  CHECK(curve_length(horizontal_lift(s, planar), *eucl) == doctest::Approx(5.0).epsilon(1e-12));

  const ExtremalTrace trace = example52::closed_form_trace(4001);
  CHECK(curve_length(trace.curve, *make_example52()) == doctest::Approx(example52::tau).epsilon(1e-5));

  // Length ignores the parametrization up to the quadrature error.
  std::vector<double> warped;
  for (double x : trace.curve.s_grid()) { warped.push_back(x + 0.3 * x * x); }
  const SampledCurve re(warped, trace.curve.points());
  CHECK(curve_length(re, *make_example52()) == doctest::Approx(curve_length(trace.curve, *make_example52())).epsilon(1e-6));
}

TEST_CASE("homogeneous norm and left-invariant distance")
{
  CHECK_THROWS_AS(HomogeneousNormDescriptor(2.0, 1.5, 1), std::invalid_argument);
  CHECK_THROWS_AS(HomogeneousNormDescriptor(0.5, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(HomogeneousNormDescriptor(4.0, 1.0, 2), std::invalid_argument);
  CHECK_NOTHROW(HomogeneousNormDescriptor(4.0, std::pow(2.0, 0.25 - 0.5), 2));

  const HomogeneousNormDescriptor d(2.0, 1.0, 1);
  CHECK(homogeneous_norm(d, pt(0, 0, 1)) == 1.0);
  CHECK(homogeneous_norm(d, pt(3, 4, 0)) == 5.0);

  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const GroupPoint g = random_point(rng, 1), h = random_point(rng, 1), k = random_point(rng, 1);
    const double lam = uniform(rng, 0.2, 4.0);
    CHECK(homogeneous_norm(d, dilate(lam, g)) == doctest::Approx(lam * homogeneous_norm(d, g)).epsilon(1e-12));
    CHECK(left_invariant_distance(d, g, g) == 0.0);
    CHECK(left_invariant_distance(d, multiply(k, g), multiply(k, h)) == doctest::Approx(left_invariant_distance(d, g, h)).epsilon(1e-12));
    CHECK(left_invariant_distance(d, dilate(lam, g), dilate(lam, h)) ==
          doctest::Approx(lam * left_invariant_distance(d, g, h)).epsilon(1e-12));
    CHECK(left_invariant_distance(d, g, h) == doctest::Approx(left_invariant_distance(d, h, g)).epsilon(1e-12));
    CHECK(left_invariant_distance(d, g, k) <= left_invariant_distance(d, g, h) + left_invariant_distance(d, h, k) + 1e-12);
  }
}

TEST_CASE("CSV round trip is exact")
{
  const ExtremalTrace trace = example52::closed_form_trace(64);
  const SampledCurve back = curve_from_csv(to_csv(trace.curve));
  REQUIRE(back.size() == trace.curve.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back.s_grid()[i] == trace.curve.s_grid()[i]);
    CHECK(gap(back[i], trace.curve[i]) == 0.0);
  }
  CHECK(to_csv(trace.curve).rfind("s,x1,y1,t\n", 0) == 0);
}
