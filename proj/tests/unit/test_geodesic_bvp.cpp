#include <doctest.h>

#include <cmath>
#include <numbers>

#include "subfinsler/example52.hpp"
#include "subfinsler/geodesic_bvp.hpp"

using namespace subfinsler;

namespace {

GroupPoint pt(double x, double y, double t)
{
  Eigen::VectorXd z(2);
  z << x, y;
  return {z, t};
}

Eigen::VectorXd v2(double x, double y)
{
  Eigen::VectorXd v(2);
  v << x, y;
  return v;
}

double gap(const GroupPoint & a, const GroupPoint & b) { return std::hypot((a.z() - b.z()).norm(), a.t() - b.t()); }

ShootingProblem problem(NormPtr norm, GroupPoint target)
{
  ShootingProblem p{std::move(norm), std::move(target)};
  p.seeds = 4;
  return p;
}

}  // namespace

TEST_CASE("horizontal targets are reached by the chord")
{
  const NormPtr n = make_pnorm(2, 3.0);
  const GroupPoint target = pt(0.8, -0.5, 0.0);
  const ShootOutcome out = shoot(problem(n, target), 1e-8);
  const ShootResult & best = out.best();
  CHECK(best.residual <= 1e-8);
  CHECK(best.T == doctest::Approx(n->eval(target.z())).epsilon(1e-7));
  CHECK(std::abs(best.multiplier.k) <= 1e-6);
  CHECK(best.multiplier.R == 1.0);
  CHECK(out.trace.diagnostics.speed_dev <= 1e-6);
  for (std::size_t i = 0; i < out.trace.curve.size(); i += 64) {
    const double s = out.trace.curve.s_grid()[i];
    CHECK(gap(out.trace.curve[i], pt(0.8 * s / best.T, -0.5 * s / best.T, 0.0)) <= 1e-6);
  }

  // Idempotence: re-integrating the multiplier lands on the same endpoint.
  const GroupPoint again = extremal_endpoint(*n, best.multiplier, best.T, best.steps);
  CHECK(gap(again, out.trace.curve.points().back()) <= 1e-12);
}

TEST_CASE("Euclidean vertical target closes a circle")
{
  const NormPtr n = make_pnorm(2, 2.0);
  const ShootOutcome out = shoot(problem(n, pt(0.0, 0.0, 1.0)), 1e-8);
  CHECK(out.best().residual <= 1e-8);
  CHECK(out.best().T == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-7));
  CHECK(std::abs(out.best().multiplier.k) == doctest::Approx(std::sqrt(std::numbers::pi) / 2.0).epsilon(1e-6));
  CHECK(out.trace.curve.points().back().z().norm() <= 1e-8);
  // Dilation: the vertical target (0, 0, 4) costs twice as much.
  const ShootOutcome far = shoot(problem(n, pt(0.0, 0.0, 4.0)), 1e-8);
  CHECK(far.best().T == doctest::Approx(2.0 * out.best().T).epsilon(1e-7));
}

TEST_CASE("Example 5.2 endpoint recovers the closed-form multiplier")
{
  const GroupPoint target = example52::closed_form(example52::tau).g;
  ShootingProblem p = problem(make_example52(), target);
  const ShootOutcome out = shoot(p, 1e-8);
  CHECK(out.best().residual <= 1e-8);
  CHECK(out.best().T == doctest::Approx(example52::tau).epsilon(1e-6));
  CHECK(out.best().multiplier.k == doctest::Approx(-0.25).epsilon(1e-6));
  // On the initial segment the costate is only fixed up to the flat piece of the dual sphere.
  CHECK(out.best().multiplier.lambda_init[1] == doctest::Approx(1.0).epsilon(1e-6));
  for (std::size_t i = 0; i < out.trace.curve.size(); i += 128) {
    CHECK(gap(out.trace.curve[i], example52::closed_form(out.trace.curve.s_grid()[i]).g) <= 1e-5);
  }
  for (std::size_t i = 1; i < out.solutions.size(); ++i) { CHECK(out.solutions[i].cost >= out.solutions[i - 1].cost); }
}

TEST_CASE("fixed-T shooting scales the speed")
{
  ShootingProblem p = problem(make_pnorm(2, 2.0), pt(1.0, 0.0, 0.0));
  p.mode = ShootMode::FixedT;
  p.T = 2.0;
  const ShootResult best = shoot(p, 1e-8).best();
  CHECK(best.T == 2.0);
  CHECK(best.multiplier.R == doctest::Approx(0.5).epsilon(1e-7));
  CHECK(best.cost == doctest::Approx(0.25).epsilon(1e-7));
}

TEST_CASE("shoot preconditions")
{
  CHECK_THROWS_AS(shoot(problem(make_pnorm(2, 2.0), pt(0, 0, 0)), 1e-8), std::invalid_argument);
  CHECK_THROWS_AS(shoot(problem(make_pnorm(2, INFINITY), pt(1, 0, 0)), 1e-8), NotStrictlyConvexError);
  CHECK_THROWS_AS(shoot(problem(make_pnorm(2, 2.0), pt(1, 0, 0)), 0.0), std::invalid_argument);
}

TEST_CASE("direct method: chord and vertical oracles")
{
  const NormPtr eucl = make_pnorm(2, 2.0);
  DirectProblem horiz{eucl, pt(3.0, 4.0, 0.0), 2.0};
  horiz.M = 64;
  const DirectResult h = solve_direct(horiz);
  CHECK(h.residual <= 1e-6);
  CHECK(h.cost == doctest::Approx(25.0 / 4.0).epsilon(1e-6));
  CHECK(h.length_bound() == doctest::Approx(5.0).epsilon(1e-6));

  DirectProblem vert{eucl, pt(0.0, 0.0, 1.0), 1.0};
  const DirectResult v = solve_direct(vert);
  CHECK(v.residual <= 1e-6);
  // Jensen: cost >= length^2 / (2T), and the discrete optimum is within 1% of pi / 2.
  CHECK(v.cost >= v.length * v.length / 2.0 - 1e-12);
  CHECK(v.cost == doctest::Approx(std::numbers::pi / 2.0).epsilon(0.01));
  CHECK(v.cost >= std::numbers::pi / 2.0 - 1e-6);

  CHECK_THROWS_AS(solve_direct(DirectProblem{eucl, pt(1, 0, 0), 1.0, 3}), std::invalid_argument);
  DirectProblem bad{eucl, pt(1, 0, 0), 1.0};
  bad.penalty = {10.0, 10.0};
  CHECK_THROWS_AS(solve_direct(bad), std::invalid_argument);
}

TEST_CASE("direct cost does not increase along a doubling ladder")
{
  const NormPtr n = make_pnorm(2, 1.5);
  double previous = INFINITY;
  for (int M : {32, 64, 128}) {
    DirectProblem p{n, pt(0.3, 0.2, 0.5), 1.0, M};
    const DirectResult r = solve_direct(p);
    CHECK(r.residual <= 1e-6);
    CHECK(r.cost <= previous * (1.0 + 1e-6));
    previous = r.cost;
  }
}

TEST_CASE("l-infinity degeneracy: chord and face zigzag have equal cost")
{
  const NormPtr linf = make_pnorm(2, INFINITY);
  const std::vector<Eigen::VectorXd> chord(4, v2(2.0, 0.0));
  const std::vector<Eigen::VectorXd> zigzag = {v2(2.0, 1.0), v2(2.0, -1.0), v2(2.0, -1.0), v2(2.0, 1.0)};
  const SampledCurve a = curve_from_controls(chord, 1.0), b = curve_from_controls(zigzag, 1.0);
  CHECK(gap(a.points().back(), b.points().back()) <= 1e-14);
  double ca = 0.0, cb = 0.0;
  for (int j = 0; j < 4; ++j) {
    ca += 0.25 * 0.5 * std::pow(linf->eval(chord[static_cast<std::size_t>(j)]), 2);
    cb += 0.25 * 0.5 * std::pow(linf->eval(zigzag[static_cast<std::size_t>(j)]), 2);
  }
  CHECK(ca == cb);
  CHECK(gap(a[2], b[2]) > 0.1);
  const DirectResult r = solve_direct(DirectProblem{linf, pt(2.0, 0.0, 0.0), 1.0, 64});
  CHECK(r.cost == doctest::Approx(ca).epsilon(1e-4));
}

TEST_CASE("equivalence check: Cauchy-Schwarz equality and gap")
{
  const NormPtr n = make_pnorm(2, 3.0);
  std::vector<Eigen::VectorXd> steady, uneven;
  for (int j = 0; j < 50; ++j) {
    const double phi = 0.1 * j;
    Eigen::VectorXd u = v2(std::cos(phi), std::sin(phi));
    u /= n->eval(u);
    steady.push_back(1.5 * u);
    uneven.push_back((1.0 + 0.5 * std::sin(phi)) * u);
  }
  const EquivalenceReport eq = equivalence_check(*n, steady, 2.0);
  CHECK(eq.integral_n == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(std::abs(eq.relative_gap) <= 1e-10);
  const EquivalenceReport neq = equivalence_check(*n, uneven, 2.0);
  CHECK(neq.gap > 1e-3);
  CHECK(neq.gap == doctest::Approx(2.0 * neq.integral_n2 - neq.integral_n * neq.integral_n));

  const ExtremalTrace ex = example52::closed_form_trace(2001);
  const auto vel = ex.curve.planar_velocities();
  CHECK(std::abs(equivalence_check(*make_example52(), vel, ex.T).relative_gap) <= 1e-6);
}

TEST_CASE("curve_from_controls uses exact dynamics")
{
  const std::vector<Eigen::VectorXd> controls = {v2(1.0, 0.0), v2(0.0, 1.0)};
  const SampledCurve c = curve_from_controls(controls, 2.0);
  // Controls are v = -gamma_I': (0,0) -> (-1,0) -> (-1,-1), and t' = 2 (x' y - y' x) = -2 on the second leg.
  CHECK(gap(c.points().back(), pt(-1.0, -1.0, -2.0)) <= 1e-14);
  CHECK(c.horizontality_residual() <= 1e-12);
}
