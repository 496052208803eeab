#include <doctest.h>

#include <cmath>
#include <numbers>

#include "subfinsler/norms.hpp"
#include "subfinsler/random.hpp"

using namespace subfinsler;

namespace {

Eigen::VectorXd v2(double x, double y)
{
  Eigen::VectorXd v(2);
  v << x, y;
  return v;
}

Eigen::VectorXd random_vec(Rng & rng, int dim)
{
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) { v[i] = uniform(rng, -2.0, 2.0); }
  return v;
}

bool contains(const std::vector<Eigen::VectorXd> & set, const Eigen::VectorXd & p, double tol)
{
  for (const auto & w : set) {
    if ((w - p).norm() <= tol) { return true; }
  }
  return false;
}

double example52_dual(const Eigen::VectorXd & p)
{
  const double x = std::abs(p[0]), y = std::abs(p[1]);
  return x >= y ? -x + std::sqrt(2.0) * std::sqrt(x * x + y * y) : y;
}

std::vector<NormPtr> builtins()
{
  return {make_pnorm(2, 1.0), make_pnorm(2, 1.5), make_pnorm(2, 2.0), make_pnorm(2, 3.0), make_pnorm(2, INFINITY),
          make_pnorm(4, 1.5), make_example52(), make_polygon({{1.0, 0.0}, {0.5, 0.8}, {-0.5, 0.8}})};
}

}  // namespace

TEST_CASE("norm axioms on builtins")
{
  Rng rng(2);
  for (const auto & norm : builtins()) {
    CHECK(norm->eval(Eigen::VectorXd::Zero(norm->dim())) == 0.0);
    for (int trial = 0; trial < 300; ++trial) {
      const Eigen::VectorXd a = random_vec(rng, norm->dim()), b = random_vec(rng, norm->dim());
      const double alpha = uniform(rng, 0.1, 5.0);
      CHECK(norm->eval(alpha * a) == doctest::Approx(alpha * norm->eval(a)).epsilon(1e-12));
      CHECK(norm->eval(-a) == doctest::Approx(norm->eval(a)).epsilon(1e-14));
      CHECK(norm->eval(a + b) <= norm->eval(a) + norm->eval(b) + 1e-12);
    }
  }
}

TEST_CASE("p-norm duals and flags")
{
  const NormPtr l1 = make_pnorm(2, 1.0), l2 = make_pnorm(2, 2.0), l3 = make_pnorm(3 * 2, 3.0);
  CHECK(l1->dual_eval(v2(1, 1)) == 1.0);
  CHECK(l1->dual_eval(v2(3, -4)) == 4.0);
  CHECK(l2->dual_eval(v2(3, 4)) == doctest::Approx(5.0));
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::VectorXd p = random_vec(rng, 6);
    const double q = 1.5;
    CHECK(l3->dual_eval(p) == doctest::Approx(std::pow(p.array().abs().pow(q).sum(), 1.0 / q)).epsilon(1e-12));
  }
  CHECK(l1->flags().strictly_convex == false);
  CHECK(make_pnorm(2, INFINITY)->flags().smooth == false);
  CHECK(l2->flags().strictly_convex);
  CHECK(l2->flags().smooth);
  CHECK_THROWS_AS(make_pnorm(2, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(make_pnorm(3, 2.0), std::invalid_argument);
}

TEST_CASE("l1 subdifferential matches the sign-pattern enumeration")
{
  const NormPtr l1 = make_pnorm(4, 1.0);
  Rng rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    Eigen::VectorXd z = random_vec(rng, 4);
    for (int i = 0; i < 4; ++i) {
      if (uniform01(rng) < 0.4) { z[i] = 0.0; }
    }
    if (z.isZero()) { z[0] = 1.0; }
    std::vector<int> free;
    for (int i = 0; i < 4; ++i) {
      if (z[i] == 0.0) { free.push_back(i); }
    }
    const ConvexSetApprox set = l1->subdiff(z);
    CHECK(set.witnesses.size() == (std::size_t{1} << free.size()));
    for (unsigned mask = 0; mask < (1u << free.size()); ++mask) {
      Eigen::VectorXd p(4);
      for (int i = 0; i < 4; ++i) { p[i] = z[i] > 0 ? 1.0 : -1.0; }
      for (std::size_t j = 0; j < free.size(); ++j) { p[free[j]] = (mask >> j) & 1u ? 1.0 : -1.0; }
      CHECK(contains(set.witnesses, p, 1e-12));
    }
  }
  const ConvexSetApprox seg = make_pnorm(2, 1.0)->subdiff(v2(1, 0));
  CHECK(contains(seg.witnesses, v2(1, 1), 1e-15));
  CHECK(contains(seg.witnesses, v2(1, -1), 1e-15));
}

TEST_CASE("Example 5.2 closed forms")
{
  const NormPtr n = make_example52();
  CHECK(n->eval(v2(0, 1)) == 1.0);
  CHECK(n->eval(v2(-1.0 + std::sqrt(2.0), 0)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(n->dual_eval(v2(0, 1)) == 1.0);
  CHECK(n->dual_eval(v2(1, 1)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(n->flags().strictly_convex);
  CHECK_FALSE(n->flags().smooth);

  // Boundary of B_N: x^2 + y^2 + 2|x| = 1.
  for (int j = 0; j < 360; ++j) {
    const double phi = 2.0 * std::numbers::pi * j / 360.0;
    const Eigen::VectorXd z = to_unit_sphere(*n, v2(std::cos(phi), std::sin(phi)));
    CHECK(z.squaredNorm() + 2.0 * std::abs(z[0]) == doctest::Approx(1.0).epsilon(1e-12));
  }

  // Corner at (0, 1): one-sided derivatives d -> |d0| + d1 give the segment with ends (+-1, 1).
  const ConvexSetApprox corner = n->subdiff(v2(0, 1));
  CHECK(contains(corner.witnesses, v2(1, 1), 1e-12));
  CHECK(contains(corner.witnesses, v2(-1, 1), 1e-12));
  CHECK(corner.witness_spread() == doctest::Approx(2.0));
  CHECK(corner.support(v2(1, 0)) == doctest::Approx(1.0));
  CHECK(corner.support(v2(0.3, 0.5)) == doctest::Approx(0.8));

  const auto g = n->dual_grad(v2(0.2, 0.9));
  REQUIRE(g.has_value());
  CHECK((*g - v2(0, 1)).norm() == 0.0);
}

TEST_CASE("generic dual agrees with closed forms")
{
  const std::vector<std::pair<NormPtr, std::function<double(const Eigen::VectorXd &)>>> cases{
    {make_pnorm(2, 1.0), [](const Eigen::VectorXd & p) { return p.cwiseAbs().maxCoeff(); }},
    {make_pnorm(2, 2.0), [](const Eigen::VectorXd & p) { return p.norm(); }},
    {make_pnorm(2, INFINITY), [](const Eigen::VectorXd & p) { return p.cwiseAbs().sum(); }},
    {make_example52(), example52_dual},
  };
  for (const auto & [norm, dual] : cases) {
    for (int j = 0; j < 100; ++j) {
      const double phi = 2.0 * std::numbers::pi * (j + 0.37) / 100.0;
      const Eigen::VectorXd p = 1.7 * v2(std::cos(phi), std::sin(phi));
      CHECK(dual_eval_generic(*norm, p) == doctest::Approx(dual(p)).epsilon(1e-6));
    }
    CHECK(dual_eval_generic(*norm, v2(0, 0)) == 0.0);
  }
}

TEST_CASE("Legendre transform of F_N")
{
  const NormPtr eucl = make_pnorm(2, 2.0), ex = make_example52();
  CHECK(legendre_of_squared(*eucl, v2(3, 4)) == doctest::Approx(12.5));
  CHECK(legendre_of_squared(*ex, v2(0, 1)) == doctest::Approx(0.5));
  CHECK(legendre_of_squared(*ex, v2(0, 0)) == 0.0);

  // Brute-force sup_z p.z - F_N(z) on a grid covering the maximizers.
  for (const auto & norm : {eucl, ex, make_pnorm(2, 3.0)}) {
    for (const auto & p : {v2(0.3, 0.4), v2(-0.7, 0.1), v2(0.5, -0.5)}) {
      double best = -1e300;
      for (int i = -400; i <= 400; ++i) {
        for (int j = -400; j <= 400; ++j) {
          const Eigen::VectorXd z = v2(i / 400.0, j / 400.0);
          best = std::max(best, p.dot(z) - norm->squared(z));
        }
      }
      CHECK(legendre_of_squared(*norm, p) == doctest::Approx(best).epsilon(1e-4));
    }
  }
}

TEST_CASE("subdifferential of F_N and Fenchel residuals")
{
  const NormPtr eucl = make_pnorm(2, 2.0), ex = make_example52();
  const ConvexSetApprox s = subdiff_of_squared(*eucl, v2(0, 2));
  CHECK(s.is_singleton());
  CHECK((s.witnesses.front() - v2(0, 2)).norm() <= 1e-15);
  CHECK(subdiff_of_squared(*ex, v2(0, 0)).witnesses.front().norm() == 0.0);
  const ConvexSetApprox corner = subdiff_of_squared(*ex, v2(0, 1));
  CHECK(contains(corner.witnesses, v2(1, 1), 1e-12));
  CHECK(contains(corner.witnesses, v2(-1, 1), 1e-12));

  CHECK(fenchel_residual(*eucl, v2(1, 0), v2(1, 0)) == doctest::Approx(0.0));
  CHECK(fenchel_residual(*eucl, v2(1, 0), v2(0, 1)) == doctest::Approx(1.0));
  CHECK(fenchel_residual(*ex, v2(0, 1), v2(0.5, 1)) <= 1e-15);
}

TEST_CASE("Euler identity and scaling invariance of witnesses")
{
  Rng rng(9);
  for (const auto & norm : builtins()) {
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::VectorXd z = random_vec(rng, norm->dim());
      const ConvexSetApprox set = norm->subdiff(z);
      for (const auto & p : set.witnesses) {
        CHECK(p.dot(z) == doctest::Approx(norm->eval(z)).epsilon(1e-9));
        CHECK(norm->dual_eval(p) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(fenchel_residual(*norm, z, norm->eval(z) * p) <= 1e-9 * (1.0 + z.squaredNorm()));
      }
      const ConvexSetApprox scaled = norm->subdiff(3.7 * z);
      REQUIRE(scaled.witnesses.size() == set.witnesses.size());
      for (const auto & p : scaled.witnesses) { CHECK(contains(set.witnesses, p, 1e-9)); }
    }
  }
}

TEST_CASE("F_N subdifferentials separate for strictly convex norms")
{
  Rng rng(12);
  for (const auto & norm : {make_pnorm(2, 1.5), make_pnorm(2, 2.0), make_example52()}) {
    for (int trial = 0; trial < 50; ++trial) {
      const Eigen::VectorXd a = random_vec(rng, 2), b = random_vec(rng, 2);
      CHECK(set_distance(subdiff_of_squared(*norm, a), subdiff_of_squared(*norm, b), 2) > 0.0);
    }
  }
}

TEST_CASE("strict convexity probe")
{
  const ConvexityProbe linf = strict_convexity_probe(*make_pnorm(2, INFINITY), 2000);
  CHECK_FALSE(linf.strictly_convex);
  CHECK(linf.worst_margin > 0.0);
  // The witness pair spans a flat: the midpoint stays on the sphere.
  CHECK(make_pnorm(2, INFINITY)->eval(0.5 * (linf.z1 + linf.z2)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(strict_convexity_probe(*make_pnorm(2, 2.0), 2000).strictly_convex);
  CHECK(strict_convexity_probe(*make_example52(), 2000).strictly_convex);
  CHECK_FALSE(strict_convexity_probe(*make_polygon({{1, 0}, {0.5, 0.8}, {-0.5, 0.8}}), 2000).strictly_convex);
}

TEST_CASE("custom norms get measured flags and numerical subdifferentials")
{
  const NormPtr eucl = make_custom(2, [](const Eigen::VectorXd & z) { return z.norm(); });
  CHECK(eucl->flags().strictly_convex);
  CHECK(eucl->flags().smooth);
  CHECK(eucl->dual_eval(v2(3, 4)) == doctest::Approx(5.0).epsilon(1e-6));
  const ConvexSetApprox g = eucl->subdiff(v2(0.6, 0.8));
  CHECK(g.is_singleton(1e-5));
  CHECK((g.witnesses.front() - v2(0.6, 0.8)).norm() <= 1e-6);

  const NormPtr box = make_custom(2, [](const Eigen::VectorXd & z) { return z.cwiseAbs().maxCoeff(); });
  CHECK_FALSE(box->flags().strictly_convex);
  CHECK_FALSE(box->flags().smooth);
  const auto wrap = [](const NormPtr & n) { return make_custom(n->dim(), [n](const Eigen::VectorXd & z) { return n->eval(z); }); };
  const NormPtr ex = wrap(make_example52());
  CHECK(ex->flags().strictly_convex);
  CHECK_FALSE(ex->flags().smooth);
  CHECK(wrap(make_pnorm(2, 1.2))->flags().smooth);
  CHECK(wrap(make_pnorm(4, 4.0))->flags().smooth);
  CHECK(wrap(make_pnorm(4, 4.0))->flags().strictly_convex);
  CHECK_FALSE(wrap(make_pnorm(4, 1.0))->flags().smooth);
  CHECK_FALSE(wrap(make_pnorm(4, 1.0))->flags().strictly_convex);

  const ConvexSetApprox corner = box->subdiff(v2(1, 1));
  CHECK(contains(corner.witnesses, v2(1, 0), 1e-4));
  CHECK(contains(corner.witnesses, v2(0, 1), 1e-4));
}

TEST_CASE("descriptor parsing is strict")
{
  CHECK(norm_from_json(nlohmann::json::parse(R"({"family":"pnorm","p":"inf"})"))->eval(v2(3, -4)) == 4.0);
  CHECK(norm_from_json(nlohmann::json::parse(R"({"family":"example52"})"))->dim() == 2);
  const NormPtr poly = norm_from_json(nlohmann::json::parse(R"({"family":"polygon","vertices":[[1,0],[0,1]]})"));
  CHECK(poly->eval(v2(0.5, 0.5)) == doctest::Approx(1.0));
  CHECK(norm_from_json(poly->descriptor())->eval(v2(0.2, 0.7)) == doctest::Approx(poly->eval(v2(0.2, 0.7))));
  CHECK_THROWS_AS(norm_from_json(nlohmann::json::parse(R"({"family":"pnorm","p":2,"extra":1})")), std::invalid_argument);
  CHECK_THROWS_AS(norm_from_json(nlohmann::json::parse(R"({"family":"pnorm","p":0.5})")), std::invalid_argument);
  CHECK_THROWS_AS(norm_from_json(nlohmann::json::parse(R"({"family":"sphere"})")), std::invalid_argument);
}
