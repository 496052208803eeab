#include "subfinsler/glp_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "subfinsler/example52.hpp"
#include "subfinsler/geodesic_bvp.hpp"
#include "subfinsler/parallel.hpp"
#include "subfinsler/random.hpp"

namespace subfinsler {

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::VectorXd random_direction(Rng & rng, int dim)
{
  std::normal_distribution<double> gauss;
  Eigen::VectorXd u(dim);
  do {
    for (int i = 0; i < dim; ++i) { u[i] = gauss(rng); }
  } while (u.norm() < 1e-6);
  return u / u.norm();
}

// Largest Euclidean norm of a point of the dual sphere N_* = 1, from above.
double dual_sphere_radius(const NormOracle & norm)
{
  // |p| = sup_{|u| = 1} p.u <= N_*(p) max_{|u| = 1} N(u).
  const int dim = norm.dim();
  double coord_bound = 0.0;
  for (int i = 0; i < dim; ++i) {
    const double ni = norm.eval(Eigen::VectorXd::Unit(dim, i));
    coord_bound += ni * ni;
  }
  coord_bound = std::sqrt(coord_bound);
  if (dim != 2) { return coord_bound; }
  // Angular sampling plus the Lipschitz slack of N on the circle.
  constexpr int samples = 4096;
  double sampled = 0.0;
  for (int j = 0; j < samples; ++j) {
    const double phi = 2.0 * kPi * j / samples;
    Eigen::VectorXd u(2);
    u << std::cos(phi), std::sin(phi);
    sampled = std::max(sampled, norm.eval(u));
  }
  return std::min(coord_bound, sampled / (1.0 - kPi / samples));
}

double max_projection_norm(const SampledCurve & c, double s_max)
{
  double sup = 0.0;
  for (std::size_t i = 0; i < c.size() && c.s_grid()[i] <= s_max; ++i) { sup = std::max(sup, c[i].z().norm()); }
  return sup;
}

std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> pts)
{
  std::sort(pts.begin(), pts.end(), [](const auto & a, const auto & b) { return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y()); });
  if (pts.size() < 3) { return pts; }
  auto turn = [](const Eigen::Vector2d & o, const Eigen::Vector2d & a, const Eigen::Vector2d & b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  std::vector<Eigen::Vector2d> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto & p : pts) {
    while (k >= 2 && turn(hull[k - 2], hull[k - 1], p) <= 0.0) { --k; }
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && turn(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) { --k; }
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

double hull_min_width(const std::vector<Eigen::Vector2d> & hull)
{
  if (hull.size() < 3) { return 0.0; }
  double width = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Eigen::Vector2d a = hull[i];
    const Eigen::Vector2d e = hull[(i + 1) % hull.size()] - a;
    const double len = e.norm();
    if (len == 0.0) { continue; }
    double far = 0.0;
    for (const auto & p : hull) { far = std::max(far, std::abs(e.x() * (p.y() - a.y()) - e.y() * (p.x() - a.x())) / len); }
    width = std::min(width, far);
  }
  return width;
}

// Largest t >= from with N(base + t dir) <= 1 + tol, assuming N(base + from dir) <= 1 + tol.
double face_extent(const NormOracle & norm, const Eigen::VectorXd & base, const Eigen::VectorXd & dir, double from)
{
  constexpr double tol = 1e-12;
  auto on_face = [&](double t) { return norm.eval(base + t * dir) <= 1.0 + tol; };
  double lo = from, step = 1.0;
  double hi = lo + step;
  while (on_face(hi)) {
    lo = hi;
    step *= 2.0;
    hi = lo + step;
    if (step > 1e6) { throw std::runtime_error("nonconvex_counterexample: face is unbounded"); }
  }
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    (on_face(mid) ? lo : hi) = mid;
  }
  return lo;
}

CheckEntry check(std::string name, double value, double expected, double tolerance)
{
  return {std::move(name), value, expected, tolerance, std::abs(value - expected) <= tolerance};
}

}  // namespace

BlowDownReport blow_down(const NormOracle & norm, const ExtremalTrace & trace, const std::vector<int> & k_list)
{
  if (k_list.empty()) { throw std::invalid_argument("blow_down: k_list is empty"); }
  for (int k : k_list) {
    if (k < 1) { throw std::invalid_argument("blow_down: k_list entries must be positive"); }
  }
  const int k_max = *std::max_element(k_list.begin(), k_list.end());
  const double end = trace.curve.s_grid().back();
  const ExtremalTrace * source = &trace;
  std::optional<ExtremalTrace> extended;
  if (end < k_max * (1.0 - 1e-12)) {
    try {
      extended.emplace(integrate_extremal(norm, trace.multiplier, static_cast<double>(k_max), default_steps(k_max)));
    } catch (const std::exception & e) {
      throw std::invalid_argument(std::string("blow_down: trace too short and not extendable (") + e.what() + ")");
    }
    source = &*extended;
  }
  const SampledCurve & c = source->curve;
  const std::vector<double> cum = cumulative_length(c, norm);
  const double s_start = c.s_grid().front();

  BlowDownReport report;
  for (int k : k_list) {
    report.k_values.push_back(k);
    // delta_{1/k} scales the projection by 1/k and N-lengths by 1/k.
    report.projection_sups.push_back(max_projection_norm(c, s_start + k * (1.0 + 1e-12)) / k);
    double residual = 0.0;
    for (std::size_t i = 0; i < c.size() && c.s_grid()[i] <= s_start + k * (1.0 + 1e-12); ++i) {
      residual = std::max(residual, std::abs(cum[i] - (c.s_grid()[i] - s_start)) / k);
    }
    report.geodesic_residuals.push_back(residual);
  }
  return report;
}

BoundednessCertificate boundedness_certificate(const NormOracle & norm, const ExtremalTrace & trace)
{
  if (!norm.flags().strictly_convex) { throw std::invalid_argument("boundedness_certificate: norm must be strictly convex"); }
  if (trace.v.empty() || trace.v.size() != trace.curve.size()) {
    throw std::invalid_argument("boundedness_certificate: trace has no control samples");
  }
  const Eigen::VectorXd & v0 = trace.v.front();
  std::size_t best = 0;
  double spread = 0.0;
  for (std::size_t i = 1; i < trace.v.size(); ++i) {
    const double d = (trace.v[i] - v0).norm();
    if (d > spread) {
      spread = d;
      best = i;
    }
  }
  if (spread <= 1e-9 * std::max(1.0, v0.norm())) { throw std::invalid_argument("line input"); }

  BoundednessCertificate cert;
  cert.s0 = trace.curve.s_grid()[best];
  // Rounded down by the accuracy of the sampled subdifferentials; for smooth norms
  // the estimate |k| >= k_lower is an equality and must not be overshot.
  const double gap = set_distance(subdiff_of_squared(norm, trace.v[best]), subdiff_of_squared(norm, v0), norm.dim());
  cert.c = gap * (1.0 - 1e-9);
  const Eigen::VectorXd gamma = trace.curve[best].z() - trace.curve[0].z();
  cert.k_lower = cert.c / (4.0 * gamma.norm());
  // |gamma_I(s)| = |a(s) - a(0)| / (4|k|) <= diam{N_* = R} / (4 k_lower).
  const double diameter = 2.0 * trace.multiplier.R * dual_sphere_radius(norm);
  cert.C = diameter / (4.0 * cert.k_lower);
  return cert;
}

bool GlpReport::all_pass() const
{
  return std::all_of(trials.begin(), trials.end(), [](const GlpTrial & t) { return t.pass; });
}

double vertical_cost_factor(const NormOracle & norm)
{
  // A Euclidean circle in the (x1, y1) plane enclosing |t| / 4 has length sqrt(pi |t|).
  const int n = norm.dim() / 2;
  double lambda = 0.0;
  constexpr int samples = 4096;
  for (int j = 0; j < samples; ++j) {
    const double phi = 2.0 * kPi * j / samples;
    Eigen::VectorXd u = Eigen::VectorXd::Zero(norm.dim());
    u[0] = std::cos(phi);
    u[n] = std::sin(phi);
    lambda = std::max(lambda, norm.eval(u));
  }
  return lambda / (1.0 - kPi / samples) * std::sqrt(kPi);
}

GlpReport glp_empirical(const NormOracle & norm, int trials, double horizon, std::uint64_t seed)
{
  if (trials < 1) { throw std::invalid_argument("glp_empirical: trials must be >= 1"); }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) { throw std::invalid_argument("glp_empirical: horizon must be positive"); }
  const double vertical = vertical_cost_factor(norm);
  GlpReport report;
  report.trials = parallel_map<GlpTrial>(static_cast<std::size_t>(trials), [&](std::size_t i) {
    Rng rng = substream(seed, i);
    const Eigen::VectorXd u = random_direction(rng, norm.dim());
    Multiplier m;
    m.lambda_init = u / norm.dual_eval(u);
    const double magnitude = uniform(rng, 0.25, 2.0);
    const bool negative = uniform01(rng) < 0.5;
    m.k = (i % 4 == 3) ? 0.0 : (negative ? -magnitude : magnitude);
    m.R = 1.0;
    const ExtremalTrace trace = integrate_extremal(norm, m, horizon, default_steps(horizon));

    GlpTrial row;
    row.multiplier = m;
    row.observed_sup = max_projection_norm(trace.curve, horizon * 2.0);
    if (m.k == 0.0) {
      const Eigen::VectorXd d = trace.v.front() / trace.v.front().norm();
      double dev = 0.0;
      for (const auto & g : trace.curve.points()) {
        const Eigen::VectorXd perp = g.z() - g.z().dot(d) * d;
        dev = std::max(dev, std::hypot(perp.norm(), g.t()));
      }
      row.line_deviation = dev;
      row.pass = dev <= 1e-8;
    } else {
      const BoundednessCertificate cert = boundedness_certificate(norm, trace);
      row.bound_C = cert.C;
      row.pass = row.observed_sup <= cert.C;
    }
    // Competitor: vertical loop at the origin followed by the straight chord.
    for (std::size_t j = 0; j < trace.curve.size(); ++j) {
      const GroupPoint & g = trace.curve[j];
      const double s = trace.curve.s_grid()[j];
      if (s > norm.eval(g.z()) + vertical * std::sqrt(std::abs(g.t())) + 1e-9 * (1.0 + s)) {
        row.breakdown_scale = s;
        break;
      }
    }
    return row;
  });
  return report;
}

double line_distance_lower_bound(const SampledCurve & c)
{
  const int dim = 2 * c.n();
  Eigen::MatrixXd pts(static_cast<Eigen::Index>(c.size()), dim);
  for (std::size_t i = 0; i < c.size(); ++i) { pts.row(static_cast<Eigen::Index>(i)) = c[i].z().transpose(); }
  Eigen::MatrixXd basis(dim, 2);
  if (dim == 2) {
    basis.setIdentity();
  } else {
    const Eigen::RowVectorXd mean = pts.colwise().mean();
    const Eigen::MatrixXd centered = pts.rowwise() - mean;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(centered.transpose() * centered);
    basis.col(0) = eig.eigenvectors().col(dim - 1);
    basis.col(1) = eig.eigenvectors().col(dim - 2);
  }
  // Orthogonal projection is 1-Lipschitz and maps lines to lines or points.
  const Eigen::MatrixXd planar = pts * basis;
  std::vector<Eigen::Vector2d> cloud;
  cloud.reserve(c.size());
  for (Eigen::Index i = 0; i < planar.rows(); ++i) { cloud.emplace_back(planar(i, 0), planar(i, 1)); }
  return 0.5 * hull_min_width(convex_hull(std::move(cloud)));
}

Counterexample nonconvex_counterexample(const NormOracle & norm, double horizon, int subintervals, std::uint64_t seed,
                                        int direct_M)
{
  if (!(horizon > 0.0) || !std::isfinite(horizon)) { throw std::invalid_argument("nonconvex_counterexample: horizon must be positive"); }
  if (subintervals < 0) { throw std::invalid_argument("nonconvex_counterexample: subintervals must be >= 0"); }
  const ConvexityProbe probe = strict_convexity_probe(norm, 4000, seed);
  if (probe.strictly_convex) { throw std::invalid_argument("norm is strictly convex"); }

  // The probe pair spans a flat; extend it to the whole face along its line.
  const Eigen::VectorXd dir = probe.z2 - probe.z1;
  const double hi = face_extent(norm, probe.z1, dir, 1.0);
  const double lo = -face_extent(norm, probe.z1, -dir, 0.0);
  const Eigen::VectorXd fa = probe.z1 + lo * dir;
  const Eigen::VectorXd fb = probe.z1 + hi * dir;

  // Zigzag alternating the two face endpoints with unit N-speed; segment lengths cycle
  // so that the path is not periodic at a single scale.
  const std::vector<double> pattern{1.0, 0.5, 1.5, 0.75};
  constexpr int per_segment = 64;
  std::vector<double> grid{0.0};
  std::vector<Eigen::VectorXd> planar{Eigen::VectorXd::Zero(norm.dim())};
  double s = 0.0;
  for (int seg = 0; s < horizon; ++seg) {
    const double len = std::min(pattern[static_cast<std::size_t>(seg) % pattern.size()], horizon - s);
    const Eigen::VectorXd & u = (seg % 2 == 0) ? fa : fb;
    const Eigen::VectorXd start = planar.back();
    for (int j = 1; j <= per_segment; ++j) {
      const double r = len * j / per_segment;
      grid.push_back(s + r);
      planar.push_back(start + r * u);
    }
    s += len;
  }
  grid.back() = horizon;

  Counterexample out{horizontal_lift(grid, planar, 0.0), fa, fb, 0.0, {}};
  out.nonlinearity = line_distance_lower_bound(out.curve);

  Rng rng = substream(seed, 0xC0FFEE);
  std::vector<std::pair<double, double>> spans;
  for (int i = 0; i < subintervals; ++i) {
    double a = uniform(rng, 0.0, horizon), b = uniform(rng, 0.0, horizon);
    if (a > b) { std::swap(a, b); }
    if (b - a < 1e-3 * horizon) { b = std::min(horizon, a + 0.1 * horizon); }
    spans.emplace_back(a, b);
  }
  const NormPtr shared(std::shared_ptr<const NormOracle>(), &norm);
  out.checks = parallel_map<SubintervalCheck>(spans.size(), [&](std::size_t i) {
    const auto [a, b] = spans[i];
    SubintervalCheck row;
    row.s0 = a;
    row.s1 = b;
    const GroupPoint ga = out.curve.at(a), gb = out.curve.at(b);
    // Unit speed: the N-length of the subarc is its parameter gap.
    row.length = b - a;
    DirectProblem problem;
    problem.norm = shared;
    problem.target = multiply(inverse(ga), gb);
    problem.T = b - a;
    problem.M = direct_M;
    const DirectResult direct = solve_direct(problem);
    row.direct_length = direct.length_bound();
    row.direct_residual = direct.residual;
    row.pass = row.length <= 1.01 * row.direct_length;
    return row;
  });
  return out;
}

bool Example52Report::all_pass() const
{
  return std::all_of(checks.begin(), checks.end(), [](const CheckEntry & c) { return c.pass; });
}

Example52Report verify_example52()
{
  namespace e = example52;
  Example52Report report;
  report.checks.push_back(check("theta(1)", e::theta(1.0), 1.0, 0.0));
  report.checks.push_back(check("theta(tau)", e::theta(e::tau), e::theta_max, 1e-10));
  const double th2 = e::theta(2.0);
  report.checks.push_back(check("implicit relation at s=2", e::s_of_theta(th2), 2.0, 1e-10));

  // Cauchy problem: central differences of the implicit solution against its rate.
  double ode = 0.0;
  constexpr double h = 1e-5;
  for (int i = 0; i <= 400; ++i) {
    const double s = 1.01 + (e::tau - 1.02) * i / 400.0;
    const double fd = (e::theta(s + h) - e::theta(s - h)) / (2.0 * h);
    ode = std::max(ode, std::abs(fd - e::theta_rate(e::theta(s))));
  }
  report.checks.push_back(check("cauchy problem residual", ode, 0.0, 1e-6));

  const NormPtr norm = make_example52();
  double speed = 0.0, dual = 0.0;
  for (int i = 0; i <= 4000; ++i) {
    const auto st = e::closed_form(e::tau * i / 4000.0);
    speed = std::max(speed, std::abs(norm->eval(st.v) - 1.0));
    dual = std::max(dual, std::abs(norm->dual_eval(st.a) - 1.0));
  }
  report.checks.push_back(check("closed form N(v) = 1", speed, 0.0, 1e-12));
  report.checks.push_back(check("closed form N*(a) = 1", dual, 0.0, 1e-12));

  const VerifyReport conditions = verify_extremal(*norm, e::closed_form_trace(801), 1e-5);
  for (const auto & c : conditions.checks()) {
    CheckEntry entry{"closed form " + c.name, c.worst, 0.0, 1e-5, c.pass};
    report.checks.push_back(entry);
  }

  const ExtremalTrace trace = integrate_extremal(*norm, e::multiplier(), e::tau, 4096);
  double err = 0.0;
  for (std::size_t i = 0; i < trace.curve.size(); ++i) {
    const auto st = e::closed_form(trace.curve.s_grid()[i]);
    const GroupPoint & g = trace.curve[i];
    err = std::max({err, (g.z() - st.g.z()).norm(), std::abs(g.t() - st.g.t())});
  }
  report.checks.push_back(check("integrator vs closed form (4096 steps)", err, 0.0, 1e-5));
  report.checks.push_back(check("integrator N(v) = 1", trace.diagnostics.speed_dev, 0.0, 1e-6));
  report.checks.push_back(check("integrator N*(a) = 1", trace.diagnostics.dual_dev, 0.0, 1e-6));

  // Multiplier family for the initial segment: admissible iff max(|l|, |l - 4k|) <= 1.
  int mismatches = 0;
  for (int i = 0; i <= 20; ++i) {
    for (int j = 0; j <= 20; ++j) {
      const double ell = -1.5 + 3.0 * i / 20.0;
      const double k = -0.75 + 1.5 * j / 20.0;
      const double margin = std::max(std::abs(ell), std::abs(ell - 4.0 * k)) - 1.0;
      if (std::abs(margin) < 1e-9) { continue; }
      const bool admissible = margin < 0.0;
      const bool pass = verify_extremal(*norm, example52_segment_trace(ell, k, 101), 1e-8).all_pass();
      if (pass != admissible || multiplier_family_check_example52(ell, k) != admissible) { ++mismatches; }
    }
  }
  report.checks.push_back(check("multiplier family mismatches", mismatches, 0.0, 0.0));
  return report;
}

nlohmann::json to_json(const BlowDownReport & r)
{
  return {{"k_values", r.k_values}, {"projection_sups", r.projection_sups}, {"geodesic_residuals", r.geodesic_residuals}};
}

nlohmann::json to_json(const BoundednessCertificate & c)
{
  return {{"s0", c.s0}, {"c", c.c}, {"k_lower", c.k_lower}, {"C", c.C}};
}

nlohmann::json to_json(const GlpReport & r)
{
  nlohmann::json rows = nlohmann::json::array();
  for (const auto & t : r.trials) {
    rows.push_back({{"multiplier", multiplier_to_json(t.multiplier)},
                    {"bound_C", t.bound_C ? nlohmann::json(*t.bound_C) : nlohmann::json()},
                    {"observed_sup", t.observed_sup},
                    {"line_deviation", t.line_deviation ? nlohmann::json(*t.line_deviation) : nlohmann::json()},
                    {"breakdown_scale", t.breakdown_scale ? nlohmann::json(*t.breakdown_scale) : nlohmann::json()},
                    {"pass", t.pass}});
  }
  return {{"trials", rows}, {"all_pass", r.all_pass()}};
}

nlohmann::json to_json(const Example52Report & r)
{
  nlohmann::json rows = nlohmann::json::array();
  for (const auto & c : r.checks) {
    rows.push_back({{"name", c.name}, {"value", c.value}, {"expected", c.expected}, {"tolerance", c.tolerance}, {"pass", c.pass}});
  }
  return {{"checks", rows}, {"all_pass", r.all_pass()}};
}

nlohmann::json to_json(const Counterexample & c)
{
  nlohmann::json rows = nlohmann::json::array();
  for (const auto & s : c.checks) {
    rows.push_back({{"s0", s.s0},
                    {"s1", s.s1},
                    {"length", s.length},
                    {"direct_length", s.direct_length},
                    {"direct_residual", s.direct_residual},
                    {"pass", s.pass}});
  }
  std::vector<double> fa(c.face_a.data(), c.face_a.data() + c.face_a.size());
  std::vector<double> fb(c.face_b.data(), c.face_b.data() + c.face_b.size());
  return {{"face", {fa, fb}}, {"nonlinearity", c.nonlinearity}, {"checks", rows}, {"curve", curve_to_json(c.curve)}};
}

}  // namespace subfinsler
