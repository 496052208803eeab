#include "subfinsler/pontryagin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace subfinsler {

namespace {

using State = std::vector<double>;

/// Absolute local error accepted per step, relative to max(1, |x|_inf).
constexpr double kStepTol = 1e-11;

double median(std::vector<double> values)
{
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  double m = values[mid];
  if (values.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid)));
  }
  return m;
}

Eigen::VectorXd dual_gradient(const NormOracle & norm, const Eigen::VectorXd & a)
{
  auto g = norm.dual_grad(a);
  if (!g) { throw DualGradientUndefinedError("dual gradient undefined at a = (" + std::to_string(a[0]) + ", ...)"); }
  return *g;
}

/// State layout: z (2n), t, a (2n).
auto make_system(const NormOracle & norm, const Multiplier & m)
{
  const int dim = norm.dim();
  const int n = dim / 2;
  return [&norm, m, dim, n](const State & x, State & dxdt, double) {
    const Eigen::Map<const Eigen::VectorXd> z(x.data(), dim);
    const Eigen::Map<const Eigen::VectorXd> a(x.data() + dim + 1, dim);
    const Eigen::VectorXd v = m.R * dual_gradient(norm, a);
    double tdot = 0.0;
    for (int i = 0; i < n; ++i) { tdot += -v[i] * z[n + i] + v[n + i] * z[i]; }
    for (int i = 0; i < dim; ++i) { dxdt[static_cast<std::size_t>(i)] = -v[i]; }
    dxdt[static_cast<std::size_t>(dim)] = 2.0 * tdot;
    const Eigen::VectorXd adot = 4.0 * m.k * apply_j(v);
    for (int i = 0; i < dim; ++i) { dxdt[static_cast<std::size_t>(dim + 1 + i)] = adot[i]; }
  };
}

State initial_state(const Multiplier & m, int dim)
{
  State x(static_cast<std::size_t>(2 * dim + 1), 0.0);
  for (int i = 0; i < dim; ++i) { x[static_cast<std::size_t>(dim + 1 + i)] = m.lambda_init[i]; }
  return x;
}

/// Classical RK4 increment from x over h; `k1` is f(x) and `k4` receives the last stage.
template<typename System>
State rk4_increment(const System & system, const State & x, const State & k1, double h, State * k4_out = nullptr)
{
  const std::size_t n = x.size();
  State k2(n), k3(n), k4(n), y(n);
  for (std::size_t i = 0; i < n; ++i) { y[i] = x[i] + 0.5 * h * k1[i]; }
  system(y, k2, 0.0);
  for (std::size_t i = 0; i < n; ++i) { y[i] = x[i] + 0.5 * h * k2[i]; }
  system(y, k3, 0.0);
  for (std::size_t i = 0; i < n; ++i) { y[i] = x[i] + h * k3[i]; }
  system(y, k4, 0.0);
  for (std::size_t i = 0; i < n; ++i) { y[i] = h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]); }
  if (k4_out) { *k4_out = std::move(k4); }
  return y;
}

template<typename System>
State rk4_increment(const System & system, const State & x, double h)
{
  State k1(x.size());
  system(x, k1, 0.0);
  return rk4_increment(system, x, k1, h);
}

double scale_of(const State & x)
{
  double scale = 1.0;
  for (double v : x) { scale = std::max(scale, std::abs(v)); }
  return scale;
}

/// One RK4 step checked against two half steps. Steps whose difference exceeds
/// the local tolerance are bisected; this keeps the accuracy through points where
/// the dual gradient is only Holder continuous (p-norms with p > 2 at costate
/// coordinate crossings). The accepted value is the Richardson combination.
template<typename System>
State guarded_increment(const System & system, const State & x, double h, int depth = 0)
{
  const std::size_t n = x.size();
  const State full = rk4_increment(system, x, h);
  const State d1 = rk4_increment(system, x, 0.5 * h);
  State mid(n);
  for (std::size_t i = 0; i < n; ++i) { mid[i] = x[i] + d1[i]; }
  const State d2 = rk4_increment(system, mid, 0.5 * h);
  double err = 0.0;
  State out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = d1[i] + d2[i];
    err = std::max(err, std::abs(full[i] - out[i]));
  }
  if (err <= kStepTol * scale_of(x) || depth >= 40) {
    for (std::size_t i = 0; i < n; ++i) { out[i] += (out[i] - full[i]) / 15.0; }
    return out;
  }
  const State a = guarded_increment(system, x, 0.5 * h, depth + 1);
  for (std::size_t i = 0; i < n; ++i) { mid[i] = x[i] + a[i]; }
  const State b = guarded_increment(system, mid, 0.5 * h, depth + 1);
  for (std::size_t i = 0; i < n; ++i) { out[i] = a[i] + b[i]; }
  return out;
}

/// Fixed-grid RK4 driver. Each step is screened by h |f(x1) - k4|, which is
/// O(h^4) on smooth stretches and reuses f(x1) as the next first stage; steps
/// that fail the screen are redone by guarded_increment. Increments are
/// accumulated with compensated summation, so long horizons do not collect
/// rounding drift off straight lines.
template<typename System>
class GuardedStepper
{
public:
  GuardedStepper(const System & system, State x) : system_(system), x_(std::move(x)), carry_(x_.size(), 0.0), f_(x_.size())
  {
    system_(x_, f_, 0.0);
  }

  void step(double h)
  {
    const std::size_t n = x_.size();
    State k4;
    State d = rk4_increment(system_, x_, f_, h, &k4);
    State x1(n), f1(n);
    for (std::size_t i = 0; i < n; ++i) { x1[i] = x_[i] + d[i]; }
    system_(x1, f1, 0.0);
    double screen = 0.0;
    for (std::size_t i = 0; i < n; ++i) { screen = std::max(screen, h * std::abs(f1[i] - k4[i])); }
    const bool smooth = screen <= kStepTol * scale_of(x_);
    if (!smooth) { d = guarded_increment(system_, x_, h); }
    for (std::size_t i = 0; i < n; ++i) {
      const double y = d[i] - carry_[i];
      const double t = x_[i] + y;
      carry_[i] = (t - x_[i]) - y;
      x_[i] = t;
    }
    if (smooth) {
      f_ = std::move(f1);
    } else {
      system_(x_, f_, 0.0);
    }
  }

  const State & state() const { return x_; }

private:
  const System & system_;
  State x_;
  State carry_;
  State f_;
};

/// Cubic Hermite on [0, h] at local coordinate u in [0, 1].
template<typename T>
T hermite(const T & p0, const T & p1, const T & m0, const T & m1, double h, double u)
{
  const double u2 = u * u, u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * p0 + (u3 - 2 * u2 + u) * h * m0 + (-2 * u3 + 3 * u2) * p1 + (u3 - u2) * h * m1;
}

}  // namespace

std::size_t default_steps(double T)
{
  return static_cast<std::size_t>(std::max(1.0, std::ceil(2048.0 * T)));
}

ExtremalTrace integrate_extremal(const NormOracle & norm, const Multiplier & m, double T, std::size_t steps)
{
  const int dim = norm.dim();
  if (!norm.flags().strictly_convex) {
    throw NotStrictlyConvexError("not strictly convex: the extremal flow needs a single-valued dual gradient");
  }
  if (m.lambda0 != 1) { throw std::invalid_argument("multiplier: only normal extremals (lambda0 = 1) are integrated"); }
  if (m.lambda_init.size() != dim) { throw std::invalid_argument("multiplier: lambda_init has wrong dimension"); }
  if (!(m.R > 0.0) || !std::isfinite(m.R)) { throw std::invalid_argument("multiplier: R must be positive"); }
  if (!std::isfinite(m.k) || !m.lambda_init.allFinite()) { throw std::invalid_argument("multiplier: non-finite entry"); }
  const double dual0 = norm.dual_eval(m.lambda_init);
  if (std::abs(dual0 - m.R) > 1e-8 * std::max(1.0, m.R)) {
    throw std::invalid_argument("multiplier: N_*(lambda_init) must equal R");
  }
  if (!(T > 0.0) || !std::isfinite(T)) { throw std::invalid_argument("T must be positive"); }
  if (steps < 2) { throw std::invalid_argument("steps must be >= 2"); }

  const auto system = make_system(norm, m);
  State x = initial_state(m, dim);

  std::vector<double> s_grid;
  std::vector<GroupPoint> points;
  std::vector<Eigen::VectorXd> a_samples;
  s_grid.reserve(steps + 1);
  points.reserve(steps + 1);
  a_samples.reserve(steps + 1);
  const double h = T / static_cast<double>(steps);
  std::size_t index = 0;
  auto observer = [&](const State & st, double) {
    s_grid.push_back(index == steps ? T : h * static_cast<double>(index));
    ++index;
    points.emplace_back(Eigen::Map<const Eigen::VectorXd>(st.data(), dim), st[static_cast<std::size_t>(dim)]);
    a_samples.emplace_back(Eigen::Map<const Eigen::VectorXd>(st.data() + dim + 1, dim));
  };
  GuardedStepper stepper(system, std::move(x));
  observer(stepper.state(), 0.0);
  for (std::size_t i = 0; i < steps; ++i) {
    stepper.step(h);
    observer(stepper.state(), 0.0);
  }

  std::vector<Eigen::VectorXd> v_samples;
  v_samples.reserve(a_samples.size());
  for (const auto & a : a_samples) { v_samples.push_back(m.R * dual_gradient(norm, a)); }

  ExtremalTrace trace{SampledCurve(std::move(s_grid), std::move(points)), std::move(a_samples),
                      std::move(v_samples), m, T, steps, {}};
  trace.diagnostics = trace_diagnostics(norm, trace.a, trace.v, m.R);
  return trace;
}

GroupPoint extremal_endpoint(const NormOracle & norm, const Multiplier & m, double T, std::size_t steps)
{
  const int dim = norm.dim();
  if (m.lambda_init.size() != dim) { throw std::invalid_argument("multiplier: lambda_init has wrong dimension"); }
  if (steps < 1) { throw std::invalid_argument("steps must be >= 1"); }
  State x = initial_state(m, dim);
  const auto system = make_system(norm, m);
  GuardedStepper stepper(system, std::move(x));
  for (std::size_t i = 0; i < steps; ++i) { stepper.step(T / static_cast<double>(steps)); }
  x = stepper.state();
  return GroupPoint(Eigen::Map<const Eigen::VectorXd>(x.data(), dim), x[static_cast<std::size_t>(dim)]);
}

TraceDiagnostics trace_diagnostics(
  const NormOracle & norm, const std::vector<Eigen::VectorXd> & a, const std::vector<Eigen::VectorXd> & v, double R)
{
  TraceDiagnostics d;
  std::vector<double> ham;
  ham.reserve(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) {
    d.speed_dev = std::max(d.speed_dev, std::abs(norm.eval(v[j]) - R));
    d.dual_dev = std::max(d.dual_dev, std::abs(norm.dual_eval(a[j]) - R));
    d.pairing_dev = std::max(d.pairing_dev, std::abs(v[j].dot(a[j]) - R * R));
    ham.push_back(norm.squared(v[j]) - a[j].dot(v[j]));
  }
  if (!ham.empty()) {
    d.hamiltonian_const = median(ham);
    for (double hv : ham) { d.hamiltonian_dev = std::max(d.hamiltonian_dev, std::abs(hv - d.hamiltonian_const)); }
  }
  return d;
}

VerifyReport verify_extremal(const NormOracle & norm, const ExtremalTrace & trace, double tol)
{
  const SampledCurve & c = trace.curve;
  if (c.size() < 3) { throw std::invalid_argument("verify_extremal: need at least 3 samples"); }
  if (trace.a.size() != c.size() || trace.v.size() != c.size()) {
    throw std::invalid_argument("verify_extremal: a and v must be sampled on the curve grid");
  }
  const int n = c.n();
  const auto & s = c.s_grid();
  const Multiplier & m = trace.multiplier;

  VerifyReport rep;
  rep.minimization.name = "minimization";
  rep.costate.name = "costate";
  rep.speed.name = "speed";
  rep.hamiltonian.name = "hamiltonian";
  auto update = [](ConditionCheck & ch, double value, double at) {
    if (value > ch.worst || std::isnan(value)) {
      ch.worst = value;
      ch.worst_s = at;
    }
  };

  std::vector<double> ham(c.size());
  for (std::size_t j = 0; j < c.size(); ++j) {
    const Eigen::VectorXd & a = trace.a[j];
    const Eigen::VectorXd & v = trace.v[j];
    update(rep.minimization, fenchel_residual(norm, v, a), s[j]);

    Eigen::VectorXd twist(2 * n);
    twist.head(n) = c[j].z().tail(n);
    twist.tail(n) = -c[j].z().head(n);
    update(rep.costate, (a - m.lambda_init - 4.0 * m.k * twist).lpNorm<Eigen::Infinity>(), s[j]);

    const double sp = std::max({std::abs(norm.eval(v) - m.R), std::abs(norm.dual_eval(a) - m.R),
                                std::abs(v.dot(a) - m.R * m.R)});
    update(rep.speed, sp, s[j]);
    ham[j] = norm.squared(v) - a.dot(v);
  }
  rep.hamiltonian_const = median(ham);
  for (std::size_t j = 0; j < c.size(); ++j) { update(rep.hamiltonian, std::abs(ham[j] - rep.hamiltonian_const), s[j]); }

  const auto vel = c.planar_velocities();
  for (std::size_t j = 0; j < c.size(); ++j) {
    rep.velocity_mismatch = std::max(rep.velocity_mismatch, (vel[j] + trace.v[j]).lpNorm<Eigen::Infinity>());
  }

  for (ConditionCheck * ch : {&rep.minimization, &rep.costate, &rep.speed, &rep.hamiltonian}) {
    ch->pass = ch->worst <= tol;
  }
  return rep;
}

SampledCurve reparametrize_unit_speed(const NormOracle & norm, const SampledCurve & c)
{
  const auto & s = c.s_grid();
  const std::size_t count = c.size();
  const auto vel = c.planar_velocities();
  const auto tvel = c.vertical_velocities();
  std::vector<double> speed(count);
  for (std::size_t j = 0; j < count; ++j) { speed[j] = norm.eval(vel[j]); }
  const auto sigma = cumulative_length(c, norm);
  const double total = sigma.back();
  if (!(total > 0.0)) { throw std::invalid_argument("reparametrize_unit_speed: constant curve"); }

  std::vector<double> new_s(count);
  std::vector<GroupPoint> pts;
  pts.reserve(count);
  std::size_t seg = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const double target = (i + 1 == count) ? total : total * static_cast<double>(i) / static_cast<double>(count - 1);
    new_s[i] = target;
    if (i == 0) {
      pts.push_back(c[0]);
      continue;
    }
    if (i + 1 == count) {
      pts.push_back(c[count - 1]);
      continue;
    }
    while (seg + 2 < count && sigma[seg + 1] < target) { ++seg; }
    const double h = s[seg + 1] - s[seg];
    // Invert the Hermite model of sigma on the segment by bisection.
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double val = hermite(sigma[seg], sigma[seg + 1], speed[seg], speed[seg + 1], h, mid);
      (val < target ? lo : hi) = mid;
    }
    const double u = 0.5 * (lo + hi);
    const Eigen::VectorXd z = hermite<Eigen::VectorXd>(c[seg].z(), c[seg + 1].z(), vel[seg], vel[seg + 1], h, u);
    const double t = hermite(c[seg].t(), c[seg + 1].t(), tvel[seg], tvel[seg + 1], h, u);
    pts.emplace_back(z, t);
  }
  return SampledCurve(std::move(new_s), std::move(pts));
}

bool multiplier_family_check_example52(double ell, double k)
{
  const bool admissible = std::max(std::abs(ell), std::abs(ell - 4.0 * k)) <= 1.0;
  if (!admissible) { return false; }
  const NormPtr norm = make_example52();
  Eigen::VectorXd expected(2);
  expected << 0.0, 1.0;
  constexpr int probes = 101;
  for (int j = 0; j < probes; ++j) {
    const double s = static_cast<double>(j) / (probes - 1);
    Eigen::VectorXd a(2);
    a << ell - 4.0 * k * s, 1.0;
    if (std::abs(norm->dual_eval(a) - 1.0) > 1e-12) { return false; }
    const auto g = norm->dual_grad(a);
    if (!g || (*g - expected).lpNorm<Eigen::Infinity>() > 1e-12) { return false; }
  }
  return true;
}

ExtremalTrace example52_segment_trace(double ell, double k, std::size_t samples)
{
  if (samples < 3) { throw std::invalid_argument("example52_segment_trace: need at least 3 samples"); }
  std::vector<double> s_grid;
  std::vector<GroupPoint> pts;
  std::vector<Eigen::VectorXd> a, v;
  for (std::size_t j = 0; j < samples; ++j) {
    const double s = static_cast<double>(j) / static_cast<double>(samples - 1);
    s_grid.push_back(s);
    pts.emplace_back(Eigen::Vector2d(0.0, -s), 0.0);
    a.emplace_back(Eigen::Vector2d(ell - 4.0 * k * s, 1.0));
    v.emplace_back(Eigen::Vector2d(0.0, 1.0));
  }
  Multiplier m;
  m.lambda_init = Eigen::Vector2d(ell, 1.0);
  m.k = k;
  m.R = 1.0;
  ExtremalTrace trace{SampledCurve(std::move(s_grid), std::move(pts)), std::move(a), std::move(v), m, 1.0,
                      samples - 1, {}};
  trace.diagnostics = trace_diagnostics(*make_example52(), trace.a, trace.v, 1.0);
  return trace;
}

}  // namespace subfinsler
