#include "subfinsler/heisenberg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "subfinsler/norms.hpp"

namespace subfinsler {

namespace {

void require_same_n(const GroupPoint & g, const GroupPoint & h)
{
  if (g.n() != h.n()) {
    throw std::invalid_argument(
      "dimension mismatch: H^" + std::to_string(g.n()) + " vs H^" + std::to_string(h.n()));
  }
}

std::string format_double(double v)
{
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

GroupPoint::GroupPoint(Eigen::VectorXd z, double t) : z_(std::move(z)), t_(t)
{
  if (z_.size() < 2 || z_.size() % 2 != 0) {
    throw std::invalid_argument("GroupPoint: z must have even length 2n >= 2");
  }
  if (!z_.allFinite() || !std::isfinite(t_)) {
    throw std::invalid_argument("GroupPoint: non-finite coordinate");
  }
}

GroupPoint GroupPoint::identity(int n)
{
  return GroupPoint(Eigen::VectorXd::Zero(2 * n), 0.0);
}

double symplectic(const Eigen::VectorXd & z, const Eigen::VectorXd & w)
{
  const Eigen::Index n = z.size() / 2;
  return z.tail(n).dot(w.head(n)) - z.head(n).dot(w.tail(n));
}

Eigen::VectorXd apply_j(const Eigen::VectorXd & w)
{
  const Eigen::Index n = w.size() / 2;
  Eigen::VectorXd out(w.size());
  out.head(n) = -w.tail(n);
  out.tail(n) = w.head(n);
  return out;
}

GroupPoint multiply(const GroupPoint & g, const GroupPoint & h)
{
  require_same_n(g, h);
  return GroupPoint(g.z() + h.z(), g.t() + h.t() + 2.0 * symplectic(g.z(), h.z()));
}

GroupPoint inverse(const GroupPoint & g)
{
  return GroupPoint(-g.z(), -g.t());
}

GroupPoint dilate(double lambda, const GroupPoint & g)
{
  if (!(lambda > 0.0)) { throw std::invalid_argument("dilate: lambda must be positive"); }
  return GroupPoint(lambda * g.z(), lambda * lambda * g.t());
}

// --- SampledCurve ---------------------------------------------------------

SampledCurve::SampledCurve(std::vector<double> s_grid, std::vector<GroupPoint> points)
    : s_(std::move(s_grid)), points_(std::move(points))
{
  if (s_.size() != points_.size()) {
    throw std::invalid_argument("SampledCurve: grid and points differ in length");
  }
  if (s_.empty()) { throw std::invalid_argument("SampledCurve: empty curve"); }
  for (std::size_t i = 1; i < s_.size(); ++i) {
    if (!(s_[i] > s_[i - 1])) {
      throw std::invalid_argument("SampledCurve: parameter grid must be strictly increasing");
    }
    require_same_n(points_[i - 1], points_[i]);
  }

  double lifted = points_.front().t();
  for (std::size_t i = 1; i < points_.size(); ++i) {
    lifted += 2.0 * symplectic(points_[i - 1].z(), points_[i].z() - points_[i - 1].z());
    residual_ = std::max(residual_, std::abs(points_[i].t() - lifted));
  }
}

double SampledCurve::diameter() const
{
  // Pairwise maximum over at most ~512 evenly strided samples plus the endpoint.
  double best = 0.0;
  const std::size_t m = points_.size();
  const std::size_t stride = std::max<std::size_t>(1, m / 512);
  for (std::size_t i = 0; i < m; i += stride) {
    for (std::size_t j = i + stride; j < m; j += stride) {
      const double dz = (points_[i].z() - points_[j].z()).squaredNorm();
      const double dt = points_[i].t() - points_[j].t();
      best = std::max(best, dz + dt * dt);
    }
    const double dz = (points_[i].z() - points_.back().z()).squaredNorm();
    const double dt = points_[i].t() - points_.back().t();
    best = std::max(best, dz + dt * dt);
  }
  return std::sqrt(best);
}

double SampledCurve::default_tolerance() const
{
  return 1e-6 * std::max(diameter(), 1e-300);
}

std::vector<double> grid_derivative(const std::vector<double> & s, const std::vector<double> & f)
{
  const std::size_t m = s.size();
  std::vector<double> d(m, 0.0);
  if (m < 2) { return d; }
  if (m == 2) {
    d[0] = d[1] = (f[1] - f[0]) / (s[1] - s[0]);
    return d;
  }
  // Derivative of the quadratic through three points, evaluated at node `at`.
  auto lagrange = [&](std::size_t i0, std::size_t at) {
    const double x0 = s[i0], x1 = s[i0 + 1], x2 = s[i0 + 2];
    const double x = s[at];
    const double l0 = ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2));
    const double l1 = ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2));
    const double l2 = ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1));
    return l0 * f[i0] + l1 * f[i0 + 1] + l2 * f[i0 + 2];
  };
  d[0] = lagrange(0, 0);
  for (std::size_t i = 1; i + 1 < m; ++i) { d[i] = lagrange(i - 1, i); }
  d[m - 1] = lagrange(m - 3, m - 1);
  return d;
}

std::vector<Eigen::VectorXd> SampledCurve::planar_velocities() const
{
  const std::size_t m = points_.size();
  const int dim = 2 * n();
  std::vector<Eigen::VectorXd> out(m, Eigen::VectorXd::Zero(dim));
  std::vector<double> f(m);
  for (int c = 0; c < dim; ++c) {
    for (std::size_t i = 0; i < m; ++i) { f[i] = points_[i].z()[c]; }
    const auto d = grid_derivative(s_, f);
    for (std::size_t i = 0; i < m; ++i) { out[i][c] = d[i]; }
  }
  return out;
}

std::vector<double> SampledCurve::vertical_velocities() const
{
  std::vector<double> f(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) { f[i] = points_[i].t(); }
  return grid_derivative(s_, f);
}

GroupPoint SampledCurve::at(double s) const
{
  if (s <= s_.front()) { return points_.front(); }
  if (s >= s_.back()) { return points_.back(); }
  const auto it = std::upper_bound(s_.begin(), s_.end(), s);
  const std::size_t j = static_cast<std::size_t>(it - s_.begin());
  const double w = (s - s_[j - 1]) / (s_[j] - s_[j - 1]);
  const auto & a = points_[j - 1];
  const auto & b = points_[j];
  return GroupPoint((1.0 - w) * a.z() + w * b.z(), (1.0 - w) * a.t() + w * b.t());
}

SampledCurve horizontal_lift(
  const std::vector<double> & s_grid, const std::vector<Eigen::VectorXd> & planar, double t0)
{
  if (planar.size() < 2) { throw std::invalid_argument("horizontal_lift: need at least 2 samples"); }
  if (s_grid.size() != planar.size()) {
    throw std::invalid_argument("horizontal_lift: grid and path differ in length");
  }
  std::vector<GroupPoint> pts;
  pts.reserve(planar.size());
  double t = t0;
  pts.emplace_back(planar[0], t);
  for (std::size_t i = 1; i < planar.size(); ++i) {
    // Trapezoid on the secant velocity: exact for the linear interpolant.
    t += 2.0 * symplectic(planar[i - 1], planar[i] - planar[i - 1]);
    pts.emplace_back(planar[i], t);
  }
  return SampledCurve(s_grid, std::move(pts));
}

std::vector<double> cumulative_length(const SampledCurve & c, const NormOracle & norm)
{
  const auto vel = c.planar_velocities();
  const auto & s = c.s_grid();
  std::vector<double> out(s.size(), 0.0);
  double prev = norm.eval(vel[0]);
  for (std::size_t i = 1; i < s.size(); ++i) {
    const double cur = norm.eval(vel[i]);
    out[i] = out[i - 1] + 0.5 * (prev + cur) * (s[i] - s[i - 1]);
    prev = cur;
  }
  return out;
}

double curve_length(const SampledCurve & c, const NormOracle & norm, std::optional<double> tol)
{
  if (norm.dim() != 2 * c.n()) { throw std::invalid_argument("curve_length: norm dimension mismatch"); }
  const double limit = tol.value_or(c.default_tolerance());
  if (c.horizontality_residual() > limit) {
    std::cerr << "warning: curve is not horizontal within tolerance (residual "
              << c.horizontality_residual() << " > " << limit << ")\n";
  }
  if (c.size() < 2) { return 0.0; }
  return cumulative_length(c, norm).back();
}

// --- homogeneous norms ------------------------------------------------------

HomogeneousNormDescriptor::HomogeneousNormDescriptor(double p, double a, int n) : p_(p), a_(a), n_(n)
{
  if (n < 1) { throw std::invalid_argument("homogeneous norm: n must be >= 1"); }
  if (!(p >= 1.0)) { throw std::invalid_argument("homogeneous norm: p must be in [1, inf]"); }
  if (!(a > 0.0)) { throw std::invalid_argument("homogeneous norm: a must be positive"); }
  bool ok = false;
  if (p <= 2.0) {
    ok = a <= 1.0;
  } else {
    const double exponent = std::isinf(p) ? -0.5 : 1.0 / p - 0.5;
    ok = a <= std::pow(static_cast<double>(n), exponent) * (1.0 + 1e-15);
  }
  if (!ok) {
    throw std::invalid_argument("homogeneous norm: (p, a) outside the admissible range");
  }
}

double homogeneous_norm(const HomogeneousNormDescriptor & desc, const GroupPoint & g)
{
  if (g.n() != desc.n()) { throw std::invalid_argument("homogeneous_norm: dimension mismatch"); }
  const auto & z = g.z();
  double zn = 0.0;
  if (std::isinf(desc.p())) {
    zn = z.lpNorm<Eigen::Infinity>();
  } else if (desc.p() == 1.0) {
    zn = z.lpNorm<1>();
  } else if (desc.p() == 2.0) {
    zn = z.norm();
  } else {
    const double m = z.lpNorm<Eigen::Infinity>();
    if (m > 0.0) { zn = m * std::pow((z.array().abs() / m).pow(desc.p()).sum(), 1.0 / desc.p()); }
  }
  return std::max(zn, desc.a() * std::sqrt(std::abs(g.t())));
}

double left_invariant_distance(
  const HomogeneousNormDescriptor & desc, const GroupPoint & g, const GroupPoint & h)
{
  require_same_n(g, h);
  return homogeneous_norm(desc, multiply(inverse(g), h));
}

// --- CSV ------------------------------------------------------------------------

std::string to_csv(const SampledCurve & c)
{
  const int n = c.n();
  std::ostringstream os;
  os << "s";
  for (int i = 1; i <= n; ++i) { os << ",x" << i; }
  for (int i = 1; i <= n; ++i) { os << ",y" << i; }
  os << ",t\n";
  for (std::size_t r = 0; r < c.size(); ++r) {
    os << format_double(c.s_grid()[r]);
    for (int k = 0; k < 2 * n; ++k) { os << ',' << format_double(c[r].z()[k]); }
    os << ',' << format_double(c[r].t()) << '\n';
  }
  return os.str();
}

SampledCurve curve_from_csv(const std::string & text)
{
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) { throw std::invalid_argument("curve CSV: missing header"); }
  std::vector<std::string> header;
  {
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) { header.push_back(cell); }
  }
  if (header.size() < 4 || header.size() % 2 != 0 || header.front() != "s" || header.back() != "t") {
    throw std::invalid_argument("curve CSV: header must be s,x1..xn,y1..yn,t");
  }
  const int n = static_cast<int>((header.size() - 2) / 2);
  for (int i = 0; i < n; ++i) {
    if (header[1 + i] != "x" + std::to_string(i + 1) || header[1 + n + i] != "y" + std::to_string(i + 1)) {
      throw std::invalid_argument("curve CSV: unexpected column '" + header[1 + i] + "'");
    }
  }
  std::vector<double> s;
  std::vector<GroupPoint> pts;
  while (std::getline(is, line)) {
    if (line.empty()) { continue; }
    std::vector<double> vals;
    const char * p = line.data();
    const char * end = line.data() + line.size();
    while (p < end) {
      double v = 0.0;
      auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc()) { throw std::invalid_argument("curve CSV: bad number in '" + line + "'"); }
      vals.push_back(v);
      p = res.ptr;
      if (p < end && *p == ',') { ++p; }
    }
    if (vals.size() != header.size()) { throw std::invalid_argument("curve CSV: wrong column count"); }
    s.push_back(vals[0]);
    pts.emplace_back(Eigen::Map<Eigen::VectorXd>(vals.data() + 1, 2 * n), vals.back());
  }
  return SampledCurve(std::move(s), std::move(pts));
}

}  // namespace subfinsler
