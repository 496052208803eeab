#include "subfinsler/example52.hpp"

#include <cmath>
#include <stdexcept>

namespace subfinsler::example52 {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

double q_of(double theta) { return std::sqrt(std::max(0.0, 2.0 + 4.0 * theta - 2.0 * theta * theta)); }

/// Integral of x(phi) over [1, theta] with x = -1 + sqrt((1 + 2 phi - phi^2) / 2).
double x_integral(double theta)
{
  const double w = theta - 1.0;
  const double r = std::sqrt(std::max(0.0, 2.0 - w * w));
  return -w + (w * r / 2.0 + std::asin(std::min(1.0, w / kSqrt2))) / kSqrt2;
}

}  // namespace

double s_of_theta(double theta)
{
  return 2.0 + kSqrt2 * std::asin(std::min(1.0, (theta - 1.0) / kSqrt2)) - 0.5 * q_of(theta);
}

double theta(double s)
{
  double lo = 1.0, hi = theta_max;
  if (s <= s_of_theta(lo)) { return lo; }
  if (s >= tau) { return hi; }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) { break; }
    (s_of_theta(mid) < s ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double theta_rate(double theta) { return q_of(theta) / (1.0 + theta); }

State closed_form(double s)
{
  if (s < 0.0 || s > tau * (1.0 + 1e-15)) { throw std::invalid_argument("example52: s outside [0, tau]"); }
  if (s <= 1.0) {
    return {GroupPoint(Eigen::Vector2d(0.0, -s), 0.0), Eigen::Vector2d(s, 1.0), Eigen::Vector2d(0.0, 1.0)};
  }
  const double th = theta(s);
  const double root = std::sqrt(std::max(0.0, (1.0 + 2.0 * th - th * th) / 2.0));
  const double x = -1.0 + root;
  const double t = 2.0 * (2.0 * x_integral(th) - th * x);
  const double q = q_of(th);
  return {GroupPoint(Eigen::Vector2d(x, -th), t), Eigen::Vector2d(th, root),
          Eigen::Vector2d((th - 1.0) / (1.0 + th), q / (1.0 + th))};
}

Multiplier multiplier()
{
  Multiplier m;
  m.lambda_init = Eigen::Vector2d(0.0, 1.0);
  m.k = -0.25;
  m.R = 1.0;
  return m;
}

ExtremalTrace closed_form_trace(std::size_t samples, double T)
{
  if (samples < 3) { throw std::invalid_argument("example52: need at least 3 samples"); }
  if (!(T > 0.0) || T > tau) { throw std::invalid_argument("example52: T must lie in (0, tau]"); }
  std::vector<double> grid;
  std::vector<GroupPoint> pts;
  std::vector<Eigen::VectorXd> a, v;
  for (std::size_t j = 0; j < samples; ++j) {
    const double s = (j + 1 == samples) ? T : T * static_cast<double>(j) / static_cast<double>(samples - 1);
    State st = closed_form(s);
    grid.push_back(s);
    pts.push_back(st.g);
    a.push_back(st.a);
    v.push_back(st.v);
  }
  ExtremalTrace trace{SampledCurve(std::move(grid), std::move(pts)), std::move(a), std::move(v), multiplier(), T,
                      samples - 1, {}};
  trace.diagnostics = trace_diagnostics(*make_example52(), trace.a, trace.v, 1.0);
  return trace;
}

}  // namespace subfinsler::example52
