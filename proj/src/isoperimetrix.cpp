#include "subfinsler/isoperimetrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace subfinsler {

namespace {

constexpr double kPi = std::numbers::pi;

double cross(const Eigen::Vector2d & a, const Eigen::Vector2d & b) { return a.x() * b.y() - a.y() * b.x(); }

double angle_of(const Eigen::Vector2d & p)
{
  const double a = std::atan2(p.y(), p.x());
  return a < 0.0 ? a + 2.0 * kPi : a;
}

void require_planar(const NormOracle & norm)
{
  if (norm.dim() != 2) { throw std::invalid_argument("isoperimetrix: the norm must live on R^2 (n = 1)"); }
}

double point_segment_distance(const Eigen::Vector2d & p, const Eigen::Vector2d & a, const Eigen::Vector2d & b)
{
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  double u = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  u = std::clamp(u, 0.0, 1.0);
  return (a + u * ab - p).norm();
}

double point_polyline_distance(const Eigen::Vector2d & p, const std::vector<Eigen::Vector2d> & line)
{
  if (line.size() == 1) { return (p - line[0]).norm(); }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < line.size(); ++i) { best = std::min(best, point_segment_distance(p, line[i], line[i + 1])); }
  return best;
}

}  // namespace

PlanarConvexBody::PlanarConvexBody(std::vector<Eigen::Vector2d> boundary) : boundary_(std::move(boundary))
{
  if (boundary_.size() < 3) { throw std::invalid_argument("PlanarConvexBody: need at least 3 boundary points"); }
}

double PlanarConvexBody::support(const Eigen::Vector2d & d) const
{
  double best = -std::numeric_limits<double>::infinity();
  for (const auto & p : boundary_) { best = std::max(best, p.dot(d)); }
  return best;
}

double PlanarConvexBody::min_turn_cross() const
{
  const std::size_t m = boundary_.size();
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    const Eigen::Vector2d e1 = boundary_[(i + 1) % m] - boundary_[i];
    const Eigen::Vector2d e2 = boundary_[(i + 2) % m] - boundary_[(i + 1) % m];
    worst = std::min(worst, cross(e1, e2));
  }
  return worst;
}

double PlanarConvexBody::area() const
{
  double a = 0.0;
  for (std::size_t i = 0; i < boundary_.size(); ++i) {
    a += 0.5 * cross(boundary_[i], boundary_[(i + 1) % boundary_.size()]);
  }
  return a;
}

PlanarConvexBody polar_body(const NormOracle & norm, int resolution)
{
  require_planar(norm);
  if (resolution < 8) { throw std::invalid_argument("polar_body: resolution must be >= 8"); }
  const double spacing = 2.0 * kPi / resolution;
  std::vector<Eigen::Vector2d> pts;
  for (int j = 0; j < resolution; ++j) {
    const double phi = spacing * j;
    Eigen::VectorXd u(2);
    u << std::cos(phi), std::sin(phi);
    const auto sub = norm.subdiff(u / norm.eval(u));
    if (sub.witnesses.size() == 1) {
      pts.emplace_back(sub.witnesses.front());
      continue;
    }
    // Corner of B_N: the exposed face of the polar is a segment; fan-fill it.
    std::size_t ia = 0, ib = 0;
    double far = -1.0;
    for (std::size_t a = 0; a < sub.witnesses.size(); ++a) {
      for (std::size_t b = a + 1; b < sub.witnesses.size(); ++b) {
        const double d = (sub.witnesses[a] - sub.witnesses[b]).norm();
        if (d > far) {
          far = d;
          ia = a;
          ib = b;
        }
      }
    }
    const Eigen::Vector2d wa = sub.witnesses[ia], wb = sub.witnesses[ib];
    const int fill = std::max(1, static_cast<int>(std::ceil(far / (spacing * std::max(wa.norm(), wb.norm())))));
    for (int f = 0; f <= fill; ++f) { pts.push_back(wa + (wb - wa) * (static_cast<double>(f) / fill)); }
  }
  std::sort(pts.begin(), pts.end(), [](const auto & a, const auto & b) { return angle_of(a) < angle_of(b); });
  std::vector<Eigen::Vector2d> unique;
  for (const auto & p : pts) {
    if (unique.empty() || (p - unique.back()).norm() > 1e-12) { unique.push_back(p); }
  }
  if (unique.size() > 1 && (unique.front() - unique.back()).norm() <= 1e-12) { unique.pop_back(); }
  return PlanarConvexBody(std::move(unique));
}

PlanarConvexBody polar_of(const PlanarConvexBody & body, int resolution)
{
  if (resolution < 8) { throw std::invalid_argument("polar_of: resolution must be >= 8"); }
  std::vector<Eigen::Vector2d> pts;
  for (int j = 0; j < resolution; ++j) {
    const double phi = 2.0 * kPi * j / resolution;
    const Eigen::Vector2d u(std::cos(phi), std::sin(phi));
    const double h = body.support(u);
    if (!(h > 0.0)) { throw std::invalid_argument("polar_of: origin must be interior"); }
    pts.push_back(u / h);
  }
  return PlanarConvexBody(std::move(pts));
}

IsoperimetrixCurve isoperimetrix_curve(const NormOracle & norm, int resolution)
{
  const PlanarConvexBody polar = polar_body(norm, resolution);
  std::vector<Eigen::Vector2d> rotated;
  rotated.reserve(polar.boundary().size());
  for (const auto & p : polar.boundary()) { rotated.emplace_back(-p.y(), p.x()); }
  const std::size_t m = rotated.size();
  double max_turn = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const Eigen::Vector2d e1 = rotated[(i + 1) % m] - rotated[i];
    const Eigen::Vector2d e2 = rotated[(i + 2) % m] - rotated[(i + 1) % m];
    max_turn = std::max(max_turn, std::abs(std::atan2(cross(e1, e2), e1.dot(e2))));
  }
  // Sampling support directions uniformly bounds each turn by about two direction
  // steps on a C^1 boundary; corners exceed that at every resolution.
  const bool c1 = max_turn <= 4.0 * 2.0 * kPi / resolution;
  return {PlanarConvexBody(std::move(rotated)), max_turn, c1};
}

SampledCurve geodesic_from_isoperimetrix(const NormOracle & norm, double k, const Eigen::VectorXd & lambda_init,
                                         double s0, double s1, std::size_t samples, int resolution)
{
  require_planar(norm);
  if (!norm.flags().strictly_convex) { throw std::invalid_argument("geodesic_from_isoperimetrix: norm must be strictly convex"); }
  if (k == 0.0 || !std::isfinite(k)) { throw std::invalid_argument("geodesic_from_isoperimetrix: k must be nonzero"); }
  if (lambda_init.size() != 2 || std::abs(norm.dual_eval(lambda_init) - 1.0) > 1e-6) {
    throw std::invalid_argument("geodesic_from_isoperimetrix: lambda_init must lie on the dual unit sphere");
  }
  if (!(s0 >= 0.0) || !(s1 > s0) || !std::isfinite(s1)) {
    throw std::invalid_argument("geodesic_from_isoperimetrix: arc leaves the admissible parameter range");
  }
  if (samples < 2) { throw std::invalid_argument("geodesic_from_isoperimetrix: need at least 2 samples"); }

  const PlanarConvexBody polar = polar_body(norm, resolution);
  const auto & ring = polar.boundary();
  const Eigen::Vector2d lam(lambda_init[0], lambda_init[1]);
  const double alpha = angle_of(lam);
  const std::size_t m = ring.size();
  std::size_t next = 0;
  while (next < m && angle_of(ring[next]) <= alpha) { ++next; }
  next %= m;
  // Loop of the covector starting and ending at lambda.
  std::vector<Eigen::Vector2d> loop{lam};
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t idx = k > 0.0 ? (next + i) % m : (next + m - 1 - i) % m;
    if ((ring[idx] - lam).norm() > 1e-14) { loop.push_back(ring[idx]); }
  }
  loop.push_back(lam);

  std::vector<Eigen::Vector2d> planar;
  planar.reserve(loop.size());
  for (const auto & a : loop) { planar.emplace_back(-(a.y() - lam.y()) / (4.0 * k), (a.x() - lam.x()) / (4.0 * k)); }
  std::vector<double> arc(planar.size(), 0.0), height(planar.size(), 0.0);
  for (std::size_t i = 1; i < planar.size(); ++i) {
    const Eigen::Vector2d d = planar[i] - planar[i - 1];
    Eigen::VectorXd dv(2);
    dv << d.x(), d.y();
    arc[i] = arc[i - 1] + norm.eval(dv);
    // Exact lift of a straight segment: dt = 2 <z, J dz> with z at the segment start.
    height[i] = height[i - 1] + 2.0 * (planar[i - 1].y() * d.x() - planar[i - 1].x() * d.y());
  }
  const double period = arc.back();
  const double loop_height = height.back();

  std::vector<double> grid(samples);
  std::vector<GroupPoint> pts;
  pts.reserve(samples);
  for (std::size_t j = 0; j < samples; ++j) {
    const double s = (j + 1 == samples) ? s1 : s0 + (s1 - s0) * static_cast<double>(j) / static_cast<double>(samples - 1);
    grid[j] = s;
    const double turns = std::floor(s / period);
    const double r = s - turns * period;
    auto it = std::upper_bound(arc.begin(), arc.end(), r);
    std::size_t hi = static_cast<std::size_t>(std::distance(arc.begin(), it));
    hi = std::clamp<std::size_t>(hi, 1, arc.size() - 1);
    const std::size_t lo = hi - 1;
    const double span = arc[hi] - arc[lo];
    const double u = span > 0.0 ? (r - arc[lo]) / span : 0.0;
    const Eigen::Vector2d z = planar[lo] + u * (planar[hi] - planar[lo]);
    const double t = turns * loop_height + height[lo] + u * (height[hi] - height[lo]);
    pts.emplace_back(Eigen::VectorXd(z), t);
  }
  return SampledCurve(std::move(grid), std::move(pts));
}

double hausdorff_polyline(const std::vector<Eigen::Vector2d> & a, const std::vector<Eigen::Vector2d> & b)
{
  if (a.empty() || b.empty()) { throw std::invalid_argument("hausdorff_polyline: empty polyline"); }
  double h = 0.0;
  for (const auto & p : a) { h = std::max(h, point_polyline_distance(p, b)); }
  for (const auto & p : b) { h = std::max(h, point_polyline_distance(p, a)); }
  return h;
}

std::vector<Eigen::Vector2d> projection(const SampledCurve & c)
{
  if (c.n() != 1) { throw std::invalid_argument("projection: curve must live in H^1"); }
  std::vector<Eigen::Vector2d> out;
  out.reserve(c.size());
  for (const auto & p : c.points()) { out.emplace_back(p.z()[0], p.z()[1]); }
  return out;
}

}  // namespace subfinsler
