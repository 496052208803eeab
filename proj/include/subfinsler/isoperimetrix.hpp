#pragma once

#include <Eigen/Dense>

#include <vector>

#include "subfinsler/heisenberg.hpp"
#include "subfinsler/norms.hpp"

namespace subfinsler {

/// Closed convex polyline in the plane, counterclockwise, last point not repeated.
class PlanarConvexBody
{
public:
  explicit PlanarConvexBody(std::vector<Eigen::Vector2d> boundary);

  const std::vector<Eigen::Vector2d> & boundary() const { return boundary_; }
  double support(const Eigen::Vector2d & d) const;
  /// Smallest cross product of consecutive edges (>= -tol for convex input).
  double min_turn_cross() const;
  double area() const;

private:
  std::vector<Eigen::Vector2d> boundary_;
};

/// Boundary of the dual ball at `resolution` support directions of B_N. Corners of
/// B_N (segments in the subdifferential) are fan-filled.
PlanarConvexBody polar_body(const NormOracle & norm, int resolution);

/// Polar of a body containing the origin, sampled at `resolution` directions.
PlanarConvexBody polar_of(const PlanarConvexBody & body, int resolution);

struct IsoperimetrixCurve
{
  PlanarConvexBody body;
  /// Largest exterior angle between consecutive edges.
  double max_turn = 0.0;
  /// True when the largest turn shrinks with the sampling (no corners).
  bool c1 = false;
};

/// Polar boundary rotated counterclockwise by pi/2.
IsoperimetrixCurve isoperimetrix_curve(const NormOracle & norm, int resolution);

/// Horizontal curve whose projection is (-(a2 - l2), a1 - l1) / (4k) with a running
/// along the dual sphere from lambda_init, counterclockwise for k > 0 and clockwise
/// for k < 0, parametrized by N-arclength on [s0, s1] with `samples` points.
SampledCurve geodesic_from_isoperimetrix(const NormOracle & norm, double k, const Eigen::VectorXd & lambda_init,
                                         double s0, double s1, std::size_t samples, int resolution = 8192);

/// Symmetric Hausdorff distance between two polylines (point-to-segment).
double hausdorff_polyline(const std::vector<Eigen::Vector2d> & a, const std::vector<Eigen::Vector2d> & b);

/// Planar projection (x1, y1) of a curve in H^1.
std::vector<Eigen::Vector2d> projection(const SampledCurve & c);

}  // namespace subfinsler
