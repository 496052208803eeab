#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace subfinsler {

class NormOracle;

/// Element (z, t) of H^n with z = (x_1..x_n, y_1..y_n).
class GroupPoint
{
public:
  GroupPoint() = default;
  GroupPoint(Eigen::VectorXd z, double t);

  static GroupPoint identity(int n);

  int n() const { return static_cast<int>(z_.size() / 2); }
  const Eigen::VectorXd & z() const { return z_; }
  double t() const { return t_; }

  double x(int i) const { return z_[i]; }
  double y(int i) const { return z_[n() + i]; }

private:
  Eigen::VectorXd z_{Eigen::VectorXd::Zero(2)};
  double t_ = 0.0;
};

/// <z, J_n w> with J_n the standard symplectic matrix, i.e. sum_i (y_i w_xi - x_i w_yi).
double symplectic(const Eigen::VectorXd & z, const Eigen::VectorXd & w);

/// J_n w = (-w_y, w_x).
Eigen::VectorXd apply_j(const Eigen::VectorXd & w);

GroupPoint multiply(const GroupPoint & g, const GroupPoint & h);
GroupPoint inverse(const GroupPoint & g);
GroupPoint dilate(double lambda, const GroupPoint & g);

/// Discretized curve in H^n over a strictly increasing parameter grid.
///
/// The horizontality residual is recomputed on construction: it is the largest
/// drift between the stored vertical coordinate and the trapezoidal lift of the
/// stored projection, measured from the first sample.
class SampledCurve
{
public:
  SampledCurve(std::vector<double> s_grid, std::vector<GroupPoint> points);

  int n() const { return points_.front().n(); }
  std::size_t size() const { return points_.size(); }
  const std::vector<double> & s_grid() const { return s_; }
  const std::vector<GroupPoint> & points() const { return points_; }
  const GroupPoint & operator[](std::size_t i) const { return points_[i]; }
  double horizontality_residual() const { return residual_; }

  /// Largest Euclidean distance in R^{2n+1} between two samples.
  double diameter() const;

  /// Default horizontality tolerance: 1e-6 times the curve diameter.
  double default_tolerance() const;

  /// Horizontal velocities: three-point differences, one-sided at the ends.
  std::vector<Eigen::VectorXd> planar_velocities() const;

  /// Vertical-coordinate derivative, same stencil as planar_velocities().
  std::vector<double> vertical_velocities() const;

  /// Linear interpolation of the stored samples at parameter s (clamped).
  GroupPoint at(double s) const;

private:
  std::vector<double> s_;
  std::vector<GroupPoint> points_;
  double residual_ = 0.0;
};

/// Three-point derivative of samples f over a (possibly non-uniform) grid s.
std::vector<double> grid_derivative(const std::vector<double> & s, const std::vector<double> & f);

/// Horizontal lift of a planar path: integrates the horizontality condition by
/// the trapezoidal rule on the secant velocities, starting at height t0.
SampledCurve horizontal_lift(
  const std::vector<double> & s_grid, const std::vector<Eigen::VectorXd> & planar, double t0 = 0.0);

/// Trapezoidal approximation of the integral of N(d/ds gamma_I).
///
/// Emits a warning to stderr when the horizontality residual exceeds `tol`
/// (default: the curve's scale-aware tolerance).
double curve_length(
  const SampledCurve & c, const NormOracle & norm, std::optional<double> tol = std::nullopt);

/// Cumulative trapezoidal N-length at every sample (first entry 0).
std::vector<double> cumulative_length(const SampledCurve & c, const NormOracle & norm);

/// Gauge max{||z||_p, a sqrt|t|}; valid (p, a) depend on the dimension n.
class HomogeneousNormDescriptor
{
public:
  HomogeneousNormDescriptor(double p, double a, int n);

  double p() const { return p_; }
  double a() const { return a_; }
  int n() const { return n_; }

private:
  double p_;
  double a_;
  int n_;
};

double homogeneous_norm(const HomogeneousNormDescriptor & desc, const GroupPoint & g);

double left_invariant_distance(
  const HomogeneousNormDescriptor & desc, const GroupPoint & g, const GroupPoint & h);

/// Columnar CSV: header `s,x1..xn,y1..yn,t`, shortest round-trip decimals.
std::string to_csv(const SampledCurve & c);
SampledCurve curve_from_csv(const std::string & text);

}  // namespace subfinsler
