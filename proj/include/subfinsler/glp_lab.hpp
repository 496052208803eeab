#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "subfinsler/heisenberg.hpp"
#include "subfinsler/norms.hpp"
#include "subfinsler/pontryagin.hpp"

namespace subfinsler {

struct BlowDownReport
{
  std::vector<int> k_values;
  /// sup of |(gamma_k)_I| over [0, 1] for gamma_k(s) = delta_{1/k} gamma(s k).
  std::vector<double> projection_sups;
  /// max |N-length of gamma_k on [0, s] - s| over the grid.
  std::vector<double> geodesic_residuals;
};

/// Blow-down sequence of a unit-speed trace. Traces shorter than max(k_list) are
/// re-integrated from their multiplier when the norm allows it.
BlowDownReport blow_down(const NormOracle & norm, const ExtremalTrace & trace, const std::vector<int> & k_list);

struct BoundednessCertificate
{
  double s0 = 0.0;
  /// Distance between dF_N(v(s0)) and dF_N(v(0)), rounded down by a relative 1e-9.
  double c = 0.0;
  /// c / (4 |gamma_I(s0)|): every multiplier of the trace has |k| >= k_lower.
  double k_lower = 0.0;
  /// diam(dual sphere of radius R) / (4 k_lower): bound for |gamma_I| on the whole extremal.
  double C = 0.0;
};

/// Throws std::invalid_argument("line input") when v is constant along the trace.
BoundednessCertificate boundedness_certificate(const NormOracle & norm, const ExtremalTrace & trace);

struct GlpTrial
{
  Multiplier multiplier;
  std::optional<double> bound_C;
  double observed_sup = 0.0;
  /// Distance of the trace from the line through the origin along v(0) (k = 0 only).
  std::optional<double> line_deviation;
  bool pass = false;
  /// First s at which the trace is provably longer than a competitor path, if any.
  std::optional<double> breakdown_scale;
};

struct GlpReport
{
  std::vector<GlpTrial> trials;
  bool all_pass() const;
};

/// Random unit-speed extremals over [0, horizon]; every fourth trial has k = 0.
GlpReport glp_empirical(const NormOracle & norm, int trials, double horizon, std::uint64_t seed = 1);

/// Largest N-length of a loop from the origin enclosing vertical displacement t, divided by sqrt|t|.
double vertical_cost_factor(const NormOracle & norm);

struct SubintervalCheck
{
  double s0 = 0.0;
  double s1 = 0.0;
  double length = 0.0;
  /// sqrt(2 T cost) of the direct method with matching endpoints.
  double direct_length = 0.0;
  double direct_residual = 0.0;
  bool pass = false;
};

struct Counterexample
{
  SampledCurve curve;
  Eigen::VectorXd face_a;
  Eigen::VectorXd face_b;
  /// Half the minimal width of the projected point cloud: distance bound from any line.
  double nonlinearity = 0.0;
  std::vector<SubintervalCheck> checks;
};

/// Zigzag along a flat face of the unit sphere of N, lifted horizontally, with
/// its subarcs compared against the direct method. Throws std::invalid_argument
/// ("norm is strictly convex") when the probe finds no flat face.
Counterexample nonconvex_counterexample(const NormOracle & norm, double horizon = 20.0, int subintervals = 10,
                                        std::uint64_t seed = 1, int direct_M = 256);

/// Half the minimal width of the convex hull of planar points (top-2 principal plane in higher dimensions).
double line_distance_lower_bound(const SampledCurve & c);

struct CheckEntry
{
  std::string name;
  double value = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct Example52Report
{
  std::vector<CheckEntry> checks;
  bool all_pass() const;
};

Example52Report verify_example52();

nlohmann::json to_json(const BlowDownReport & r);
nlohmann::json to_json(const BoundednessCertificate & c);
nlohmann::json to_json(const GlpReport & r);
nlohmann::json to_json(const Example52Report & r);
nlohmann::json to_json(const Counterexample & c);

}  // namespace subfinsler
