#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "subfinsler/heisenberg.hpp"
#include "subfinsler/norms.hpp"

namespace subfinsler {

/// Normal Pontryagin data: lambda(0), the vertical costate k and the speed R.
struct Multiplier
{
  int lambda0 = 1;
  Eigen::VectorXd lambda_init;
  double k = 0.0;
  double R = 1.0;
};

struct TraceDiagnostics
{
  double speed_dev = 0.0;
  double dual_dev = 0.0;
  double hamiltonian_dev = 0.0;
  double pairing_dev = 0.0;
  /// Median of F_N(v) - a.v over the samples.
  double hamiltonian_const = 0.0;
};

/// Extremal sampled on a grid: curve, covector a(s) and control v(s) = -gamma_I'(s).
struct ExtremalTrace
{
  SampledCurve curve;
  std::vector<Eigen::VectorXd> a;
  std::vector<Eigen::VectorXd> v;
  Multiplier multiplier;
  double T = 0.0;
  std::size_t steps = 0;
  TraceDiagnostics diagnostics;
};

class NotStrictlyConvexError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

class DualGradientUndefinedError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Default RK4 step count: 2048 steps per unit time.
std::size_t default_steps(double T);

/// RK4 on the closed system a' = 4k J v, v = R grad N_*(a), z' = -v, with the
/// vertical coordinate following the horizontality condition. `steps` is the
/// total number of steps over [0, T].
///
/// Throws NotStrictlyConvexError for norms not flagged strictly convex and
/// DualGradientUndefinedError when the flow reaches a kink of N_*.
ExtremalTrace integrate_extremal(const NormOracle & norm, const Multiplier & m, double T, std::size_t steps);

/// Endpoint gamma(T) of the same flow without storing samples. The multiplier is
/// not validated: R is taken as given and lambda0 is ignored.
GroupPoint extremal_endpoint(const NormOracle & norm, const Multiplier & m, double T, std::size_t steps);

/// Diagnostics of a trace against speed R.
TraceDiagnostics trace_diagnostics(
  const NormOracle & norm, const std::vector<Eigen::VectorXd> & a, const std::vector<Eigen::VectorXd> & v, double R);

struct ConditionCheck
{
  std::string name;
  bool pass = false;
  double worst = 0.0;
  double worst_s = 0.0;
};

struct VerifyReport
{
  ConditionCheck minimization;
  ConditionCheck costate;
  ConditionCheck speed;
  ConditionCheck hamiltonian;
  double hamiltonian_const = 0.0;
  /// max |v + d/ds gamma_I| with finite differences; informational only.
  double velocity_mismatch = 0.0;

  bool all_pass() const { return minimization.pass && costate.pass && speed.pass && hamiltonian.pass; }
  std::vector<ConditionCheck> checks() const { return {minimization, costate, speed, hamiltonian}; }
};

/// Checks the first-order conditions on stored samples:
/// a(s) in dF_N(v(s)) (Fenchel residual), a(s) - lambda(0) = 4k (y, -x),
/// N(v) = N_*(a) = R with v.a = R^2, and constancy of F_N(v) - a.v.
VerifyReport verify_extremal(const NormOracle & norm, const ExtremalTrace & trace, double tol);

/// Same image traversed with unit N-speed on [0, length], same sample count.
SampledCurve reparametrize_unit_speed(const NormOracle & norm, const SampledCurve & c);

/// Multiplier family for the segment s -> (0, -s, 0) under the Example 5.2 norm:
/// true iff max(|ell|, |ell - 4k|) <= 1, in which case a(s) = (ell - 4ks, 1) is
/// also confirmed to satisfy N_*(a) = 1 and grad N_*(a) = (0, 1) on [0, 1].
bool multiplier_family_check_example52(double ell, double k);

/// Trace of the segment s -> (0, -s, 0) on [0, 1] with multiplier (ell, 1), k.
ExtremalTrace example52_segment_trace(double ell, double k, std::size_t samples);

nlohmann::json multiplier_to_json(const Multiplier & m);
Multiplier multiplier_from_json(const nlohmann::json & j);
nlohmann::json curve_to_json(const SampledCurve & c);
SampledCurve curve_from_json(const nlohmann::json & j);
nlohmann::json trace_to_json(const ExtremalTrace & trace, const NormOracle & norm);
/// Rebuilds a trace (norm descriptor is returned separately by the caller).
ExtremalTrace trace_from_json(const nlohmann::json & j);

}  // namespace subfinsler
