#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "subfinsler/heisenberg.hpp"
#include "subfinsler/norms.hpp"
#include "subfinsler/pontryagin.hpp"

namespace subfinsler {

enum class ShootMode { FixedT, UnitSpeed };

struct ShootingProblem
{
  NormPtr norm;
  GroupPoint target;
  ShootMode mode = ShootMode::UnitSpeed;
  /// Final time in FixedT mode.
  double T = 1.0;
  std::optional<Multiplier> init_guess;
  std::optional<double> init_T;
  /// Random starts in addition to the structured guesses.
  int seeds = 16;
  std::uint64_t seed = 1;
  int max_iterations = 60;
  /// RK4 steps per unit time while shooting.
  double steps_per_unit = 2048.0;
};

struct ShootResult
{
  Multiplier multiplier;
  double T = 0.0;
  /// Euclidean endpoint residual in R^{2n+1}.
  double residual = std::numeric_limits<double>::infinity();
  /// Homogeneous residual max{|dz|_2, sqrt|dt|} of gamma(T)^{-1} * target.
  double residual_homogeneous = std::numeric_limits<double>::infinity();
  /// Integral of F_N(v): T R^2 / 2.
  double cost = 0.0;
  bool converged = false;
  int iterations = 0;
  /// RK4 steps over [0, T] used for this solution.
  std::size_t steps = 0;
  std::string start;
  std::string method;
};

struct ShootOutcome
{
  /// Converged, pairwise distinct solutions ranked by cost (best first).
  std::vector<ShootResult> solutions;
  ExtremalTrace trace;
  const ShootResult & best() const { return solutions.front(); }
};

class NoConvergenceError : public std::runtime_error
{
public:
  NoConvergenceError(const std::string & what, ShootResult best) : std::runtime_error(what), best_(std::move(best)) {}
  const ShootResult & best() const { return best_; }

private:
  ShootResult best_;
};

/// Multi-start shooting. Each start runs damped Newton (Levenberg-Marquardt) with a
/// finite-difference Jacobian and falls back to Nelder-Mead when Newton stalls.
/// Throws NoConvergenceError when no start reaches `tol`.
ShootOutcome shoot(const ShootingProblem & p, double tol);

struct DirectProblem
{
  NormPtr norm;
  GroupPoint target;
  double T = 1.0;
  int M = 256;
  std::vector<double> penalty = {1e1, 1e2, 1e3, 1e4, 1e5, 1e6};
  /// Optional starting controls (M vectors); defaults to chord plus a loop matching t.
  std::vector<Eigen::VectorXd> init;
};

struct DirectResult
{
  std::vector<Eigen::VectorXd> controls;
  SampledCurve curve;
  /// Sum of h F_N(v_j), an upper bound for the optimal cost when the residual is small.
  double cost = 0.0;
  /// Euclidean endpoint residual.
  double residual = 0.0;
  /// Length sqrt(2 T cost), an upper bound for the N-length of the discrete curve.
  double length_bound() const;
  /// Sum of h N(v_j).
  double length = 0.0;
};

/// Piecewise-constant controls with exact dynamics, endpoint enforced by an
/// augmented Lagrangian over the penalty schedule, inner solves by L-BFGS.
DirectResult solve_direct(const DirectProblem & p);

/// Curve generated by piecewise-constant controls on a uniform grid over [0, T].
SampledCurve curve_from_controls(const std::vector<Eigen::VectorXd> & controls, double T);

struct EquivalenceReport
{
  double integral_n = 0.0;
  double integral_n2 = 0.0;
  /// T * int N^2 - (int N)^2 >= 0, zero iff the speed is constant.
  double gap = 0.0;
  double relative_gap = 0.0;
};

/// Cauchy-Schwarz chain for piecewise-constant controls on a uniform grid over [0, T].
EquivalenceReport equivalence_check(const NormOracle & norm, const std::vector<Eigen::VectorXd> & controls, double T);

}  // namespace subfinsler
