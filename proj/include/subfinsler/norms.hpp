#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace subfinsler {

/// Compact convex set given by its support function plus finitely many extreme points.
struct ConvexSetApprox
{
  std::function<double(const Eigen::VectorXd &)> support;
  std::vector<Eigen::VectorXd> witnesses;
  bool exact = false;

  static ConvexSetApprox singleton(const Eigen::VectorXd & p);
  /// Convex hull of finitely many points (support is exact for polytopes).
  static ConvexSetApprox hull(std::vector<Eigen::VectorXd> vertices);

  ConvexSetApprox scaled(double alpha) const;
  bool is_singleton(double tol = 1e-9) const;
  /// Largest Euclidean distance between two witnesses.
  double witness_spread() const;
};

/// Euclidean distance between two convex sets, bounded from below by probing
/// support functions along `directions` unit vectors (defaults to 64 in 2D and
/// 2 * dim * 16 otherwise), refined around the best probe in 2D.
double set_distance(const ConvexSetApprox & a, const ConvexSetApprox & b, int dim, int directions = 0);

struct NormFlags
{
  bool strictly_convex = false;
  bool smooth = false;
};

/// A norm on R^{2n}. Implementations are immutable and reentrant.
class NormOracle
{
public:
  virtual ~NormOracle() = default;

  virtual int dim() const = 0;
  virtual double eval(const Eigen::VectorXd & z) const = 0;
  /// Subdifferential of N at z; at z = 0 this is the dual unit ball.
  virtual ConvexSetApprox subdiff(const Eigen::VectorXd & z) const = 0;
  virtual double dual_eval(const Eigen::VectorXd & p) const = 0;
  /// Gradient of N_* at p, or nullopt where N_* is not differentiable.
  virtual std::optional<Eigen::VectorXd> dual_grad(const Eigen::VectorXd & p) const = 0;
  /// True when dual_eval/dual_grad are closed forms rather than numerical searches.
  virtual bool exact_dual() const { return true; }
  virtual NormFlags flags() const = 0;
  /// Descriptor JSON accepted by norm_from_json (custom norms report {"family":"custom"}).
  virtual nlohmann::json descriptor() const = 0;

  double squared(const Eigen::VectorXd & z) const
  {
    const double v = eval(z);
    return 0.5 * v * v;
  }
};

using NormPtr = std::shared_ptr<const NormOracle>;

NormPtr make_pnorm(int dim, double p);
NormPtr make_example52();
/// Symmetric convex polygon unit ball in R^2; the vertex list is symmetrized and hulled.
NormPtr make_polygon(const std::vector<Eigen::Vector2d> & vertices);
/// Norm given only by its evaluation; dual and subdifferentials are numerical and
/// the convexity flags are measured by probing.
NormPtr make_custom(int dim, std::function<double(const Eigen::VectorXd &)> eval, std::uint64_t seed = 7);

/// Parses `{"family":"pnorm","p":..}`, `{"family":"example52"}` or
/// `{"family":"polygon","vertices":[[x,y],..]}`; unknown keys are rejected.
/// `dim` applies to pnorm only (default 2).
NormPtr norm_from_json(const nlohmann::json & j, int dim = 2);

/// Result of the dual sup: value and maximizer on the unit sphere of N.
struct DualSup
{
  double value = 0.0;
  Eigen::VectorXd argmax;
};

/// Maximizes p . z over N(z) = 1 by coarse sampling and local refinement.
DualSup dual_sup_generic(const NormOracle & norm, const Eigen::VectorXd & p);
double dual_eval_generic(const NormOracle & norm, const Eigen::VectorXd & p);

/// F_N = N^2 / 2 and its Legendre transform F_{N_*}.
class SquaredNormFunctional
{
public:
  explicit SquaredNormFunctional(NormPtr base);

  const NormOracle & base() const { return *base_; }
  double eval(const Eigen::VectorXd & z) const { return base_->squared(z); }
  double conjugate(const Eigen::VectorXd & p) const;
  ConvexSetApprox subdiff(const Eigen::VectorXd & z) const;

private:
  NormPtr base_;
};

double legendre_of_squared(const NormOracle & norm, const Eigen::VectorXd & p);
ConvexSetApprox subdiff_of_squared(const NormOracle & norm, const Eigen::VectorXd & z);
/// |F_N(z) + F_N^*(p) - z . p|; zero exactly when p is in the subdifferential of F_N at z.
double fenchel_residual(const NormOracle & norm, const Eigen::VectorXd & z, const Eigen::VectorXd & p);

struct ConvexityProbe
{
  bool strictly_convex = true;
  /// Pair on the unit sphere with the largest violation (or smallest margin when none).
  Eigen::VectorXd z1;
  Eigen::VectorXd z2;
  /// N((z1+z2)/2) - (1 - eps(|z1 - z2|)); positive means a flat was found.
  double worst_margin = 0.0;
};

/// Samples pairs on the unit sphere and tests N(mid) < 1 - eps(delta) with
/// eps(delta) = 1e-10 + 1e-4 delta^2.
ConvexityProbe strict_convexity_probe(const NormOracle & norm, int trials, std::uint64_t seed = 1);

/// Point u / N(u) on the unit sphere.
Eigen::VectorXd to_unit_sphere(const NormOracle & norm, const Eigen::VectorXd & u);

}  // namespace subfinsler
