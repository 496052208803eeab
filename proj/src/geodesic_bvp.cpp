#include "subfinsler/geodesic_bvp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <ceres/ceres.h>
#include <gsl/gsl_multimin.h>

#include "subfinsler/parallel.hpp"
#include "subfinsler/random.hpp"

namespace subfinsler {

namespace {

constexpr double kPi = std::numbers::pi;

/// Unit vector in R^{dim} from dim - 1 hyperspherical angles.
Eigen::VectorXd sphere_point(const Eigen::VectorXd & angles)
{
  const Eigen::Index dim = angles.size() + 1;
  Eigen::VectorXd u(dim);
  double prod = 1.0;
  for (Eigen::Index i = 0; i + 1 < dim; ++i) {
    u[i] = prod * std::cos(angles[i]);
    prod *= std::sin(angles[i]);
  }
  u[dim - 1] = prod;
  return u;
}

Eigen::VectorXd sphere_angles(const Eigen::VectorXd & w)
{
  const Eigen::Index dim = w.size();
  Eigen::VectorXd ang(dim - 1);
  for (Eigen::Index i = 0; i + 1 < dim; ++i) {
    const double tail = w.tail(dim - i - 1).norm();
    ang[i] = std::atan2(tail, w[i]);
  }
  // Last angle carries the sign of the final coordinate.
  ang[dim - 2] = std::atan2(w[dim - 1], w[dim - 2]);
  return ang;
}

struct Unknowns
{
  Multiplier m;
  double T = 0.0;
};

class EndpointMap
{
public:
  EndpointMap(const ShootingProblem & p, std::size_t steps, double t_max)
      : p_(p), steps_(steps), dim_(p.norm->dim()), t_max_(t_max)
  {
  }

  int size() const { return dim_ + 1; }

  std::optional<Unknowns> unpack(const Eigen::VectorXd & x) const
  {
    Unknowns u;
    u.m.lambda0 = 1;
    if (p_.mode == ShootMode::UnitSpeed) {
      const Eigen::VectorXd dir = sphere_point(x.head(dim_ - 1));
      u.m.lambda_init = dir / p_.norm->dual_eval(dir);
      u.m.k = x[dim_ - 1];
      u.T = x[dim_];
      u.m.R = 1.0;
      if (!(u.T > 0.0) || u.T > t_max_) { return std::nullopt; }
    } else {
      u.m.lambda_init = x.head(dim_);
      u.m.k = x[dim_];
      u.T = p_.T;
      u.m.R = p_.norm->dual_eval(u.m.lambda_init);
      if (!(u.m.R > 1e-12)) { return std::nullopt; }
    }
    if (!x.allFinite()) { return std::nullopt; }
    return u;
  }

  Eigen::VectorXd pack(const Multiplier & m, double T) const
  {
    Eigen::VectorXd x(size());
    if (p_.mode == ShootMode::UnitSpeed) {
      x.head(dim_ - 1) = sphere_angles(m.lambda_init);
      x[dim_ - 1] = m.k;
      x[dim_] = T;
    } else {
      x.head(dim_) = m.lambda_init;
      x[dim_] = m.k;
    }
    return x;
  }

  std::optional<Eigen::VectorXd> residual(const Eigen::VectorXd & x) const
  {
    const auto u = unpack(x);
    if (!u) { return std::nullopt; }
    try {
      const GroupPoint end = extremal_endpoint(*p_.norm, u->m, u->T, steps_);
      Eigen::VectorXd r(size());
      r.head(dim_) = end.z() - p_.target.z();
      r[dim_] = end.t() - p_.target.t();
      if (!r.allFinite()) { return std::nullopt; }
      return r;
    } catch (const std::exception &) {
      return std::nullopt;
    }
  }

private:
  const ShootingProblem & p_;
  std::size_t steps_;
  int dim_;
  double t_max_;
};

struct LocalResult
{
  Eigen::VectorXd x;
  double residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool stalled = false;
  /// The endpoint map could not be evaluated around x (Jacobian unavailable).
  bool breakdown = false;
};

/// Levenberg-Marquardt with forward-difference Jacobian.
LocalResult levenberg_marquardt(const EndpointMap & map, Eigen::VectorXd x, double tol, int max_iter)
{
  LocalResult out;
  auto r = map.residual(x);
  if (!r) {
    out.x = x;
    out.stalled = out.breakdown = true;
    return out;
  }
  const int m = map.size();
  double mu = -1.0;
  int it = 0;
  std::vector<double> history;
  for (; it < max_iter; ++it) {
    if (r->norm() <= 0.05 * tol) { break; }
    history.push_back(r->norm());
    // Give up on starts that make no headway: less than 10x over the last 10 steps.
    if (history.size() > 10 && history.back() > 0.1 * history[history.size() - 11]) {
      out.stalled = true;
      break;
    }
    Eigen::MatrixXd J(m, m);
    bool jac_ok = true;
    for (int i = 0; i < m && jac_ok; ++i) {
      const double step = 1e-7 * std::max(1.0, std::abs(x[i]));
      Eigen::VectorXd xp = x;
      xp[i] += step;
      const auto rp = map.residual(xp);
      if (!rp) {
        xp[i] = x[i] - step;
        const auto rm = map.residual(xp);
        if (!rm) {
          jac_ok = false;
          break;
        }
        J.col(i) = (*r - *rm) / step;
      } else {
        J.col(i) = (*rp - *r) / step;
      }
    }
    if (!jac_ok || !J.allFinite()) {
      out.stalled = out.breakdown = true;
      break;
    }
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * *r;
    if (mu < 0.0) { mu = 1e-6 * std::max(1e-12, JtJ.diagonal().maxCoeff()); }
    bool accepted = false;
    for (int attempt = 0; attempt < 12; ++attempt) {
      Eigen::MatrixXd A = JtJ;
      A.diagonal().array() += mu;
      const Eigen::VectorXd delta = A.ldlt().solve(-g);
      const Eigen::VectorXd trial = x + delta;
      const auto rt = map.residual(trial);
      if (rt && rt->norm() < r->norm()) {
        x = trial;
        r = rt;
        mu = std::max(mu / 5.0, 1e-300);
        accepted = true;
        break;
      }
      mu *= 4.0;
      if (delta.norm() <= 1e-15 * (1.0 + x.norm())) { break; }
    }
    if (!accepted) {
      out.stalled = true;
      break;
    }
  }
  out.x = x;
  out.residual = r->norm();
  out.iterations = it;
  return out;
}

struct NmContext
{
  const EndpointMap * map;
};

double nm_objective(const gsl_vector * v, void * params)
{
  const auto * ctx = static_cast<const NmContext *>(params);
  Eigen::VectorXd x(static_cast<Eigen::Index>(v->size));
  for (std::size_t i = 0; i < v->size; ++i) { x[static_cast<Eigen::Index>(i)] = gsl_vector_get(v, i); }
  const auto r = ctx->map->residual(x);
  return r ? r->squaredNorm() : 1e300;
}

Eigen::VectorXd nelder_mead(const EndpointMap & map, const Eigen::VectorXd & x0, int max_iter)
{
  const auto m = static_cast<std::size_t>(map.size());
  NmContext ctx{&map};
  gsl_multimin_function fn{&nm_objective, m, &ctx};
  gsl_vector * x = gsl_vector_alloc(m);
  gsl_vector * step = gsl_vector_alloc(m);
  for (std::size_t i = 0; i < m; ++i) {
    gsl_vector_set(x, i, x0[static_cast<Eigen::Index>(i)]);
    gsl_vector_set(step, i, 0.05 * std::max(1.0, std::abs(x0[static_cast<Eigen::Index>(i)])));
  }
  gsl_multimin_fminimizer * s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, m);
  gsl_multimin_fminimizer_set(s, &fn, x, step);
  for (int it = 0; it < max_iter; ++it) {
    if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) { break; }
    if (gsl_multimin_fminimizer_size(s) < 1e-12) { break; }
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) { out[static_cast<Eigen::Index>(i)] = gsl_vector_get(s->x, i); }
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(x);
  gsl_vector_free(step);
  return out;
}

struct Start
{
  std::string name;
  Multiplier m;
  double T = 1.0;
};

/// Covector with N_*(lambda) = R whose straight extremal heads to z.
std::optional<Multiplier> chord_guess(const NormOracle & norm, const Eigen::VectorXd & z, double R)
{
  const double len = norm.eval(z);
  if (!(len > 1e-14)) { return std::nullopt; }
  const Eigen::VectorXd v = -z / len;
  const auto sub = norm.subdiff(v);
  // Centroid of the witnesses stays in the subdifferential.
  Eigen::VectorXd lam = Eigen::VectorXd::Zero(z.size());
  for (const auto & w : sub.witnesses) { lam += w; }
  lam /= static_cast<double>(sub.witnesses.size());
  Multiplier m;
  m.lambda_init = R * lam / norm.dual_eval(lam);
  m.k = 0.0;
  m.R = R;
  return m;
}

struct LoopData
{
  double area = 0.0;       // Euclidean area of the dual unit ball
  double perimeter = 0.0;  // N-length of its boundary rotated by pi/2
};

LoopData dual_loop(const NormOracle & norm)
{
  constexpr int samples = 512;
  std::vector<Eigen::Vector2d> pts;
  for (int j = 0; j < samples; ++j) {
    const double phi = 2.0 * kPi * j / samples;
    Eigen::VectorXd u(2);
    u << std::cos(phi), std::sin(phi);
    pts.emplace_back(u / norm.dual_eval(u));
  }
  LoopData d;
  for (int j = 0; j < samples; ++j) {
    const Eigen::Vector2d & a = pts[static_cast<std::size_t>(j)];
    const Eigen::Vector2d & b = pts[static_cast<std::size_t>((j + 1) % samples)];
    d.area += 0.5 * (a.x() * b.y() - a.y() * b.x());
    Eigen::VectorXd rot(2);
    rot << -(b.y() - a.y()), b.x() - a.x();
    d.perimeter += norm.eval(rot);
  }
  return d;
}

/// Upper bound for the distance to the target: N(z) plus the length of the
/// vertical loop reaching height t (exact isoperimetric value in H^1).
double length_scale(const ShootingProblem & p)
{
  const NormOracle & norm = *p.norm;
  const double tt = std::abs(p.target.t());
  double vertical = 0.0;
  if (norm.dim() == 2) {
    const LoopData loop = dual_loop(norm);
    vertical = loop.perimeter * std::sqrt(tt) / (2.0 * std::sqrt(loop.area));
  } else {
    vertical = std::sqrt(kPi * tt) * norm.eval(Eigen::VectorXd::Unit(norm.dim(), 0));
  }
  return std::max(1e-6, norm.eval(p.target.z()) + vertical);
}

std::vector<Start> build_starts(const ShootingProblem & p, double scale)
{
  const NormOracle & norm = *p.norm;
  const int dim = norm.dim();
  const Eigen::VectorXd & zt = p.target.z();
  const double tt = p.target.t();
  const double horizontal = norm.eval(zt);
  auto speed_for = [&](double T) { return p.mode == ShootMode::UnitSpeed ? 1.0 : scale / T; };

  std::vector<Start> starts;
  if (p.init_guess) {
    Start s{"init", *p.init_guess, p.init_T.value_or(p.mode == ShootMode::FixedT ? p.T : scale)};
    if (p.mode == ShootMode::FixedT) { s.T = p.T; }
    starts.push_back(s);
  }
  {
    const double T = p.mode == ShootMode::UnitSpeed ? std::max(horizontal, 1e-3) : p.T;
    if (auto m = chord_guess(norm, zt, speed_for(T))) { starts.push_back({"chord", *m, T}); }
  }
  if (dim == 2 && tt != 0.0) {
    const LoopData loop = dual_loop(norm);
    const double k_abs = std::sqrt(loop.area / (4.0 * std::abs(tt)));
    Start s;
    s.name = "isoperimetrix";
    s.m.k = tt > 0.0 ? -k_abs : k_abs;
    s.T = p.mode == ShootMode::UnitSpeed ? loop.perimeter / (4.0 * k_abs) : p.T;
    s.m.R = p.mode == ShootMode::UnitSpeed ? 1.0 : loop.perimeter / (4.0 * k_abs * p.T);
    Eigen::VectorXd u(2);
    u << 0.0, 1.0;
    if (horizontal > 0.0) { u = -zt.normalized(); }
    s.m.lambda_init = s.m.R * u / norm.dual_eval(u);
    starts.push_back(s);
  }
  for (int i = 0; i < p.seeds; ++i) {
    Rng rng = substream(p.seed, static_cast<std::uint64_t>(i));
    Eigen::VectorXd dir(dim);
    for (int c = 0; c < dim; ++c) {
      const double r = std::sqrt(-2.0 * std::log(1.0 - uniform01(rng)));
      dir[c] = r * std::cos(2.0 * kPi * uniform01(rng));
    }
    Start s;
    s.name = "seed" + std::to_string(i);
    s.T = p.mode == ShootMode::UnitSpeed ? scale * uniform(rng, 0.6, 1.0) : p.T;
    const double turn = uniform(rng, 0.2, 2.0 * kPi);
    double sign = uniform01(rng) < 0.5 ? 1.0 : -1.0;
    if (tt != 0.0 && uniform01(rng) < 0.75) { sign = tt > 0.0 ? -1.0 : 1.0; }
    s.m.k = sign * turn / (4.0 * s.T);
    s.m.R = speed_for(s.T);
    s.m.lambda_init = s.m.R * dir / norm.dual_eval(dir);
    starts.push_back(s);
  }
  return starts;
}

double homogeneous_residual(const GroupPoint & end, const GroupPoint & target)
{
  const GroupPoint d = multiply(inverse(end), target);
  return std::max(d.z().norm(), std::sqrt(std::abs(d.t())));
}

ShootResult run_start(const ShootingProblem & p, const Start & start, double tol, double scale)
{
  const std::size_t steps = static_cast<std::size_t>(std::max(64.0, std::ceil(p.steps_per_unit * start.T)));
  // Unit-speed extremals much longer than the upper bound are never minimizing.
  const EndpointMap map(p, steps, 1.5 * scale);
  ShootResult res;
  res.start = start.name;
  res.steps = steps;
  Eigen::VectorXd x0 = map.pack(start.m, start.T);

  LocalResult lm = levenberg_marquardt(map, x0, tol, p.max_iterations);
  res.method = "newton";
  if (lm.residual > tol && lm.breakdown) {
    const Eigen::VectorXd x1 = nelder_mead(map, lm.residual < std::numeric_limits<double>::infinity() ? lm.x : x0, 150);
    LocalResult lm2 = levenberg_marquardt(map, x1, tol, p.max_iterations);
    lm2.iterations += lm.iterations;
    if (lm2.residual < lm.residual) {
      lm = lm2;
      res.method = "nelder-mead+newton";
    }
  }
  res.iterations = lm.iterations;
  const auto u = map.unpack(lm.x);
  if (!u) { return res; }
  res.multiplier = u->m;
  res.T = u->T;
  res.residual = lm.residual;
  res.cost = 0.5 * u->T * u->m.R * u->m.R;
  try {
    res.residual_homogeneous = homogeneous_residual(extremal_endpoint(*p.norm, u->m, u->T, steps), p.target);
  } catch (const std::exception &) {
    res.residual_homogeneous = std::numeric_limits<double>::infinity();
  }
  res.converged = res.residual <= tol;
  return res;
}

bool same_solution(const ShootResult & a, const ShootResult & b)
{
  return std::abs(a.T - b.T) <= 1e-6 * std::max(1.0, a.T) && std::abs(a.multiplier.k - b.multiplier.k) <= 1e-6 &&
         (a.multiplier.lambda_init - b.multiplier.lambda_init).norm() <= 1e-6;
}

}  // namespace

ShootOutcome shoot(const ShootingProblem & p, double tol)
{
  if (!p.norm) { throw std::invalid_argument("shoot: missing norm"); }
  if (p.target.z().size() != p.norm->dim()) { throw std::invalid_argument("shoot: target dimension mismatch"); }
  if (p.target.z().isZero(0.0) && p.target.t() == 0.0) { throw std::invalid_argument("shoot: target must differ from the identity"); }
  if (!p.norm->flags().strictly_convex) { throw NotStrictlyConvexError("shoot: norm is not strictly convex"); }
  if (p.mode == ShootMode::FixedT && !(p.T > 0.0)) { throw std::invalid_argument("shoot: T must be positive"); }
  if (!(tol > 0.0)) { throw std::invalid_argument("shoot: tol must be positive"); }

  const double scale = length_scale(p);
  const auto starts = build_starts(p, scale);
  auto results =
    parallel_map<ShootResult>(starts.size(), [&](std::size_t i) { return run_start(p, starts[i], tol, scale); });

  std::vector<ShootResult> good;
  for (const auto & r : results) {
    if (r.converged) { good.push_back(r); }
  }
  if (good.empty()) {
    auto best = *std::min_element(results.begin(), results.end(),
                                  [](const auto & a, const auto & b) { return a.residual < b.residual; });
    std::string msg = "no convergence: best endpoint residual " + std::to_string(best.residual);
    if (p.target.z().isZero(0.0)) { msg += " (target on vertical axis requires k != 0)"; }
    throw NoConvergenceError(msg, best);
  }
  std::stable_sort(good.begin(), good.end(), [](const auto & a, const auto & b) { return a.cost < b.cost; });
  std::vector<ShootResult> distinct;
  for (const auto & r : good) {
    if (std::none_of(distinct.begin(), distinct.end(), [&](const auto & d) { return same_solution(d, r); })) {
      distinct.push_back(r);
    }
  }
  const ShootResult & best = distinct.front();
  ExtremalTrace trace = integrate_extremal(*p.norm, best.multiplier, best.T, best.steps);
  return ShootOutcome{std::move(distinct), std::move(trace)};
}

// --- direct method -------------------------------------------------------------

namespace {

class DirectObjective final : public ceres::FirstOrderFunction
{
public:
  DirectObjective(const DirectProblem & p, const Eigen::VectorXd & nu, double mu) : p_(p), nu_(nu), mu_(mu) {}

  int NumParameters() const override { return p_.M * p_.norm->dim(); }

  bool Evaluate(const double * params, double * cost, double * gradient) const override
  {
    const int dim = p_.norm->dim();
    const int M = p_.M;
    const double h = p_.T / M;
    const Eigen::Map<const Eigen::MatrixXd> V(params, dim, M);
    Eigen::MatrixXd Z(dim, M + 1);
    Z.col(0).setZero();
    double t = 0.0;
    double running = 0.0;
    for (int j = 0; j < M; ++j) {
      const Eigen::VectorXd v = V.col(j);
      const Eigen::VectorXd z = Z.col(j);
      t += -2.0 * h * symplectic(z, v);
      Z.col(j + 1) = z - h * v;
      running += h * p_.norm->squared(v);
    }
    Eigen::VectorXd r(dim + 1);
    r.head(dim) = Z.col(M) - p_.target.z();
    r[dim] = t - p_.target.t();
    *cost = running + nu_.dot(r) + 0.5 * mu_ * r.squaredNorm();
    if (!std::isfinite(*cost)) { return false; }
    if (gradient != nullptr) {
      const Eigen::VectorXd w = nu_ + mu_ * r;
      Eigen::Map<Eigen::MatrixXd> G(gradient, dim, M);
      Eigen::VectorXd suffix = Eigen::VectorXd::Zero(dim);
      for (int j = M - 1; j >= 0; --j) {
        const Eigen::VectorXd v = V.col(j);
        const double nv = p_.norm->eval(v);
        Eigen::VectorXd g = Eigen::VectorXd::Zero(dim);
        if (nv > 0.0) { g = h * nv * p_.norm->subdiff(v).witnesses.front(); }
        g += -h * w.head(dim);
        g += w[dim] * 2.0 * h * apply_j(Eigen::VectorXd(Z.col(j)) + h * suffix);
        G.col(j) = g;
        suffix += v;
      }
    }
    return true;
  }

private:
  const DirectProblem & p_;
  Eigen::VectorXd nu_;
  double mu_;
};

std::vector<Eigen::VectorXd> default_init(const DirectProblem & p)
{
  const int dim = p.norm->dim();
  const int n = dim / 2;
  const Eigen::VectorXd chord = -p.target.z() / p.T;
  // Chord alone generates no vertical displacement: add one Euclidean loop in the
  // (x1, y1) plane whose enclosed area matches the target height.
  const double tt = p.target.t();
  const double r = std::sqrt(std::abs(tt) / (4.0 * kPi));
  const double c = 2.0 * kPi * r / p.T;
  const double orient = tt > 0.0 ? -1.0 : 1.0;
  std::vector<Eigen::VectorXd> init;
  for (int j = 0; j < p.M; ++j) {
    const double phi = 2.0 * kPi * (j + 0.5) / p.M;
    Eigen::VectorXd v = chord;
    v[0] += c * std::cos(phi);
    v[n] += orient * c * std::sin(phi);
    init.push_back(v);
  }
  return init;
}

}  // namespace

double DirectResult::length_bound() const
{
  const double T = curve.s_grid().back() - curve.s_grid().front();
  return std::sqrt(2.0 * T * cost);
}

SampledCurve curve_from_controls(const std::vector<Eigen::VectorXd> & controls, double T)
{
  if (controls.empty()) { throw std::invalid_argument("curve_from_controls: no controls"); }
  const std::size_t M = controls.size();
  const double h = T / static_cast<double>(M);
  std::vector<double> s(M + 1);
  std::vector<GroupPoint> pts;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(controls.front().size());
  double t = 0.0;
  pts.emplace_back(z, t);
  s[0] = 0.0;
  for (std::size_t j = 0; j < M; ++j) {
    t += -2.0 * h * symplectic(z, controls[j]);
    z -= h * controls[j];
    pts.emplace_back(z, t);
    s[j + 1] = (j + 1 == M) ? T : h * static_cast<double>(j + 1);
  }
  return SampledCurve(std::move(s), std::move(pts));
}

DirectResult solve_direct(const DirectProblem & p)
{
  if (!p.norm) { throw std::invalid_argument("solve_direct: missing norm"); }
  const int dim = p.norm->dim();
  if (p.target.z().size() != dim) { throw std::invalid_argument("solve_direct: target dimension mismatch"); }
  if (p.M < 4) { throw std::invalid_argument("solve_direct: M must be >= 4"); }
  if (!(p.T > 0.0)) { throw std::invalid_argument("solve_direct: T must be positive"); }
  if (p.penalty.empty()) { throw std::invalid_argument("solve_direct: empty penalty schedule"); }
  for (std::size_t i = 0; i < p.penalty.size(); ++i) {
    if (!(p.penalty[i] > 0.0) || (i > 0 && !(p.penalty[i] > p.penalty[i - 1]))) {
      throw std::invalid_argument("solve_direct: penalty schedule must be positive and strictly increasing");
    }
  }
  const auto init = p.init.empty() ? default_init(p) : p.init;
  if (static_cast<int>(init.size()) != p.M) { throw std::invalid_argument("solve_direct: init must hold M controls"); }

  std::vector<double> x(static_cast<std::size_t>(dim * p.M));
  for (int j = 0; j < p.M; ++j) {
    for (int i = 0; i < dim; ++i) { x[static_cast<std::size_t>(j * dim + i)] = init[static_cast<std::size_t>(j)][i]; }
  }

  ceres::GradientProblemSolver::Options options;
  options.line_search_direction_type = ceres::LBFGS;
  options.max_num_iterations = 4000;
  options.function_tolerance = 1e-16;
  options.gradient_tolerance = 1e-14;
  options.parameter_tolerance = 1e-16;
  options.logging_type = ceres::SILENT;
  options.minimizer_progress_to_stdout = false;

  Eigen::VectorXd nu = Eigen::VectorXd::Zero(dim + 1);
  std::vector<Eigen::VectorXd> controls(static_cast<std::size_t>(p.M));
  auto unpack = [&] {
    for (int j = 0; j < p.M; ++j) {
      controls[static_cast<std::size_t>(j)] =
        Eigen::Map<const Eigen::VectorXd>(x.data() + static_cast<std::ptrdiff_t>(j * dim), dim);
    }
  };
  for (double mu : p.penalty) {
    ceres::GradientProblem problem(new DirectObjective(p, nu, mu));
    ceres::GradientProblemSolver::Summary summary;
    ceres::Solve(options, problem, x.data(), &summary);
    unpack();
    const SampledCurve c = curve_from_controls(controls, p.T);
    const GroupPoint & end = c.points().back();
    Eigen::VectorXd r(dim + 1);
    r.head(dim) = end.z() - p.target.z();
    r[dim] = end.t() - p.target.t();
    nu += mu * r;
  }
  unpack();
  SampledCurve curve = curve_from_controls(controls, p.T);
  const double h = p.T / p.M;
  double cost = 0.0, length = 0.0;
  for (const auto & v : controls) {
    cost += h * p.norm->squared(v);
    length += h * p.norm->eval(v);
  }
  const GroupPoint & end = curve.points().back();
  Eigen::VectorXd r(dim + 1);
  r.head(dim) = end.z() - p.target.z();
  r[dim] = end.t() - p.target.t();
  DirectResult out{std::move(controls), std::move(curve), cost, r.norm(), length};
  return out;
}

EquivalenceReport equivalence_check(const NormOracle & norm, const std::vector<Eigen::VectorXd> & controls, double T)
{
  if (controls.empty()) { throw std::invalid_argument("equivalence_check: no controls"); }
  const double h = T / static_cast<double>(controls.size());
  EquivalenceReport rep;
  for (const auto & v : controls) {
    const double nv = norm.eval(v);
    rep.integral_n += h * nv;
    rep.integral_n2 += h * nv * nv;
  }
  rep.gap = T * rep.integral_n2 - rep.integral_n * rep.integral_n;
  rep.relative_gap = rep.gap / std::max(1e-300, T * rep.integral_n2);
  return rep;
}

}  // namespace subfinsler
