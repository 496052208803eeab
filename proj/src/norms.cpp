#include "subfinsler/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>

#include "subfinsler/random.hpp"

namespace subfinsler {

namespace {

constexpr double kPi = std::numbers::pi;

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

Eigen::VectorXd unit2(double phi)
{
  Eigen::VectorXd u(2);
  u << std::cos(phi), std::sin(phi);
  return u;
}

/// Deterministic probe directions: evenly spaced in 2D, pseudo-random Gaussian otherwise.
std::vector<Eigen::VectorXd> probe_directions(int dim, int count)
{
  std::vector<Eigen::VectorXd> dirs;
  dirs.reserve(static_cast<std::size_t>(count));
  if (dim == 2) {
    for (int j = 0; j < count; ++j) { dirs.push_back(unit2(2.0 * kPi * (j + 0.5) / count)); }
    return dirs;
  }
  Rng rng(0x5eed);
  for (int j = 0; j < count; ++j) {
    Eigen::VectorXd u(dim);
    for (int i = 0; i < dim; ++i) {
      // Box-Muller on the portable uniform stream.
      const double r = std::sqrt(-2.0 * std::log(1.0 - uniform01(rng)));
      u[i] = r * std::cos(2.0 * kPi * uniform01(rng));
    }
    dirs.push_back(u.normalized());
  }
  return dirs;
}

int default_probe_count(int dim) { return dim == 2 ? 64 : 2 * dim * 16; }

std::vector<Eigen::VectorXd> dedupe(std::vector<Eigen::VectorXd> pts, double tol)
{
  std::vector<Eigen::VectorXd> out;
  for (auto & p : pts) {
    const bool seen = std::any_of(out.begin(), out.end(), [&](const Eigen::VectorXd & q) {
      return (p - q).lpNorm<Eigen::Infinity>() <= tol;
    });
    if (!seen) { out.push_back(std::move(p)); }
  }
  return out;
}

/// Dual unit ball as a convex set: support is N itself, witnesses are exposed points.
ConvexSetApprox dual_ball(const NormOracle & norm)
{
  ConvexSetApprox set;
  const NormOracle * base = &norm;
  set.support = [base](const Eigen::VectorXd & d) { return base->eval(d); };
  std::vector<Eigen::VectorXd> pts;
  for (const auto & d : probe_directions(norm.dim(), default_probe_count(norm.dim()))) {
    for (auto & w : norm.subdiff(d).witnesses) { pts.push_back(std::move(w)); }
  }
  set.witnesses = dedupe(std::move(pts), 1e-12);
  set.exact = false;
  return set;
}

double lp_value(const Eigen::VectorXd & z, double p)
{
  if (std::isinf(p)) { return z.lpNorm<Eigen::Infinity>(); }
  if (p == 1.0) { return z.lpNorm<1>(); }
  if (p == 2.0) { return z.norm(); }
  const double m = z.lpNorm<Eigen::Infinity>();
  if (m == 0.0) { return 0.0; }
  return m * std::pow((z.array().abs() / m).pow(p).sum(), 1.0 / p);
}

/// Gradient of the l^p norm at z != 0 for 1 < p < inf.
Eigen::VectorXd lp_smooth_grad(const Eigen::VectorXd & z, double p)
{
  const double m = z.lpNorm<Eigen::Infinity>();
  const Eigen::ArrayXd u = z.array() / m;
  const double r = lp_value(u.matrix(), p);
  Eigen::VectorXd g(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) { g[i] = sgn(u[i]) * std::pow(std::abs(u[i]) / r, p - 1.0); }
  return g;
}

/// Active index set of the max-norm (ties within relative 1e-12).
std::vector<Eigen::Index> max_active(const Eigen::VectorXd & z)
{
  const double m = z.lpNorm<Eigen::Infinity>();
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (std::abs(z[i]) >= m * (1.0 - 1e-12)) { idx.push_back(i); }
  }
  return idx;
}

class PNorm final : public NormOracle
{
public:
  PNorm(int dim, double p) : dim_(dim), p_(p)
  {
    if (dim < 2 || dim % 2 != 0) { throw std::invalid_argument("pnorm: dimension must be even and >= 2"); }
    if (!(p >= 1.0)) { throw std::invalid_argument("pnorm: p must be >= 1"); }
    q_ = std::isinf(p) ? 1.0 : (p == 1.0 ? std::numeric_limits<double>::infinity() : p / (p - 1.0));
  }

  int dim() const override { return dim_; }
  double eval(const Eigen::VectorXd & z) const override { return lp_value(z, p_); }
  double dual_eval(const Eigen::VectorXd & p) const override { return lp_value(p, q_); }

  ConvexSetApprox subdiff(const Eigen::VectorXd & z) const override
  {
    if (z.isZero(0.0)) { return dual_ball(*this); }
    if (p_ == 1.0) { return l1_subdiff(z); }
    if (std::isinf(p_)) { return linf_subdiff(z); }
    return ConvexSetApprox::singleton(lp_smooth_grad(z, p_));
  }

  std::optional<Eigen::VectorXd> dual_grad(const Eigen::VectorXd & p) const override
  {
    if (p.isZero(0.0)) { return std::nullopt; }
    if (std::isinf(q_)) {
      const auto idx = max_active(p);
      if (idx.size() != 1) { return std::nullopt; }
      Eigen::VectorXd g = Eigen::VectorXd::Zero(dim_);
      g[idx[0]] = sgn(p[idx[0]]);
      return g;
    }
    if (q_ == 1.0) {
      if ((p.array() == 0.0).any()) { return std::nullopt; }
      return Eigen::VectorXd(p.array().sign().matrix());
    }
    return lp_smooth_grad(p, q_);
  }

  NormFlags flags() const override
  {
    const bool interior = p_ > 1.0 && !std::isinf(p_);
    return {interior, interior};
  }

  nlohmann::json descriptor() const override
  {
    nlohmann::json j{{"family", "pnorm"}};
    if (std::isinf(p_)) {
      j["p"] = "inf";
    } else {
      j["p"] = p_;
    }
    return j;
  }

private:
  ConvexSetApprox l1_subdiff(const Eigen::VectorXd & z) const
  {
    std::vector<Eigen::Index> zeros;
    Eigen::VectorXd base(dim_);
    for (Eigen::Index i = 0; i < dim_; ++i) {
      base[i] = sgn(z[i]);
      if (z[i] == 0.0) { zeros.push_back(i); }
    }
    // Vertices: every sign pattern on the zero coordinates (capped at 2^6).
    const std::size_t free_count = std::min<std::size_t>(zeros.size(), 6);
    std::vector<Eigen::VectorXd> verts;
    for (std::size_t mask = 0; mask < (std::size_t{1} << free_count); ++mask) {
      Eigen::VectorXd w = base;
      for (std::size_t b = 0; b < zeros.size(); ++b) {
        w[zeros[b]] = (b < free_count && ((mask >> b) & 1U)) ? 1.0 : -1.0;
      }
      verts.push_back(w);
    }
    ConvexSetApprox set;
    set.witnesses = std::move(verts);
    set.support = [base, zeros](const Eigen::VectorXd & d) {
      double h = base.dot(d);
      for (auto i : zeros) { h += std::abs(d[i]); }
      return h;
    };
    set.exact = zeros.size() <= 6;
    return set;
  }

  ConvexSetApprox linf_subdiff(const Eigen::VectorXd & z) const
  {
    std::vector<Eigen::VectorXd> verts;
    for (auto i : max_active(z)) {
      Eigen::VectorXd w = Eigen::VectorXd::Zero(dim_);
      w[i] = sgn(z[i]);
      verts.push_back(w);
    }
    return ConvexSetApprox::hull(std::move(verts));
  }

  int dim_;
  double p_;
  double q_;
};

class Example52Norm final : public NormOracle
{
public:
  int dim() const override { return 2; }

  double eval(const Eigen::VectorXd & z) const override
  {
    const double x = z[0], y = z[1];
    return std::abs(x) + std::sqrt(2.0 * x * x + y * y);
  }

  ConvexSetApprox subdiff(const Eigen::VectorXd & z) const override
  {
    if (z.isZero(0.0)) { return dual_ball(*this); }
    const double x = z[0], y = z[1];
    if (x == 0.0) {
      // Corner of the unit ball at (0, +-1): the |x| term contributes [-1, 1].
      const double sy = sgn(y);
      Eigen::VectorXd lo(2), hi(2);
      lo << -1.0, sy;
      hi << 1.0, sy;
      ConvexSetApprox set;
      set.witnesses = {lo, hi};
      set.support = [sy](const Eigen::VectorXd & d) { return std::abs(d[0]) + sy * d[1]; };
      set.exact = true;
      return set;
    }
    const double r = std::sqrt(2.0 * x * x + y * y);
    Eigen::VectorXd g(2);
    g << sgn(x) + 2.0 * x / r, y / r;
    return ConvexSetApprox::singleton(g);
  }

  double dual_eval(const Eigen::VectorXd & p) const override
  {
    const double x = std::abs(p[0]), y = std::abs(p[1]);
    if (x >= y) { return -x + std::sqrt(2.0) * std::hypot(x, y); }
    return y;
  }

  std::optional<Eigen::VectorXd> dual_grad(const Eigen::VectorXd & p) const override
  {
    const double x = p[0], y = p[1];
    if (x == 0.0 && y == 0.0) { return std::nullopt; }
    Eigen::VectorXd g(2);
    const double ax = std::abs(x), ay = std::abs(y);
    if (ax > ay) {
      const double rho = std::hypot(x, y);
      g << -sgn(x) + std::sqrt(2.0) * x / rho, std::sqrt(2.0) * y / rho;
    } else {
      // On |x| = |y| both branch formulas give (0, sgn y): N_* is C^1 there.
      g << 0.0, sgn(y);
    }
    return g;
  }

  NormFlags flags() const override { return {true, false}; }
  nlohmann::json descriptor() const override { return {{"family", "example52"}}; }
};

class PolygonNorm final : public NormOracle
{
public:
  explicit PolygonNorm(const std::vector<Eigen::Vector2d> & input)
  {
    std::vector<Eigen::Vector2d> pts;
    for (const auto & v : input) {
      if (!v.allFinite()) { throw std::invalid_argument("polygon: non-finite vertex"); }
      pts.push_back(v);
      pts.push_back(-v);
    }
    vertices_ = convex_hull(std::move(pts));
    if (vertices_.size() < 4) { throw std::invalid_argument("polygon: unit ball must have non-empty interior"); }
    const std::size_t m = vertices_.size();
    for (std::size_t i = 0; i < m; ++i) {
      const Eigen::Vector2d & a = vertices_[i];
      const Eigen::Vector2d & b = vertices_[(i + 1) % m];
      Eigen::Vector2d n(b.y() - a.y(), a.x() - b.x());  // outward for counterclockwise order
      const double offset = n.dot(a);
      if (!(offset > 1e-12)) { throw std::invalid_argument("polygon: origin must be interior"); }
      normals_.push_back(n / offset);
    }
  }

  int dim() const override { return 2; }

  double eval(const Eigen::VectorXd & z) const override
  {
    double best = 0.0;
    for (const auto & n : normals_) { best = std::max(best, n.x() * z[0] + n.y() * z[1]); }
    return best;
  }

  ConvexSetApprox subdiff(const Eigen::VectorXd & z) const override
  {
    if (z.isZero(0.0)) {
      std::vector<Eigen::VectorXd> verts;
      for (const auto & n : normals_) { verts.emplace_back(Eigen::VectorXd(n)); }
      return ConvexSetApprox::hull(std::move(verts));
    }
    const double value = eval(z);
    std::vector<Eigen::VectorXd> active;
    for (const auto & n : normals_) {
      if (n.x() * z[0] + n.y() * z[1] >= value - 1e-12 * std::max(1.0, value)) {
        active.emplace_back(Eigen::VectorXd(n));
      }
    }
    return ConvexSetApprox::hull(std::move(active));
  }

  double dual_eval(const Eigen::VectorXd & p) const override
  {
    double best = 0.0;
    for (const auto & v : vertices_) { best = std::max(best, v.x() * p[0] + v.y() * p[1]); }
    return best;
  }

  std::optional<Eigen::VectorXd> dual_grad(const Eigen::VectorXd & p) const override
  {
    const double value = dual_eval(p);
    if (value == 0.0) { return std::nullopt; }
    std::optional<Eigen::VectorXd> hit;
    for (const auto & v : vertices_) {
      if (v.x() * p[0] + v.y() * p[1] >= value - 1e-12 * value) {
        if (hit) { return std::nullopt; }
        hit = Eigen::VectorXd(v);
      }
    }
    return hit;
  }

  NormFlags flags() const override { return {false, false}; }

  nlohmann::json descriptor() const override
  {
    nlohmann::json verts = nlohmann::json::array();
    for (const auto & v : vertices_) { verts.push_back({v.x(), v.y()}); }
    return {{"family", "polygon"}, {"vertices", verts}};
  }

private:
  static double cross(const Eigen::Vector2d & o, const Eigen::Vector2d & a, const Eigen::Vector2d & b)
  {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  }

  /// Andrew's monotone chain; drops collinear points, counterclockwise output.
  static std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> pts)
  {
    std::sort(pts.begin(), pts.end(), [](const auto & a, const auto & b) {
      return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    pts.erase(std::unique(pts.begin(), pts.end(), [](const auto & a, const auto & b) { return a == b; }), pts.end());
    if (pts.size() < 3) { return pts; }
    std::vector<Eigen::Vector2d> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto & p : pts) {
      while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 1e-14) { --k; }
      hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
      while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 1e-14) { --k; }
      hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
  }

  std::vector<Eigen::Vector2d> vertices_;
  std::vector<Eigen::Vector2d> normals_;
};

class CustomNorm final : public NormOracle
{
public:
  CustomNorm(int dim, std::function<double(const Eigen::VectorXd &)> eval, std::uint64_t seed)
      : dim_(dim), eval_(std::move(eval))
  {
    if (dim < 2 || dim % 2 != 0) { throw std::invalid_argument("custom norm: dimension must be even and >= 2"); }
    flags_.strictly_convex = strict_convexity_probe(*this, 2000, seed).strictly_convex;
    flags_.smooth = measure_smooth(seed);
  }

  int dim() const override { return dim_; }
  double eval(const Eigen::VectorXd & z) const override { return eval_(z); }

  ConvexSetApprox subdiff(const Eigen::VectorXd & z) const override
  {
    if (z.isZero(0.0)) { return dual_ball(*this); }
    const Eigen::VectorXd zn = to_unit_sphere(*this, z);
    ConvexSetApprox set;
    auto f = eval_;
    // Support of the subdifferential = one-sided directional derivative of N.
    set.support = [f, zn](const Eigen::VectorXd & d) {
      const double len = d.norm();
      if (len == 0.0) { return 0.0; }
      constexpr double step = 1e-7;
      return len * (f(zn + step * d / len) - f(zn)) / step;
    };
    // Exposed points: gradients just off z along probe directions.
    std::vector<Eigen::VectorXd> pts;
    for (const auto & d : probe_directions(dim_, default_probe_count(dim_))) {
      pts.push_back(numeric_grad(zn + 1e-6 * d));
    }
    set.witnesses = cluster(std::move(pts), 1e-4);
    set.exact = false;
    return set;
  }

  double dual_eval(const Eigen::VectorXd & p) const override { return dual_eval_generic(*this, p); }

  std::optional<Eigen::VectorXd> dual_grad(const Eigen::VectorXd & p) const override
  {
    if (p.isZero(0.0)) { return std::nullopt; }
    // Danskin: the gradient of the support function is its (unique) maximizer.
    DualSup sup = dual_sup_generic(*this, p);
    if (dim_ == 2 && !flags_.strictly_convex) {
      const double phi0 = std::atan2(sup.argmax[1], sup.argmax[0]);
      for (double sign : {-1.0, 1.0}) {
        const Eigen::VectorXd probe = to_unit_sphere(*this, unit2(phi0 + sign * 1e-4));
        if (p.dot(probe) >= sup.value - 1e-12 * std::max(1.0, sup.value)) { return std::nullopt; }
      }
    }
    return sup.argmax;
  }

  bool exact_dual() const override { return false; }
  NormFlags flags() const override { return flags_; }
  nlohmann::json descriptor() const override { return {{"family", "custom"}, {"dim", dim_}}; }

private:
  // Sweeps great circles in coordinate and random planes. Across a kink the gradient
  // jump survives bisection of the arc; on a C^1 sphere it shrinks with the arc.
  bool measure_smooth(std::uint64_t seed) const
  {
    std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> planes;
    for (int i = 0; i < dim_; ++i) {
      for (int j = i + 1; j < dim_; ++j) { planes.emplace_back(Eigen::VectorXd::Unit(dim_, i), Eigen::VectorXd::Unit(dim_, j)); }
    }
    Rng rng = substream(seed, 0x5A00);
    std::normal_distribution<double> gauss;
    for (int extra = 0; extra < (dim_ == 2 ? 0 : 4); ++extra) {
      Eigen::VectorXd a(dim_), b(dim_);
      for (int i = 0; i < dim_; ++i) {
        a[i] = gauss(rng);
        b[i] = gauss(rng);
      }
      a.normalize();
      b = (b - b.dot(a) * a).normalized();
      planes.emplace_back(a, b);
    }
    constexpr int steps = 256;
    for (const auto & [e1, e2] : planes) {
      auto grad_at = [&](double phi) { return numeric_grad(to_unit_sphere(*this, std::cos(phi) * e1 + std::sin(phi) * e2)); };
      for (int j = 0; j < steps; ++j) {
        double lo = 2.0 * std::numbers::pi * j / steps, hi = 2.0 * std::numbers::pi * (j + 1) / steps;
        Eigen::VectorXd glo = grad_at(lo), ghi = grad_at(hi);
        const double initial = (ghi - glo).norm();
        // Arcs stay well above the finite-difference step of numeric_grad.
        for (int it = 0; it < 16; ++it) {
          const double mid = 0.5 * (lo + hi);
          const Eigen::VectorXd gmid = grad_at(mid);
          if ((gmid - glo).norm() >= (ghi - gmid).norm()) {
            hi = mid;
            ghi = gmid;
          } else {
            lo = mid;
            glo = gmid;
          }
        }
        const double jump = (ghi - glo).norm();
        if (jump > 0.25 * initial && jump > 1e-6 * std::max(1.0, glo.norm())) { return false; }
      }
    }
    return true;
  }

  Eigen::VectorXd numeric_grad(const Eigen::VectorXd & y) const
  {
    constexpr double h = 1e-8;
    Eigen::VectorXd g(dim_);
    Eigen::VectorXd yp = y, ym = y;
    for (int i = 0; i < dim_; ++i) {
      yp[i] += h;
      ym[i] -= h;
      g[i] = (eval_(yp) - eval_(ym)) / (2.0 * h);
      yp[i] = ym[i] = y[i];
    }
    return g;
  }

  static std::vector<Eigen::VectorXd> cluster(std::vector<Eigen::VectorXd> pts, double tol)
  {
    return dedupe(std::move(pts), tol);
  }

  int dim_;
  std::function<double(const Eigen::VectorXd &)> eval_;
  NormFlags flags_;
};

double parse_p(const nlohmann::json & v)
{
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "infinity" || s == "Infinity") { return std::numeric_limits<double>::infinity(); }
    throw std::invalid_argument("norm descriptor: field 'p' must be a number >= 1 or \"inf\"");
  }
  if (!v.is_number()) { throw std::invalid_argument("norm descriptor: field 'p' must be a number"); }
  return v.get<double>();
}

}  // namespace

// --- ConvexSetApprox ----------------------------------------------------------

ConvexSetApprox ConvexSetApprox::singleton(const Eigen::VectorXd & p)
{
  ConvexSetApprox set;
  set.support = [p](const Eigen::VectorXd & d) { return p.dot(d); };
  set.witnesses = {p};
  set.exact = true;
  return set;
}

ConvexSetApprox ConvexSetApprox::hull(std::vector<Eigen::VectorXd> vertices)
{
  if (vertices.empty()) { throw std::invalid_argument("ConvexSetApprox::hull: empty vertex list"); }
  if (vertices.size() == 1) { return singleton(vertices.front()); }
  ConvexSetApprox set;
  set.support = [vertices](const Eigen::VectorXd & d) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto & v : vertices) { best = std::max(best, v.dot(d)); }
    return best;
  };
  set.witnesses = std::move(vertices);
  set.exact = true;
  return set;
}

ConvexSetApprox ConvexSetApprox::scaled(double alpha) const
{
  ConvexSetApprox out;
  auto inner = support;
  if (alpha >= 0.0) {
    out.support = [inner, alpha](const Eigen::VectorXd & d) { return alpha * inner(d); };
  } else {
    out.support = [inner, alpha](const Eigen::VectorXd & d) { return -alpha * inner(-d); };
  }
  for (const auto & w : witnesses) { out.witnesses.push_back(alpha * w); }
  out.exact = exact;
  return out;
}

bool ConvexSetApprox::is_singleton(double tol) const { return witness_spread() <= tol; }

double ConvexSetApprox::witness_spread() const
{
  double best = 0.0;
  for (std::size_t i = 0; i < witnesses.size(); ++i) {
    for (std::size_t j = i + 1; j < witnesses.size(); ++j) {
      best = std::max(best, (witnesses[i] - witnesses[j]).norm());
    }
  }
  return best;
}

double set_distance(const ConvexSetApprox & a, const ConvexSetApprox & b, int dim, int directions)
{
  if (directions <= 0) { directions = default_probe_count(dim); }
  // For unit d: min_{x in a} d.x - max_{y in b} d.y; its maximum over d is dist(a, b).
  auto gap = [&](const Eigen::VectorXd & d) { return -a.support(-d) - b.support(d); };
  double best = 0.0;
  Eigen::VectorXd best_dir;
  for (const auto & d : probe_directions(dim, directions)) {
    const double g = gap(d);
    if (g > best) {
      best = g;
      best_dir = d;
    }
  }
  if (dim == 2 && best > 0.0) {
    const double phi0 = std::atan2(best_dir[1], best_dir[0]);
    const double width = 2.0 * kPi / directions;
    auto neg = [&](double phi) { return -gap(unit2(phi)); };
    const auto res = boost::math::tools::brent_find_minima(neg, phi0 - width, phi0 + width, 40);
    best = std::max(best, -res.second);
  }
  return std::max(0.0, best);
}

// --- factories ---------------------------------------------------------------

NormPtr make_pnorm(int dim, double p) { return std::make_shared<PNorm>(dim, p); }

NormPtr make_example52() { return std::make_shared<Example52Norm>(); }

NormPtr make_polygon(const std::vector<Eigen::Vector2d> & vertices)
{
  return std::make_shared<PolygonNorm>(vertices);
}

NormPtr make_custom(int dim, std::function<double(const Eigen::VectorXd &)> eval, std::uint64_t seed)
{
  return std::make_shared<CustomNorm>(dim, std::move(eval), seed);
}

NormPtr norm_from_json(const nlohmann::json & j, int dim)
{
  if (!j.is_object()) { throw std::invalid_argument("norm descriptor: expected a JSON object"); }
  if (!j.contains("family") || !j["family"].is_string()) {
    throw std::invalid_argument("norm descriptor: missing string field 'family'");
  }
  const auto family = j["family"].get<std::string>();
  auto allow = [&](std::initializer_list<const char *> keys) {
    for (const auto & [key, _] : j.items()) {
      if (key == "family") { continue; }
      if (std::none_of(keys.begin(), keys.end(), [&](const char * k) { return key == k; })) {
        throw std::invalid_argument("norm descriptor: unknown field '" + key + "'");
      }
    }
  };
  if (family == "pnorm") {
    allow({"p"});
    if (!j.contains("p")) { throw std::invalid_argument("norm descriptor: pnorm requires field 'p'"); }
    return make_pnorm(dim, parse_p(j["p"]));
  }
  if (family == "example52") {
    allow({});
    if (dim != 2) { throw std::invalid_argument("norm descriptor: example52 is two-dimensional"); }
    return make_example52();
  }
  if (family == "polygon") {
    allow({"vertices"});
    if (dim != 2) { throw std::invalid_argument("norm descriptor: polygon is two-dimensional"); }
    if (!j.contains("vertices") || !j["vertices"].is_array()) {
      throw std::invalid_argument("norm descriptor: polygon requires array field 'vertices'");
    }
    std::vector<Eigen::Vector2d> verts;
    for (const auto & v : j["vertices"]) {
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        throw std::invalid_argument("norm descriptor: field 'vertices' must hold [x, y] pairs");
      }
      verts.emplace_back(v[0].get<double>(), v[1].get<double>());
    }
    return make_polygon(verts);
  }
  throw std::invalid_argument("norm descriptor: unknown family '" + family + "'");
}

// --- generic duality -----------------------------------------------------------

Eigen::VectorXd to_unit_sphere(const NormOracle & norm, const Eigen::VectorXd & u)
{
  const double v = norm.eval(u);
  if (!(v > 0.0)) { throw std::invalid_argument("to_unit_sphere: zero vector"); }
  return u / v;
}

DualSup dual_sup_generic(const NormOracle & norm, const Eigen::VectorXd & p)
{
  const int dim = norm.dim();
  if (p.size() != dim) { throw std::invalid_argument("dual_eval_generic: dimension mismatch"); }
  if (p.isZero(0.0)) { return {0.0, to_unit_sphere(norm, Eigen::VectorXd::Unit(dim, 0))}; }

  auto value_at = [&](const Eigen::VectorXd & u) { return p.dot(u) / norm.eval(u); };

  if (dim == 2) {
    constexpr int samples = 720;
    int best_j = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < samples; ++j) {
      const double v = value_at(unit2(2.0 * kPi * j / samples));
      if (v > best) {
        best = v;
        best_j = j;
      }
    }
    const double h = 2.0 * kPi / samples;
    const double phi0 = 2.0 * kPi * best_j / samples;
    auto neg = [&](double phi) { return -value_at(unit2(phi)); };
    const auto res = boost::math::tools::brent_find_minima(neg, phi0 - h, phi0 + h, 60);
    double phi = phi0;
    if (-res.second > best) {
      best = -res.second;
      phi = res.first;
    }
    return {best, to_unit_sphere(norm, unit2(phi))};
  }

  std::vector<Eigen::VectorXd> cands = probe_directions(dim, default_probe_count(dim));
  cands.push_back(p.normalized());
  for (int i = 0; i < dim; ++i) {
    cands.push_back(Eigen::VectorXd::Unit(dim, i));
    cands.push_back(-Eigen::VectorXd::Unit(dim, i));
  }
  Eigen::VectorXd u = cands.front();
  double best = value_at(u);
  for (const auto & c : cands) {
    const double v = value_at(c);
    if (v > best) {
      best = v;
      u = c;
    }
  }
  // Compass search on the Euclidean sphere.
  for (double step = 0.1; step > 1e-11; step *= 0.5) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (int i = 0; i < dim; ++i) {
        for (double sign : {1.0, -1.0}) {
          Eigen::VectorXd trial = u;
          trial[i] += sign * step;
          trial.normalize();
          const double v = value_at(trial);
          if (v > best) {
            best = v;
            u = trial;
            improved = true;
          }
        }
      }
    }
  }
  return {best, to_unit_sphere(norm, u)};
}

double dual_eval_generic(const NormOracle & norm, const Eigen::VectorXd & p)
{
  return dual_sup_generic(norm, p).value;
}

// --- squared norm -----------------------------------------------------------------

SquaredNormFunctional::SquaredNormFunctional(NormPtr base) : base_(std::move(base))
{
  if (!base_) { throw std::invalid_argument("SquaredNormFunctional: null norm"); }
}

double SquaredNormFunctional::conjugate(const Eigen::VectorXd & p) const
{
  return legendre_of_squared(*base_, p);
}

ConvexSetApprox SquaredNormFunctional::subdiff(const Eigen::VectorXd & z) const
{
  return subdiff_of_squared(*base_, z);
}

double legendre_of_squared(const NormOracle & norm, const Eigen::VectorXd & p)
{
  const double d = norm.dual_eval(p);
  return 0.5 * d * d;
}

ConvexSetApprox subdiff_of_squared(const NormOracle & norm, const Eigen::VectorXd & z)
{
  if (z.isZero(0.0)) { return ConvexSetApprox::singleton(Eigen::VectorXd::Zero(norm.dim())); }
  return norm.subdiff(z).scaled(norm.eval(z));
}

double fenchel_residual(const NormOracle & norm, const Eigen::VectorXd & z, const Eigen::VectorXd & p)
{
  return std::abs(norm.squared(z) + legendre_of_squared(norm, p) - z.dot(p));
}

ConvexityProbe strict_convexity_probe(const NormOracle & norm, int trials, std::uint64_t seed)
{
  if (trials < 1) { throw std::invalid_argument("strict_convexity_probe: trials must be >= 1"); }
  const int dim = norm.dim();
  Rng rng(seed);
  auto random_dir = [&] {
    if (dim == 2) { return unit2(uniform(rng, 0.0, 2.0 * kPi)); }
    Eigen::VectorXd u(dim);
    for (int i = 0; i < dim; ++i) {
      const double r = std::sqrt(-2.0 * std::log(1.0 - uniform01(rng)));
      u[i] = r * std::cos(2.0 * kPi * uniform01(rng));
    }
    return Eigen::VectorXd(u.normalized());
  };

  ConvexityProbe out;
  out.worst_margin = -std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < trials; ++trial) {
    const Eigen::VectorXd z1 = to_unit_sphere(norm, random_dir());
    const Eigen::VectorXd z2 = to_unit_sphere(norm, random_dir());
    const double delta = (z1 - z2).norm();
    // Nearly coincident pairs cannot separate flats from flat-ish curvature at this eps.
    if (delta < 0.2 * std::max(z1.norm(), z2.norm())) { continue; }
    const double eps = 1e-10 + 1e-4 * delta * delta;
    const double margin = norm.eval(0.5 * (z1 + z2)) - (1.0 - eps);
    if (margin > out.worst_margin) {
      out.worst_margin = margin;
      out.z1 = z1;
      out.z2 = z2;
    }
  }
  out.strictly_convex = !(out.worst_margin > 0.0);
  return out;
}

}  // namespace subfinsler
