#include <stdexcept>

#include "subfinsler/pontryagin.hpp"

namespace subfinsler {

namespace {

nlohmann::json vec_to_json(const Eigen::VectorXd & v)
{
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) { arr.push_back(v[i]); }
  return arr;
}

Eigen::VectorXd vec_from_json(const nlohmann::json & j, const char * field)
{
  if (!j.is_array()) { throw std::invalid_argument(std::string("field '") + field + "' must be an array"); }
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) { throw std::invalid_argument(std::string("field '") + field + "' must hold numbers"); }
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

const nlohmann::json & require(const nlohmann::json & j, const char * field)
{
  if (!j.is_object() || !j.contains(field)) { throw std::invalid_argument(std::string("missing field '") + field + "'"); }
  return j.at(field);
}

}  // namespace

nlohmann::json multiplier_to_json(const Multiplier & m)
{
  return {{"lambda0", m.lambda0}, {"lambda_init", vec_to_json(m.lambda_init)}, {"k", m.k}, {"R", m.R}};
}

Multiplier multiplier_from_json(const nlohmann::json & j)
{
  Multiplier m;
  m.lambda0 = require(j, "lambda0").get<int>();
  m.lambda_init = vec_from_json(require(j, "lambda_init"), "lambda_init");
  m.k = require(j, "k").get<double>();
  m.R = require(j, "R").get<double>();
  return m;
}

nlohmann::json curve_to_json(const SampledCurve & c)
{
  const int n = c.n();
  nlohmann::json j;
  j["s"] = c.s_grid();
  for (int coord = 0; coord < 2 * n; ++coord) {
    std::vector<double> col;
    col.reserve(c.size());
    for (const auto & p : c.points()) { col.push_back(p.z()[coord]); }
    const std::string name = (coord < n ? "x" : "y") + std::to_string(coord % n + 1);
    j[name] = col;
  }
  std::vector<double> t;
  t.reserve(c.size());
  for (const auto & p : c.points()) { t.push_back(p.t()); }
  j["t"] = t;
  return j;
}

SampledCurve curve_from_json(const nlohmann::json & j)
{
  const auto s = require(j, "s").get<std::vector<double>>();
  const auto t = require(j, "t").get<std::vector<double>>();
  int n = 0;
  while (j.contains("x" + std::to_string(n + 1))) { ++n; }
  if (n == 0) { throw std::invalid_argument("curve: missing field 'x1'"); }
  std::vector<std::vector<double>> cols;
  for (int coord = 0; coord < 2 * n; ++coord) {
    const std::string name = (coord < n ? "x" : "y") + std::to_string(coord % n + 1);
    cols.push_back(require(j, name.c_str()).get<std::vector<double>>());
    if (cols.back().size() != s.size()) { throw std::invalid_argument("curve: column '" + name + "' has wrong length"); }
  }
  if (t.size() != s.size()) { throw std::invalid_argument("curve: column 't' has wrong length"); }
  std::vector<GroupPoint> pts;
  for (std::size_t i = 0; i < s.size(); ++i) {
    Eigen::VectorXd z(2 * n);
    for (int coord = 0; coord < 2 * n; ++coord) { z[coord] = cols[static_cast<std::size_t>(coord)][i]; }
    pts.emplace_back(z, t[i]);
  }
  return SampledCurve(s, std::move(pts));
}

nlohmann::json trace_to_json(const ExtremalTrace & trace, const NormOracle & norm)
{
  nlohmann::json a = nlohmann::json::array(), v = nlohmann::json::array();
  for (const auto & x : trace.a) { a.push_back(vec_to_json(x)); }
  for (const auto & x : trace.v) { v.push_back(vec_to_json(x)); }
  const auto & d = trace.diagnostics;
  return {{"norm", norm.descriptor()},
          {"multiplier", multiplier_to_json(trace.multiplier)},
          {"T", trace.T},
          {"steps", trace.steps},
          {"curve", curve_to_json(trace.curve)},
          {"a", a},
          {"v", v},
          {"diagnostics",
           {{"speed_dev", d.speed_dev},
            {"dual_dev", d.dual_dev},
            {"hamiltonian_dev", d.hamiltonian_dev},
            {"pairing_dev", d.pairing_dev},
            {"hamiltonian_const", d.hamiltonian_const}}}};
}

ExtremalTrace trace_from_json(const nlohmann::json & j)
{
  SampledCurve curve = curve_from_json(require(j, "curve"));
  std::vector<Eigen::VectorXd> a, v;
  for (const auto & x : require(j, "a")) { a.push_back(vec_from_json(x, "a")); }
  for (const auto & x : require(j, "v")) { v.push_back(vec_from_json(x, "v")); }
  if (a.size() != curve.size() || v.size() != curve.size()) {
    throw std::invalid_argument("trace: 'a' and 'v' must match the curve length");
  }
  ExtremalTrace trace{std::move(curve), std::move(a), std::move(v), multiplier_from_json(require(j, "multiplier")),
                      require(j, "T").get<double>(), require(j, "steps").get<std::size_t>(), {}};
  if (j.contains("diagnostics")) {
    const auto & d = j["diagnostics"];
    trace.diagnostics.speed_dev = d.value("speed_dev", 0.0);
    trace.diagnostics.dual_dev = d.value("dual_dev", 0.0);
    trace.diagnostics.hamiltonian_dev = d.value("hamiltonian_dev", 0.0);
    trace.diagnostics.pairing_dev = d.value("pairing_dev", 0.0);
    trace.diagnostics.hamiltonian_const = d.value("hamiltonian_const", 0.0);
  }
  return trace;
}

}  // namespace subfinsler
