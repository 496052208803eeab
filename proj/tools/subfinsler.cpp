#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "subfinsler/example52.hpp"
#include "subfinsler/geodesic_bvp.hpp"
#include "subfinsler/glp_lab.hpp"
#include "subfinsler/heisenberg.hpp"
#include "subfinsler/isoperimetrix.hpp"
#include "subfinsler/norms.hpp"
#include "subfinsler/pontryagin.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace subfinsler;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;

struct ValidationError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error
{
  using std::runtime_error::runtime_error;
};

// All files of a run are buffered and written at the end by a single writer.
struct Outputs
{
  std::vector<std::pair<fs::path, std::string>> files;
  void add(fs::path p, std::string content) { files.emplace_back(std::move(p), std::move(content)); }
};

std::string read_file(const std::string & path, const std::string & field)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) { throw IoError(field + ": cannot read '" + path + "'"); }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json_arg(const std::string & text, const std::string & field)
{
  const bool inline_json = !text.empty() && (text.front() == '{' || text.front() == '[');
  const std::string body = inline_json ? text : read_file(text, field);
  try {
    return json::parse(body);
  } catch (const json::parse_error & e) {
    throw ValidationError(field + ": invalid JSON (" + e.what() + ")");
  }
}

NormPtr parse_norm(const std::string & text, int dim)
{
  const json j = parse_json_arg(text, "--norm");
  try {
    return norm_from_json(j, dim);
  } catch (const std::exception & e) {
    throw ValidationError(std::string("--norm: ") + e.what());
  }
}

std::vector<double> parse_list(const std::string & text, const std::string & field)
{
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find(',', pos), text.size());
    const std::string item = text.substr(pos, end - pos);
    double v = 0.0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size() || !std::isfinite(v)) {
      throw ValidationError(field + ": '" + item + "' is not a finite number");
    }
    out.push_back(v);
    pos = end + 1;
  }
  return out;
}

Eigen::VectorXd to_vector(const std::vector<double> & v)
{
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

GroupPoint parse_point(const std::string & text, const std::string & field)
{
  const auto v = parse_list(text, field);
  if (v.size() < 3 || v.size() % 2 == 0) { throw ValidationError(field + ": expected 2n+1 comma-separated numbers"); }
  return {to_vector(std::vector<double>(v.begin(), v.end() - 1)), v.back()};
}

fs::path with_suffix(const fs::path & out, const std::string & suffix)
{
  fs::path p = out;
  p.replace_extension();
  return fs::path(p.string() + suffix);
}

std::string dump(const json & j) { return j.dump(1) + "\n"; }

std::string curve_plot_script(const fs::path & csv, int n)
{
  std::ostringstream gp;
  gp << "set datafile separator ','\n"
     << "set key autotitle columnhead\n"
     << "set xlabel 'x1'\nset ylabel 'y1'\nset zlabel 't'\n"
     << "splot '" << csv.filename().string() << "' using 2:" << (2 + n) << ":" << (2 + 2 * n) << " with lines\n"
     << "pause -1\n";
  return gp.str();
}

json shoot_result_json(const ShootResult & r)
{
  return {{"multiplier", multiplier_to_json(r.multiplier)},
          {"T", r.T},
          {"residual", r.residual},
          {"residual_homogeneous", r.residual_homogeneous},
          {"cost", r.cost},
          {"iterations", r.iterations},
          {"steps", r.steps},
          {"start", r.start},
          {"method", r.method}};
}

void emit_trace(Outputs & out, const fs::path & path, const ExtremalTrace & trace, const NormOracle & norm, json extra)
{
  if (path.extension() == ".csv") {
    out.add(path, to_csv(trace.curve));
    out.add(with_suffix(path, ".gp"), curve_plot_script(path, trace.curve.n()));
    return;
  }
  json j = trace_to_json(trace, norm);
  for (auto & [key, value] : extra.items()) { j[key] = value; }
  out.add(path, dump(j));
  const fs::path csv = with_suffix(path, ".csv");
  out.add(csv, to_csv(trace.curve));
  out.add(with_suffix(path, ".gp"), curve_plot_script(csv, trace.curve.n()));
}

std::vector<int> parse_ks(const std::string & text)
{
  std::vector<int> ks;
  for (double v : parse_list(text, "--ks")) {
    if (v < 1.0 || v != std::floor(v) || v > 1e6) { throw ValidationError("--ks: entries must be positive integers"); }
    ks.push_back(static_cast<int>(v));
  }
  return ks;
}

// Library preconditions surface as std::invalid_argument; tag them with the flag they concern.
template<typename Fn>
auto validated(const std::string & field, Fn && fn)
{
  try {
    return fn();
  } catch (const std::invalid_argument & e) {
    throw ValidationError(field + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Sub-Finsler geodesics on Heisenberg groups"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  std::uint64_t seed = 1;
  std::string norm_text, target_text, lambda_text, trace_path, ks_text = "1,2,4,8,16,32", hom_text, g_text, h_text;
  double tol = 1e-8, fixed_T = 0.0, k = 0.0, T = 1.0, R = 1.0, horizon = 50.0;
  std::size_t steps = 0;
  std::string geodesic_out, integrate_out, iso_out, glp_out, blow_out, verify_out, dist_out;
  int resolution = 1024, trials = 20, seeds = 16, n = 1;
  bool unit_speed = false;

  auto * geodesic = app.add_subcommand("geodesic", "Solve the endpoint problem by multi-start shooting");
  geodesic->add_option("--norm", norm_text, "Norm descriptor JSON (inline or file path)")->required();
  geodesic->add_option("--target", target_text, "Target point x1..xn,y1..yn,t")->required();
  auto * fixed_opt = geodesic->add_option("--fixed-T", fixed_T, "Solve with final time T (speed free)");
  geodesic->add_flag("--unit-speed", unit_speed, "Solve with unit speed (T free, default)")->excludes(fixed_opt);
  geodesic->add_option("--tol", tol, "Endpoint tolerance")->capture_default_str();
  geodesic->add_option("--seeds", seeds, "Random starts")->capture_default_str();
  geodesic->add_option("--out", geodesic_out, "Output trace (.json, or .csv for the curve only)")->default_val("trace.json");

  auto * integrate = app.add_subcommand("integrate", "Integrate the extremal flow for a given multiplier");
  integrate->add_option("--norm", norm_text, "Norm descriptor JSON (inline or file path)")->required();
  integrate->add_option("--k", k, "Vertical costate k")->required();
  integrate->add_option("--lambda0", lambda_text, "Initial covector lambda(0), comma-separated")->required();
  integrate->add_option("--T", T, "Final time")->capture_default_str();
  integrate->add_option("--R", R, "Speed R = N_*(lambda(0))")->capture_default_str();
  integrate->add_option("--steps", steps, "Total RK4 steps (default 2048 per unit time)");
  integrate->add_option("--out", integrate_out, "Output trace (.json, or .csv for the curve only)")->default_val("trace.csv");

  auto * iso = app.add_subcommand("isoperimetrix", "Emit the isoperimetrix of a planar norm");
  iso->add_option("--norm", norm_text, "Norm descriptor JSON (inline or file path)")->required();
  iso->add_option("--resolution", resolution, "Support directions")->capture_default_str();
  iso->add_option("--out", iso_out, "Output (.csv with columns x,y, or .json)")->default_val("iso.csv");

  auto * glp = app.add_subcommand("glp", "Random extremals against boundedness certificates");
  glp->add_option("--norm", norm_text, "Norm descriptor JSON (inline or file path)")->required();
  glp->add_option("--n", n, "Heisenberg dimension n for p-norms")->capture_default_str();
  glp->add_option("--trials", trials, "Number of random multipliers")->capture_default_str();
  glp->add_option("--horizon", horizon, "Integration horizon")->capture_default_str();
  glp->add_option("--out", glp_out, "Output report JSON")->default_val("report.json");

  auto * blow = app.add_subcommand("blowdown", "Blow-down sequence of a stored trace");
  blow->add_option("--trace", trace_path, "Trace JSON written by geodesic or integrate")->required();
  blow->add_option("--ks", ks_text, "Blow-down indices")->capture_default_str();
  blow->add_option("--out", blow_out, "Output report JSON")->default_val("blowdown.json");

  auto * verify = app.add_subcommand("verify-example52", "Golden checks of the Example 5.2 extremal");
  verify->add_option("--out", verify_out, "Output report JSON")->default_val("report.json");

  auto * dist = app.add_subcommand("dist", "Left-invariant homogeneous distance");
  dist->set_help_flag("--help", "Print this help message and exit");
  dist->add_option("--norm-hom", hom_text, "Homogeneous gauge JSON {\"p\":..,\"a\":..}")->required();
  dist->add_option("--g", g_text, "First point x1..xn,y1..yn,t")->required();
  dist->add_option("--h", h_text, "Second point x1..xn,y1..yn,t")->required();
  dist->add_option("--out", dist_out, "Optional output JSON");

  for (auto * sub : {geodesic, integrate, glp}) { sub->add_option("--seed", seed, "64-bit seed for std::mt19937_64")->capture_default_str(); }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp & e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp & e) {
    return app.exit(e);
  } catch (const CLI::ParseError & e) {
    app.exit(e);
    return kExitValidation;
  }

  const std::string out_path = geodesic->parsed() ? geodesic_out : integrate->parsed() ? integrate_out : iso->parsed() ? iso_out
                               : glp->parsed() ? glp_out : blow->parsed() ? blow_out : verify->parsed() ? verify_out : dist_out;
  Outputs out;
  try {
    if (geodesic->parsed()) {
      const GroupPoint target = parse_point(target_text, "--target");
      const NormPtr norm = parse_norm(norm_text, 2 * target.n());
      if (norm->dim() != 2 * target.n()) { throw ValidationError("--target: dimension does not match --norm"); }
      if (!(tol > 0.0)) { throw ValidationError("--tol: must be positive"); }
      if (seeds < 0) { throw ValidationError("--seeds: must be >= 0"); }
      ShootingProblem problem;
      problem.norm = norm;
      problem.target = target;
      problem.seeds = seeds;
      problem.seed = seed;
      if (fixed_opt->count() > 0) {
        if (!(fixed_T > 0.0)) { throw ValidationError("--fixed-T: must be positive"); }
        problem.mode = ShootMode::FixedT;
        problem.T = fixed_T;
      }
      const ShootOutcome outcome = validated("--norm", [&] { return shoot(problem, tol); });
      json solutions = json::array();
      for (const auto & s : outcome.solutions) { solutions.push_back(shoot_result_json(s)); }
      emit_trace(out, out_path, outcome.trace, *norm, {{"target", parse_list(target_text, "--target")}, {"solutions", solutions}});
    } else if (integrate->parsed()) {
      const Eigen::VectorXd lambda = to_vector(parse_list(lambda_text, "--lambda0"));
      if (lambda.size() < 2 || lambda.size() % 2 != 0) { throw ValidationError("--lambda0: expected 2n numbers"); }
      const NormPtr norm = parse_norm(norm_text, static_cast<int>(lambda.size()));
      if (norm->dim() != lambda.size()) { throw ValidationError("--lambda0: dimension does not match --norm"); }
      if (!(T > 0.0) || !std::isfinite(T)) { throw ValidationError("--T: must be positive"); }
      if (!(R > 0.0)) { throw ValidationError("--R: must be positive"); }
      Multiplier m;
      m.lambda_init = lambda;
      m.k = k;
      m.R = R;
      if (std::abs(norm->dual_eval(lambda) - R) > 1e-8) {
        throw ValidationError("--lambda0: N_*(lambda0) must equal --R (got " + std::to_string(norm->dual_eval(lambda)) + ")");
      }
      const std::size_t n_steps = steps > 0 ? steps : default_steps(T);
      const ExtremalTrace trace = validated("--norm", [&] { return integrate_extremal(*norm, m, T, n_steps); });
      emit_trace(out, out_path, trace, *norm, json::object());
    } else if (iso->parsed()) {
      const NormPtr norm = parse_norm(norm_text, 2);
      if (norm->dim() != 2) { throw ValidationError("--norm: isoperimetrix needs a planar norm"); }
      if (resolution < 8) { throw ValidationError("--resolution: must be >= 8"); }
      const IsoperimetrixCurve curve = isoperimetrix_curve(*norm, resolution);
      const fs::path path(out_path);
      std::ostringstream csv;
      csv.precision(17);
      csv << "x,y\n";
      for (const auto & p : curve.body.boundary()) { csv << p.x() << ',' << p.y() << '\n'; }
      const fs::path csv_path = path.extension() == ".json" ? with_suffix(path, ".csv") : path;
      out.add(csv_path, csv.str());
      if (path.extension() == ".json") {
        json xs = json::array(), ys = json::array();
        for (const auto & p : curve.body.boundary()) {
          xs.push_back(p.x());
          ys.push_back(p.y());
        }
        out.add(path, dump({{"norm", norm->descriptor()},
                            {"resolution", resolution},
                            {"x", xs},
                            {"y", ys},
                            {"area", curve.body.area()},
                            {"max_turn", curve.max_turn},
                            {"c1", curve.c1}}));
      }
      out.add(with_suffix(path, ".gp"), "set datafile separator ','\nset key autotitle columnhead\nset size ratio -1\nplot '" +
                                          csv_path.filename().string() + "' using 1:2 with lines\npause -1\n");
    } else if (glp->parsed()) {
      if (n < 1) { throw ValidationError("--n: must be >= 1"); }
      const NormPtr norm = parse_norm(norm_text, 2 * n);
      if (trials < 1) { throw ValidationError("--trials: must be >= 1"); }
      if (!(horizon > 0.0) || !std::isfinite(horizon)) { throw ValidationError("--horizon: must be positive"); }
      const GlpReport report = validated("--norm", [&] { return glp_empirical(*norm, trials, horizon, seed); });
      json j = to_json(report);
      j["norm"] = norm->descriptor();
      j["horizon"] = horizon;
      j["seed"] = seed;
      out.add(out_path, dump(j));
      std::ostringstream csv;
      csv.precision(17);
      csv << "trial,k,bound_C,observed_sup\n";
      for (std::size_t i = 0; i < report.trials.size(); ++i) {
        const auto & t = report.trials[i];
        csv << i << ',' << t.multiplier.k << ',' << (t.bound_C ? *t.bound_C : NAN) << ',' << t.observed_sup << '\n';
      }
      const fs::path csv_path = with_suffix(out_path, ".csv");
      out.add(csv_path, csv.str());
      out.add(with_suffix(out_path, ".gp"), "set datafile separator ','\nset key autotitle columnhead\nset xlabel 'trial'\nplot '" +
                                              csv_path.filename().string() + "' using 1:3 with points, '' using 1:4 with points\npause -1\n");
    } else if (blow->parsed()) {
      const std::vector<int> ks = parse_ks(ks_text);
      const json tj = parse_json_arg(trace_path, "--trace");
      if (!tj.is_object() || !tj.contains("norm")) { throw ValidationError("--trace: missing field 'norm'"); }
      const ExtremalTrace trace = validated("--trace", [&] { return trace_from_json(tj); });
      const NormPtr norm = validated("--trace", [&] { return norm_from_json(tj.at("norm"), static_cast<int>(trace.multiplier.lambda_init.size())); });
      const BlowDownReport report = validated("--trace", [&] { return blow_down(*norm, trace, ks); });
      json j = to_json(report);
      j["certificate"] = nullptr;
      if (norm->flags().strictly_convex) {
        try {
          j["certificate"] = to_json(boundedness_certificate(*norm, trace));
        } catch (const std::invalid_argument &) {
          // Lines carry no certificate.
        }
      }
      out.add(out_path, dump(j));
      std::ostringstream csv;
      csv.precision(17);
      csv << "k,projection_sup,geodesic_residual\n";
      for (std::size_t i = 0; i < ks.size(); ++i) {
        csv << report.k_values[i] << ',' << report.projection_sups[i] << ',' << report.geodesic_residuals[i] << '\n';
      }
      const fs::path csv_path = with_suffix(out_path, ".csv");
      out.add(csv_path, csv.str());
      out.add(with_suffix(out_path, ".gp"), "set datafile separator ','\nset key autotitle columnhead\nset logscale xy\nplot '" +
                                              csv_path.filename().string() + "' using 1:2 with linespoints\npause -1\n");
    } else if (verify->parsed()) {
      const Example52Report report = verify_example52();
      out.add(out_path, dump(to_json(report)));
      if (!report.all_pass()) { std::cerr << "verify-example52: some checks failed\n"; }
    } else if (dist->parsed()) {
      const json hj = parse_json_arg(hom_text, "--norm-hom");
      if (!hj.is_object()) { throw ValidationError("--norm-hom: expected an object"); }
      for (const auto & [key, value] : hj.items()) {
        if (key != "p" && key != "a") { throw ValidationError("--norm-hom: unknown field '" + key + "'"); }
        if (!value.is_number() && !(key == "p" && value == "inf")) { throw ValidationError("--norm-hom: field '" + key + "' must be a number"); }
      }
      if (!hj.contains("p") || !hj.contains("a")) { throw ValidationError("--norm-hom: fields 'p' and 'a' are required"); }
      const GroupPoint g = parse_point(g_text, "--g");
      const GroupPoint h = parse_point(h_text, "--h");
      if (g.n() != h.n()) { throw ValidationError("--h: dimension does not match --g"); }
      const double p = hj["p"].is_string() ? INFINITY : hj["p"].get<double>();
      const HomogeneousNormDescriptor desc = validated("--norm-hom", [&] { return HomogeneousNormDescriptor(p, hj["a"].get<double>(), g.n()); });
      const double d = left_invariant_distance(desc, g, h);
      std::cout.precision(17);
      std::cout << d << '\n';
      if (!out_path.empty()) { out.add(out_path, dump({{"p", hj["p"]}, {"a", hj["a"]}, {"g", parse_list(g_text, "--g")}, {"h", parse_list(h_text, "--h")}, {"distance", d}})); }
    }

    for (const auto & [path, content] : out.files) {
      if (path.has_parent_path() && !fs::is_directory(path.parent_path())) {
        throw IoError("cannot write '" + path.string() + "': directory does not exist");
      }
      std::ofstream f(path, std::ios::binary);
      if (!(f << content) || !f.flush()) { throw IoError("cannot write '" + path.string() + "'"); }
    }
  } catch (const ValidationError & e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const IoError & e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const NoConvergenceError & e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
