#pragma once

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>

#include "equilib/io.hpp"

namespace equilib::cli {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<std::string> out_dir;
};

namespace detail {

[[noreturn]] inline void fail(const std::string& path, const std::string& why) {
  throw ConfigError(path + ": " + why);
}

inline const json& require(const json& j, const std::string& ctx,
                           const std::string& key) {
  if (!j.contains(key)) fail(ctx.empty() ? key : ctx + "." + key, "missing");
  return j.at(key);
}

inline double num_or(const json& j, const std::string& key, double dflt) {
  return j.contains(key) ? j.at(key).get<double>() : dflt;
}

inline VectorXd parse_vector(const json& a, const std::string& ctx) {
  if (!a.is_array()) fail(ctx, "expected an array of numbers");
  VectorXd v(static_cast<int>(a.size()));
  for (int i = 0; i < v.size(); ++i) {
    const auto& e = a[i];
    if (e.is_string()) {
      if (e.get<std::string>() != "inf")
        fail(ctx, "only the string \"inf\" is accepted for non-finite entries");
      v[i] = kInf;
    } else {
      v[i] = e.get<double>();
    }
  }
  return v;
}

inline ShapeSpec parse_shape(const json& j) {
  ShapeSpec sp;
  const std::string kind = require(j, "geometry.shape", "kind").get<std::string>();
  if (kind == "sphere")
    sp.kind = ShapeKind::Sphere;
  else if (kind == "ball")
    sp.kind = ShapeKind::Ball;
  else if (kind == "circle")
    sp.kind = ShapeKind::Circle;
  else if (kind == "rotation-body")
    sp.kind = ShapeKind::RotationBody;
  else
    fail("geometry.shape.kind", "unknown shape '" + kind + "'");
  sp.radius = num_or(j, "radius", 1.0);
  sp.dim = static_cast<int>(num_or(j, "dim", 3));
  sp.s = num_or(j, "s", 1.0);
  sp.x_min = num_or(j, "x_min", 1.0);
  sp.x_max = num_or(j, "x_max", 8.0);
  if (j.contains("profile")) {
    const std::string p = j.at("profile").get<std::string>();
    if (p == "power")
      sp.profile = RotationProfile::Power;
    else if (p == "exp")
      sp.profile = RotationProfile::Exp;
    else
      fail("geometry.shape.profile", "unknown profile '" + p + "'");
  }
  return sp;
}

inline KernelSpec parse_kernel(const json& j) {
  KernelSpec sp;
  const std::string kind = require(j, "kernel", "kind").get<std::string>();
  if (kind == "riesz") {
    sp = KernelSpec::riesz(num_or(j, "alpha", 2.0),
                           static_cast<int>(num_or(j, "dim", 3)),
                           num_or(j, "c_reg", 1.0));
  } else if (kind == "logarithmic") {
    sp = KernelSpec::logarithmic(num_or(j, "c_reg", 1.0),
                                 num_or(j, "margin", 0.05));
  } else if (kind == "explicit-matrix") {
    sp = KernelSpec::explicit_matrix();
  } else {
    fail("kernel.kind", "unknown kernel '" + kind + "'");
  }
  sp.validate();
  return sp;
}

// FNV-1a over the raw config bytes; embedded in every report so screened
// assertions stay auditable.
inline std::string config_hash(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace detail

/// A fully parsed and validated experiment instance.
struct Instance {
  std::string experiment;
  json raw;
  std::string hash;
  std::uint64_t seed = 0;
  qp::Options solver;
  std::optional<PointSet> points;   // absent for explicit-matrix kernels
  std::optional<KernelMatrix> K;
  IndexSet A;
  ExternalField field;
  json params;
  std::filesystem::path out_dir = ".";
  std::string json_name = "report.json";
  std::string csv_name = "series.csv";
  KernelSpec kernel_spec;
  ShapeSpec shape_spec;          // valid when geometry is a shape
  bool has_shape = false;
  int n_geometry_points = 0;     // carrier size excluding extra points
};

inline Instance parse_config(const json& cfg, const std::string& raw_bytes,
                             const Overrides& ov = {}) {
  using detail::fail;
  using detail::require;
  Instance inst;
  inst.raw = cfg;
  inst.hash = detail::config_hash(raw_bytes);
  inst.experiment = require(cfg, "", "experiment").get<std::string>();
  const std::vector<std::string> known = {"capacity",   "gauss",
                                          "balayage",   "exhaustion",
                                          "thinness",   "mass-deficiency"};
  if (std::find(known.begin(), known.end(), inst.experiment) == known.end())
    fail("experiment", "unknown experiment '" + inst.experiment + "'");

  inst.seed = ov.seed.value_or(
      cfg.contains("seed") ? cfg.at("seed").get<std::uint64_t>() : 0);
  if (cfg.contains("solver")) {
    inst.solver.tol = detail::num_or(cfg.at("solver"), "tol", 1e-9);
    inst.solver.max_iter =
        static_cast<int>(detail::num_or(cfg.at("solver"), "max_iter", 100000));
  }
  if (ov.tol) inst.solver.tol = *ov.tol;

  inst.kernel_spec = detail::parse_kernel(require(cfg, "", "kernel"));

  if (inst.kernel_spec.kind == KernelKind::ExplicitMatrix) {
    const std::string path =
        require(cfg.at("kernel"), "kernel", "path").get<std::string>();
    inst.K = make_explicit_kernel(io::load_matrix_file(path));
    inst.n_geometry_points = inst.K->size();
  } else {
    const json& geo = require(cfg, "", "geometry");
    MatrixXd coords;
    if (geo.contains("shape")) {
      inst.shape_spec = detail::parse_shape(geo.at("shape"));
      inst.has_shape = true;
      const int n =
          static_cast<int>(detail::num_or(geo.at("shape"), "n_points", 0));
      if (n < 2) fail("geometry.shape.n_points", "must be >= 2");
      coords = sample_shape(inst.shape_spec, n, inst.seed).coords();
    } else if (geo.contains("points")) {
      const auto& rows = geo.at("points");
      if (!rows.is_array() || rows.empty())
        fail("geometry.points", "expected a nonempty array of coordinate rows");
      coords.resize(static_cast<int>(rows.size()),
                    static_cast<int>(rows[0].size()));
      for (int i = 0; i < coords.rows(); ++i)
        for (int d = 0; d < coords.cols(); ++d)
          coords(i, d) = rows[i][d].get<double>();
    } else {
      fail("geometry", "need either 'shape' or 'points'");
    }
    inst.n_geometry_points = static_cast<int>(coords.rows());
    if (cfg.contains("extra_points")) {
      const auto& rows = cfg.at("extra_points");
      MatrixXd extra(static_cast<int>(rows.size()), coords.cols());
      for (int i = 0; i < extra.rows(); ++i)
        for (int d = 0; d < extra.cols(); ++d)
          extra(i, d) = rows[i][d].get<double>();
      MatrixXd all(coords.rows() + extra.rows(), coords.cols());
      all << coords, extra;
      coords = all;
    }
    inst.points = PointSet(coords);
    inst.K = assemble_matrix(*inst.points, inst.kernel_spec);
  }

  const int n_total = inst.K->size();
  if (!cfg.contains("set") || cfg.at("set") == "all") {
    inst.A = full_index_set(inst.n_geometry_points);
  } else {
    std::vector<int> idx;
    for (const auto& e : cfg.at("set")) idx.push_back(e.get<int>());
    inst.A = make_index_set(std::move(idx), n_total);
  }

  inst.field = ExternalField::zero(n_total);
  if (cfg.contains("field")) {
    const json& fj = cfg.at("field");
    const std::string form = require(fj, "field", "form").get<std::string>();
    if (form == "none") {
      // keep the zero field
    } else if (form == "psi-plus-potential") {
      VectorXd psi = fj.contains("psi")
                         ? detail::parse_vector(fj.at("psi"), "field.psi")
                         : VectorXd::Zero(n_total).eval();
      VectorXd theta = fj.contains("theta")
                           ? detail::parse_vector(fj.at("theta"), "field.theta")
                           : VectorXd::Zero(n_total).eval();
      if (psi.size() != n_total) fail("field.psi", "length mismatch");
      if (theta.size() != n_total) fail("field.theta", "length mismatch");
      inst.field = ExternalField::psi_plus_potential(psi, theta);
    } else if (form == "minus-potential") {
      VectorXd zeta = VectorXd::Zero(n_total);
      const json& zj = require(fj, "field", "zeta");
      if (zj.contains("weights")) {
        zeta = detail::parse_vector(zj.at("weights"), "field.zeta.weights");
        if (zeta.size() != n_total) fail("field.zeta.weights", "length mismatch");
      } else if (zj.contains("point_index")) {
        const int i = zj.at("point_index").get<int>();
        if (i < 0 || i >= n_total) fail("field.zeta.point_index", "out of range");
        zeta[i] = detail::num_or(zj, "mass", 1.0);
      } else if (zj.contains("extra_index")) {
        // index into the extra_points block
        const int i = inst.n_geometry_points + zj.at("extra_index").get<int>();
        if (i < inst.n_geometry_points || i >= n_total)
          fail("field.zeta.extra_index", "out of range");
        zeta[i] = detail::num_or(zj, "mass", 1.0);
      } else {
        fail("field.zeta", "need 'weights', 'point_index', or 'extra_index'");
      }
      inst.field = ExternalField::minus_potential(zeta);
    } else {
      fail("field.form", "unknown form '" + form + "'");
    }
  }

  inst.params = cfg.contains("params") ? cfg.at("params") : json::object();
  if (inst.experiment == "thinness") {
    if (!inst.params.contains("q")) fail("params.q", "missing (thinness needs q)");
    if (inst.kernel_spec.kind != KernelKind::Riesz)
      fail("kernel.kind", "thinness requires a riesz kernel");
  }
  if (inst.experiment == "exhaustion" && !inst.params.contains("stages"))
    fail("params.stages", "missing (exhaustion needs stages)");
  if (inst.experiment == "mass-deficiency") {
    if (!inst.params.contains("truncations"))
      fail("params.truncations", "missing (mass-deficiency needs truncations)");
    if (!inst.has_shape || inst.shape_spec.kind != ShapeKind::RotationBody)
      fail("geometry.shape", "mass-deficiency needs a rotation-body geometry");
  }

  if (cfg.contains("output")) {
    const json& oj = cfg.at("output");
    if (oj.contains("dir")) inst.out_dir = oj.at("dir").get<std::string>();
    if (oj.contains("json")) inst.json_name = oj.at("json").get<std::string>();
    if (oj.contains("csv")) inst.csv_name = oj.at("csv").get<std::string>();
  }
  if (ov.out_dir) inst.out_dir = *ov.out_dir;
  if (const char* env = std::getenv("EQUILIB_OUT_DIR"); env && !ov.out_dir)
    inst.out_dir = env;
  return inst;
}

inline Instance parse_config_file(const std::string& path,
                                  const Overrides& ov = {}) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  json cfg;
  try {
    cfg = json::parse(ss.str());
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return parse_config(cfg, ss.str(), ov);
}

namespace detail {

inline ChainRule parse_rule(const std::string& r) {
  if (r == "by-index") return ChainRule::ByIndex;
  if (r == "by-distance-from-origin" || r == "by-distance")
    return ChainRule::ByDistance;
  if (r == "random") return ChainRule::Random;
  fail("params.rule", "unknown ordering rule '" + r + "'");
}

}  // namespace detail

/// Runs the experiment and returns the report body plus an optional CSV
/// payload (exhaustion and thinness series).
inline std::pair<json, std::optional<std::string>> run_instance(
    const Instance& inst) {
  const KernelMatrix& K = *inst.K;
  json body;
  std::optional<std::string> csv;

  if (inst.experiment == "capacity") {
    body = robin_capacity(K, inst.A, inst.solver);
  } else if (inst.experiment == "gauss") {
    GaussReport direct = solve_gauss(K, inst.field, inst.A, inst.solver);
    if (inst.field.form == ExternalField::Form::MinusPotential) {
      GaussReport repr = representation_solution(K, inst.field.zeta, inst.A,
                                                 inst.solver, false);
      direct.eta = repr.eta;
      direct.representation_gap = repr.representation_gap;
      direct.swept_mass = repr.swept_mass;
      direct.frostman_screen = repr.frostman_screen;
      direct.domination_screen = repr.domination_screen;
    }
    body = direct;
  } else if (inst.experiment == "balayage") {
    VectorXd mu = inst.field.form == ExternalField::Form::MinusPotential
                      ? inst.field.zeta
                      : VectorXd(VectorXd::Ones(K.size()) / K.size());
    if (inst.params.contains("mu"))
      mu = detail::parse_vector(inst.params.at("mu"), "params.mu");
    BalayageReport rep = sweep(K, mu, inst.A, inst.solver);
    if (inst.params.contains("Q_super")) {
      std::vector<int> idx;
      for (const auto& e : inst.params.at("Q_super")) idx.push_back(e.get<int>());
      IndexSet qsup = make_index_set(std::move(idx), K.size());
      BalayagePropertyRecord rec =
          verify_balayage_props(K, mu, inst.A, qsup, inst.solver);
      rep.rest_residual = rec.rest_residual;
    }
    body = rep;
  } else if (inst.experiment == "exhaustion") {
    const int stages = inst.params.at("stages").get<int>();
    const std::string rule =
        inst.params.contains("rule") ? inst.params.at("rule").get<std::string>()
                                     : "by-index";
    if (!inst.points)
      throw ConfigError("exhaustion with an explicit matrix needs geometry");
    ExhaustionChain chain = exhaustion_chain(
        *inst.points, inst.A, detail::parse_rule(rule), stages, inst.seed);
    ExhaustionReport rep = run_exhaustion(K, inst.field, chain, inst.solver);
    body = rep;
    std::ostringstream os;
    io::write_series_csv(os, rep);
    csv = os.str();
  } else if (inst.experiment == "thinness") {
    ThinnessThresholds th;
    th.floor = detail::num_or(inst.params, "theta_floor", th.floor);
    th.ratio = detail::num_or(inst.params, "theta_ratio", th.ratio);
    th.tail_frac = detail::num_or(inst.params, "theta_tail_frac", th.tail_frac);
    ThinnessReport rep =
        thinness_series(*inst.points, inst.A, inst.kernel_spec,
                        inst.params.at("q").get<double>(), th, inst.solver);
    body = rep;
    std::ostringstream os;
    io::write_thinness_csv(os, rep);
    csv = os.str();
  } else if (inst.experiment == "mass-deficiency") {
    std::vector<double> labels;
    for (const auto& e : inst.params.at("truncations"))
      labels.push_back(e.get<double>());
    std::vector<IndexSet> sets;
    for (double L : labels) {
      IndexSet s;
      for (int i : inst.A)
        if (inst.points->coords()(i, 0) <= L) s.push_back(i);
      if (s.empty())
        throw ConfigError("params.truncations: truncation " +
                          std::to_string(L) + " captures no points");
      sets.push_back(std::move(s));
    }
    if (inst.field.form != ExternalField::Form::MinusPotential)
      throw ConfigError("mass-deficiency needs a minus-potential field");
    body = mass_deficiency_experiment(K, sets, labels, inst.field.zeta,
                                      inst.solver);
  }
  return {std::move(body), std::move(csv)};
}

/// Full config run: executes the experiment and writes the JSON report
/// (and CSV series where the experiment emits one). Returns the paths
/// written.
inline std::vector<std::string> run_config(const std::string& config_path,
                                           const Overrides& ov = {}) {
  Instance inst = parse_config_file(config_path, ov);
  auto [body, csv] = run_instance(inst);
  json report{{"config_hash", inst.hash},
              {"experiment", inst.experiment},
              {"seed", inst.seed},
              {"solver", {{"tol", inst.solver.tol},
                          {"max_iter", inst.solver.max_iter}}},
              {"report", std::move(body)}};
  std::filesystem::create_directories(inst.out_dir);
  std::vector<std::string> written;
  const auto jpath = inst.out_dir / inst.json_name;
  io::write_file(jpath.string(), report.dump(2) + "\n");
  written.push_back(jpath.string());
  if (csv) {
    const auto cpath = inst.out_dir / inst.csv_name;
    io::write_file(cpath.string(), *csv);
    written.push_back(cpath.string());
  }
  return written;
}

}  // namespace equilib::cli
