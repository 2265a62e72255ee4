#include "carnot/runner.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "carnot/blowup.hpp"
#include "carnot/parallel.hpp"
#include "json.hpp"

namespace carnot {

using Json = nlohmann::ordered_json;

namespace {

std::atomic<int> g_workers{1};

// Round to 12 significant digits so emitted numbers are stable and readable.
double sig12(double x) {
  if (!std::isfinite(x) || x == 0.0) return x;
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return std::strtod(buf, nullptr);
}

Json json_of_report(const InequalityReport& r) {
  Json j;
  j["equation"] = r.equation;
  j["identity"] = r.identity;
  j["lhs"] = sig12(r.lhs);
  j["rhs"] = sig12(r.rhs);
  j["lhs_err"] = sig12(r.lhs_err);
  j["rhs_err"] = sig12(r.rhs_err);
  j["tolerance"] = sig12(r.tolerance);
  j["slack"] = sig12(r.slack());
  j["verdict"] = r.verdict_name();
  Json consts = Json::object();
  for (const auto& [k, v] : r.constants) consts[k] = sig12(v);
  j["constants"] = consts;
  j["warnings"] = r.warnings;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

Vec parse_point(const Json& j, int n, const std::string& what) {
  if (!j.is_array() || static_cast<int>(j.size()) != n)
    throw ConfigError(what + " must be an array of " + std::to_string(n) + " coordinates");
  Vec x(n);
  for (int i = 0; i < n; ++i) x[i] = j.at(i).get<double>();
  return x;
}

std::vector<double> parse_grid(const Json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ConfigError(what + " must be a nonempty array");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(v.get<double>());
  return out;
}

SurfaceScalar parse_scalar(const Json& j, const LabContext& ctx, const std::string& what) {
  if (!j.is_object() || !j.contains("kind"))
    throw ConfigError(what + " needs an object with a 'kind'");
  std::string kind = j["kind"].get<std::string>();
  const int n = ctx.alg->dim();
  if (kind == "coordinate") return coordinate_scalar(j.at("index").get<int>() - 1);
  if (kind == "constant") return constant_scalar(j.at("value").get<double>());
  if (kind == "radial-bump")
    return radial_bump(*ctx.norm, parse_point(j.at("center"), n, what + ".center"),
                       j.at("radius").get<double>());
  if (kind == "coordinate-bump")
    return coordinate_bump(j.at("index").get<int>() - 1, j.at("halfwidth").get<double>());
  if (kind == "polynomial") {
    std::vector<std::pair<std::vector<int>, double>> terms;
    for (const auto& t : j.at("terms")) {
      std::vector<int> e = t.at(0).get<std::vector<int>>();
      if (static_cast<int>(e.size()) != n)
        throw ConfigError(what + ": polynomial exponents must have ambient arity");
      terms.push_back({e, t.at(1).get<double>()});
    }
    return {"polynomial", [terms, n](const Vec& y) {
              double s = 0.0;
              for (const auto& [e, c] : terms) {
                double v = c;
                for (int i = 0; i < n; ++i)
                  for (int q = 0; q < e[i]; ++q) v *= y[i];
                s += v;
              }
              return s;
            }};
  }
  throw ConfigError(what + ": unknown scalar kind '" + kind + "'");
}

HorizontalField parse_field(const Json& j, const LabContext& ctx, const std::string& what) {
  if (!j.is_object() || !j.contains("kind"))
    throw ConfigError(what + " needs an object with a 'kind'");
  std::string kind = j["kind"].get<std::string>();
  if (kind == "horizontal-position") return horizontal_position_field(*ctx.alg);
  if (kind == "bump-frame") {
    int dir = j.at("dir").get<int>() - 1;
    if (dir < 0 || dir >= ctx.alg->h())
      throw ConfigError(what + ": bump-frame dir must be a horizontal index");
    return bump_frame_field(*ctx.norm, dir,
                            parse_point(j.at("center"), ctx.alg->dim(), what + ".center"),
                            j.at("radius").get<double>());
  }
  throw ConfigError(what + ": unknown field kind '" + kind + "'");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write output file " + path.string());
  out << text;
}

std::string csv_of_table(const ScanTable& t) {
  std::string s;
  for (size_t c = 0; c < t.columns.size(); ++c) {
    s += t.columns[c];
    s += (c + 1 < t.columns.size()) ? ',' : '\n';
  }
  char buf[40];
  for (const auto& row : t.rows) {
    for (size_t c = 0; c < row.size(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.12g", row[c]);
      s += buf;
      s += (c + 1 < row.size()) ? ',' : '\n';
    }
  }
  return s;
}

}  // namespace

int worker_count() { return g_workers.load(); }

void set_worker_count(int n) { g_workers.store(std::max(1, n)); }

Runner Runner::from_file(const std::string& config_path) {
  std::ifstream in(config_path);
  if (!in) throw ConfigError("cannot open config file: " + config_path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

Runner Runner::from_json_text(const std::string& text) {
  Json cfg;
  try {
    cfg = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: invalid JSON: " + std::string(e.what()));
  }

  Runner r;
  r.config_echo_ = cfg.dump();

  if (!cfg.contains("group")) throw ConfigError("config: missing 'group'");
  r.alg_ = std::make_shared<StratifiedAlgebra>(make_group(cfg["group"].get<std::string>()));

  std::string norm_kind = "korany";
  int lambda = 0;
  if (cfg.contains("norm")) {
    if (cfg["norm"].is_string())
      norm_kind = cfg["norm"].get<std::string>();
    else {
      norm_kind = cfg["norm"].value("kind", "korany");
      lambda = cfg["norm"].value("lambda", 0);
    }
  }
  r.norm_ = std::make_shared<HomogeneousNorm>(make_norm(*r.alg_, norm_kind, lambda));

  if (!cfg.contains("surface")) throw ConfigError("config: missing 'surface'");
  if (cfg["surface"].is_string()) {
    r.surface_ = make_surface(*r.alg_, cfg["surface"].get<std::string>());
  } else if (cfg["surface"].contains("preset")) {
    r.surface_ = make_surface(*r.alg_, cfg["surface"]["preset"].get<std::string>(),
                              cfg["surface"].value("radius", 1.0));
  } else if (cfg["surface"].contains("custom")) {
    r.surface_ = surface_from_json_text(*r.alg_, cfg["surface"]["custom"].dump());
  } else {
    throw ConfigError("config: surface needs a 'preset' name or a 'custom' graph spec");
  }

  if (cfg.contains("quadrature")) {
    const auto& q = cfg["quadrature"];
    r.spec_.base_order = q.value("order", 5);
    r.spec_.max_depth = q.value("depth", 10);
    r.spec_.rel_tol = q.value("rel_tol", 1e-7);
    if (r.spec_.base_order < 1 || r.spec_.base_order > 12)
      throw ConfigError("config: quadrature order must be in [1, 12]");
    if (r.spec_.max_depth < 0 || r.spec_.max_depth > 16)
      throw ConfigError("config: quadrature depth must be in [0, 16]");
    if (!(r.spec_.rel_tol > 0.0 && r.spec_.rel_tol <= 0.1))
      throw ConfigError("config: quadrature rel_tol must be in (0, 0.1]");
  } else {
    r.spec_ = QuadratureSpec(5, 10, 1e-7);
  }

  if (cfg.contains("output")) {
    r.out_dir_ = cfg["output"].value("dir", "out");
    if (cfg["output"].contains("formats"))
      r.formats_ = cfg["output"]["formats"].get<std::vector<std::string>>();
  }

  r.ctx_ = std::make_shared<LabContext>(LabContext::make(*r.alg_, *r.norm_, 16384));

  // Resolve every check now; any unknown key aborts before any output exists.
  if (!cfg.contains("checks") || !cfg["checks"].is_array())
    throw ConfigError("config: missing 'checks' array");
  const int n = r.alg_->dim();
  for (const auto& jc : cfg["checks"]) {
    if (!jc.contains("name")) throw ConfigError("config: every check needs a 'name'");
    std::string name = jc["name"].get<std::string>();
    auto ctx = r.ctx_;
    auto S = r.surface_;
    auto norm = r.norm_;
    auto alg = r.alg_;
    QuadratureSpec spec = r.spec_;
    if (jc.contains("quadrature")) {
      const auto& q = jc["quadrature"];
      spec.base_order = q.value("order", spec.base_order);
      spec.max_depth = q.value("depth", spec.max_depth);
      spec.rel_tol = q.value("rel_tol", spec.rel_tol);
    }

    auto locate = [S, n](const Json& j, const std::string& what) {
      Vec x = parse_point(j, n, what);
      return locate_on_surface(S, x, 1e-7);
    };

    Runner::CheckPlan plan;
    plan.name = name;
    if (name == "h-perimeter") {
      Region region = Region::all();
      if (jc.contains("ball")) {
        Vec center = parse_point(jc["ball"].at("center"), n, "h-perimeter.ball.center");
        region = Region::in_ball(*norm, center, jc["ball"].at("radius").get<double>());
      }
      plan.execute = [=]() {
        CheckResult res;
        res.name = "h-perimeter";
        auto est = h_perimeter(S, region, spec);
        res.extra["value"] = est.value;
        res.extra["error"] = est.error;
        if (!est.warning.empty()) res.note = est.warning;
        return res;
      };
    } else if (name == "blowup") {
      auto [patch, zeta] = locate(jc.at("point"), "blowup.point");
      plan.execute = [=]() {
        CheckResult res;
        res.name = "blowup";
        auto bu = blowup_density(S, patch, zeta, *norm, spec);
        res.extra["kappa"] = bu.kappa;
        res.extra["kappa_err"] = bu.kappa_estimate.error;
        res.extra["case_b_order"] = bu.aniso_order;
        res.note = bu.kind_name();
        if (!bu.taylor.empty()) {
          ScanTable t;
          t.name = "taylor";
          for (int j = 0; j < alg->dim() - 1; ++j)
            t.columns.push_back("e" + std::to_string(j + 1));
          t.columns.push_back("coefficient");
          for (const auto& [beta, a] : bu.taylor) {
            std::vector<double> row;
            for (int e : beta) row.push_back(e);
            row.push_back(a);
            t.rows.push_back(row);
          }
          res.tables.push_back(std::move(t));
        }
        return res;
      };
    } else if (name == "metric-sandwich") {
      // k1 <= kappa_rho(nu_H(x)) <= k2 with the ball-box bounds; a sparse
      // sphere sample produces an honestly violated lower bound.
      auto [patch, zeta] = locate(jc.at("point"), "metric-sandwich.point");
      int samples = jc.value("samples", 16384);
      if (samples < 4) throw ConfigError("metric-sandwich: samples must be >= 4");
      plan.execute = [=]() {
        CheckResult res;
        res.name = "metric-sandwich";
        auto bu = blowup_density(S, patch, zeta, *norm, spec);
        auto mf = norm->metric_factor_bounds(samples);
        res.extra["kappa"] = bu.kappa;
        res.extra["k1"] = mf.k1;
        res.extra["k2"] = mf.k2;
        InequalityReport lower;
        lower.check = "metric-sandwich";
        lower.equation = "ball-box lower bound k1 <= kappa";
        lower.group = alg->name();
        lower.norm = norm->description();
        lower.surface = S.name;
        lower.lhs = mf.k1;
        lower.rhs = bu.kappa;
        lower.rhs_err = bu.kappa_estimate.error;
        lower.constants["samples"] = samples;
        lower.judge_bound();
        InequalityReport upper = lower;
        upper.equation = "ball-box upper bound kappa <= k2";
        upper.lhs = bu.kappa;
        upper.lhs_err = bu.kappa_estimate.error;
        upper.rhs = mf.k2;
        upper.rhs_err = 0.0;
        upper.judge_bound();
        res.reports.push_back(lower);
        res.reports.push_back(upper);
        res.note = bu.kind_name();
        return res;
      };
    } else if (name == "blowup-scan") {
      auto [patch, zeta] = locate(jc.at("point"), "blowup-scan.point");
      auto radii = parse_grid(jc.at("radii"), "blowup-scan.radii");
      plan.execute = [=]() {
        CheckResult res;
        res.name = "blowup-scan";
        auto rows = parallel_map<std::pair<double, double>>(
            static_cast<int>(radii.size()), [&](int i) {
              return blowup_scan(S, patch, zeta, *norm, {radii[i]}, spec).front();
            });
        ScanTable t;
        t.name = "scan";
        t.columns = {"R", "ratio"};
        for (auto& [R, ratio] : rows) t.rows.push_back({R, ratio});
        res.tables.push_back(std::move(t));
        return res;
      };
    } else if (name == "coarea") {
      SurfaceScalar phi = parse_scalar(jc.at("phi"), *ctx, "coarea.phi");
      int grid = jc.value("grid", 192);
      plan.execute = [=]() {
        CheckResult res;
        res.name = "coarea";
        res.reports.push_back(coarea_check(*ctx, S, phi, spec, grid));
        return res;
      };
    } else if (name == "divergence") {
      HorizontalField X = parse_field(jc.at("field"), *ctx, "divergence.field");
      Vec w = jc.contains("w") ? parse_point(jc["w"], n, "divergence.w") : Vec(Vec::Zero(n));
      plan.execute = [=]() {
        CheckResult res;
        res.name = "divergence";
        auto pair = variation_divergence_check(*ctx, S, X, w, spec);
        res.reports.push_back(pair.divergence);
        res.reports.push_back(pair.first_variation);
        return res;
      };
    } else if (name == "minkowsky") {
      plan.execute = [=]() {
        CheckResult res;
        res.name = "minkowsky";
        res.reports.push_back(minkowsky_check(*ctx, S, spec));
        return res;
      };
    } else if (name == "linear-isoperimetric") {
      plan.execute = [=]() {
        CheckResult res;
        res.name = "linear-isoperimetric";
        res.reports.push_back(linear_isoperimetric_check(*ctx, S, spec));
        return res;
      };
    } else if (name == "monotonicity") {
      auto [patch, zeta] = locate(jc.at("point"), "monotonicity.point");
      auto grid = parse_grid(jc.at("t_grid"), "monotonicity.t_grid");
      plan.execute = [=]() {
        CheckResult res;
        res.name = "monotonicity";
        auto mono = monotonicity_scan(*ctx, S, patch, zeta, grid, spec);
        res.reports = mono.strong;
        for (auto& r : mono.weak) res.reports.push_back(r);
        res.tables.push_back(mono.table);
        return res;
      };
    } else if (name == "isoperimetric") {
      plan.execute = [=]() {
        CheckResult res;
        res.name = "isoperimetric";
        res.reports.push_back(isoperimetric_report(*ctx, S, spec));
        return res;
      };
    } else if (name == "poincare") {
      auto [patch, zeta] = locate(jc.at("point"), "poincare.point");
      double R = jc.at("R").get<double>();
      double p = jc.value("p", 1.0);
      SurfaceScalar psi = parse_scalar(jc.at("psi"), *ctx, "poincare.psi");
      plan.execute = [=]() {
        CheckResult res;
        res.name = "poincare";
        res.reports.push_back(poincare_check(*ctx, S, patch, zeta, R, p, psi, spec));
        return res;
      };
    } else if (name == "rayleigh") {
      std::vector<std::pair<int, double>> splits;
      for (const auto& s : jc.at("splits"))
        splits.push_back({s.at(0).get<int>() - 1, s.at(1).get<double>()});
      std::vector<SurfaceScalar> tests;
      if (jc.contains("psi"))
        for (const auto& jp : jc["psi"]) tests.push_back(parse_scalar(jp, *ctx, "rayleigh.psi"));
      std::vector<double> eps = jc.contains("eps") ? parse_grid(jc["eps"], "rayleigh.eps")
                                                   : std::vector<double>{0.2, 0.1, 0.05};
      plan.execute = [=]() {
        CheckResult res;
        res.name = "rayleigh";
        auto ray = rayleigh_isop_estimate(*ctx, S, splits, tests, eps, spec);
        res.extra["geometric"] = ray.geometric;
        if (std::isfinite(ray.analytic)) res.extra["analytic"] = ray.analytic;
        res.extra["lambda1_lower"] = ray.lambda1_lower;
        res.extra["cross_gap"] = ray.cross_gap;
        res.tables.push_back(ray.table);
        return res;
      };
    } else if (name == "asymptotic") {
      auto [patch, zeta] = locate(jc.at("point"), "asymptotic.point");
      auto grid = parse_grid(jc.at("t_grid"), "asymptotic.t_grid");
      plan.execute = [=]() {
        CheckResult res;
        res.name = "asymptotic";
        auto as = asymptotic_check(*ctx, S, patch, zeta, grid, spec);
        res.reports = as.reports;
        res.tables.push_back(as.table);
        res.extra["kappa"] = as.kappa;
        res.extra["H0"] = as.h0;
        return res;
      };
    } else if (name == "sobolev") {
      SurfaceScalar psi = parse_scalar(jc.at("psi"), *ctx, "sobolev.psi");
      bool full = jc.value("full", false);
      plan.execute = [=]() {
        CheckResult res;
        res.name = "sobolev";
        res.reports.push_back(sobolev_check(*ctx, S, psi, spec, full));
        return res;
      };
    } else {
      throw ConfigError("config: unknown check name '" + name + "'");
    }
    r.plans_.push_back(std::move(plan));
  }
  return r;
}

void Runner::set_output_dir(const std::string& dir) { out_dir_ = dir; }

int Runner::run() {
  // Execute everything first; outputs are written only when every check has
  // produced a result, so failed runs leave no partial artifacts.
  std::vector<CheckResult> results;
  for (const auto& plan : plans_) {
    if (verbose_) std::fprintf(stderr, "[carnot] running %s\n", plan.name.c_str());
    results.push_back(plan.execute());
  }

  std::filesystem::create_directories(out_dir_);
  bool want_json = std::find(formats_.begin(), formats_.end(), "json") != formats_.end();
  bool want_csv = std::find(formats_.begin(), formats_.end(), "csv") != formats_.end();

  Json manifest;
  manifest["schema_version"] = 1;
  manifest["tool"] = "carnot";
  manifest["group"] = alg_->name();
  manifest["norm"] = norm_->description();
  manifest["surface"] = surface_.name;
  manifest["column_docs"] = {
      {"monotonicity", "t, m = sigma(S_t)/t^(Q-1), minus_dm = -dm/dt, rhs, verdict (1 holds, 0 "
                       "within error, -1 violated)"},
      {"scan", "R, ratio = sigma(S cap B(x,R))/R^(Q-1)"},
      {"rayleigh_cutoff", "eps, Rayleigh quotient of the cutoff function"},
      {"asymptotic", "t, sigma = sigma(S_t), bound = kappa t^(Q-1) exp(-t H0 (1+ct))"}};
  Json checks_json = Json::array();

  bool violated = false;
  for (size_t i = 0; i < results.size(); ++i) {
    const CheckResult& res = results[i];
    violated = violated || res.any_violated();
    std::string stem = std::to_string(i) + "_" + res.name;

    Json j;
    j["schema_version"] = 1;
    j["check"] = res.name;
    j["group"] = alg_->name();
    j["norm"] = norm_->description();
    j["surface"] = surface_.name;
    j["quadrature"] = {{"order", spec_.base_order},
                       {"depth", spec_.max_depth},
                       {"rel_tol", sig12(spec_.rel_tol)}};
    j["provenance"] = {
        {"curvature_sign", "positive for a cylinder with outward horizontal normal"},
        {"layer_constants_margin", sig12(ctx_->lc.margin)}};
    Json reports = Json::array();
    for (const auto& r : res.reports) reports.push_back(json_of_report(r));
    j["reports"] = reports;
    Json extra = Json::object();
    for (const auto& [k, v] : res.extra) extra[k] = sig12(v);
    j["extra"] = extra;
    if (!res.note.empty()) j["note"] = res.note;

    Json entry;
    entry["name"] = res.name;
    std::vector<std::string> csv_files;
    if (want_csv) {
      for (const auto& t : res.tables) {
        std::string fname = stem + "_" + t.name + ".csv";
        write_text(std::filesystem::path(out_dir_) / fname, csv_of_table(t));
        csv_files.push_back(fname);
      }
    }
    j["tables"] = csv_files;
    if (want_json) {
      std::string fname = stem + ".json";
      write_text(std::filesystem::path(out_dir_) / fname, j.dump(2) + "\n");
      entry["json"] = fname;
    }
    entry["csv"] = csv_files;
    entry["violated"] = res.any_violated();
    checks_json.push_back(entry);
  }
  manifest["checks"] = checks_json;
  manifest["exit_code"] = violated ? 2 : 0;
  write_text(std::filesystem::path(out_dir_) / "manifest.json", manifest.dump(2) + "\n");
  return violated ? 2 : 0;
}

}  // namespace carnot
