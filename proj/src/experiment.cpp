#include "ncentre/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <numbers>
#include <thread>

#include "json_fields.hpp"
#include "ncentre/errors.hpp"
#include "ncentre/io.hpp"
#include "ncentre/kepler.hpp"
#include "ncentre/levi_civita.hpp"

namespace ncentre {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kSchema = 1;

int field_int(const json& obj, const char* key, const std::string& at, int fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) detail::fail(at.empty() ? key : at + "." + key, "expected an integer");
  return v.get<int>();
}

std::vector<int> int_list(const json& obj, const char* key, const std::string& at) {
  const std::string path = at + "." + key;
  if (!obj.contains(key)) detail::fail(path, "missing field");
  const auto& v = obj.at(key);
  detail::require(v.is_array(), path, "expected an array of integers");
  std::vector<int> out;
  for (const auto& x : v) {
    detail::require(x.is_number_integer(), path, "expected an array of integers");
    out.push_back(x.get<int>());
  }
  return out;
}

std::vector<double> number_list(const json& v, const std::string& at) {
  detail::require(v.is_array(), at, "expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    detail::require(x.is_number(), at, "expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

Vec3 point(const json& obj, const char* key, const std::string& at, Mode mode) {
  const std::string path = at + "." + key;
  if (!obj.contains(key)) detail::fail(path, "missing field");
  const auto xs = number_list(obj.at(key), path);
  detail::require(xs.size() == 2 || xs.size() == 3, path, "expected [x, y] or [x, y, z]");
  const Vec3 p(xs[0], xs[1], xs.size() == 3 ? xs[2] : 0.0);
  detail::require(mode != Mode::planar || p.z() == 0.0, path, "planar endpoints need z = 0");
  return p;
}

json point_json(const Vec3& p, Mode mode) {
  if (mode == Mode::planar) return json::array({p.x(), p.y()});
  return json::array({p.x(), p.y(), p.z()});
}

IntegratorConfig integrator_from_json(const json& j) {
  IntegratorConfig c;
  if (j.is_null()) return c;
  detail::require(j.is_object(), "integrator", "expected an object");
  c.relative_tolerance = detail::field_number_or(j, "relative_tolerance", "integrator", c.relative_tolerance);
  c.absolute_tolerance = detail::field_number_or(j, "absolute_tolerance", "integrator", c.absolute_tolerance);
  c.max_step = detail::field_number_or(j, "max_step", "integrator", c.max_step);
  c.collision_radius = detail::field_number_or(j, "collision_radius", "integrator", c.collision_radius);
  c.min_step = detail::field_number_or(j, "min_step", "integrator", c.min_step);
  try {
    c.validate();
  } catch (const Error& e) {
    detail::fail("integrator", e.what());
  }
  return c;
}

json to_json(const IntegratorConfig& c) {
  return {{"relative_tolerance", c.relative_tolerance},
          {"absolute_tolerance", c.absolute_tolerance},
          {"max_step", c.max_step},
          {"collision_radius", c.collision_radius},
          {"min_step", c.min_step}};
}

void check_centre_index(int k, const PotentialSpec& spec, const std::string& at, bool allow_auto = false) {
  if (allow_auto && k == -1) return;
  detail::require(k >= 0 && static_cast<std::size_t>(k) < spec.size(), at, "centre index out of range");
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Results must be
// written into per-index slots so output order never depends on scheduling.
template <class Fn>
void parallel_for(int n, int jobs, Fn&& fn) {
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) fn(i);
  };
  const int threads = std::clamp(jobs, 1, std::max(n, 1));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

std::string error_text(const Error& e) { return std::string(to_string(e.code())) + ": " + e.what(); }

json manifest(const std::string& command, const ExperimentConfig& cfg, const std::vector<std::string>& files) {
  return {{"schema", kSchema}, {"command", command}, {"seed", cfg.seed}, {"config", to_json(cfg)}, {"files", files}};
}

// Slope of log y against log x over the pairs with y > 0, or null.
json log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(y[i] > 0.0) || !(x[i] > 0.0)) continue;
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  if (lx.size() < 2) return nullptr;
  try {
    return regression_slope(lx, ly);
  } catch (const Error&) {
    return nullptr;
  }
}

int lc_centre_for(const SolveRun& run, const ExperimentConfig& cfg) {
  if (cfg.lc.centre >= 0) return cfg.lc.centre;
  const auto& r = *run.result;
  for (int j : r.pinned_nodes)
    for (std::size_t k = 0; k < cfg.potential.size(); ++k)
      if (centre_distance(cfg.potential.centre(k), r.path.node(j)) == 0.0) return static_cast<int>(k);
  if (!r.collisions.candidates.empty()) return r.collisions.candidates.front().centre;
  return 0;
}

}  // namespace

ExperimentConfig experiment_from_json(const json& j) {
  detail::require(j.is_object(), "config", "expected an object");
  detail::require(j.contains("schema"), "schema", "missing field");
  detail::require(j.at("schema").is_number_integer() && j.at("schema").get<int>() == kSchema, "schema",
                  "unsupported schema version (expected 1)");
  detail::require(j.contains("potential"), "potential", "missing field");

  ExperimentConfig c;
  c.potential = potential_from_json(j.at("potential"));
  const Mode mode = c.potential.mode();

  detail::require(j.contains("endpoints"), "endpoints", "missing field");
  const auto& ep = j.at("endpoints");
  detail::require(ep.is_object(), "endpoints", "expected an object");
  c.p1 = point(ep, "p1", "endpoints", mode);
  c.p2 = point(ep, "p2", "endpoints", mode);

  c.h = detail::field_number_or(j, "h", "", 0.0);
  c.segments = field_int(j, "segments", "", c.segments);
  detail::require(is_valid_segment_count(c.segments), "segments", "must be a power of two >= 8");
  c.starts = field_int(j, "starts", "", c.starts);
  detail::require(c.starts >= 1, "starts", "must be at least 1");
  c.perturbation = detail::field_number_or(j, "perturbation", "", c.perturbation);
  detail::require(c.perturbation >= 0.0, "perturbation", "must be non-negative");
  if (j.contains("seed")) {
    const auto& s = j.at("seed");
    detail::require(s.is_number_unsigned() || (s.is_number_integer() && s.get<long long>() >= 0), "seed",
                    "expected a non-negative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }

  detail::require(j.contains("initial"), "initial", "missing field");
  const auto& ji = j.at("initial");
  detail::require(ji.is_object() && ji.contains("kind") && ji.at("kind").is_string(), "initial.kind",
                  "expected \"spiral\" or \"lasso\"");
  const auto kind = ji.at("kind").get<std::string>();
  if (kind == "spiral") {
    c.initial.kind = InitialPathConfig::Kind::spiral;
    c.initial.centre = field_int(ji, "centre", "initial", 0);
    check_centre_index(c.initial.centre, c.potential, "initial.centre");
    c.initial.angle = detail::field_number(ji, "angle", "initial");
  } else if (kind == "lasso") {
    c.initial.kind = InitialPathConfig::Kind::lasso;
    c.initial.indices = int_list(ji, "indices", "initial");
    detail::require(c.initial.indices.size() == c.potential.size(), "initial.indices", "one index per centre");
  } else {
    detail::fail("initial.kind", "expected \"spiral\" or \"lasso\"");
  }

  if (j.contains("class")) {
    const auto& jc = j.at("class");
    detail::require(jc.is_object() && jc.contains("kind") && jc.at("kind").is_string(), "class.kind",
                    "expected \"inherit\", \"indices\" or \"parities\"");
    const auto ck = jc.at("kind").get<std::string>();
    if (ck == "inherit") {
      c.cls.kind = ClassConfig::Kind::inherit;
    } else if (ck == "indices" || ck == "parities") {
      c.cls.kind = ck == "indices" ? ClassConfig::Kind::indices : ClassConfig::Kind::parities;
      c.cls.values = int_list(jc, "values", "class");
      detail::require(c.cls.values.size() == c.potential.size(), "class.values", "one value per centre");
    } else {
      detail::fail("class.kind", "expected \"inherit\", \"indices\" or \"parities\"");
    }
  }

  c.options = minimize_options_from_json(j.contains("options") ? j.at("options") : json(), "options");
  c.options.seed = c.seed;
  c.integrator = integrator_from_json(j.contains("integrator") ? j.at("integrator") : json());

  if (j.contains("sweep")) {
    const auto& js = j.at("sweep");
    detail::require(js.is_object(), "sweep", "expected an object");
    c.sweep.centre = field_int(js, "centre", "sweep", 0);
    check_centre_index(c.sweep.centre, c.potential, "sweep.centre");
    if (!js.contains("epsilons")) detail::fail("sweep.epsilons", "missing field");
    c.sweep.epsilons = number_list(js.at("epsilons"), "sweep.epsilons");
    detail::require(!c.sweep.epsilons.empty(), "sweep.epsilons", "must not be empty");
    for (double e : c.sweep.epsilons) detail::require(e > 0.0, "sweep.epsilons", "entries must be positive");
    if (js.contains("d_limit")) c.sweep.d_limit = detail::field_number(js, "d_limit", "sweep");
  }
  if (j.contains("oracle")) {
    const auto& jo = j.at("oracle");
    detail::require(jo.is_object(), "oracle", "expected an object");
    if (jo.contains("alphas")) c.oracle_alphas = number_list(jo.at("alphas"), "oracle.alphas");
  }
  if (j.contains("lc")) {
    const auto& jl = j.at("lc");
    detail::require(jl.is_object(), "lc", "expected an object");
    c.lc.centre = field_int(jl, "centre", "lc", -1);
    check_centre_index(c.lc.centre, c.potential, "lc.centre", true);
  }
  return c;
}

json to_json(const ExperimentConfig& c) {
  const Mode mode = c.potential.mode();
  json initial;
  if (c.initial.kind == InitialPathConfig::Kind::spiral)
    initial = {{"kind", "spiral"}, {"centre", c.initial.centre}, {"angle", c.initial.angle}};
  else
    initial = {{"kind", "lasso"}, {"indices", c.initial.indices}};
  json cls = {{"kind", c.cls.kind == ClassConfig::Kind::inherit   ? "inherit"
                       : c.cls.kind == ClassConfig::Kind::indices ? "indices"
                                                                  : "parities"}};
  if (c.cls.kind != ClassConfig::Kind::inherit) cls["values"] = c.cls.values;
  json out = {{"schema", kSchema},
          {"potential", to_json(c.potential)},
          {"endpoints", {{"p1", point_json(c.p1, mode)}, {"p2", point_json(c.p2, mode)}}},
          {"h", c.h},
          {"segments", c.segments},
          {"initial", initial},
          {"class", cls},
          {"starts", c.starts},
          {"perturbation", c.perturbation},
          {"seed", c.seed},
          {"options", to_json(c.options)},
          {"integrator", to_json(c.integrator)},
          {"oracle", {{"alphas", c.oracle_alphas}}},
          {"lc", {{"centre", c.lc.centre}}}};
  // No sweep block unless one was given; an empty list does not parse.
  if (!c.sweep.epsilons.empty()) {
    out["sweep"] = {{"centre", c.sweep.centre}, {"epsilons", c.sweep.epsilons}};
    if (c.sweep.d_limit) out["sweep"]["d_limit"] = *c.sweep.d_limit;
  }
  return out;
}

DiscretePath initial_path(const ExperimentConfig& cfg) {
  if (cfg.initial.kind == InitialPathConfig::Kind::spiral) {
    const Vec3& c = cfg.potential.centre(static_cast<std::size_t>(cfg.initial.centre)).position;
    return spiral_path(cfg.p1, cfg.p2, c, cfg.initial.angle, cfg.segments, cfg.potential.mode());
  }
  const auto closure = ClosurePath::canonical(cfg.potential, cfg.p1, cfg.p2);
  return lasso_path(cfg.potential, cfg.p1, cfg.p2, closure, cfg.initial.indices, cfg.segments);
}

HomotopyClass target_class(const ExperimentConfig& cfg, const DiscretePath& initial) {
  const auto closure = ClosurePath::canonical(cfg.potential, cfg.p1, cfg.p2);
  switch (cfg.cls.kind) {
    case ClassConfig::Kind::indices:
      return HomotopyClass::indices(cfg.cls.values, closure);
    case ClassConfig::Kind::parities:
      return HomotopyClass::parities(cfg.cls.values, closure);
    case ClassConfig::Kind::inherit:
      break;
  }
  const auto w = winding_vector(initial, closure, cfg.potential);
  return HomotopyClass::indices(w, closure);
}

std::vector<SolveRun> run_solve(const ExperimentConfig& cfg, int jobs) {
  const DiscretePath base = initial_path(cfg);
  const HomotopyClass cls = target_class(cfg, base);
  std::vector<SolveRun> runs(static_cast<std::size_t>(cfg.starts));
  parallel_for(cfg.starts, jobs, [&](int k) {
    SolveRun& run = runs[static_cast<std::size_t>(k)];
    run.start = k;
    run.seed = cfg.seed + static_cast<std::uint64_t>(k);
    try {
      const DiscretePath p0 = k == 0 ? base : perturb_in_class(base, cls, cfg.potential, run.seed, cfg.perturbation);
      MinimizeOptions opts = cfg.options;
      opts.seed = run.seed;
      auto r = minimize_in_class(p0, cls, cfg.potential, cfg.h, opts);
      if (r.converged && r.classification == Classification::collision_free)
        run.verification = verify_minimizer(r.path, r.omega_sq, cfg.potential, cfg.h, cfg.integrator);
      if (r.classification == Classification::collision_ejection && !r.collisions.candidates.empty()) {
        run.collision_time = r.collisions.candidates.front().time;
        run.reflection_symmetric = check_reflection_symmetry(r.path, *run.collision_time, opts.symmetry_tolerance);
      }
      run.result = std::move(r);
    } catch (const Error& e) {
      run.error = error_text(e);
    }
  });
  return runs;
}

int cmd_solve(const ExperimentConfig& cfg, const fs::path& out, int jobs) {
  fs::create_directories(out);
  const auto runs = run_solve(cfg, jobs);
  std::vector<std::string> files{"diagnostics.json"};
  json jruns = json::array();
  std::map<std::string, int> counts;
  bool ok = true;
  for (const auto& run : runs) {
    json jr = {{"start", run.start}, {"seed", run.seed}};
    if (!run.error.empty()) {
      jr["error"] = run.error;
      ok = false;
    }
    if (run.result) {
      const auto& r = *run.result;
      const std::string csv = "run_" + std::to_string(run.start) + ".csv";
      write_text(out / csv, to_csv(r.path));
      files.push_back(csv);
      jr["trajectory"] = csv;
      jr["result"] = to_json(r);
      jr["classification"] = to_string(r.classification);
      ++counts[to_string(r.classification)];
      if (!r.converged) ok = false;
      if (run.verification) jr["verification"] = to_json(*run.verification);
      if (run.collision_time) {
        jr["collision_time"] = *run.collision_time;
        jr["reflection_symmetric"] = run.reflection_symmetric;
      }
    }
    jruns.push_back(std::move(jr));
  }
  write_json(out / "diagnostics.json", {{"runs", jruns}, {"classifications", counts}});
  files.push_back("manifest.json");
  write_json(out / "manifest.json", manifest("solve", cfg, files));
  return ok ? 0 : 1;
}

int cmd_sweep_eps(const ExperimentConfig& cfg, const fs::path& out, int jobs) {
  if (cfg.sweep.epsilons.empty()) throw Error(ErrorCode::invalid_config, "sweep.epsilons: missing field");
  fs::create_directories(out);
  const DiscretePath base = initial_path(cfg);
  const HomotopyClass cls = target_class(cfg, base);
  const auto rows = sweep_d_of_eps(base, cls, cfg.sweep.centre, cfg.sweep.epsilons, cfg.potential, cfg.h,
                                   cfg.options, jobs);
  const Vec3& pole = cfg.potential.centre(static_cast<std::size_t>(cfg.sweep.centre)).position;

  CsvWriter csv;
  csv.header({"epsilon", "d", "converged", "constraint_active", "omega_sq", "min_distance", "angular_momentum",
              "angular_momentum_physical"});
  std::vector<double> eps, d, c_path, c_phys;
  json jrows = json::array();
  bool ok = true;
  for (const auto& row : rows) {
    if (!row.result) {
      ok = false;
      jrows.push_back({{"epsilon", row.epsilon}, {"error", row.error}});
      continue;
    }
    const auto& r = *row.result;
    auto series = angular_momentum_series(r.path, pole);
    for (auto& v : series) v = std::abs(v);
    std::nth_element(series.begin(), series.begin() + series.size() / 2, series.end());
    const double cn = series[series.size() / 2];
    // Path time runs over [0, 1]; physical time is path time / omega.
    const double cphys = cn * std::sqrt(row.omega_sq);
    const double dmin = min_distance_to(r.path, cfg.potential, cfg.sweep.centre).distance;
    csv.row(std::vector<CsvWriter::Cell>{row.epsilon, row.value, static_cast<long long>(row.converged),
                                         static_cast<long long>(row.constraint_active), row.omega_sq, dmin, cn,
                                         cphys});
    if (!row.converged) ok = false;
    eps.push_back(row.epsilon);
    d.push_back(row.value);
    c_path.push_back(cn);
    c_phys.push_back(cphys);
    jrows.push_back({{"epsilon", row.epsilon},
                     {"d", row.value},
                     {"converged", row.converged},
                     {"constraint_active", row.constraint_active},
                     {"omega_sq", row.omega_sq},
                     {"iterations", r.iterations},
                     {"gradient_norm", r.gradient_norm}});
  }
  write_text(out / "sweep.csv", csv.str());

  json report = {{"rows", jrows}};
  bool decreasing = d.size() == rows.size();
  for (std::size_t i = 1; i < d.size(); ++i) decreasing = decreasing && d[i] < d[i - 1];
  report["strictly_decreasing"] = decreasing;
  if (d.size() >= 2) {
    std::vector<double> e1, dd, e2, succ;
    for (std::size_t i = 0; i + 1 < d.size(); ++i) {
      e1.push_back(eps[i]);
      dd.push_back(d[i] - d.back());
      e2.push_back(eps[i]);
      succ.push_back(d[i] - d[i + 1]);
    }
    report["slope_d_minus_d_min"] = log_slope(e1, dd);
    report["slope_successive_differences"] = log_slope(e2, succ);
    if (cfg.sweep.d_limit) {
      std::vector<double> dl;
      for (double v : d) dl.push_back(v - *cfg.sweep.d_limit);
      report["d_limit"] = *cfg.sweep.d_limit;
      report["slope_d_minus_d_limit"] = log_slope(eps, dl);
    }
    report["slope_angular_momentum_path"] = log_slope(eps, c_path);
    report["slope_angular_momentum_physical"] = log_slope(eps, c_phys);
  }
  const double alpha = cfg.potential.centre(static_cast<std::size_t>(cfg.sweep.centre)).exponent;
  report["expected_exponent"] = 0.5 * (2.0 - alpha);
  write_json(out / "sweep.json", report);
  write_json(out / "manifest.json", manifest("sweep-eps", cfg, {"sweep.csv", "sweep.json", "manifest.json"}));
  return ok ? 0 : 1;
}

int cmd_oracle(const ExperimentConfig& cfg, const fs::path& out) {
  fs::create_directories(out);
  CsvWriter csv;
  csv.header({"alpha", "quadrature", "closed_form", "abs_error"});
  json jrows = json::array();
  bool ok = true;
  for (double a : cfg.oracle_alphas) {
    const double q = parabolic_angle_quadrature(a);
    const double closed = std::numbers::pi / (2.0 - a);
    const double err = std::abs(q - closed);
    if (!(err <= 1e-8)) ok = false;
    csv.row({a, q, closed, err});
    jrows.push_back({{"alpha", a}, {"quadrature", q}, {"closed_form", closed}, {"abs_error", err}});
  }
  write_text(out / "oracle.csv", csv.str());
  write_json(out / "oracle.json", {{"rows", jrows}, {"tolerance", 1e-8}, {"pass", ok}});
  write_json(out / "manifest.json", manifest("oracle", cfg, {"oracle.csv", "oracle.json", "manifest.json"}));
  return ok ? 0 : 1;
}

int cmd_lc_check(const ExperimentConfig& cfg, const fs::path& out, int jobs) {
  for (const auto& c : cfg.potential.centres())
    if (cfg.lc.centre < 0 && c.exponent != 1.0)
      throw Error(ErrorCode::invalid_config, "lc.centre: automatic choice needs alpha = 1 at every centre");
  if (cfg.lc.centre >= 0 && cfg.potential.centre(static_cast<std::size_t>(cfg.lc.centre)).exponent != 1.0)
    throw Error(ErrorCode::invalid_config, "lc.centre: the Levi-Civita transform needs alpha = 1");
  fs::create_directories(out);
  const auto runs = run_solve(cfg, jobs);
  std::vector<std::string> files{"lc_diagnostics.json"};
  json jruns = json::array();
  bool ok = true;
  for (const auto& run : runs) {
    json jr = {{"start", run.start}, {"seed", run.seed}};
    if (!run.result) {
      jr["error"] = run.error;
      ok = false;
      jruns.push_back(std::move(jr));
      continue;
    }
    const auto& r = *run.result;
    const int k = lc_centre_for(run, cfg);
    jr["centre"] = k;
    jr["classification"] = to_string(r.classification);
    try {
      const LCPath lc = to_lc(r.path, cfg.potential, k);
      jr["diagnostics"] = to_json(lc_diagnostics(r.path, cfg.potential, cfg.h, k));
      const auto f = regularized_maupertuis(lc, cfg.potential, cfg.h, k);
      jr["omega_tilde_sq"] = f.omega_sq;
      for (auto form : {LCForm::euler_lagrange, LCForm::displayed}) {
        const auto res = lc_ode_residual(lc, f.omega_sq, cfg.potential, cfg.h, k, form);
        const double scale = lc_ode_scale(lc, f.omega_sq, cfg.potential, cfg.h, k, form);
        const double sup = res.empty() ? 0.0 : *std::max_element(res.begin(), res.end());
        jr[form == LCForm::euler_lagrange ? "residual_euler_lagrange" : "residual_displayed"] = {
            {"sup", sup}, {"scale", scale}, {"relative", scale > 0.0 ? sup / scale : 0.0}};
      }
      if (run.collision_time) {
        const double tau1 = lc_tau_at(lc, *run.collision_time);
        jr["tau1"] = tau1;
        jr["symmetry_defect"] = lc_symmetry_defect(lc, tau1);
        jr["symmetry_pass"] = lc_symmetry_check(lc, tau1, 5e-2);
      }
      CsvWriter csv;
      csv.header({"tau", "re_w", "im_w"});
      const int n = lc.segments();
      for (int j = 0; j <= n; ++j) csv.row({double(j) / n, lc.w[j].real(), lc.w[j].imag()});
      const std::string name = "lc_" + std::to_string(run.start) + ".csv";
      write_text(out / name, csv.str());
      files.push_back(name);
      jr["w_samples"] = name;
    } catch (const Error& e) {
      jr["error"] = error_text(e);
      ok = false;
    }
    jruns.push_back(std::move(jr));
  }
  write_json(out / "lc_diagnostics.json", {{"runs", jruns}});
  files.push_back("manifest.json");
  write_json(out / "manifest.json", manifest("lc-check", cfg, files));
  return ok ? 0 : 1;
}

}  // namespace ncentre
