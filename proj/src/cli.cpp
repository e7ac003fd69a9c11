#include "sdde/cli.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "sdde/classifier.hpp"
#include "sdde/errors.hpp"
#include "sdde/integrator.hpp"
#include "sdde/model.hpp"
#include "sdde/projection.hpp"
#include "sdde/reduction.hpp"
#include "sdde/segment.hpp"
#include "sdde/spectrum.hpp"

namespace sdde::cli {

namespace {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------- config --

[[noreturn]] void config_error(int line, const std::string& what) {
  throw PreconditionError("config line " + std::to_string(line) + ": " + what);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

Json parse_scalar(const std::string& v, int line) {
  if (v == "true") return true;
  if (v == "false") return false;
  if (!v.empty() && v.front() == '"') {
    if (v.size() < 2 || v.back() != '"')
      config_error(line, "unterminated string");
    std::string out;
    for (size_t i = 1; i + 1 < v.size(); ++i) {
      if (v[i] == '\\' && i + 2 < v.size()) {
        ++i;
        out += v[i] == 'n' ? '\n' : v[i];
      } else {
        out += v[i];
      }
    }
    return out;
  }
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (end != v.c_str() + v.size() || v.empty())
    config_error(line, "cannot parse value '" + v + "'");
  if (v.find_first_of(".eE") == std::string::npos &&
      std::fabs(d) < 9.2e18)
    return static_cast<long long>(d);
  return d;
}

Json parse_value(const std::string& v, int line) {
  if (!v.empty() && v.front() == '[') {
    if (v.back() != ']') config_error(line, "unterminated array");
    Json arr = Json::array();
    std::string body = v.substr(1, v.size() - 2);
    std::string item;
    bool quoted = false;
    for (char ch : body) {
      if (ch == '"') quoted = !quoted;
      if (ch == ',' && !quoted) {
        if (!trim(item).empty()) arr.push_back(parse_scalar(trim(item), line));
        item.clear();
      } else {
        item += ch;
      }
    }
    if (!trim(item).empty()) arr.push_back(parse_scalar(trim(item), line));
    return arr;
  }
  return parse_scalar(v, line);
}

// Minimal TOML subset: comments, [table] / [table.sub] headers, key = value
// with strings, bools, numbers and one-line arrays.  Everything the config
// schema needs and nothing more; files may equivalently be JSON.
Json parse_toml(const std::string& text) {
  Json root = Json::object();
  Json* current = &root;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') config_error(line, "unterminated table header");
      const std::string path = trim(s.substr(1, s.size() - 2));
      if (path.empty()) config_error(line, "empty table header");
      current = &root;
      std::istringstream ps(path);
      std::string part;
      while (std::getline(ps, part, '.')) {
        part = trim(part);
        if (part.empty()) config_error(line, "bad table path '" + path + "'");
        current = &(*current)[part];
        if (!current->is_object() && !current->is_null())
          config_error(line, "'" + path + "' is not a table");
        if (current->is_null()) *current = Json::object();
      }
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      config_error(line, "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string val = trim(s.substr(eq + 1));
    if (key.empty() ||
        key.find_first_not_of("ABCDEFGHIJKLMNOPQRSTUVWXYZ"
                              "abcdefghijklmnopqrstuvwxyz0123456789_-") !=
            std::string::npos)
      config_error(line, "bad key '" + key + "'");
    if (current->contains(key))
      config_error(line, "duplicate key '" + key + "'");
    (*current)[key] = parse_value(val, line);
  }
  return root;
}

Json load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw PreconditionError("cannot open config: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  const std::string text = ss.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  const bool looks_json =
      path.size() > 5 && path.substr(path.size() - 5) == ".json";
  if (looks_json || (first != std::string::npos && text[first] == '{')) {
    try {
      return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw PreconditionError(std::string("config: ") + e.what());
    }
  }
  return parse_toml(text);
}

const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys{
      "model.a",        "model.grid_nodes", "model.domain_radius",
      "model.delay.kind", "model.delay.c",  "model.delay.r0",
      "simulate.eps",   "simulate.T",       "simulate.dt",
      "simulate.stride", "simulate.init",   "simulate.blowup",
      "spectrum.window",
      "reduce.eps",     "reduce.T",         "reduce.stride",
      "reduce.z_lo",    "reduce.z_hi",
      "classify.T",
      "attract.eps",    "attract.bump",     "attract.T",
      "sweep.a_values", "sweep.task",
      "outdir",         "jobs",             "seed"};
  return keys;
}

void check_known(const Json& j, const std::string& prefix) {
  for (const auto& [key, val] : j.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (val.is_object()) {
      bool is_table_prefix = false;
      for (const auto& k : known_config_keys())
        if (k.rfind(path + ".", 0) == 0) is_table_prefix = true;
      if (!is_table_prefix)
        throw PreconditionError("config: unknown table '" + path + "'");
      check_known(val, path);
    } else if (known_config_keys().count(path) == 0) {
      throw PreconditionError("config: unknown key '" + path + "'");
    }
  }
}

const Json* find_path(const Json& j, std::initializer_list<const char*> path) {
  const Json* cur = &j;
  for (const char* p : path) {
    if (!cur->is_object() || !cur->contains(p)) return nullptr;
    cur = &(*cur)[p];
  }
  return cur;
}

void get_config(const Json& j, std::initializer_list<const char*> path,
                double& out) {
  if (const Json* v = find_path(j, path)) out = v->get<double>();
}
void get_config(const Json& j, std::initializer_list<const char*> path,
                int& out) {
  if (const Json* v = find_path(j, path)) out = v->get<int>();
}
void get_config(const Json& j, std::initializer_list<const char*> path,
                unsigned& out) {
  if (const Json* v = find_path(j, path)) out = v->get<unsigned>();
}
void get_config(const Json& j, std::initializer_list<const char*> path,
                std::string& out) {
  if (const Json* v = find_path(j, path)) out = v->get<std::string>();
}
void get_config(const Json& j, std::initializer_list<const char*> path,
                std::vector<double>& out) {
  if (const Json* v = find_path(j, path)) out = v->get<std::vector<double>>();
}

// ----------------------------------------------------------------- state --

struct Cfg {
  // model
  double a = 0.5;
  std::string delay_kind = "constant";
  double delay_c = 1.0;
  double delay_r0 = 1.0;
  int grid_nodes = Segment::kDefaultIntervals + 1;
  double domain_radius = 10.0;
  // simulate
  double sim_eps = 0.1;
  double sim_T = 100.0;
  double sim_dt = 1e-3;
  double sim_stride = 0.1;
  std::string sim_init;
  double sim_blowup = 5.0;
  // spectrum
  std::vector<double> window{-5.0, 2.0, -40.0, 40.0};
  // reduce
  std::vector<double> red_eps{0.05, 0.1, 0.15};
  double red_T = 100.0;
  double red_stride = 0.1;
  double red_z_lo = 5e-3;
  double red_z_hi = 1.5e-2;
  // classify
  double cls_T = 100.0;
  // attract
  double att_eps = 0.1;
  double att_bump = 0.05;
  // Past t ~ 4 the gap between the run and its shadow is dominated by the
  // second-order center drift, which decays algebraically; the exponential
  // rate is only readable on a short horizon.
  double att_T = 3.0;
  // sweep
  std::vector<double> sweep_a{0.25, 0.5, 0.75, 1.0, 1.5, 2.0};
  std::string sweep_task = "classify";
  // global
  std::string outdir = ".";
  int jobs = 0;
  unsigned seed = 12345;

  void apply(const Json& j) {
    check_known(j, "");
    get_config(j, {"model", "a"}, a);
    get_config(j, {"model", "grid_nodes"}, grid_nodes);
    get_config(j, {"model", "domain_radius"}, domain_radius);
    get_config(j, {"model", "delay", "kind"}, delay_kind);
    get_config(j, {"model", "delay", "c"}, delay_c);
    get_config(j, {"model", "delay", "r0"}, delay_r0);
    get_config(j, {"simulate", "eps"}, sim_eps);
    get_config(j, {"simulate", "T"}, sim_T);
    get_config(j, {"simulate", "dt"}, sim_dt);
    get_config(j, {"simulate", "stride"}, sim_stride);
    get_config(j, {"simulate", "init"}, sim_init);
    get_config(j, {"simulate", "blowup"}, sim_blowup);
    get_config(j, {"spectrum", "window"}, window);
    get_config(j, {"reduce", "eps"}, red_eps);
    get_config(j, {"reduce", "T"}, red_T);
    get_config(j, {"reduce", "stride"}, red_stride);
    get_config(j, {"reduce", "z_lo"}, red_z_lo);
    get_config(j, {"reduce", "z_hi"}, red_z_hi);
    get_config(j, {"classify", "T"}, cls_T);
    get_config(j, {"attract", "eps"}, att_eps);
    get_config(j, {"attract", "bump"}, att_bump);
    get_config(j, {"attract", "T"}, att_T);
    get_config(j, {"sweep", "a_values"}, sweep_a);
    get_config(j, {"sweep", "task"}, sweep_task);
    get_config(j, {"outdir"}, outdir);
    get_config(j, {"jobs"}, jobs);
    get_config(j, {"seed"}, seed);
  }
};

Model make_model(const Cfg& c) {
  Model m;
  m.a = c.a;
  if (c.delay_kind == "constant")
    m.delay = DelayFunction::constant(c.delay_r0);
  else if (c.delay_kind == "rational_bump")
    m.delay = DelayFunction::rational_bump(c.delay_c);
  else
    throw PreconditionError("unknown delay kind '" + c.delay_kind +
                            "' (constant | rational_bump)");
  m.grid_nodes = c.grid_nodes;
  m.domain_radius = c.domain_radius;
  return m;
}

Rect rect_from(const std::vector<double>& w) {
  if (w.size() != 4)
    throw PreconditionError(
        "window needs 4 entries: re_min,re_max,im_min,im_max");
  if (!(w[0] < w[1]) || !(w[2] < w[3]))
    throw PreconditionError("window: need re_min < re_max, im_min < im_max");
  return Rect{w[0], w[1], std::max(std::fabs(w[2]), std::fabs(w[3]))};
}

std::string resolve(const std::string& outdir, const std::string& name) {
  std::filesystem::path p(name);
  if (p.is_absolute()) return name;
  return (std::filesystem::path(outdir) / p).string();
}

void prepare_outputs(const std::string& outdir,
                     const std::vector<std::string>& paths) {
  std::error_code ec;
  std::filesystem::create_directories(outdir, ec);
  for (const auto& p : paths) {
    std::ofstream f(p, std::ios::app);
    if (!f) throw PreconditionError("output path not writable: " + p);
  }
}

int resolve_jobs(int requested) {
  if (requested > 0) return requested;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw PreconditionError("output path not writable: " + path);
  f << text;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ----------------------------------------------------------- subcommands --

int cmd_spectrum(const Cfg& cfg, const std::optional<double>& A,
                 const std::optional<double>& B, const std::string& out) {
  const std::string path = resolve(cfg.outdir, out);
  prepare_outputs(cfg.outdir, {path});
  LinearCoeffs lc = (A && B) ? LinearCoeffs{*A, *B}
                             : LinearCoeffs::exchange_rate(cfg.a);
  if (A.has_value() != B.has_value())
    throw PreconditionError("--A and --B must be given together");
  const SpectrumSplit split = find_roots(rect_from(cfg.window), lc);
  write_roots_csv_file(path, split);
  std::printf("spectrum: counted=%d found=%d sigma_u=%zu sigma_c=%zu "
              "sigma_s=%zu -> %s\n",
              split.counted, split.found, split.sigma_u.size(),
              split.sigma_c.size(), split.sigma_s.size(), path.c_str());
  return 0;
}

int cmd_simulate(const Cfg& cfg, const std::string& out) {
  const std::string path = resolve(cfg.outdir, out);
  prepare_outputs(cfg.outdir, {path});
  const Model m = make_model(cfg);
  const Segment phi = cfg.sim_init.empty()
                          ? make_admissible(m, cfg.sim_eps)
                          : read_segment_csv_file(cfg.sim_init);
  IntegrateOptions io;
  io.dt = cfg.sim_dt;
  io.blowup_bound = cfg.sim_blowup;
  io.rng_seed = cfg.seed;
  const Trajectory tr = integrate(m, phi, cfg.sim_T, io);
  write_trajectory_csv_file(path, tr, cfg.sim_stride);
  std::printf("simulate: status=%s end=%s x(end)=%s -> %s\n",
              trajectory_status_name(tr.status), fmt(tr.end_time()).c_str(),
              fmt(tr.value(tr.end_time())).c_str(), path.c_str());
  return tr.status == TrajectoryStatus::step_failure ? 3 : 0;
}

FitOptions fit_options(const Cfg& cfg) {
  FitOptions fo;
  fo.stride = cfg.red_stride;
  fo.z_abs_lo = cfg.red_z_lo;
  fo.z_abs_hi = cfg.red_z_hi;
  return fo;
}

int cmd_reduce(const Cfg& cfg, const std::string& out_fit,
               const std::string& out_curve) {
  const std::string fit_path = resolve(cfg.outdir, out_fit);
  const std::string curve_path = resolve(cfg.outdir, out_curve);
  prepare_outputs(cfg.outdir, {fit_path, curve_path});

  const Model m = make_model(cfg);
  const CenterBasis basis(m.a);
  IntegrateOptions io;
  io.rng_seed = cfg.seed;
  std::vector<Trajectory> runs;
  for (double eps : cfg.red_eps)
    runs.push_back(integrate(m, make_admissible(m, eps), cfg.red_T, io));

  const ReducedFit fit = fit_reduced_field(runs, basis, fit_options(cfg));
  write_text(fit_path, fit_report_json(fit));

  std::string csv = "run,t,z\n";
  for (size_t k = 0; k < runs.size(); ++k) {
    const double end = runs[k].end_time();
    for (double t = 0.0; t <= end + 1e-12; t += cfg.red_stride) {
      const double tt = std::min(t, end);
      csv += std::to_string(k) + "," + fmt(tt) + "," +
             fmt(center_coordinate(basis, runs[k], tt)) + "\n";
    }
  }
  write_text(curve_path, csv);

  std::printf("reduce: c_analytic=%s c_fitted=%s stderr=%s n=%d -> %s, %s\n",
              fmt(fit.c_analytic).c_str(), fmt(fit.c_fitted).c_str(),
              fmt(fit.stderr_value).c_str(), fit.n_samples, fit_path.c_str(),
              curve_path.c_str());
  return 0;
}

ClassifyOptions classify_options(const Cfg& cfg) {
  ClassifyOptions co;
  co.window = rect_from(cfg.window);
  co.probe_eps = cfg.red_eps;
  co.fit_T = cfg.cls_T;
  co.fit = fit_options(cfg);
  co.integ.rng_seed = cfg.seed;
  return co;
}

int cmd_classify(const Cfg& cfg, const std::string& out) {
  const std::string path = resolve(cfg.outdir, out);
  prepare_outputs(cfg.outdir, {path});
  const Model m = make_model(cfg);
  const StabilityVerdict v = classify(m, classify_options(cfg));
  write_text(path, verdict_report_json(v, m.a));
  std::printf("classify: a=%s -> %s (%s) -> %s\n", fmt(m.a).c_str(),
              verdict_name(v.verdict), v.branch.c_str(), path.c_str());
  if (!v.note.empty()) std::printf("classify: note: %s\n", v.note.c_str());
  return 0;
}

int cmd_attract(const Cfg& cfg, const std::string& out) {
  const std::string path = resolve(cfg.outdir, out);
  prepare_outputs(cfg.outdir, {path});
  const Model m = make_model(cfg);
  const auto kappa = real_root_kappa(m.a);
  if (!kappa)
    throw PreconditionError("attract: no nonzero real root at a = 1");

  const Segment base = make_admissible(m, cfg.att_eps);
  const double k = *kappa;
  const Segment shape = Segment::from_function(
      [=](double th) { return std::exp(k * th); },
      [=](double th) { return k * std::exp(k * th); }, m.h, m.grid_nodes);
  const Segment bump = (cfg.att_bump / shape.norm_c1()) * shape;
  const Segment phi = correct_to_admissible(m, base + bump);

  IntegrateOptions io;
  io.rng_seed = cfg.seed;
  const AttractionReport rep = verify_attraction(m, phi, cfg.att_T, io);

  Json j;
  j["a"] = m.a;
  j["kappa_abs"] = std::fabs(k);
  j["rate"] = rep.rate;
  j["r2"] = rep.r2;
  j["n_points"] = rep.n_points;
  j["T"] = rep.T;
  j["trivial"] = rep.trivial;
  write_text(path, j.dump(2) + "\n");
  std::printf("attract: rate=%s |kappa|=%s r2=%s -> %s\n",
              fmt(rep.rate).c_str(), fmt(std::fabs(k)).c_str(),
              fmt(rep.r2).c_str(), path.c_str());
  return 0;
}

int cmd_sweep(const Cfg& cfg, const std::string& out) {
  const std::string path = resolve(cfg.outdir, out);
  prepare_outputs(cfg.outdir, {path});
  if (cfg.sweep_task != "classify" && cfg.sweep_task != "spectrum" &&
      cfg.sweep_task != "reduce")
    throw PreconditionError("sweep: task must be classify|spectrum|reduce");

  const size_t n = cfg.sweep_a.size();
  std::vector<std::string> rows(n);
  std::atomic<size_t> next{0};

  auto worker = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= n) return;
      const double a = cfg.sweep_a[i];
      Cfg local = cfg;
      local.a = a;
      local.seed = cfg.seed + static_cast<unsigned>(i);
      std::string verdict, c_fitted, rightmost, err;
      std::string kappa_s;
      try {
        const auto kappa = real_root_kappa(a);
        if (kappa) kappa_s = fmt(*kappa);
        if (cfg.sweep_task == "spectrum") {
          const auto split = find_roots(rect_from(local.window),
                                        LinearCoeffs::exchange_rate(a));
          const double rs = split.rightmost_stable_re();
          if (std::isfinite(rs)) rightmost = fmt(rs);
          verdict = split.sigma_u.empty()
                        ? (split.sigma_c.empty() ? "stable-spectrum"
                                                 : "critical-spectrum")
                        : "unstable-spectrum";
        } else if (cfg.sweep_task == "reduce") {
          const Model m = make_model(local);
          const CenterBasis basis(a);
          IntegrateOptions io;
          io.rng_seed = local.seed;
          std::vector<Trajectory> runs;
          for (double eps : local.red_eps)
            runs.push_back(integrate(m, make_admissible(m, eps), local.red_T,
                                     io));
          const ReducedFit fit =
              fit_reduced_field(runs, basis, fit_options(local));
          c_fitted = fmt(fit.c_fitted);
          verdict = "fitted";
        } else {
          const Model m = make_model(local);
          const StabilityVerdict v = classify(m, classify_options(local));
          verdict = verdict_name(v.verdict);
          if (v.reduced) c_fitted = fmt(v.reduced->c_fitted);
          const double rs = v.spectrum.rightmost_stable_re();
          if (std::isfinite(rs)) rightmost = fmt(rs);
        }
      } catch (const std::exception& e) {
        err = e.what();
        for (auto& ch : err)
          if (ch == ',' || ch == '\n') ch = ';';
      }
      rows[i] = fmt(a) + "," + verdict + "," + kappa_s + "," + c_fitted +
                "," + rightmost + "," + err;
    }
  };

  const int jobs =
      std::min<int>(resolve_jobs(cfg.jobs), static_cast<int>(std::max<size_t>(n, 1)));
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::string csv = "a,verdict,kappa,c_fitted,rightmost_stable_re,error\n";
  for (const auto& r : rows) csv += r + "\n";
  write_text(path, csv);
  std::printf("sweep: %zu values, task=%s, jobs=%d -> %s\n", n,
              cfg.sweep_task.c_str(), jobs, path.c_str());
  return 0;
}

int preset_roots(const Cfg& cfg) {
  int rc = 0;
  for (double a : {0.5, 1.0, 2.0}) {
    Cfg local = cfg;
    local.a = a;
    char name[32];
    std::snprintf(name, sizeof name, "roots_%g.csv", a);
    rc |= cmd_spectrum(local, std::nullopt, std::nullopt, name);
  }
  return rc;
}

int preset_stable_demo(Cfg cfg) {
  // decay toward 0 at a < 1: verdict, trajectory tail, reduced-field fit
  int rc = cmd_classify(cfg, "verdict.json");
  Cfg sim = cfg;
  sim.sim_eps = 0.1;
  sim.sim_T = 200.0;
  sim.sim_stride = 0.1;
  rc |= cmd_simulate(sim, "decay.csv");
  rc |= cmd_reduce(cfg, "fit.json", "reduced.csv");

  // headline number: t * x(t) approaches 1 - a
  const Model m = make_model(sim);
  const Segment phi = make_admissible(m, sim.sim_eps);
  IntegrateOptions io;
  io.rng_seed = cfg.seed;
  const Trajectory tr = integrate(m, phi, sim.sim_T, io);
  double acc = 0.0;
  int cnt = 0;
  for (double t = 100.0; t <= std::min(200.0, tr.end_time()); t += 1.0) {
    acc += t * tr.value(t);
    ++cnt;
  }
  if (cnt > 0)
    std::printf("stable demo: mean of t*x(t) on [100,200] = %s (1-a = %s)\n",
                fmt(acc / cnt).c_str(), fmt(1.0 - m.a).c_str());
  return rc;
}

int preset_unstable_demo(Cfg cfg) {
  int rc = cmd_classify(cfg, "verdict.json");

  const std::string esc_path = resolve(cfg.outdir, "escape.csv");
  const std::string growth_path = resolve(cfg.outdir, "growth.json");
  prepare_outputs(cfg.outdir, {esc_path, growth_path});

  const Model m = make_model(cfg);
  const auto kappa = real_root_kappa(m.a);
  const Segment phi = make_admissible(m, 1e-4);
  IntegrateOptions io;
  io.rng_seed = cfg.seed;
  io.blowup_bound = 0.01; // run exactly until the iterate escapes the
                          // linearization scale
  const Trajectory tr = integrate(m, phi, 40.0, io);
  write_trajectory_csv_file(esc_path, tr, 0.01);

  // growth exponent of ln|x| against t
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (double t = 1.0; t <= tr.end_time(); t += 0.05) {
    const double v = std::fabs(tr.value(t));
    if (v < 1e-12) continue;
    sx += t;
    sy += std::log(v);
    sxx += t * t;
    sxy += t * std::log(v);
    ++n;
  }
  const double rate =
      n > 1 ? (sxy - sx * sy / n) / (sxx - sx * sx / n) : 0.0;

  Json j;
  j["a"] = m.a;
  j["kappa"] = kappa ? Json(*kappa) : Json(nullptr);
  j["rate_fitted"] = rate;
  j["escape_time"] = tr.end_time();
  j["escaped"] = tr.status == TrajectoryStatus::blowup_stopped;
  write_text(growth_path, j.dump(2) + "\n");
  std::printf("unstable demo: escape_time=%s rate=%s kappa=%s\n",
              fmt(tr.end_time()).c_str(), fmt(rate).c_str(),
              kappa ? fmt(*kappa).c_str() : "none");
  return rc;
}

// ------------------------------------------------------------------ main --

int dispatch(int argc, const char* const* argv) {
  Cfg cfg;

  // The config file seeds the defaults; explicit flags then override.
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") cfg.apply(load_config(argv[i + 1]));

  CLI::App app{"stability toolkit for a state-dependent-delay exchange-rate "
               "model"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "TOML or JSON config file");
  app.add_option("--outdir", cfg.outdir, "directory for output files");
  app.add_option("--jobs", cfg.jobs, "worker threads for sweep")
      ->envname("SDDE_STAB_JOBS");
  app.add_option("--seed", cfg.seed, "seed for reproducible spot checks");

  auto add_model_flags = [&](CLI::App* sub) {
    sub->add_option("--a", cfg.a, "feedback gain");
    sub->add_option("--delay", cfg.delay_kind,
                    "delay kind: constant | rational_bump");
    sub->add_option("--delay-c", cfg.delay_c, "bump parameter c");
    sub->add_option("--delay-r0", cfg.delay_r0, "constant delay value");
    sub->add_option("--grid-nodes", cfg.grid_nodes, "segment grid nodes");
  };

  auto* sp = app.add_subcommand("spectrum", "characteristic roots in a window");
  std::optional<double> genA, genB;
  std::string sp_out = "roots.csv";
  add_model_flags(sp);
  sp->add_option("--A", genA, "coefficient of v(t) (generic linear mode)");
  sp->add_option("--B", genB, "coefficient of v(t-1) (generic linear mode)");
  sp->add_option("--window", cfg.window,
                 "re_min,re_max,im_min,im_max (use --window=... for "
                 "negative values)")
      ->delimiter(',')
      ->expected(4);
  sp->add_option("--out", sp_out, "roots CSV path");

  auto* sim = app.add_subcommand("simulate", "integrate one trajectory");
  std::string sim_out = "trajectory.csv";
  add_model_flags(sim);
  sim->add_option("--eps", cfg.sim_eps, "admissible profile height");
  sim->add_option("--init", cfg.sim_init, "segment CSV instead of --eps");
  sim->add_option("--T", cfg.sim_T, "horizon");
  sim->add_option("--dt", cfg.sim_dt, "step size");
  sim->add_option("--stride", cfg.sim_stride, "output sampling stride");
  sim->add_option("--blowup", cfg.sim_blowup, "stop once |x| reaches this");
  sim->add_option("--out", sim_out, "trajectory CSV path");

  auto* red = app.add_subcommand("reduce", "fit the reduced field");
  std::string red_fit = "fit.json", red_curve = "reduced.csv";
  add_model_flags(red);
  red->add_option("--eps", cfg.red_eps, "probe heights")->delimiter(',');
  red->add_option("--T", cfg.red_T, "horizon per probe");
  red->add_option("--stride", cfg.red_stride, "sampling stride");
  red->add_option("--z-lo", cfg.red_z_lo, "amplitude band lower edge");
  red->add_option("--z-hi", cfg.red_z_hi, "amplitude band upper edge");
  red->add_option("--out-fit", red_fit, "fit JSON path");
  red->add_option("--out-curve", red_curve, "z(t) samples CSV path");

  auto* cls = app.add_subcommand("classify", "full stability verdict");
  std::string cls_out = "verdict.json";
  add_model_flags(cls);
  cls->add_option("--T", cfg.cls_T, "probe horizon");
  cls->add_option("--window", cfg.window, "spectral window")
      ->delimiter(',')
      ->expected(4);
  cls->add_option("--out", cls_out, "verdict JSON path");

  auto* att = app.add_subcommand("attract", "shadow-trajectory decay rate");
  std::string att_out = "attract.json";
  add_model_flags(att);
  att->add_option("--eps", cfg.att_eps, "base profile height");
  att->add_option("--bump", cfg.att_bump, "off-center perturbation size");
  att->add_option("--T", cfg.att_T, "horizon");
  att->add_option("--out", att_out, "report JSON path");

  auto* sw = app.add_subcommand("sweep", "batch a task over gain values");
  std::string sw_out = "sweep.csv";
  sw->add_option("--a-values", cfg.sweep_a, "gains to visit")->delimiter(',');
  sw->add_option("--task", cfg.sweep_task, "classify | spectrum | reduce");
  sw->add_option("--out", sw_out, "summary CSV path");

  auto* pre = app.add_subcommand("preset", "canned experiment bundles");
  std::string preset_name;
  pre->add_option("name", preset_name,
                  "prop41 | prop42 | roots | reduce | attract")
      ->required();
  pre->add_option("--a", cfg.a, "override the preset gain");

  for (auto* sub : app.get_subcommands([](const CLI::App*) { return true; }))
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (sp->parsed()) return cmd_spectrum(cfg, genA, genB, sp_out);
  if (sim->parsed()) return cmd_simulate(cfg, sim_out);
  if (red->parsed()) return cmd_reduce(cfg, red_fit, red_curve);
  if (cls->parsed()) return cmd_classify(cfg, cls_out);
  if (att->parsed()) return cmd_attract(cfg, att_out);
  if (sw->parsed()) return cmd_sweep(cfg, sw_out);
  if (pre->parsed()) {
    const bool a_given = pre->count("--a") > 0;
    if (preset_name == "roots") return preset_roots(cfg);
    if (preset_name == "prop42") {
      if (!a_given) cfg.a = 0.5;
      return preset_stable_demo(cfg);
    }
    if (preset_name == "prop41") {
      if (!a_given) cfg.a = 2.0;
      return preset_unstable_demo(cfg);
    }
    if (preset_name == "reduce") {
      if (!a_given) cfg.a = 0.5;
      return cmd_reduce(cfg, "fit.json", "reduced.csv");
    }
    if (preset_name == "attract") {
      if (!a_given) cfg.a = 0.5;
      return cmd_attract(cfg, "attract.json");
    }
    throw PreconditionError("unknown preset '" + preset_name + "'");
  }
  return 0;
}

} // namespace

int run(int argc, const char* const* argv) {
  try {
    return dispatch(argc, argv);
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ModelViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
}

int run(const std::vector<std::string>& args) {
  std::vector<std::string> all;
  all.emplace_back("sdde-stab");
  all.insert(all.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  argv.reserve(all.size());
  for (const auto& s : all) argv.push_back(s.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

} // namespace sdde::cli
