#include "stretchlab/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <json.hpp>
#include <limits>
#include <sstream>

#include "stretchlab/ergopt.hpp"
#include "stretchlab/errors.hpp"
#include "stretchlab/io.hpp"

namespace stretchlab::pipeline {

using nlohmann::json;
namespace fs = std::filesystem;

std::string version() { return STRETCHLAB_VERSION; }

namespace {

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::ConfigInvalid, path + " " + what);
}

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) invalid(path, "must be an object");
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      invalid(path.empty() ? key : path + "." + key, "is not a known field");
    }
  }
}

double get_number(const json& j, const char* key, const std::string& path, double fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  if (!j.at(key).is_number()) invalid(path + "." + key, "must be a number");
  return j.at(key).get<double>();
}

int get_int(const json& j, const char* key, const std::string& path, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) invalid(path + "." + key, "must be an integer");
  return j.at(key).get<int>();
}

bool get_bool(const json& j, const char* key, const std::string& path, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) invalid(path + "." + key, "must be true or false");
  return j.at(key).get<bool>();
}

std::optional<double> get_optional(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return get_number(j, key, path, 0.0);
}

std::vector<double> get_grid(const json& j, const char* key, const std::string& path) {
  std::vector<double> out;
  if (!j.contains(key)) return out;
  const auto& a = j.at(key);
  if (!a.is_array()) invalid(path + "." + key, "must be an array of numbers");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_number()) invalid(path + "." + key + "[" + std::to_string(i) + "]", "must be a number");
    out.push_back(a[i].get<double>());
  }
  return out;
}

std::string factor_text(const json& j, const std::string& path, const SurfaceGroup& group) {
  if (!j.is_object()) invalid(path, "must be an object");
  try {
    (void)metric::factor_from_json(j.dump(), group);
  } catch (const Error& e) {
    std::string msg = e.what();
    if (msg.rfind("factor", 0) == 0) {
      msg = path + msg.substr(6);
    } else {
      msg = path + ": " + msg;
    }
    throw Error(ErrorCode::ConfigInvalid, msg);
  }
  return j.dump();
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::vector<double> default_thermo_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 16; ++i) g.push_back(0.5 * i);
  g.push_back(20.0);
  g.push_back(50.0);
  return g;
}

std::vector<double> sft_grid(const SftSettings& s) {
  if (!s.r_grid.empty()) return s.r_grid;
  std::vector<double> g;
  for (int i = 0; i <= 16; ++i) g.push_back(0.5 * i);
  for (double r : {10.0, 20.0, 50.0, 100.0, 200.0, 500.0}) {
    if (r < s.r_max) g.push_back(r);
  }
  g.push_back(s.r_max);
  return g;
}

}  // namespace

std::string ExperimentConfig::canonical_json() const {
  json j;
  j["name"] = name;
  j["budget"] = budget;
  j["metric"] = {{"source", json::parse(source)}, {"target", json::parse(target)}, {"enabled", has_metric}};
  j["classes"] = {{"max_word_len", cutoffs.max_word_len},
                  {"max_length", optional_json(cutoffs.max_length)},
                  {"min_length", optional_json(cutoffs.min_length)},
                  {"merge_conjugates", cutoffs.merge_conjugates}};
  j["lengths"] = {{"points_per_unit", lengths.points_per_unit}, {"min_points", lengths.min_points},
                  {"max_iters", lengths.max_iters},             {"tol", lengths.tol},
                  {"fd_step", lengths.fd_step},                 {"fixed_points", lengths.fixed_points}};
  j["stretch"] = {{"enabled", stretch.enabled},
                  {"delta", stretch.delta},
                  {"expect_S_lower", optional_json(stretch.expect_S_lower)},
                  {"tolerance", stretch.S_tolerance},
                  {"lip_grid", {stretch.lip_radial, stretch.lip_angular}}};
  j["thermo"] = {{"enabled", thermo.enabled},       {"max_word_len", thermo.max_word_len},
                 {"max_length", thermo.max_length}, {"swap_pair", thermo.swap_pair},
                 {"window", {thermo.window.T, thermo.window.dT}},
                 {"r_grid", thermo.r_grid},         {"step", thermo.step},
                 {"entropy_band", thermo.entropy_band}};
  j["sft"] = {{"enabled", sft.enabled},
              {"model", sft.model_json.empty() ? json(nullptr) : json::parse(sft.model_json)},
              {"r_max", sft.r_max},
              {"r_grid", sft.r_grid},
              {"quadrature_nodes", sft.quadrature_nodes},
              {"expect_beta", optional_json(sft.expect_beta)},
              {"defect_tolerance", sft.defect_tolerance}};
  return j.dump();
}

std::string ExperimentConfig::hash() const { return io::hex64(io::fnv1a(canonical_json())); }

ExperimentConfig parse_config(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, "", {"name", "output_dir", "workers", "budget", "metric", "classes", "lengths", "stretch", "thermo", "sft"});
  const SurfaceGroup& group = shared_bolza_group();
  ExperimentConfig c;
  if (j.contains("name")) {
    if (!j.at("name").is_string()) invalid("name", "must be a string");
    c.name = j.at("name").get<std::string>();
  }
  if (j.contains("output_dir")) {
    if (!j.at("output_dir").is_string()) invalid("output_dir", "must be a string");
    c.output_dir = j.at("output_dir").get<std::string>();
  }
  c.workers = get_int(j, "workers", "", c.workers);
  if (j.contains("budget")) {
    if (!j.at("budget").is_number_unsigned()) invalid("budget", "must be a positive integer");
    c.budget = j.at("budget").get<std::uint64_t>();
  }
  if (j.contains("metric")) {
    const auto& m = j.at("metric");
    check_keys(m, "metric", {"source", "target"});
    c.has_metric = true;
    if (m.contains("source")) c.source = factor_text(m.at("source"), "metric.source", group);
    if (m.contains("target")) c.target = factor_text(m.at("target"), "metric.target", group);
  }
  if (j.contains("classes")) {
    const auto& k = j.at("classes");
    check_keys(k, "classes", {"max_word_len", "max_length", "min_length", "merge_conjugates"});
    c.cutoffs.max_word_len = get_int(k, "max_word_len", "classes", c.cutoffs.max_word_len);
    c.cutoffs.max_length = get_optional(k, "max_length", "classes");
    c.cutoffs.min_length = get_optional(k, "min_length", "classes");
    c.cutoffs.merge_conjugates = get_bool(k, "merge_conjugates", "classes", true);
  }
  if (j.contains("lengths")) {
    const auto& l = j.at("lengths");
    check_keys(l, "lengths", {"points_per_unit", "min_points", "max_iters", "tol", "fd_step", "fixed_points"});
    c.lengths.points_per_unit = get_number(l, "points_per_unit", "lengths", c.lengths.points_per_unit);
    c.lengths.min_points = get_int(l, "min_points", "lengths", c.lengths.min_points);
    c.lengths.max_iters = get_int(l, "max_iters", "lengths", c.lengths.max_iters);
    c.lengths.tol = get_number(l, "tol", "lengths", c.lengths.tol);
    c.lengths.fd_step = get_number(l, "fd_step", "lengths", c.lengths.fd_step);
    c.lengths.fixed_points = get_int(l, "fixed_points", "lengths", c.lengths.fixed_points);
  }
  c.stretch.enabled = c.has_metric;
  if (j.contains("stretch")) {
    const auto& s = j.at("stretch");
    check_keys(s, "stretch", {"enabled", "delta", "expect_S_lower", "tolerance", "lip_grid"});
    c.stretch.enabled = get_bool(s, "enabled", "stretch", c.has_metric);
    c.stretch.delta = get_number(s, "delta", "stretch", c.stretch.delta);
    c.stretch.expect_S_lower = get_optional(s, "expect_S_lower", "stretch");
    c.stretch.S_tolerance = get_number(s, "tolerance", "stretch", c.stretch.S_tolerance);
    if (s.contains("lip_grid")) {
      const auto g = get_grid(s, "lip_grid", "stretch");
      if (g.size() != 2) invalid("stretch.lip_grid", "must be [n_radial, n_angular]");
      c.stretch.lip_radial = static_cast<int>(g[0]);
      c.stretch.lip_angular = static_cast<int>(g[1]);
    }
  }
  if (j.contains("thermo")) {
    const auto& t = j.at("thermo");
    check_keys(t, "thermo", {"enabled", "max_word_len", "max_length", "swap_pair", "window", "r_grid", "step", "entropy_band"});
    c.thermo.enabled = get_bool(t, "enabled", "thermo", true);
    c.thermo.max_word_len = get_int(t, "max_word_len", "thermo", c.thermo.max_word_len);
    c.thermo.max_length = get_number(t, "max_length", "thermo", c.thermo.max_length);
    c.thermo.swap_pair = get_bool(t, "swap_pair", "thermo", false);
    if (t.contains("window")) {
      const auto w = get_grid(t, "window", "thermo");
      if (w.size() != 2) invalid("thermo.window", "must be [T, dT]");
      c.thermo.window = {w[0], w[1]};
    }
    c.thermo.r_grid = get_grid(t, "r_grid", "thermo");
    c.thermo.step = get_number(t, "step", "thermo", c.thermo.step);
    c.thermo.entropy_band = get_number(t, "entropy_band", "thermo", c.thermo.entropy_band);
  }
  if (c.thermo.r_grid.empty()) c.thermo.r_grid = default_thermo_grid();
  if (j.contains("sft")) {
    const auto& s = j.at("sft");
    check_keys(s, "sft", {"enabled", "model", "model_file", "r_max", "r_grid", "quadrature_nodes", "expect_beta",
                          "defect_tolerance"});
    c.sft.enabled = get_bool(s, "enabled", "sft", true);
    if (s.contains("model") && s.contains("model_file")) invalid("sft", "takes model or model_file, not both");
    std::string model_text;
    if (s.contains("model")) {
      model_text = s.at("model").dump();
    } else if (s.contains("model_file")) {
      if (!s.at("model_file").is_string()) invalid("sft.model_file", "must be a string");
      fs::path p = s.at("model_file").get<std::string>();
      if (p.is_relative()) p = fs::path(base_dir) / p;
      try {
        model_text = io::read_file(p.string());
      } catch (const Error&) {
        invalid("sft.model_file", "cannot be read: " + p.string());
      }
    } else if (c.sft.enabled) {
      invalid("sft.model", "is required");
    }
    if (!model_text.empty()) {
      try {
        c.sft.model_json = ergopt::SFTModel::from_json(model_text).to_json();
      } catch (const Error& e) {
        invalid("sft.model", std::string("is invalid: ") + e.what());
      }
    }
    c.sft.r_max = get_number(s, "r_max", "sft", c.sft.r_max);
    c.sft.r_grid = get_grid(s, "r_grid", "sft");
    c.sft.quadrature_nodes = get_int(s, "quadrature_nodes", "sft", c.sft.quadrature_nodes);
    c.sft.expect_beta = get_optional(s, "expect_beta", "sft");
    c.sft.defect_tolerance = get_number(s, "defect_tolerance", "sft", c.sft.defect_tolerance);
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigInvalid, e.what());
  }
  return parse_config(text, fs::path(path).parent_path().string());
}

void validate(const ExperimentConfig& c) {
  if (c.workers < 1) invalid("workers", "must be at least 1");
  if (c.cutoffs.max_word_len < 1) invalid("classes.max_word_len", "must be at least 1");
  if (c.cutoffs.max_length && !(*c.cutoffs.max_length > 0.0)) invalid("classes.max_length", "must be positive");
  if (!(c.lengths.tol > 0.0)) invalid("lengths.tol", "must be positive");
  if (!(c.lengths.fd_step > 0.0)) invalid("lengths.fd_step", "must be positive");
  if (!(c.lengths.points_per_unit > 0.0)) invalid("lengths.points_per_unit", "must be positive");
  if (c.lengths.min_points < 4) invalid("lengths.min_points", "must be at least 4");
  if (c.lengths.max_iters < 1) invalid("lengths.max_iters", "must be positive");
  if (!(c.stretch.delta >= 0.0)) invalid("stretch.delta", "must be nonnegative");
  if (!(c.stretch.S_tolerance > 0.0)) invalid("stretch.tolerance", "must be positive");
  if (c.stretch.lip_radial < 2 || c.stretch.lip_angular < 8) invalid("stretch.lip_grid", "is too coarse");
  if (!(c.thermo.window.T > 0.0 && c.thermo.window.dT > 0.0)) invalid("thermo.window", "must be positive");
  if (!(c.thermo.step > 0.0)) invalid("thermo.step", "must be positive");
  if (!(c.thermo.entropy_band > 0.0)) invalid("thermo.entropy_band", "must be positive");
  if (c.thermo.r_grid.size() < 5) invalid("thermo.r_grid", "needs at least 5 points");
  if (!std::is_sorted(c.thermo.r_grid.begin(), c.thermo.r_grid.end())) invalid("thermo.r_grid", "must be increasing");
  if (c.thermo.max_word_len < 1) invalid("thermo.max_word_len", "must be at least 1");
  if (c.sft.enabled) {
    if (c.sft.model_json.empty()) invalid("sft.model", "is required");
    if (c.sft.r_max < 1e3) invalid("sft.r_max", "must be at least 1000");
    if (!(c.sft.defect_tolerance > 0.0)) invalid("sft.defect_tolerance", "must be positive");
    if (c.sft.quadrature_nodes < 10) invalid("sft.quadrature_nodes", "must be at least 10");
    const auto g = sft_grid(c.sft);
    if (!std::is_sorted(g.begin(), g.end()) || g.back() < 1e3) invalid("sft.r_grid", "must be increasing and reach 1000");
  }
  const std::uint64_t budget = c.budget ? c.budget : default_word_budget();
  if (c.has_metric && projected_word_count(4, c.cutoffs.max_word_len) > budget) {
    throw Error(ErrorCode::CapacityExceeded, "classes.max_word_len exceeds the word budget");
  }
  if (c.thermo.enabled && projected_word_count(4, c.thermo.max_word_len) > budget) {
    throw Error(ErrorCode::CapacityExceeded, "thermo.max_word_len exceeds the word budget");
  }
}

unsigned default_stages(const ExperimentConfig& c) {
  unsigned s = kSurface;
  if (c.has_metric) s |= kClasses | kLengths;
  if (c.has_metric && c.stretch.enabled) s |= kStretch;
  if (c.thermo.enabled) s |= kThermo;
  if (c.sft.enabled) s |= kSft;
  return s;
}

bool RunManifest::ok() const {
  return converged && std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::string RunManifest::to_json() const {
  json j;
  j["config_hash"] = config_hash;
  j["version"] = version;
  j["converged"] = converged;
  j["ok"] = ok();
  j["stages"] = json::array();
  for (const auto& s : stages) j["stages"].push_back({{"name", s.name}, {"seconds", s.seconds}});
  j["files"] = files;
  j["checks"] = json::array();
  for (const auto& c : checks) j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  return j.dump(2) + "\n";
}

std::string surface_json(const SurfaceGroup& group) {
  static const char* names[] = {"a1", "b1", "a2", "b2"};
  json j;
  j["genus"] = group.genus;
  j["systole"] = translation_length(group.generators[0]);
  j["systole_closed_form"] = octagon::systole();
  j["area"] = octagon::area();
  j["commutator_residual"] = group.commutator_relator().max_entry_diff(GroupElement());
  j["octagon_residual"] = group.octagon_relator().max_entry_diff(GroupElement());
  j["generators"] = json::array();
  for (std::size_t k = 0; k < 4; ++k) {
    const auto& g = group.generators[k];
    j["generators"].push_back({{"name", names[k]}, {"matrix", {g.a(), g.b(), g.c(), g.d()}}});
  }
  return j.dump(2) + "\n";
}

namespace {

class Runner {
 public:
  Runner(const ExperimentConfig& c, unsigned stages) : cfg_(c), stages_(stages) {
    manifest_.config_hash = c.hash();
    manifest_.version = version();
    out_ = fs::path(c.output_dir);
  }

  RunManifest run() {
    stage("surface", kSurface, [&] { surface(); });
    stage("classes", kClasses, [&] { classes(); });
    stage("lengths", kLengths, [&] { lengths(); });
    stage("stretch", kStretch, [&] { stretch_stage(); });
    stage("thermo", kThermo, [&] { thermo(); });
    stage("sft", kSft, [&] { sft(); });
    if (!stretch_report_.is_null()) {
      stretch_report_["entropy_stretch_product"] = thermo_product_ ? json(*thermo_product_) : json(nullptr);
      write("stretch_report.json", stretch_report_.dump(2) + "\n");
    }
    manifest_.files.push_back("manifest.json");
    io::write_file((out_ / "manifest.json").string(), manifest_.to_json());
    return manifest_;
  }

 private:
  void stage(const char* name, unsigned bit, const std::function<void()>& body) {
    if (!(stages_ & bit)) return;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      body();
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ConfigInvalid || e.code() == ErrorCode::CapacityExceeded) throw;
      throw Error(ErrorCode::StageFailed, std::string(name) + ": " + error_code_name(e.code()) + ": " + e.what());
    } catch (const std::exception& e) {
      throw Error(ErrorCode::StageFailed, std::string(name) + ": " + e.what());
    }
    manifest_.stages.push_back({name, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()});
  }

  void write(const std::string& name, const std::string& contents) {
    io::write_file((out_ / name).string(), contents);
    manifest_.files.push_back(name);
  }

  void check(const std::string& name, bool passed, const std::string& detail) {
    manifest_.checks.push_back({name, passed, detail});
  }

  static std::string num(double x) { return io::format_double(x); }

  const SurfaceGroup& group() const { return shared_bolza_group(); }

  stretch::MetricPair pair() const {
    return {metric::factor_from_json(cfg_.source, group()), metric::factor_from_json(cfg_.target, group())};
  }

  stretch::BuildOptions build_options() const {
    stretch::BuildOptions o;
    o.lengths = cfg_.lengths;
    o.workers = cfg_.workers;
    return o;
  }

  void surface() {
    write("surface.json", surface_json(group()));
    const double rel = group().commutator_relator().max_entry_diff(GroupElement());
    const double sys = std::abs(translation_length(group().generators[0]) - octagon::systole());
    check("surface_relation", rel <= 1e-9 && sys <= 1e-8, "relator " + num(rel) + ", systole " + num(sys));
  }

  void ensure_classes() {
    if (classes_ready_) return;
    EnumerateOptions eo;
    eo.budget = cfg_.budget;
    classes_ = enumerate_classes(group(), cfg_.cutoffs.max_word_len, cfg_.cutoffs.max_length, eo);
    if (cfg_.cutoffs.min_length) {
      std::erase_if(classes_, [&](const ConjugacyClass& c) { return c.length_g1 < *cfg_.cutoffs.min_length; });
    }
    if (cfg_.cutoffs.merge_conjugates) classes_ = merge_conjugate_classes(classes_, group()).classes;
    classes_ready_ = true;
  }

  void classes() {
    ensure_classes();
    write("classes.csv", classes_csv(classes_));
  }

  void ensure_db() {
    if (db_ready_) return;
    ensure_classes();
    db_ = stretch::build_orbit_database(classes_, pair(), build_options());
    db_.cutoffs = cfg_.cutoffs;
    for (const auto& e : db_.entries) manifest_.converged = manifest_.converged && e.converged;
    db_ready_ = true;
  }

  void lengths() {
    ensure_db();
    write("lengths.csv", stretch::ratio_csv(db_));
  }

  void stretch_stage() {
    ensure_db();
    const auto p = pair();
    const auto rep = stretch::stretch_report(db_, cfg_.stretch.delta);
    const auto lip = stretch::lip_identity(p, octagon_grid(cfg_.stretch.lip_radial, cfg_.stretch.lip_angular));
    const auto vol = stretch::volume_ratio(p);
    json j;
    j["S_lower"] = rep.S_lower;
    j["s_window"] = rep.s_window;
    j["delta"] = rep.delta;
    j["argmax_words"] = json::array();
    for (auto i : rep.argmax) j["argmax_words"].push_back(db_.entries[i].cls.name());
    j["mather_proxy_words"] = json::array();
    for (auto i : rep.mather_proxy) j["mather_proxy_words"].push_back(db_.entries[i].cls.name());
    j["excluded"] = rep.excluded;
    j["classes"] = db_.entries.size();
    j["lip_identity"] = lip.value;
    j["vol_ratio"] = vol.ratio;
    j["config_hash"] = manifest_.config_hash;
    stretch_report_ = j;
    if (cfg_.stretch.expect_S_lower) {
      const double want = *cfg_.stretch.expect_S_lower;
      check("S_lower", std::abs(rep.S_lower - want) <= cfg_.stretch.S_tolerance,
            "S_lower " + num(rep.S_lower) + " expected " + num(want) + " +- " + num(cfg_.stretch.S_tolerance));
    }
    check("S_lower_le_lip", rep.S_lower <= lip.value + 1e-3, "S_lower " + num(rep.S_lower) + ", lip " + num(lip.value));
    write("ratio_hist.svg", plot_svg(stretch::ratio_csv(db_), "ratio", manifest_.config_hash));
  }

  void thermo() {
    auto p = pair();
    if (cfg_.thermo.swap_pair) std::swap(p.source, p.target);
    stretch::Cutoffs cut;
    cut.max_word_len = cfg_.thermo.max_word_len;
    cut.max_length = cfg_.thermo.max_length;
    cut.budget = cfg_.budget;
    const auto db = stretch::build_orbit_database(group(), p, cut, build_options());
    for (const auto& e : db.entries) manifest_.converged = manifest_.converged && e.converged;
    const auto curve = stretch::thermo_curve(db, cfg_.thermo.r_grid, cfg_.thermo.window, cfg_.thermo.step);
    const std::string csv = stretch::thermo_csv(curve);
    write("thermo.csv", csv);
    write("thermo_h.svg", plot_svg(csv, "h", manifest_.config_hash));

    bool monotone = true;
    for (std::size_t i = 0; i + 1 < curve.r.size(); ++i) {
      if (curve.h[i + 1] > curve.h[i] + 2.0 * (curve.noise[i] + curve.noise[i + 1])) monotone = false;
    }
    check("thermo_h_nonincreasing", monotone, "window (" + num(cfg_.thermo.window.T) + ", " + num(cfg_.thermo.window.dT) + ")");
    const auto es = stretch::entropy_stretch_check(db, stretch::reversed(db), cfg_.thermo.window, cfg_.thermo.entropy_band);
    thermo_product_ = es.product;
    check("entropy_stretch", !es.violated, "product " + num(es.product));

    json j;
    j["classes"] = db.entries.size();
    j["window_classes"] = stretch::window_count(db, cfg_.thermo.window);
    j["P0"] = curve.P.front();
    j["E_last"] = curve.E.back();
    j["window_max_ratio"] = stretch::window_max_ratio(db, cfg_.thermo.window);
    j["h1"] = es.h1;
    j["h2"] = es.h2;
    j["S"] = es.S;
    j["entropy_stretch_product"] = es.product;
    j["reversal_product"] = es.reversal_product;
    j["config_hash"] = manifest_.config_hash;
    write("thermo_report.json", j.dump(2) + "\n");
  }

  void sft() {
    const auto model = ergopt::SFTModel::from_json(cfg_.sft.model_json);
    const auto cm = ergopt::max_cycle_mean(model);
    const auto u = ergopt::subaction(model, cm.beta);
    const auto ft = ergopt::normalized_potential(model, cm.beta, u);
    const auto barrier = ergopt::peierls_barrier(model, cm.beta);
    const auto aubry = ergopt::aubry_set(barrier);
    const auto mather = ergopt::mather_set(model, cm.beta, u);
    const auto tri = ergopt::reverse_triangle_check(barrier);
    const auto sweep = ergopt::zero_temperature_sweep(model, sft_grid(cfg_.sft), cfg_.workers);
    const auto defect = ergopt::entropy_defect_integral(model, cfg_.sft.r_max, cfg_.sft.quadrature_nodes);

    const std::string csv = ergopt::sweep_csv(sweep);
    write("sft_sweep.csv", csv);
    write("sft_h.svg", plot_svg(csv, "h", manifest_.config_hash));

    double max_ft = -std::numeric_limits<double>::infinity();
    for (double x : ft) max_ft = std::max(max_ft, x);
    double worst_identity = 0.0;
    for (const auto& g : sweep.states) worst_identity = std::max(worst_identity, g.identity_residual);

    json j;
    j["beta"] = cm.beta;
    j["witness_cycle"] = cm.cycle;
    j["subaction"] = u;
    j["aubry"] = aubry;
    j["mather_edges"] = json::array();
    for (auto e : mather) j["mather_edges"].push_back({model.edges[e].src, model.edges[e].dst});
    j["barrier_period"] = barrier.period;
    j["P_over_r"] = sweep.P_over_r;
    j["E_limit"] = sweep.E_limit;
    j["h_limit"] = sweep.h_limit;
    j["mather_entropy"] = sweep.mather_entropy;
    j["defect"] = defect.defect;
    j["defect_integral"] = defect.integral;
    j["defect_relative_error"] = defect.relative_error;
    j["defect_tail_bound"] = defect.tail_bound;
    j["config_hash"] = manifest_.config_hash;
    write("sft_report.json", j.dump(2) + "\n");

    if (cfg_.sft.expect_beta) {
      check("sft_beta", std::abs(cm.beta - *cfg_.sft.expect_beta) <= 1e-12,
            "beta " + num(cm.beta) + " expected " + num(*cfg_.sft.expect_beta));
    }
    check("sft_subaction", max_ft <= 1e-12, "max normalized potential " + num(max_ft));
    check("sft_triangle", tri.holds, std::to_string(tri.violations) + " violations");
    check("sft_gibbs_identity", worst_identity <= 1e-9, "worst |P - h - rE| " + num(worst_identity));
    check("sft_defect", defect.relative_error <= cfg_.sft.defect_tolerance,
          "integral " + num(defect.integral) + ", defect " + num(defect.defect));
  }

  const ExperimentConfig& cfg_;
  unsigned stages_;
  fs::path out_;
  RunManifest manifest_;
  std::vector<ConjugacyClass> classes_;
  bool classes_ready_ = false;
  stretch::OrbitDatabase db_;
  bool db_ready_ = false;
  json stretch_report_;
  std::optional<double> thermo_product_;
};

// Minimal SVG canvas in data coordinates.
struct Canvas {
  double x0, x1, y0, y1;
  static constexpr double W = 640, H = 400, L = 70, R = 20, T = 40, B = 50;

  double px(double x) const { return L + (x - x0) / (x1 - x0) * (W - L - R); }
  double py(double y) const { return H - B - (y - y0) / (y1 - y0) * (H - T - B); }
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

void pad(double& lo, double& hi) {
  if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
    const double d = std::max(1e-6, 0.05 * std::abs(hi));
    lo -= d;
    hi += d;
  } else {
    const double d = 0.05 * (hi - lo);
    lo -= d;
    hi += d;
  }
}

std::string frame(const Canvas& c, const std::string& title, const std::string& xlabel, const std::string& ylabel) {
  std::ostringstream s;
  s << "<rect x=\"0\" y=\"0\" width=\"" << Canvas::W << "\" height=\"" << Canvas::H << "\" fill=\"white\"/>\n";
  s << "<text x=\"" << Canvas::W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title << "</text>\n";
  s << "<line x1=\"" << Canvas::L << "\" y1=\"" << Canvas::H - Canvas::B << "\" x2=\"" << Canvas::W - Canvas::R
    << "\" y2=\"" << Canvas::H - Canvas::B << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << Canvas::L << "\" y1=\"" << Canvas::T << "\" x2=\"" << Canvas::L << "\" y2=\""
    << Canvas::H - Canvas::B << "\" stroke=\"black\"/>\n";
  s << "<text x=\"" << Canvas::W / 2 << "\" y=\"" << Canvas::H - 10 << "\" text-anchor=\"middle\" font-size=\"13\">"
    << xlabel << "</text>\n";
  s << "<text x=\"16\" y=\"" << Canvas::H / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
    << Canvas::H / 2 << ")\">" << ylabel << "</text>\n";
  for (int k = 0; k <= 4; ++k) {
    const double x = c.x0 + (c.x1 - c.x0) * k / 4.0;
    const double y = c.y0 + (c.y1 - c.y0) * k / 4.0;
    s << "<text x=\"" << c.px(x) << "\" y=\"" << Canvas::H - Canvas::B + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
      << fmt(x) << "</text>\n";
    s << "<text x=\"" << Canvas::L - 6 << "\" y=\"" << c.py(y) + 4 << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(y)
      << "</text>\n";
  }
  return s.str();
}

std::vector<double> numeric_column(const io::CsvTable& t, const std::string& name) {
  const int k = t.column(name);
  if (k < 0) throw Error(ErrorCode::SchemaMismatch, "CSV has no column '" + name + "'");
  std::vector<double> out;
  for (const auto& row : t.rows) {
    if (static_cast<std::size_t>(k) >= row.size()) throw Error(ErrorCode::SchemaMismatch, "short CSV row");
    try {
      out.push_back(std::stod(row[static_cast<std::size_t>(k)]));
    } catch (const std::exception&) {
      throw Error(ErrorCode::SchemaMismatch, "non-numeric value in column '" + name + "'");
    }
  }
  return out;
}

}  // namespace

RunManifest run(const ExperimentConfig& config, unsigned stages) {
  validate(config);
  try {
    fs::create_directories(config.output_dir);
  } catch (const fs::filesystem_error& e) {
    throw Error(ErrorCode::ConfigInvalid, "output_dir is not writable: " + std::string(e.what()));
  }
  return Runner(config, stages).run();
}

RunManifest run(const ExperimentConfig& config) { return run(config, default_stages(config)); }

std::string plot_svg(const std::string& csv_text, const std::string& kind, const std::string& config_hash) {
  io::CsvTable t;
  try {
    t = io::parse_csv(csv_text);
  } catch (const Error& e) {
    throw Error(ErrorCode::SchemaMismatch, e.what());
  }
  if (t.rows.empty()) throw Error(ErrorCode::SchemaMismatch, "CSV has no data rows");
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Canvas::W << "\" height=\"" << Canvas::H << "\">\n";
  if (kind == "h") {
    const auto r = numeric_column(t, "r");
    const auto h = numeric_column(t, "h");
    Canvas c{*std::min_element(r.begin(), r.end()), *std::max_element(r.begin(), r.end()),
             *std::min_element(h.begin(), h.end()), *std::max_element(h.begin(), h.end())};
    pad(c.x0, c.x1);
    pad(c.y0, c.y1);
    s << frame(c, "entropy h(r)", "r", "h");
    s << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < r.size(); ++i) s << fmt(c.px(r[i])) << ',' << fmt(c.py(h[i])) << ' ';
    s << "\"/>\n";
    for (std::size_t i = 0; i < r.size(); ++i) {
      s << "<circle cx=\"" << fmt(c.px(r[i])) << "\" cy=\"" << fmt(c.py(h[i])) << "\" r=\"2.5\" fill=\"steelblue\"/>\n";
    }
  } else if (kind == "ratio") {
    const auto ratio = numeric_column(t, "ratio");
    const double lo = *std::min_element(ratio.begin(), ratio.end());
    const double hi = *std::max_element(ratio.begin(), ratio.end());
    constexpr int kBins = 30;
    double b0 = lo, b1 = hi;
    pad(b0, b1);
    std::vector<int> counts(kBins, 0);
    for (double x : ratio) {
      const int k = std::clamp(static_cast<int>((x - b0) / (b1 - b0) * kBins), 0, kBins - 1);
      ++counts[static_cast<std::size_t>(k)];
    }
    Canvas c{b0, b1, 0.0, static_cast<double>(*std::max_element(counts.begin(), counts.end())) * 1.1};
    s << frame(c, "length ratio histogram", "ratio", "classes");
    for (int k = 0; k < kBins; ++k) {
      const double xa = b0 + (b1 - b0) * k / kBins, xb = b0 + (b1 - b0) * (k + 1) / kBins;
      const double y = counts[static_cast<std::size_t>(k)];
      s << "<rect x=\"" << fmt(c.px(xa)) << "\" y=\"" << fmt(c.py(y)) << "\" width=\"" << fmt(c.px(xb) - c.px(xa))
        << "\" height=\"" << fmt(c.py(0.0) - c.py(y)) << "\" fill=\"lightsteelblue\" stroke=\"steelblue\"/>\n";
    }
    s << "<line x1=\"" << fmt(c.px(hi)) << "\" y1=\"" << Canvas::T << "\" x2=\"" << fmt(c.px(hi)) << "\" y2=\""
      << Canvas::H - Canvas::B << "\" stroke=\"crimson\" stroke-dasharray=\"4 3\"/>\n";
    s << "<text x=\"" << fmt(c.px(hi) - 4) << "\" y=\"" << Canvas::T + 12 << "\" text-anchor=\"end\" font-size=\"12\" fill=\"crimson\">S_lower = "
      << fmt(hi) << "</text>\n";
  } else {
    throw Error(ErrorCode::SchemaMismatch, "unknown plot kind '" + kind + "' (use h or ratio)");
  }
  s << "<!-- config-hash: " << config_hash << " -->\n</svg>\n";
  return s.str();
}

}  // namespace stretchlab::pipeline
