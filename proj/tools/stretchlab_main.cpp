#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "stretchlab/ergopt.hpp"
#include "stretchlab/errors.hpp"
#include "stretchlab/io.hpp"
#include "stretchlab/pipeline.hpp"

namespace fs = std::filesystem;
using namespace stretchlab;

namespace {

struct Common {
  std::string config;
  std::string out;
  int workers = 0;
};

void add_common(CLI::App* cmd, Common& c, bool config_required) {
  auto* opt = cmd->add_option("--config", c.config, "experiment config (JSON)");
  if (config_required) opt->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "output directory (overrides output_dir)");
  cmd->add_option("--workers", c.workers, "worker threads (overrides workers)")->check(CLI::PositiveNumber);
}

pipeline::ExperimentConfig base_config(const Common& c) {
  pipeline::ExperimentConfig cfg = c.config.empty() ? pipeline::parse_config("{}") : pipeline::load_config(c.config);
  if (!c.out.empty()) cfg.output_dir = c.out;
  if (c.workers > 0) cfg.workers = c.workers;
  return cfg;
}

int report(const pipeline::RunManifest& m, const std::string& dir) {
  for (const auto& c : m.checks) {
    std::printf("%s %s: %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
  }
  if (!m.converged) std::printf("FAIL converged: some length computations did not converge\n");
  std::printf("wrote %zu files to %s (config %s)\n", m.files.size(), dir.c_str(), m.config_hash.c_str());
  return m.ok() ? 0 : 1;
}

int execute(const pipeline::ExperimentConfig& cfg, unsigned stages) {
  return report(pipeline::run(cfg, stages), cfg.output_dir);
}

std::optional<std::string> hash_near(const std::string& csv_path) {
  const fs::path manifest = fs::path(csv_path).parent_path() / "manifest.json";
  if (!fs::exists(manifest)) return std::nullopt;
  const std::string text = io::read_file(manifest.string());
  const auto k = text.find("\"config_hash\"");
  if (k == std::string::npos) return std::nullopt;
  const auto a = text.find('"', text.find(':', k) + 1);
  const auto b = text.find('"', a + 1);
  if (a == std::string::npos || b == std::string::npos) return std::nullopt;
  return text.substr(a + 1, b - a - 1);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Length spectra, maximal stretch and thermodynamics of conformal metrics on the Bolza surface"};
  app.set_version_flag("--version", pipeline::version());
  app.require_subcommand(1);

  Common run_opts;
  auto* run = app.add_subcommand("run", "run every stage enabled in a config");
  add_common(run, run_opts, true);

  Common surface_opts;
  auto* surface = app.add_subcommand("surface", "surface group data");
  auto* surface_build = surface->add_subcommand("build", "write surface.json");
  add_common(surface_build, surface_opts, false);
  surface->require_subcommand(1);

  Common classes_opts;
  int max_word_len = 0;
  double max_length = 0.0;
  bool no_merge = false;
  auto* classes = app.add_subcommand("classes", "conjugacy classes");
  auto* classes_enum = classes->add_subcommand("enumerate", "write classes.csv");
  add_common(classes_enum, classes_opts, false);
  classes_enum->add_option("--max-word-len", max_word_len, "maximal word length")->required()->check(CLI::PositiveNumber);
  classes_enum->add_option("--max-length", max_length, "hyperbolic length cutoff");
  classes_enum->add_flag("--no-merge", no_merge, "keep free-group classes that are conjugate in the surface group");
  classes->require_subcommand(1);

  Common lengths_opts;
  int lengths_word_len = 0;
  auto* lengths = app.add_subcommand("lengths", "closed geodesic lengths");
  auto* lengths_compute = lengths->add_subcommand("compute", "write lengths.csv");
  add_common(lengths_compute, lengths_opts, true);
  lengths_compute->add_option("--max-word-len", lengths_word_len, "maximal word length")->check(CLI::PositiveNumber);
  lengths->require_subcommand(1);

  Common stretch_opts;
  double delta = -1.0;
  auto* stretch = app.add_subcommand("stretch", "maximal stretch");
  auto* stretch_report = stretch->add_subcommand("report", "write stretch_report.json and lengths.csv");
  add_common(stretch_report, stretch_opts, true);
  stretch_report->add_option("--delta", delta, "Mather proxy width")->check(CLI::NonNegativeNumber);
  stretch->require_subcommand(1);

  Common thermo_opts;
  std::string window;
  auto* thermo = app.add_subcommand("thermo", "orbit-sum thermodynamics");
  auto* thermo_sweep = thermo->add_subcommand("sweep", "write thermo.csv and thermo_h.svg");
  add_common(thermo_sweep, thermo_opts, true);
  thermo_sweep->add_option("--window", window, "T,DT");
  thermo->require_subcommand(1);

  Common sft_opts;
  std::string model_path;
  double r_max = 0.0;
  auto* sft = app.add_subcommand("sft", "subshift of finite type models");
  auto* sft_run = sft->add_subcommand("run", "write sft_sweep.csv and sft_report.json");
  add_common(sft_run, sft_opts, false);
  sft_run->add_option("--model", model_path, "model JSON")->check(CLI::ExistingFile);
  sft_run->add_option("--r-max", r_max, "largest inverse temperature")->check(CLI::PositiveNumber);
  sft->require_subcommand(1);

  std::string csv_path, kind, svg_out, hash;
  auto* plot = app.add_subcommand("plot", "render a CSV table as SVG");
  plot->add_option("--csv", csv_path, "input CSV")->required()->check(CLI::ExistingFile);
  plot->add_option("--kind", kind, "h or ratio")->required()->check(CLI::IsMember({"h", "ratio"}));
  plot->add_option("--out", svg_out, "output SVG (default: next to the CSV)");
  plot->add_option("--hash", hash, "config hash for the footer (default: from manifest.json)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto cfg = base_config(run_opts);
      return execute(cfg, pipeline::default_stages(cfg));
    }
    if (*surface_build) {
      auto cfg = base_config(surface_opts);
      return execute(cfg, pipeline::kSurface);
    }
    if (*classes_enum) {
      auto cfg = base_config(classes_opts);
      cfg.cutoffs.max_word_len = max_word_len;
      if (max_length > 0.0) cfg.cutoffs.max_length = max_length;
      if (no_merge) cfg.cutoffs.merge_conjugates = false;
      return execute(cfg, pipeline::kClasses);
    }
    if (*lengths_compute) {
      auto cfg = base_config(lengths_opts);
      if (lengths_word_len > 0) cfg.cutoffs.max_word_len = lengths_word_len;
      cfg.has_metric = true;
      return execute(cfg, pipeline::kClasses | pipeline::kLengths);
    }
    if (*stretch_report) {
      auto cfg = base_config(stretch_opts);
      if (delta >= 0.0) cfg.stretch.delta = delta;
      cfg.has_metric = true;
      return execute(cfg, pipeline::kLengths | pipeline::kStretch);
    }
    if (*thermo_sweep) {
      auto cfg = base_config(thermo_opts);
      if (!window.empty()) {
        const auto comma = window.find(',');
        if (comma == std::string::npos) throw Error(ErrorCode::ConfigInvalid, "--window expects T,DT");
        try {
          cfg.thermo.window = {std::stod(window.substr(0, comma)), std::stod(window.substr(comma + 1))};
        } catch (const std::exception&) {
          throw Error(ErrorCode::ConfigInvalid, "--window expects T,DT");
        }
      }
      cfg.thermo.enabled = true;
      return execute(cfg, pipeline::kThermo);
    }
    if (*sft_run) {
      auto cfg = base_config(sft_opts);
      if (!model_path.empty()) cfg.sft.model_json = ergopt::SFTModel::from_json(io::read_file(model_path)).to_json();
      if (r_max > 0.0) cfg.sft.r_max = r_max;
      cfg.sft.enabled = true;
      return execute(cfg, pipeline::kSft);
    }
    if (*plot) {
      if (hash.empty()) hash = hash_near(csv_path).value_or("none");
      if (svg_out.empty()) svg_out = fs::path(csv_path).replace_extension(".svg").string();
      io::write_file(svg_out, pipeline::plot_svg(io::read_file(csv_path), kind, hash));
      std::printf("wrote %s\n", svg_out.c_str());
      return 0;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
