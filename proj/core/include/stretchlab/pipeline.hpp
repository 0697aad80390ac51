#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stretchlab/lengths.hpp"
#include "stretchlab/stretch.hpp"

namespace stretchlab::pipeline {

struct StretchSettings {
  bool enabled = true;
  double delta = 1e-3;
  std::optional<double> expect_S_lower;
  double S_tolerance = 1e-3;
  int lip_radial = 40;
  int lip_angular = 128;
};

struct ThermoSettings {
  bool enabled = false;
  int max_word_len = 8;
  double max_length = 8.5;
  // Run the sweep on (target, source) instead of (source, target).
  bool swap_pair = false;
  stretch::Window window;
  std::vector<double> r_grid;
  double step = 1e-3;
  double entropy_band = 0.05;
};

struct SftSettings {
  bool enabled = false;
  std::string model_json;
  double r_max = 1000.0;
  std::vector<double> r_grid;  // empty: default grid up to r_max
  int quadrature_nodes = 4000;
  std::optional<double> expect_beta;
  double defect_tolerance = 0.02;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::string output_dir = "out";
  int workers = 1;
  std::uint64_t budget = 0;
  bool has_metric = false;
  std::string source = R"({"kind":"hyperbolic"})";
  std::string target = R"({"kind":"hyperbolic"})";
  stretch::Cutoffs cutoffs;
  lengths::LengthOptions lengths;
  StretchSettings stretch;
  ThermoSettings thermo;
  SftSettings sft;

  std::string canonical_json() const;
  std::string hash() const;  // FNV-1a of canonical_json, hex
};

// Throws ConfigInvalid with the offending field path. Relative model_file
// paths resolve against base_dir.
ExperimentConfig parse_config(const std::string& text, const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);
void validate(const ExperimentConfig& config);

enum Stage : unsigned {
  kSurface = 1u << 0,
  kClasses = 1u << 1,
  kLengths = 1u << 2,
  kStretch = 1u << 3,
  kThermo = 1u << 4,
  kSft = 1u << 5,
};
unsigned default_stages(const ExperimentConfig& config);

struct StageTiming {
  std::string name;
  double seconds = 0.0;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct RunManifest {
  std::string config_hash;
  std::string version;
  std::vector<StageTiming> stages;
  std::vector<std::string> files;  // relative to the output directory
  std::vector<CheckResult> checks;
  bool converged = true;

  bool ok() const;
  std::string to_json() const;
};

// Runs the requested stages and writes outputs plus manifest.json.
// Throws ConfigInvalid, CapacityExceeded, StageFailed.
RunManifest run(const ExperimentConfig& config, unsigned stages);
RunManifest run(const ExperimentConfig& config);

std::string surface_json(const SurfaceGroup& group);

// kind "h": line plot of h against r; kind "ratio": histogram of the ratio
// column with S_lower marked. Throws SchemaMismatch.
std::string plot_svg(const std::string& csv_text, const std::string& kind, const std::string& config_hash);

std::string version();

}  // namespace stretchlab::pipeline
