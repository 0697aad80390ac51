#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stretchlab/fuchsian.hpp"
#include "stretchlab/lengths.hpp"
#include "stretchlab/metric.hpp"

namespace stretchlab::stretch {

using metric::ConformalFactor;

// g1 = source * g_hyp, g2 = target * g_hyp.
struct MetricPair {
  ConformalFactor source;
  ConformalFactor target;
};

struct OrbitEntry {
  ConjugacyClass cls;
  double l1 = 0.0;
  double l2 = 0.0;
  double ratio = 0.0;
  bool converged = true;
  int iterations = 0;
};

struct Cutoffs {
  int max_word_len = 4;
  std::optional<double> max_length;  // on the hyperbolic length
  std::optional<double> min_length;  // on the hyperbolic length
  bool merge_conjugates = true;
  std::uint64_t budget = 0;
};

struct OrbitDatabase {
  std::vector<OrbitEntry> entries;  // sorted by l1
  Cutoffs cutoffs;
  std::string pair_description;
};

struct BuildOptions {
  lengths::LengthOptions lengths;
  int workers = 1;
  // Constant factors scale lengths exactly; skip the optimizer for them.
  bool constant_shortcut = true;
};

double class_length(const ConformalFactor& phi, const ConjugacyClass& cls, const BuildOptions& options,
                    bool* converged = nullptr, int* iterations = nullptr);

OrbitDatabase build_orbit_database(const SurfaceGroup& group, const MetricPair& pair, const Cutoffs& cutoffs,
                                   const BuildOptions& options = {});
OrbitDatabase build_orbit_database(const std::vector<ConjugacyClass>& classes, const MetricPair& pair,
                                   const BuildOptions& options = {});

// Swaps the roles of g1 and g2.
OrbitDatabase reversed(const OrbitDatabase& db);

std::optional<std::size_t> find_entry(const OrbitDatabase& db, const std::string& word);

// Stretch of a weighted sum of dirac currents: sum w l2 / sum w l1.
double geodesic_stretch(const OrbitDatabase& db, const std::vector<std::pair<std::size_t, double>>& weights);

struct StretchReport {
  double S_lower = 0.0;
  double s_window = 0.0;
  std::vector<std::size_t> argmax;
  std::vector<std::size_t> mather_proxy;
  double delta = 0.0;
  std::size_t excluded = 0;  // non-converged entries left out
};

std::vector<std::size_t> mather_proxy(const OrbitDatabase& db, double delta);
StretchReport stretch_report(const OrbitDatabase& db, double delta);

// Max over shared classes of |I(1,3) - I(1,2) I(2,3)|.
double cocycle_residual(const OrbitDatabase& d12, const OrbitDatabase& d23, const OrbitDatabase& d13);

// Pointwise operator norm of the identity from g1 to g2.
double identity_stretch(const MetricPair& pair, Complex x);

struct LipReport {
  double value = 0.0;
  std::vector<Complex> argmax;
  double grid_spacing = 0.0;
  double tolerance = 0.0;

  // Within one grid spacing of an argmax sample.
  bool in_argmax_region(Complex x) const;
};

LipReport lip_identity(const MetricPair& pair, const SampleGrid& grid, double rel_tol = 1e-9);

// L_g2 of the g1-geodesic in the class, divided by its g1-length.
double weighted_lip_identity(const MetricPair& pair, const ConjugacyClass& cls,
                             const lengths::LengthOptions& options = {}, int subdivisions = 2);

struct VolumeReport {
  double ratio = 0.0;
  double base_area = 0.0;
  double source_area = 0.0;
  double target_area = 0.0;
  std::size_t samples = 0;
};

VolumeReport volume_ratio(const MetricPair& pair, int n_angular = 16, int n_radial = 40);

struct Window {
  double T = 7.5;
  double dT = 1.0;
};

// (1/T) log sum l1 exp(r T l2/l1) over primitive entries with T - dT < l1 <= T.
double orbit_sum_pressure(const OrbitDatabase& db, double r, const Window& window);
// Tilted mean of the ratio, i.e. the exact r-derivative of the pressure.
double tilted_mean_ratio(const OrbitDatabase& db, double r, const Window& window);
std::size_t window_count(const OrbitDatabase& db, const Window& window);
double window_max_ratio(const OrbitDatabase& db, const Window& window);

struct ThermoCurve {
  std::vector<double> r;
  std::vector<double> P;
  std::vector<double> E;
  std::vector<double> h;
  std::vector<double> Var;
  std::vector<double> noise;  // finite-difference error estimate per grid point
  Window window;
  double step = 0.0;
};

ThermoCurve thermo_curve(const OrbitDatabase& db, const std::vector<double>& r_grid, const Window& window,
                         double step = 1e-3);
std::string thermo_csv(const ThermoCurve& curve);

// Root s of P(-s) = 0 with P the window pressure: entropy of g2 as a time change of g1.
double bowen_entropy(const OrbitDatabase& db, const Window& window);

struct EntropyStretchReport {
  double h1 = 0.0;
  double h2 = 0.0;
  double S = 0.0;
  double product = 0.0;
  double band = 0.05;
  bool violated = false;
  double reversal_product = 0.0;  // S_lower(g1,g2) * s_window(g2,g1)
};

EntropyStretchReport entropy_stretch_check(const OrbitDatabase& forward, const OrbitDatabase& backward,
                                           const Window& window, double band = 0.05);

struct CriticalExponentReport {
  double exponent = 0.0;
  double error_bar = 0.0;
  double raw_growth = 0.0;       // log N(R) / R
  double raw_growth_half = 0.0;  // log N(R/2) / (R/2)
  std::size_t orbit_count = 0;
  int complete_levels = 0;
  std::vector<std::size_t> level_sizes;
};

CriticalExponentReport critical_exponent(const std::vector<GroupElement>& generators, double R,
                                          std::uint64_t budget = 0);

std::string ratio_csv(const OrbitDatabase& db);

}  // namespace stretchlab::stretch
