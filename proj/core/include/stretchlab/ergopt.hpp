#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace stretchlab::ergopt {

struct Edge {
  int src = 0;
  int dst = 0;
  double f = 0.0;
};

// Subshift of finite type on the edges of a directed graph with a potential
// on edges. Every state has an incoming and an outgoing edge.
struct SFTModel {
  int n = 0;
  std::vector<Edge> edges;

  // Throws InvalidModel.
  static SFTModel make(int n, std::vector<Edge> edges);
  // {"n": 2, "edges": [[src, dst, f], ...]}. Throws InvalidModel.
  static SFTModel from_json(const std::string& text);
  std::string to_json() const;

  void validate() const;
  bool integral() const;  // all f are small integers
  SFTModel scaled(double c) const;
  SFTModel shifted(double c) const;
};

struct CycleMean {
  double beta = 0.0;
  std::vector<int> cycle;           // states, closing back to cycle.front()
  std::vector<std::size_t> edges;   // edge indices along the cycle
};

// Karp recurrence; the witness cycle attains beta exactly.
CycleMean max_cycle_mean(const SFTModel& model);

// u with f - beta + u(src) - u(dst) <= 0 on every edge, u[0] = 0.
// Throws NoConvergence.
std::vector<double> subaction(const SFTModel& model, double beta);
// f - beta + u(src) - u(dst) per edge.
std::vector<double> normalized_potential(const SFTModel& model, double beta, const std::vector<double>& u);

inline constexpr double kZeroSnap = 1e-9;

struct Barrier {
  int n = 0;
  std::vector<double> h;  // row-major, -inf where no path through the critical set
  int period = 0;
  long long power = 0;    // power at which the period was confirmed
  // Integer potentials: h = numer / denom exactly (denom = 0 otherwise).
  std::vector<long long> numer;
  long long denom = 0;

  double operator()(int i, int j) const { return h[static_cast<std::size_t>(i) * n + j]; }
};

// limsup of max-plus powers of (f - beta). Throws PeriodNotFound.
Barrier peierls_barrier(const SFTModel& model, double beta);

std::vector<int> aubry_set(const Barrier& barrier);
// Edges with zero normalized potential inside strongly connected components
// of the zero-edge subgraph that carry a cycle.
std::vector<std::size_t> mather_set(const SFTModel& model, double beta, const std::vector<double>& u);

struct TriangleReport {
  bool holds = true;
  std::size_t triples = 0;
  std::size_t violations = 0;
  double worst = 0.0;
};
TriangleReport reverse_triangle_check(const Barrier& barrier);

struct GibbsState {
  double r = 0.0;
  double P = 0.0;
  double E = 0.0;
  double h = 0.0;
  std::vector<double> transition;  // n x n, row-major; zero rows off the support
  std::vector<double> stationary;
  std::vector<int> support;
  double row_residual = 0.0;
  double stationarity_residual = 0.0;
  double identity_residual = 0.0;  // |P - h - r E|
};

GibbsState pressure(const SFTModel& model, double r);

// log of the Perron root of the adjacency matrix restricted to the given edges
// (all edges when empty).
double log_perron(int n, const std::vector<std::pair<int, int>>& edges);
double topological_entropy(const SFTModel& model);
double mather_entropy(const SFTModel& model);

struct VarianceResult {
  double value = 0.0;
  double dh_dr = 0.0;
  double residual = 0.0;  // |dh/dr + r Var|
  bool consistent = false;  // residual <= 10 step^2
};

// Throws StepTooSmall, InvalidArgument.
VarianceResult variance(const SFTModel& model, double r, double step = 1e-3);

struct SweepResult {
  std::vector<GibbsState> states;
  std::vector<double> Var;
  double beta = 0.0;
  double P_over_r = 0.0;  // at the last grid point
  double E_limit = 0.0;
  double h_limit = 0.0;
  double mather_entropy = 0.0;
};

// r_grid increasing, last entry >= 1e3.
SweepResult zero_temperature_sweep(const SFTModel& model, const std::vector<double>& r_grid, int workers = 1);
std::string sweep_csv(const SweepResult& sweep);

struct DefectResult {
  double integral = 0.0;
  double defect = 0.0;       // h_top - h_top(Mather)
  double tail_bound = 0.0;
  double relative_error = 0.0;
  std::size_t nodes = 0;
};

// Trapezoid rule for r Var(r) on a grid graded towards r = 0.
DefectResult entropy_defect_integral(const SFTModel& model, double r_max, int quadrature_nodes = 4000);

}  // namespace stretchlab::ergopt
