// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "stretchlab/errors.hpp"
#include "stretchlab/ergopt.hpp"
#include "stretchlab/io.hpp"
#include "stretchlab/stretch.hpp"

using namespace stretchlab;
using namespace stretchlab::stretch;
namespace fs = std::filesystem;

namespace {

const SurfaceGroup& G() { return shared_bolza_group(); }

// Collects failed sub-checks for one criterion.
struct Ledger {
  std::vector<std::string> failures;
  std::ostringstream notes;

  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  template <class T>
  void note(const std::string& key, T value) {
    notes << ' ' << key << '=' << value;
  }
};

int failed_criteria = 0;

void criterion(int id, const std::string& title, const std::function<void(Ledger&)>& body) {
  Ledger l;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(l);
  } catch (const std::exception& e) {
    l.failures.push_back(std::string("threw: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool ok = l.failures.empty();
  if (!ok) ++failed_criteria;
  std::printf("%s %2d %s (%.1fs)%s\n", ok ? "PASS" : "FAIL", id, title.c_str(), secs, l.notes.str().c_str());
  for (const auto& f : l.failures) std::printf("       - %s\n", f.c_str());
  std::fflush(stdout);
}

ConformalFactor shrink(double s) {
  metric::CollarBumpParams p;
  p.s = s;
  p.epsilon = 0.3;
  return ConformalFactor::collar_bump(G(), p);
}

ConformalFactor enlarge(double a) {
  metric::CollarBumpParams p;
  p.direction = metric::BumpDirection::Enlarge;
  p.plateau = a;
  p.epsilon = 1.0;
  p.core_width = 0.3;
  return ConformalFactor::collar_bump(G(), p);
}

OrbitDatabase build(const MetricPair& pair, int n, std::optional<double> max_length = std::nullopt, bool shortcut = true) {
  Cutoffs c;
  c.max_word_len = n;
  c.max_length = max_length;
  BuildOptions o;
  o.constant_shortcut = shortcut;
  return build_orbit_database(G(), pair, c, o);
}

const Window kWindow{7.5, 1.0};

const OrbitDatabase& window_scaled() {
  static const OrbitDatabase db = build({ConformalFactor(), ConformalFactor::constant(2.0)}, 8, 8.5);
  return db;
}
const OrbitDatabase& window_collar() {
  static const OrbitDatabase db = build({ConformalFactor(), shrink(0.2)}, 8, 8.5);
  return db;
}

// Powers of a1 and of its inverse share the core ratio exactly.
bool is_core_power(const ConjugacyClass& cls) {
  const auto& w = cls.cyclic_word;
  const Word root(w.begin(), w.begin() + static_cast<long>(primitive_period(w)));
  return root == word_from_string("a1") || root == word_from_string("A1");
}

std::vector<ergopt::SFTModel> all_models() {
  auto out = oracle::hand_fixtures();
  for (auto seed : oracle::seeds()) out.push_back(oracle::random_model(seed));
  return out;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

}  // namespace

int main() {
  criterion(1, "surface group relation and systole", [](Ledger& l) {
    const double rel = G().commutator_relator().max_entry_diff(GroupElement());
    const double closed = 2.0 * std::acosh(1.0 + std::numbers::sqrt2);
    const auto classes = enumerate_classes(G(), 3);
    double shortest = std::numeric_limits<double>::infinity();
    for (const auto& c : classes) shortest = std::min(shortest, c.length_g1);
    l.note("relator", fmt(rel));
    l.note("systole", fmt(shortest));
    l.expect(rel <= 1e-9, "relator off identity by " + fmt(rel));
    l.expect(std::abs(shortest - closed) <= 1e-8, "shortest class length " + fmt(shortest));
  });

  criterion(2, "conformal scaling is the equality case", [](Ledger& l) {
    for (double a : {2.0, 4.0}) {
      const MetricPair pair{ConformalFactor(), ConformalFactor::constant(a)};
      const auto db = build(pair, 4, std::nullopt, false);
      double worst = 0.0;
      for (const auto& e : db.entries) worst = std::max(worst, std::abs(e.ratio / std::sqrt(a) - 1.0));
      l.expect(worst <= 1e-4, "a=" + fmt(a) + " ratio deviation " + fmt(worst));
      const auto report = stretch_report(db, 1e-3);
      l.expect(report.mather_proxy.size() == db.entries.size(), "a=" + fmt(a) + " proxy misses classes");
      const double vol = volume_ratio(pair).ratio;
      l.expect(std::abs(vol - a) <= 1e-3, "a=" + fmt(a) + " volume ratio " + fmt(vol));
      l.note("classes", db.entries.size());
    }
    const auto es = entropy_stretch_check(window_scaled(), reversed(window_scaled()), kWindow);
    l.note("product", fmt(es.product));
    l.expect(std::abs(es.product - 1.0) <= 1e-3, "entropy-stretch product " + fmt(es.product));
  });

  criterion(3, "collar shrink stretches the core by 1/(1-s)", [](Ledger& l) {
    for (double s : {0.1, 0.2}) {
      const MetricPair pair{shrink(s), ConformalFactor()};
      const double expected = 1.0 / (1.0 - s);
      const auto db = build(pair, 4);
      l.expect(db.entries.size() >= 200, "only " + std::to_string(db.entries.size()) + " classes");
      const auto core = find_entry(db, "a1");
      if (!core) {
        l.expect(false, "core class missing");
        continue;
      }
      const double top = db.entries[*core].ratio;
      l.note("ratio(s=" + fmt(s) + ")", fmt(top));
      l.expect(std::abs(top / expected - 1.0) <= 3e-3, "core ratio " + fmt(top));
      double runner_up = 0.0;
      for (const auto& e : db.entries) {
        l.expect(e.converged, e.cls.name() + " did not converge");
        if (!is_core_power(e.cls)) runner_up = std::max(runner_up, e.ratio);
      }
      l.expect(runner_up < top - 1e-3, "runner-up ratio " + fmt(runner_up));
      const auto lip = lip_identity(pair, octagon_grid(40, 128));
      l.expect(std::abs(lip.value - expected) <= 1e-3, "lip_identity " + fmt(lip.value));
      const geom::FermiFrame frame(axis(G().generators[0]));
      for (double t = -1.0; t <= 1.0; t += 0.1) {
        const Complex x = frame.point(t, 0.0);
        if (in_octagon(x)) l.expect(lip.in_argmax_region(x), "axis point t=" + fmt(t) + " outside the argmax region");
      }
    }
  });

  criterion(4, "plateau enlargement", [](Ledger& l) {
    const double a = 1.5;
    const MetricPair pair{ConformalFactor(), enlarge(a)};
    const auto db = build(pair, 4);
    const auto report = stretch_report(db, 1e-3);
    l.note("S_lower", fmt(report.S_lower));
    l.expect(std::abs(report.S_lower - std::sqrt(a)) <= 3e-3, "S_lower " + fmt(report.S_lower));
    const auto core = find_entry(db, "a1");
    if (!core) {
      l.expect(false, "core class missing");
      return;
    }
    const double wl = weighted_lip_identity(pair, db.entries[*core].cls);
    l.expect(std::abs(wl - db.entries[*core].ratio) <= 1e-3, "weighted lip " + fmt(wl));
    const double lip = lip_identity(pair, octagon_grid(40, 128)).value;
    l.expect(report.S_lower <= lip + 1e-3, "S_lower above lip_identity " + fmt(lip));
  });

  criterion(5, "orbit-sum thermodynamics on the collar pair", [](Ledger& l) {
    const auto& db = window_collar();
    std::vector<double> grid;
    for (int i = 0; i <= 16; ++i) grid.push_back(0.5 * i);
    const auto c = thermo_curve(db, grid, kWindow);
    for (std::size_t i = 1; i < grid.size(); ++i) {
      const double noise = 2.0 * std::max(c.noise[i], c.noise[i - 1]);
      l.expect(c.h[i] <= c.h[i - 1] + noise, "h rises at r=" + fmt(grid[i]));
      l.expect(c.E[i] >= c.E[i - 1] - noise, "E falls at r=" + fmt(grid[i]));
    }
    const double p0 = orbit_sum_pressure(db, 0.0, kWindow);
    const double top = window_max_ratio(db, kWindow);
    l.note("P(0)", fmt(p0));
    l.note("E(8)", fmt(c.E.back()));
    l.note("max_ratio", fmt(top));
    l.expect(p0 >= 0.85 && p0 <= 1.15, "P(0) " + fmt(p0));
    l.expect(std::abs(c.E.back() - top) <= 0.05 * top, "E(8) " + fmt(c.E.back()));
  });

  criterion(6, "entropy-stretch inequality", [](Ledger& l) {
    for (const auto* db : {&window_scaled(), &window_collar()}) {
      const auto r = entropy_stretch_check(*db, reversed(*db), kWindow);
      l.note("product", fmt(r.product));
      l.expect(r.product >= 0.95, "product " + fmt(r.product));
    }
  });

  criterion(7, "subshift exact suite", [](Ledger& l) {
    for (const auto& m : all_models()) {
      const auto cm = ergopt::max_cycle_mean(m);
      l.expect(cm.beta == oracle::brute_force_beta(m), "Karp " + fmt(cm.beta) + " vs brute force");
      const auto b = ergopt::peierls_barrier(m, cm.beta);
      for (int i = 0; i < m.n; ++i) l.expect(b(i, i) <= 0.0, "barrier diagonal positive");
      const auto tri = ergopt::reverse_triangle_check(b);
      l.expect(tri.holds && tri.violations == 0 && tri.triples == static_cast<std::size_t>(m.n * m.n * m.n),
               "reverse triangle");
      const auto u = ergopt::subaction(m, cm.beta);
      const auto ft = ergopt::normalized_potential(m, cm.beta, u);
      for (double x : ft) l.expect(x <= 0.0, "normalized potential positive: " + fmt(x));
      const auto aubry = ergopt::aubry_set(b);
      for (std::size_t e : ergopt::mather_set(m, cm.beta, u)) {
        l.expect(ft[e] == 0.0, "Mather edge with normalized potential " + fmt(ft[e]));
        for (int s : {m.edges[e].src, m.edges[e].dst}) {
          l.expect(std::binary_search(aubry.begin(), aubry.end(), s), "Mather state outside Aubry");
        }
      }
    }
  });

  criterion(8, "zero-temperature suite", [](Ledger& l) {
    const std::vector<double> grid{0.0, 1.0, 10.0, 100.0, 1000.0};
    for (const auto& m : all_models()) {
      const auto s = ergopt::zero_temperature_sweep(m, grid);
      const double slack = std::log(static_cast<double>(m.n)) / 1e3 + 1e-9;
      l.expect(std::abs(s.P_over_r - s.beta) <= slack, "P/r off beta by " + fmt(s.P_over_r - s.beta));
      l.expect(std::abs(s.h_limit - s.mather_entropy) <= 1e-4, "h limit " + fmt(s.h_limit) + " vs " + fmt(s.mather_entropy));
    }
    const auto cob = oracle::coboundary();
    const auto cs = ergopt::zero_temperature_sweep(cob, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      l.expect(std::abs(cs.states[i].h - cs.states[0].h) <= 1e-8, "coboundary h moves at r=" + fmt(grid[i]));
      l.expect(std::abs(cs.Var[i]) <= 1e-8, "coboundary Var " + fmt(cs.Var[i]));
    }
    for (const auto& m : {oracle::two_state(), oracle::golden_mean()}) {
      const auto d = ergopt::entropy_defect_integral(m, 1000.0);
      l.note("defect", fmt(d.defect));
      l.note("integral", fmt(d.integral));
      if (d.defect == 0.0) {
        l.expect(std::abs(d.integral) <= 1e-6, "integral " + fmt(d.integral) + " with no defect");
      } else {
        l.expect(std::abs(d.integral / d.defect - 1.0) <= 0.02, "integral " + fmt(d.integral) + " vs " + fmt(d.defect));
      }
    }
  });

  criterion(9, "critical exponents", [](Ledger& l) {
    const auto& g = G().generators;
    const double one = critical_exponent({g[0]}, 8.0).exponent;
    const double two = critical_exponent({g[0], g[1]}, 8.0).exponent;
    const double all = critical_exponent({g[0], g[1], g[2], g[3]}, 8.0).exponent;
    l.note("cyclic", fmt(one));
    l.note("pair", fmt(two));
    l.note("full", fmt(all));
    l.expect(one <= 0.05, "cyclic subgroup " + fmt(one));
    l.expect(two > 0.2 && two < 0.95, "two-generator subgroup " + fmt(two));
    l.expect(std::abs(all - 1.0) <= 0.2, "full group " + fmt(all));
  });

  criterion(10, "bundled configs are deterministic", [](Ledger& l) {
#ifdef STRETCHLAB_CLI
    const fs::path root = fs::temp_directory_path() / "stretchlab_acceptance";
    for (const char* name : {"conformal_scaling", "collar_appendixC", "sft_twostate"}) {
      const fs::path config = fs::path(STRETCHLAB_CONFIG_DIR) / (std::string(name) + ".json");
      std::vector<fs::path> outs;
      for (const char* run : {"a", "b"}) {
        const fs::path out = root / name / run;
        fs::remove_all(out);
        const std::string cmd = std::string("\"") + STRETCHLAB_CLI + "\" run --config \"" + config.string() + "\" --out \"" +
                                out.string() + "\" > /dev/null 2>&1";
        const int rc = std::system(cmd.c_str());
        l.expect(rc == 0, std::string(name) + " exited with " + std::to_string(rc));
        outs.push_back(out);
      }
      int csvs = 0;
      for (const auto& e : fs::directory_iterator(outs[0])) {
        if (e.path().extension() != ".csv") continue;
        ++csvs;
        const fs::path other = outs[1] / e.path().filename();
        l.expect(fs::exists(other) && io::read_file(e.path().string()) == io::read_file(other.string()),
                 std::string(name) + "/" + e.path().filename().string() + " differs");
      }
      l.expect(csvs > 0, std::string(name) + " wrote no CSV");
      l.note(name, csvs);
    }
    fs::remove_all(root);
#else
    l.expect(false, "built without the command line tool");
#endif
  });

  return failed_criteria == 0 ? 0 : 1;
}
