#include "stretchlab/ergopt.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <json.hpp>
#include <optional>
#include <set>
#include <sstream>

#include "parallel.hpp"
#include "stretchlab/errors.hpp"
#include "stretchlab/io.hpp"

namespace stretchlab::ergopt {

using nlohmann::json;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kIntegralLimit = 1e6;

std::size_t at(int n, int i, int j) { return static_cast<std::size_t>(i) * static_cast<std::size_t>(n) + j; }

// Edge weights f - beta, as integers q f - p when beta = p / q and f is integral.
struct Weights {
  bool exact = false;
  long long q = 1;
  long long p = 0;
  std::vector<long long> ints;
  std::vector<double> reals;
};

std::optional<std::pair<long long, long long>> as_fraction(double beta, int max_den) {
  for (long long q = 1; q <= max_den; ++q) {
    const double pq = std::round(beta * static_cast<double>(q));
    if (std::abs(pq / static_cast<double>(q) - beta) <= 1e-12 * std::max(1.0, std::abs(beta))) {
      return std::make_pair(static_cast<long long>(pq), q);
    }
  }
  return std::nullopt;
}

Weights weights(const SFTModel& m, double beta) {
  Weights w;
  if (m.integral()) {
    if (auto frac = as_fraction(beta, m.n)) {
      w.exact = true;
      w.p = frac->first;
      w.q = frac->second;
      for (const auto& e : m.edges) w.ints.push_back(w.q * static_cast<long long>(std::llround(e.f)) - w.p);
    }
  }
  for (const auto& e : m.edges) w.reals.push_back(e.f - beta);
  return w;
}

template <class T>
constexpr T neg() {
  if constexpr (std::is_integral_v<T>) return std::numeric_limits<T>::min() / 4;
  else return kNegInf;
}

template <class T>
T add(T a, T b) {
  if (a == neg<T>() || b == neg<T>()) return neg<T>();
  return a + b;
}

template <class T>
std::vector<T> maxplus_product(int n, const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<T> c(a.size(), neg<T>());
  for (int i = 0; i < n; ++i) {
    for (int l = 0; l < n; ++l) {
      const T ail = a[at(n, i, l)];
      if (ail == neg<T>()) continue;
      for (int j = 0; j < n; ++j) {
        const T blj = b[at(n, l, j)];
        if (blj == neg<T>()) continue;
        T& cij = c[at(n, i, j)];
        cij = std::max(cij, ail + blj);
      }
    }
  }
  return c;
}

template <class T>
std::vector<T> edge_matrix(const SFTModel& m, const std::vector<T>& w) {
  std::vector<T> a(static_cast<std::size_t>(m.n) * m.n, neg<T>());
  for (std::size_t e = 0; e < m.edges.size(); ++e) a[at(m.n, m.edges[e].src, m.edges[e].dst)] = w[e];
  return a;
}

// Reflexive-transitive closure of a boolean relation.
std::vector<char> reach_closure(int n, std::vector<char> r) {
  for (int i = 0; i < n; ++i) r[at(n, i, i)] = 1;
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      if (!r[at(n, i, k)]) continue;
      for (int j = 0; j < n; ++j) {
        if (r[at(n, k, j)]) r[at(n, i, j)] = 1;
      }
    }
  }
  return r;
}

// Zero-weight cycles of A, read off the max-plus closure.
template <class T>
std::vector<char> critical_states(const SFTModel& m, const std::vector<T>& w, T slack) {
  const int n = m.n;
  std::vector<T> c = edge_matrix(m, w);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      const T cik = c[at(n, i, k)];
      if (cik == neg<T>()) continue;
      for (int j = 0; j < n; ++j) {
        const T ckj = c[at(n, k, j)];
        if (ckj == neg<T>()) continue;
        c[at(n, i, j)] = std::max(c[at(n, i, j)], cik + ckj);
      }
    }
  }
  std::vector<char> crit(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) crit[static_cast<std::size_t>(i)] = c[at(n, i, i)] != neg<T>() && c[at(n, i, i)] >= -slack;
  return crit;
}

template <class T>
void relax(const SFTModel& m, const std::vector<T>& w, T slack, std::vector<T>& v, const std::vector<char>& active) {
  const long long max_sweeps = 4LL * m.n * m.n + 4;
  for (long long sweep = 0;; ++sweep) {
    if (sweep > max_sweeps) throw Error(ErrorCode::NoConvergence, "subaction iteration did not settle");
    bool changed = false;
    for (std::size_t e = 0; e < m.edges.size(); ++e) {
      const auto& ed = m.edges[e];
      if (!active[static_cast<std::size_t>(ed.src)] || !active[static_cast<std::size_t>(ed.dst)]) continue;
      const T vd = v[static_cast<std::size_t>(ed.dst)];
      if (vd == neg<T>()) continue;
      const T cand = w[e] + vd;
      T& cur = v[static_cast<std::size_t>(ed.src)];
      if (cur == neg<T>() || cand > cur + slack) {
        cur = cand;
        changed = true;
      }
    }
    if (!changed) break;
  }
}

// v(i) = best weight of a path from i into a zero-weight cycle of A. Every
// state reaching one gets a tight edge. States that reach none sit in a
// successor-closed set where only feasibility is possible; they get the
// clamped value max(0, best path) shifted down below their predecessors.
template <class T>
std::vector<T> outgoing_values(const SFTModel& m, const std::vector<T>& w, T slack) {
  const auto n = static_cast<std::size_t>(m.n);
  const auto crit = critical_states(m, w, slack);
  std::vector<T> v(n, neg<T>());
  for (std::size_t i = 0; i < n; ++i) {
    if (crit[i]) v[i] = T{0};
  }
  relax(m, w, slack, v, std::vector<char>(n, 1));
  std::vector<char> stray(n, 0);
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (v[i] == neg<T>()) stray[i] = 1, any = true;
  }
  if (!any) return v;
  std::vector<T> vs(n, neg<T>());
  for (std::size_t i = 0; i < n; ++i) {
    if (stray[i]) vs[i] = T{0};
  }
  relax(m, w, slack, vs, stray);
  T shift{0};
  for (std::size_t e = 0; e < m.edges.size(); ++e) {
    const auto& ed = m.edges[e];
    const auto a = static_cast<std::size_t>(ed.src), b = static_cast<std::size_t>(ed.dst);
    if (!stray[a] && stray[b]) shift = std::max(shift, w[e] + vs[b] - v[a]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (stray[i]) v[i] = vs[i] - shift;
  }
  return v;
}

// Normalized potential per edge; exact for integral models.
std::vector<double> tilde(const SFTModel& m, double beta, const std::vector<double>& u) {
  const Weights w = weights(m, beta);
  std::vector<double> out(m.edges.size());
  bool exact = w.exact;
  std::vector<long long> U(u.size());
  if (exact) {
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double s = u[i] * static_cast<double>(w.q);
      U[i] = std::llround(s);
      if (std::abs(s - static_cast<double>(U[i])) > 1e-6) exact = false;
    }
  }
  for (std::size_t e = 0; e < m.edges.size(); ++e) {
    const auto& ed = m.edges[e];
    if (exact) {
      const long long num = w.ints[e] + U[static_cast<std::size_t>(ed.src)] - U[static_cast<std::size_t>(ed.dst)];
      out[e] = static_cast<double>(num) / static_cast<double>(w.q);
    } else {
      out[e] = ed.f - beta + u[static_cast<std::size_t>(ed.src)] - u[static_cast<std::size_t>(ed.dst)];
    }
  }
  return out;
}

double perron_root(const Eigen::MatrixXd& M) {
  if (M.rows() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
  double best = 0.0;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) best = std::max(best, es.eigenvalues()[k].real());
  return best;
}

// Strongly connected components that carry at least one edge.
std::vector<std::vector<int>> cyclic_components(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<char> r(static_cast<std::size_t>(n) * n, 0);
  for (const auto& [a, b] : edges) r[at(n, a, b)] = 1;
  const auto c = reach_closure(n, r);
  std::vector<int> comp(static_cast<std::size_t>(n), -1);
  std::vector<std::vector<int>> comps;
  for (int i = 0; i < n; ++i) {
    if (comp[static_cast<std::size_t>(i)] >= 0) continue;
    std::vector<int> members;
    for (int j = i; j < n; ++j) {
      if (c[at(n, i, j)] && c[at(n, j, i)]) {
        comp[static_cast<std::size_t>(j)] = static_cast<int>(comps.size());
        members.push_back(j);
      }
    }
    comps.push_back(std::move(members));
  }
  std::vector<char> has_edge(comps.size(), 0);
  for (const auto& [a, b] : edges) {
    if (comp[static_cast<std::size_t>(a)] == comp[static_cast<std::size_t>(b)]) has_edge[static_cast<std::size_t>(comp[static_cast<std::size_t>(a)])] = 1;
  }
  std::vector<std::vector<int>> out;
  for (std::size_t k = 0; k < comps.size(); ++k) {
    if (has_edge[k]) out.push_back(comps[k]);
  }
  return out;
}

// Everything pressure needs that does not depend on r.
struct Prepared {
  const SFTModel* model = nullptr;
  double beta = 0.0;
  std::vector<std::vector<int>> comps;
  // Per component: its own max cycle mean and a normalized potential on its
  // internal edges (<= 0, with a zero edge out of every member).
  std::vector<double> comp_beta;
  std::vector<std::vector<double>> comp_ft;
};

Prepared prepare(const SFTModel& m) {
  Prepared p;
  p.model = &m;
  p.beta = max_cycle_mean(m).beta;
  std::vector<std::pair<int, int>> e;
  for (const auto& ed : m.edges) e.emplace_back(ed.src, ed.dst);
  p.comps = cyclic_components(m.n, e);
  for (const auto& comp : p.comps) {
    std::vector<int> local(static_cast<std::size_t>(m.n), -1);
    for (std::size_t k = 0; k < comp.size(); ++k) local[static_cast<std::size_t>(comp[k])] = static_cast<int>(k);
    // Built directly: a single-state component is not a valid standalone model.
    SFTModel sub;
    sub.n = static_cast<int>(comp.size());
    std::vector<std::size_t> global;
    for (std::size_t k = 0; k < m.edges.size(); ++k) {
      const int a = local[static_cast<std::size_t>(m.edges[k].src)], b = local[static_cast<std::size_t>(m.edges[k].dst)];
      if (a < 0 || b < 0) continue;
      sub.edges.push_back({a, b, m.edges[k].f});
      global.push_back(k);
    }
    const double beta = max_cycle_mean(sub).beta;
    const auto ft = tilde(sub, beta, subaction(sub, beta));
    std::vector<double> full(m.edges.size(), kNegInf);
    for (std::size_t k = 0; k < global.size(); ++k) full[global[k]] = ft[k];
    p.comp_beta.push_back(beta);
    p.comp_ft.push_back(std::move(full));
  }
  return p;
}

Eigen::MatrixXd tilted_block(const Prepared& p, std::size_t ci, double r) {
  const auto& comp = p.comps[ci];
  const auto& ft = p.comp_ft[ci];
  const int n = p.model->n;
  std::vector<int> local(static_cast<std::size_t>(n), -1);
  for (std::size_t k = 0; k < comp.size(); ++k) local[static_cast<std::size_t>(comp[k])] = static_cast<int>(k);
  const auto m = static_cast<Eigen::Index>(comp.size());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t e = 0; e < p.model->edges.size(); ++e) {
    const auto& ed = p.model->edges[e];
    const int a = local[static_cast<std::size_t>(ed.src)], b = local[static_cast<std::size_t>(ed.dst)];
    if (a < 0 || b < 0) continue;
    M(a, b) = std::exp(r * ft[e]);
  }
  return M;
}

// P(r) - r beta, maximized over components.
std::pair<double, std::size_t> log_lambda(const Prepared& p, double r) {
  double best = kNegInf;
  std::size_t arg = 0;
  for (std::size_t k = 0; k < p.comps.size(); ++k) {
    const double l = std::log(perron_root(tilted_block(p, k, r))) + r * (p.comp_beta[k] - p.beta);
    if (l > best) {
      best = l;
      arg = k;
    }
  }
  return {best, arg};
}

// Positive right eigenvector for the Perron root. At large r the block can be
// numerically reducible with a repeated root; the dense solver then returns
// an arbitrary mix, so fall back to a lazy power iteration.
Eigen::VectorXd right_perron_vector(const Eigen::MatrixXd& M, double lambda) {
  const auto k = M.rows();
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, true);
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < k; ++i) {
    if (es.eigenvalues()[i].real() > es.eigenvalues()[best].real()) best = i;
  }
  Eigen::VectorXd v = es.eigenvectors().col(best).real();
  if (v.sum() < 0) v = -v;
  const double scale = v.cwiseAbs().maxCoeff();
  bool ok = scale > 0.0 && std::isfinite(scale);
  if (ok) {
    v /= scale;
    ok = v.minCoeff() > 1e-12 && (M * v - lambda * v).cwiseAbs().maxCoeff() <= 1e-10 * lambda;
  }
  if (ok) return v;
  const Eigen::MatrixXd B = 0.5 * (Eigen::MatrixXd::Identity(k, k) + M / lambda);
  v = Eigen::VectorXd::Ones(k);
  for (int it = 0; it < 100000; ++it) {
    Eigen::VectorXd next = B * v;
    next /= next.maxCoeff();
    const double change = (next - v).cwiseAbs().maxCoeff();
    v = next;
    if (change <= 1e-15) break;
  }
  return v;
}

// pi T = pi on the rows that carry mass. A direct solve first; if T splits
// into several closed classes the system is singular and a lazy power
// iteration from the uniform vector picks a mixture.
Eigen::VectorXd stationary_vector(const Eigen::MatrixXd& T, const Eigen::VectorXd& v) {
  const auto k = T.rows();
  Eigen::MatrixXd A = T.transpose() - Eigen::MatrixXd::Identity(k, k);
  A.row(k - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
  rhs(k - 1) = 1.0;
  Eigen::VectorXd pi = A.fullPivLu().solve(rhs);
  auto settled = [&](const Eigen::VectorXd& x) {
    return x.allFinite() && x.minCoeff() >= -1e-12 && std::abs(x.sum() - 1.0) <= 1e-9 &&
           (x.transpose() * T - x.transpose()).cwiseAbs().maxCoeff() <= 1e-10;
  };
  bool live = true;
  for (Eigen::Index i = 0; i < k; ++i) live = live && v(i) > 0.0;
  if (live && settled(pi)) {
    for (Eigen::Index i = 0; i < k; ++i) pi(i) = std::max(pi(i), 0.0);
    return pi / pi.sum();
  }
  Eigen::VectorXd x = Eigen::VectorXd::Zero(k);
  for (Eigen::Index i = 0; i < k; ++i) x(i) = v(i) > 0.0 ? 1.0 : 0.0;
  x /= x.sum();
  const Eigen::MatrixXd L = 0.5 * (Eigen::MatrixXd::Identity(k, k) + T);
  for (int it = 0; it < 100000; ++it) {
    Eigen::VectorXd next = L.transpose() * x;
    next /= next.sum();
    const double change = (next - x).cwiseAbs().maxCoeff();
    x = next;
    if (change <= 1e-16) break;
  }
  return x;
}

GibbsState gibbs(const Prepared& p, double r) {
  const SFTModel& m = *p.model;
  const int n = m.n;
  const auto [L, ci] = log_lambda(p, r);
  const auto& comp = p.comps[ci];
  const Eigen::MatrixXd M = tilted_block(p, ci, r);
  const double lambda = std::exp(L - r * (p.comp_beta[ci] - p.beta));
  const auto k = M.rows();

  Eigen::VectorXd v = right_perron_vector(M, lambda);
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (v(i) <= 0.0) continue;
    double s = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      T(i, j) = M(i, j) * v(j) / (lambda * v(i));
      s += T(i, j);
    }
    T.row(i) /= s;
  }
  const Eigen::VectorXd pi = stationary_vector(T, v);
  GibbsState g;
  g.r = r;
  g.P = r * p.beta + L;
  g.transition.assign(static_cast<std::size_t>(n) * n, 0.0);
  g.stationary.assign(static_cast<std::size_t>(n), 0.0);
  g.support = comp;
  for (Eigen::Index i = 0; i < k; ++i) {
    g.stationary[static_cast<std::size_t>(comp[static_cast<std::size_t>(i)])] = pi(i);
    for (Eigen::Index j = 0; j < k; ++j) {
      g.transition[at(n, comp[static_cast<std::size_t>(i)], comp[static_cast<std::size_t>(j)])] = T(i, j);
    }
  }
  g.row_residual = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    if (v(i) > 0.0) g.row_residual = std::max(g.row_residual, std::abs(T.row(i).sum() - 1.0));
  }
  g.stationarity_residual = (pi.transpose() * T - pi.transpose()).cwiseAbs().maxCoeff();

  for (const auto& ed : m.edges) {
    const double t = g.transition[at(n, ed.src, ed.dst)];
    if (t <= 0.0) continue;
    const double mass = g.stationary[static_cast<std::size_t>(ed.src)] * t;
    g.E += mass * ed.f;
    g.h -= mass * std::log(t);
  }
  g.h = std::max(g.h, 0.0);
  g.identity_residual = std::abs(g.P - g.h - r * g.E);
  return g;
}

}  // namespace

SFTModel SFTModel::make(int n, std::vector<Edge> edges) {
  SFTModel m;
  m.n = n;
  m.edges = std::move(edges);
  m.validate();
  return m;
}

void SFTModel::validate() const {
  if (n < 2 || n > 64) throw Error(ErrorCode::InvalidModel, "state count must be in [2, 64]");
  if (edges.empty()) throw Error(ErrorCode::InvalidModel, "no edges");
  std::vector<char> out(static_cast<std::size_t>(n), 0), in(static_cast<std::size_t>(n), 0);
  std::set<std::pair<int, int>> seen;
  for (const auto& e : edges) {
    if (e.src < 0 || e.src >= n || e.dst < 0 || e.dst >= n) throw Error(ErrorCode::InvalidModel, "edge state out of range");
    if (!std::isfinite(e.f)) throw Error(ErrorCode::InvalidModel, "potential must be finite");
    if (!seen.emplace(e.src, e.dst).second) throw Error(ErrorCode::InvalidModel, "duplicate edge");
    out[static_cast<std::size_t>(e.src)] = 1;
    in[static_cast<std::size_t>(e.dst)] = 1;
  }
  for (int i = 0; i < n; ++i) {
    if (!out[static_cast<std::size_t>(i)] || !in[static_cast<std::size_t>(i)]) {
      throw Error(ErrorCode::InvalidModel, "state " + std::to_string(i) + " is stranded");
    }
  }
}

SFTModel SFTModel::from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 3) throw Error(ErrorCode::InvalidModel, "edges entries are [src, dst, f]");
      edges.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<double>()});
    }
    return make(j.at("n").get<int>(), std::move(edges));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidModel, std::string("model json: ") + e.what());
  }
}

std::string SFTModel::to_json() const {
  json j;
  j["n"] = n;
  j["edges"] = json::array();
  for (const auto& e : edges) j["edges"].push_back({e.src, e.dst, e.f});
  return j.dump();
}

bool SFTModel::integral() const {
  return std::all_of(edges.begin(), edges.end(),
                     [](const Edge& e) { return std::abs(e.f) <= kIntegralLimit && e.f == std::round(e.f); });
}

SFTModel SFTModel::scaled(double c) const {
  SFTModel m = *this;
  for (auto& e : m.edges) e.f *= c;
  return m;
}

SFTModel SFTModel::shifted(double c) const {
  SFTModel m = *this;
  for (auto& e : m.edges) e.f += c;
  return m;
}

CycleMean max_cycle_mean(const SFTModel& m) {
  const int n = m.n;
  // D[k][v]: best weight of a walk with k edges ending at v, starting anywhere.
  std::vector<std::vector<double>> D(static_cast<std::size_t>(n) + 1, std::vector<double>(static_cast<std::size_t>(n), kNegInf));
  std::vector<std::vector<long long>> pred(static_cast<std::size_t>(n) + 1, std::vector<long long>(static_cast<std::size_t>(n), -1));
  std::fill(D[0].begin(), D[0].end(), 0.0);
  for (int k = 1; k <= n; ++k) {
    for (std::size_t e = 0; e < m.edges.size(); ++e) {
      const auto& ed = m.edges[e];
      const double prev = D[static_cast<std::size_t>(k) - 1][static_cast<std::size_t>(ed.src)];
      if (prev == kNegInf) continue;
      double& cur = D[static_cast<std::size_t>(k)][static_cast<std::size_t>(ed.dst)];
      if (prev + ed.f > cur) {
        cur = prev + ed.f;
        pred[static_cast<std::size_t>(k)][static_cast<std::size_t>(ed.dst)] = static_cast<long long>(e);
      }
    }
  }
  double karp = kNegInf;
  int vstar = -1;
  for (int v = 0; v < n; ++v) {
    const double dn = D[static_cast<std::size_t>(n)][static_cast<std::size_t>(v)];
    if (dn == kNegInf) continue;
    double worst = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k) {
      const double dk = D[static_cast<std::size_t>(k)][static_cast<std::size_t>(v)];
      if (dk == kNegInf) continue;
      worst = std::min(worst, (dn - dk) / (n - k));
    }
    if (worst > karp) {
      karp = worst;
      vstar = v;
    }
  }
  // Walk of n edges ending at vstar; every cycle on it is critical, pick the
  // best one to absorb rounding.
  std::vector<int> states(static_cast<std::size_t>(n) + 1);
  std::vector<std::size_t> walk_edges(static_cast<std::size_t>(n));
  int v = vstar;
  for (int k = n; k >= 1; --k) {
    states[static_cast<std::size_t>(k)] = v;
    const auto e = static_cast<std::size_t>(pred[static_cast<std::size_t>(k)][static_cast<std::size_t>(v)]);
    walk_edges[static_cast<std::size_t>(k) - 1] = e;
    v = m.edges[e].src;
  }
  states[0] = v;

  CycleMean best;
  best.beta = kNegInf;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b <= n; ++b) {
      if (states[static_cast<std::size_t>(b)] != states[static_cast<std::size_t>(a)]) continue;
      double sum = 0.0;
      for (int k = a; k < b; ++k) sum += m.edges[walk_edges[static_cast<std::size_t>(k)]].f;
      const double mean = sum / (b - a);
      if (mean > best.beta || (mean == best.beta && static_cast<std::size_t>(b - a) < best.edges.size())) {
        best.beta = mean;
        best.cycle.assign(states.begin() + a, states.begin() + b);
        best.edges.assign(walk_edges.begin() + a, walk_edges.begin() + b);
      }
      break;  // first return only: keeps the cycle simple
    }
  }
  return best;
}

std::vector<double> subaction(const SFTModel& m, double beta) {
  const Weights w = weights(m, beta);
  std::vector<double> u(static_cast<std::size_t>(m.n));
  if (w.exact) {
    const auto v = outgoing_values<long long>(m, w.ints, 0);
    for (int i = 0; i < m.n; ++i) {
      u[static_cast<std::size_t>(i)] = static_cast<double>(v[0] - v[static_cast<std::size_t>(i)]) / static_cast<double>(w.q);
    }
  } else {
    const auto v = outgoing_values<double>(m, w.reals, 1e-13);
    for (int i = 0; i < m.n; ++i) u[static_cast<std::size_t>(i)] = v[0] - v[static_cast<std::size_t>(i)];
  }
  return u;
}

std::vector<double> normalized_potential(const SFTModel& m, double beta, const std::vector<double>& u) {
  return tilde(m, beta, u);
}

namespace {

template <class T>
Barrier barrier_impl(const SFTModel& m, const std::vector<T>& w, T tol) {
  const int n = m.n;
  const auto A = edge_matrix<T>(m, w);

  // Critical states: on a cycle of weight zero.
  std::vector<T> C = A;
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      const T cik = C[at(n, i, k)];
      if (cik == neg<T>()) continue;
      for (int j = 0; j < n; ++j) {
        const T s = add(cik, C[at(n, k, j)]);
        if (s > C[at(n, i, j)]) C[at(n, i, j)] = s;
      }
    }
  }
  std::vector<char> edge(static_cast<std::size_t>(n) * n, 0);
  for (const auto& e : m.edges) edge[at(n, e.src, e.dst)] = 1;
  const auto reach = reach_closure(n, edge);
  std::vector<char> mask(static_cast<std::size_t>(n) * n, 0);
  for (int c = 0; c < n; ++c) {
    const T cc = C[at(n, c, c)];
    if (cc == neg<T>() || cc < -tol) continue;
    for (int i = 0; i < n; ++i) {
      if (!reach[at(n, i, c)]) continue;
      for (int j = 0; j < n; ++j) {
        if (reach[at(n, c, j)]) mask[at(n, i, j)] = 1;
      }
    }
  }

  auto same = [&](const std::vector<T>& x, const std::vector<T>& y) {
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (!mask[k]) continue;
      if (x[k] == neg<T>() || y[k] == neg<T>()) {
        if (x[k] != y[k]) return false;
        continue;
      }
      if (std::abs(x[k] - y[k]) > tol) return false;
    }
    return true;
  };

  // Jump past the transient by squaring, then look for the period.
  constexpr int kSquarings = 20;
  std::vector<T> base = A;
  for (int s = 0; s < kSquarings; ++s) base = maxplus_product(n, base, base);
  const long long K = 1LL << kSquarings;
  const long long limit = 8LL * n * n;
  std::vector<std::vector<T>> orbit{base};
  int period = 0;
  for (long long p = 1; p <= limit; ++p) {
    auto next = maxplus_product(n, orbit.back(), A);
    if (same(next, base)) {
      period = static_cast<int>(p);
      break;
    }
    orbit.push_back(std::move(next));
  }
  if (period == 0) throw Error(ErrorCode::PeriodNotFound, "max-plus powers not periodic within 8 n^2 steps");

  std::vector<T> best(static_cast<std::size_t>(n) * n, neg<T>());
  for (const auto& M : orbit) {
    for (std::size_t k = 0; k < best.size(); ++k) {
      if (mask[k]) best[k] = std::max(best[k], M[k]);
    }
  }
  Barrier b;
  b.n = n;
  b.period = period;
  b.power = K + period;
  b.h.assign(best.size(), kNegInf);
  if constexpr (std::is_integral_v<T>) b.numer.assign(best.size(), neg<T>());
  for (std::size_t k = 0; k < best.size(); ++k) {
    if (best[k] == neg<T>()) continue;
    if constexpr (std::is_integral_v<T>) {
      b.numer[k] = best[k];
    } else {
      b.h[k] = best[k];
    }
  }
  return b;
}

}  // namespace

Barrier peierls_barrier(const SFTModel& m, double beta) {
  const Weights w = weights(m, beta);
  if (w.exact) {
    Barrier b = barrier_impl<long long>(m, w.ints, 0);
    b.denom = w.q;
    for (std::size_t k = 0; k < b.h.size(); ++k) {
      if (b.numer[k] != neg<long long>()) b.h[k] = static_cast<double>(b.numer[k]) / static_cast<double>(w.q);
    }
    return b;
  }
  return barrier_impl<double>(m, w.reals, 1e-9);
}

std::vector<int> aubry_set(const Barrier& b) {
  std::vector<int> out;
  for (int i = 0; i < b.n; ++i) {
    if (b.denom > 0) {
      if (b.numer[at(b.n, i, i)] == 0) out.push_back(i);
    } else if (std::abs(b(i, i)) <= kZeroSnap) {
      out.push_back(i);
    }
  }
  return out;
}

std::vector<std::size_t> mather_set(const SFTModel& m, double beta, const std::vector<double>& u) {
  const auto ft = tilde(m, beta, u);
  const int n = m.n;
  std::vector<char> zero(static_cast<std::size_t>(n) * n, 0);
  for (std::size_t e = 0; e < m.edges.size(); ++e) {
    if (std::abs(ft[e]) <= kZeroSnap) zero[at(n, m.edges[e].src, m.edges[e].dst)] = 1;
  }
  const auto reach = reach_closure(n, zero);
  std::vector<std::size_t> out;
  for (std::size_t e = 0; e < m.edges.size(); ++e) {
    const auto& ed = m.edges[e];
    if (std::abs(ft[e]) <= kZeroSnap && reach[at(n, ed.dst, ed.src)]) out.push_back(e);
  }
  return out;
}

TriangleReport reverse_triangle_check(const Barrier& b) {
  TriangleReport rep;
  const int n = b.n;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        ++rep.triples;
        const double hij = b(i, j), hjk = b(j, k), hik = b(i, k);
        if (hij == kNegInf || hjk == kNegInf) continue;
        bool ok;
        double gap;
        if (b.denom > 0) {
          const long long lhs = b.numer[at(n, i, k)];
          const long long rhs = b.numer[at(n, i, j)] + b.numer[at(n, j, k)];
          ok = lhs != neg<long long>() && lhs >= rhs;
          gap = ok ? 0.0 : (lhs == neg<long long>() ? std::numeric_limits<double>::infinity()
                                                       : static_cast<double>(rhs - lhs) / static_cast<double>(b.denom));
        } else {
          ok = hik >= hij + hjk - kZeroSnap;
          gap = ok ? 0.0 : hij + hjk - hik;
        }
        if (!ok) {
          rep.holds = false;
          ++rep.violations;
          rep.worst = std::max(rep.worst, gap);
        }
      }
    }
  }
  return rep;
}

GibbsState pressure(const SFTModel& m, double r) {
  if (!std::isfinite(r)) throw Error(ErrorCode::InvalidArgument, "r must be finite");
  return gibbs(prepare(m), r);
}

double log_perron(int n, const std::vector<std::pair<int, int>>& edges) {
  if (edges.empty()) return kNegInf;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [a, b] : edges) M(a, b) = 1.0;
  return std::log(perron_root(M));
}

double topological_entropy(const SFTModel& m) {
  std::vector<std::pair<int, int>> e;
  for (const auto& ed : m.edges) e.emplace_back(ed.src, ed.dst);
  return log_perron(m.n, e);
}

double mather_entropy(const SFTModel& m) {
  const double beta = max_cycle_mean(m).beta;
  const auto u = subaction(m, beta);
  std::vector<std::pair<int, int>> e;
  for (auto k : mather_set(m, beta, u)) e.emplace_back(m.edges[k].src, m.edges[k].dst);
  return log_perron(m.n, e);
}

namespace {

void check_step(double step) {
  if (step < 1e-4) throw Error(ErrorCode::StepTooSmall, "variance step below 1e-4");
  if (step > 1e-2) throw Error(ErrorCode::InvalidArgument, "variance step above 1e-2");
}

double second_difference(const Prepared& p, double r, double step) {
  const double lp = log_lambda(p, r + step).first;
  const double l0 = log_lambda(p, r).first;
  const double lm = log_lambda(p, r - step).first;
  const double roundoff = 8.0 * std::numeric_limits<double>::epsilon() * std::max({1.0, std::abs(lp), std::abs(lm)});
  if (roundoff / (step * step) > 1e-6) throw Error(ErrorCode::StepTooSmall, "second difference lost to cancellation");
  return (lp - 2.0 * l0 + lm) / (step * step);
}

VarianceResult variance_impl(const Prepared& p, double r, double step) {
  check_step(step);
  VarianceResult v;
  v.value = second_difference(p, r, step);
  v.dh_dr = (gibbs(p, r + step).h - gibbs(p, r - step).h) / (2.0 * step);
  v.residual = std::abs(v.dh_dr + r * v.value);
  v.consistent = v.residual <= 10.0 * step * step;
  return v;
}

}  // namespace

VarianceResult variance(const SFTModel& m, double r, double step) { return variance_impl(prepare(m), r, step); }

SweepResult zero_temperature_sweep(const SFTModel& m, const std::vector<double>& r_grid, int workers) {
  if (r_grid.empty() || !std::is_sorted(r_grid.begin(), r_grid.end())) {
    throw Error(ErrorCode::InvalidArgument, "r grid must be increasing");
  }
  if (r_grid.back() < 1e3) throw Error(ErrorCode::InvalidArgument, "r grid must reach 1e3");
  const Prepared p = prepare(m);
  SweepResult s;
  s.beta = p.beta;
  s.states.resize(r_grid.size());
  s.Var.resize(r_grid.size());
  detail::parallel_for(r_grid.size(), workers, [&](std::size_t i) {
    s.states[i] = gibbs(p, r_grid[i]);
    s.Var[i] = second_difference(p, r_grid[i], 1e-3);
  });
  const auto& last = s.states.back();
  s.P_over_r = last.P / last.r;
  s.E_limit = last.E;
  s.h_limit = last.h;
  s.mather_entropy = mather_entropy(m);
  return s;
}

std::string sweep_csv(const SweepResult& s) {
  std::ostringstream out;
  out << "r,P,E,h,Var\n";
  for (std::size_t i = 0; i < s.states.size(); ++i) {
    const auto& g = s.states[i];
    out << io::format_double(g.r) << ',' << io::format_double(g.P) << ',' << io::format_double(g.E) << ','
        << io::format_double(g.h) << ',' << io::format_double(s.Var[i]) << '\n';
  }
  return out.str();
}

DefectResult entropy_defect_integral(const SFTModel& m, double r_max, int nodes) {
  if (r_max < 200.0) throw Error(ErrorCode::InvalidArgument, "r_max must be at least 200");
  if (nodes < 10) throw Error(ErrorCode::InvalidArgument, "too few quadrature nodes");
  const Prepared p = prepare(m);
  DefectResult d;
  d.nodes = static_cast<std::size_t>(nodes) + 1;
  double prev_r = 0.0, prev_g = 0.0;
  for (int i = 0; i <= nodes; ++i) {
    const double x = static_cast<double>(i) / nodes;
    const double r = r_max * x * x;
    const double g = r * second_difference(p, r, 1e-3);
    if (i > 0) d.integral += 0.5 * (g + prev_g) * (r - prev_r);
    prev_r = r;
    prev_g = g;
  }
  // r Var(r) at the cutoff times the cutoff: the tail if Var decays like 1/r^3.
  d.tail_bound = std::abs(prev_g) * r_max;
  d.defect = topological_entropy(m) - mather_entropy(m);
  d.relative_error = d.defect > 0.0 ? std::abs(d.integral - d.defect) / d.defect : std::abs(d.integral);
  return d;
}

}  // namespace stretchlab::ergopt
