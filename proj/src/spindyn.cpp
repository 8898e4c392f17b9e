#include "causord/spindyn.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <sstream>

#include "causord/errors.hpp"

namespace causord::spindyn {

namespace {

double edge_cost(int twice_spin) {
  // sqrt(j (j + 1)) with j = s / 2.
  double s = twice_spin;
  return 0.5 * std::sqrt(s * (s + 2.0));
}

bool edge_allowed(const std::vector<int>& allow, int e) {
  return allow.empty() || std::find(allow.begin(), allow.end(), e) != allow.end();
}

void check_edge_list(const SpinGraph& g, const std::vector<int>& allow,
                     const char* what) {
  for (int e : allow) {
    if (e < 0 || e >= g.edge_count()) {
      throw SemanticError(std::string(what) + ": edge index " +
                          std::to_string(e) + " out of range");
    }
  }
}

}  // namespace

SpinGraph SpinGraph::make(int vertex_count,
                          std::vector<std::pair<int, int>> edges) {
  if (vertex_count < 1) throw SemanticError("graph needs at least one vertex");
  if (edges.empty()) throw SemanticError("graph needs at least one edge");
  SpinGraph g;
  g.vertex_count_ = vertex_count;
  g.incident_.assign(vertex_count, {});
  for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
    auto [u, v] = edges[e];
    if (u < 0 || u >= vertex_count || v < 0 || v >= vertex_count) {
      throw SemanticError("edge " + std::to_string(e) +
                          " has an endpoint out of range");
    }
    g.incident_[u].push_back(e);
    g.incident_[v].push_back(e);  // loops land twice, as intended
  }
  g.edges_ = std::move(edges);
  for (int v = 0; v < vertex_count; ++v) {
    if (g.incident_[v].size() != 3) {
      throw SemanticError("vertex " + std::to_string(v) + " has degree " +
                          std::to_string(g.incident_[v].size()) +
                          ", the graph must be trivalent");
    }
  }
  // Connectivity over non-loop edges.
  std::vector<bool> seen(vertex_count, false);
  std::deque<int> bfs{0};
  seen[0] = true;
  while (!bfs.empty()) {
    int v = bfs.front();
    bfs.pop_front();
    for (int e : g.incident_[v]) {
      int w = g.edges_[e].first == v ? g.edges_[e].second : g.edges_[e].first;
      if (!seen[w]) {
        seen[w] = true;
        bfs.push_back(w);
      }
    }
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw SemanticError("graph is not connected");
  }
  return g;
}

SpinState make_state(const SpinGraph& g, std::vector<int> twice_spin,
                     std::vector<int> helicity) {
  if (static_cast<int>(twice_spin.size()) != g.edge_count() ||
      static_cast<int>(helicity.size()) != g.edge_count()) {
    throw SemanticError("state labels do not match the edge count");
  }
  for (int s : twice_spin) {
    if (s < 0) throw SemanticError("twice-spins must be nonnegative");
  }
  for (int h : helicity) {
    if (h != 1 && h != -1) throw SemanticError("helicities must be +1 or -1");
  }
  SpinState st;
  st.twice_spin = std::move(twice_spin);
  st.helicity = std::move(helicity);
  st.intertwiner.assign(g.vertex_count(), 0);
  return st;
}

bool admissible(const SpinGraph& g, const SpinState& s) {
  if (static_cast<int>(s.twice_spin.size()) != g.edge_count()) {
    throw SemanticError("state labels do not match the edge count");
  }
  for (int x : s.twice_spin) {
    if (x < 0) return false;
  }
  for (int v = 0; v < g.vertex_count(); ++v) {
    int sp[3];
    const auto& inc = g.incident(v);
    for (int k = 0; k < 3; ++k) sp[k] = s.twice_spin[inc[k]];
    std::sort(sp, sp + 3);
    if (sp[2] > sp[0] + sp[1]) return false;
    if ((sp[0] + sp[1] + sp[2]) % 2 != 0) return false;
  }
  return true;
}

void MoveCatalogue::validate(const SpinGraph& g) const {
  if (r0 <= 0) throw SemanticError("r0 must be positive");
  if (gamma <= 0) throw SemanticError("gamma must be positive");
  if (beta < 0) throw SemanticError("beta must be nonnegative");
  if (window_lo < 0 || window_lo > window_hi) {
    throw SemanticError("spin window must satisfy 0 <= lo <= hi");
  }
  check_edge_list(g, spin_step_edges, "SpinStep edges");
  check_edge_list(g, helicity_flip_edges, "HelicityFlip edges");
  check_edge_list(g, recouple_edges, "Recouple edges");
}

std::string state_key(const SpinState& s) {
  std::ostringstream os;
  for (size_t i = 0; i < s.twice_spin.size(); ++i) {
    if (i) os << ',';
    os << s.twice_spin[i];
  }
  os << '|';
  for (int h : s.helicity) os << (h > 0 ? '+' : '-');
  return os.str();
}

int Generator::find_state(const SpinState& s) const {
  auto it = index.find(state_key(s));
  return it == index.end() ? -1 : it->second;
}

int Generator::with_helicity(int state, int edge, int sign) const {
  const SpinState& st = states[state];
  if (st.helicity[edge] == sign) return state;
  SpinState img = st;
  img.helicity[edge] = sign;
  return find_state(img);
}

Rational Generator::exact_rate(int from, int to) const {
  for (const Transition& t : out[from]) {
    if (t.to == to) {
      if (!t.is_exact) throw SemanticError("rate is not exactly rational");
      return t.exact;
    }
  }
  return Rational(0);
}

void Generator::finalize() {
  index.clear();
  for (int i = 0; i < state_count(); ++i) index[state_key(states[i])] = i;
  out.resize(states.size());
  exit_rate.assign(states.size(), 0.0);
  all_exact = true;
  for (int i = 0; i < state_count(); ++i) {
    std::sort(out[i].begin(), out[i].end(),
              [](const Transition& a, const Transition& b) { return a.to < b.to; });
    double ex = 0;
    for (const Transition& t : out[i]) {
      ex += t.rate;
      if (!t.is_exact) all_exact = false;
    }
    exit_rate[i] = ex;
  }
}

namespace {

struct RawMove {
  SpinState target;
  double dc = 0.0;   // cost change
  int dh_plus = 0;   // edges flipping - to +
  bool zero_dc = false;
};

std::vector<RawMove> local_moves(const SpinGraph& g, const SpinState& st,
                                 const MoveCatalogue& cat) {
  std::vector<RawMove> ms;
  if (cat.spin_step) {
    for (int e = 0; e < g.edge_count(); ++e) {
      if (!edge_allowed(cat.spin_step_edges, e)) continue;
      for (int d : {-1, +1}) {
        int s2 = st.twice_spin[e] + d;
        if (s2 < cat.window_lo || s2 > cat.window_hi) continue;
        SpinState nx = st;
        nx.twice_spin[e] = s2;
        if (!admissible(g, nx)) continue;
        ms.push_back({std::move(nx),
                      edge_cost(s2) - edge_cost(st.twice_spin[e]), 0, false});
      }
    }
  }
  if (cat.helicity_flip) {
    for (int e = 0; e < g.edge_count(); ++e) {
      if (!edge_allowed(cat.helicity_flip_edges, e)) continue;
      SpinState nx = st;
      nx.helicity[e] = -nx.helicity[e];
      int dh = nx.helicity[e] > 0 ? 1 : 0;
      ms.push_back({std::move(nx), 0.0, dh, true});
    }
  }
  if (cat.recouple) {
    for (int e = 0; e < g.edge_count(); ++e) {
      if (!edge_allowed(cat.recouple_edges, e)) continue;
      if (g.is_loop(e)) continue;  // needs two distinct adjacent vertices
      for (int s2 = cat.window_lo; s2 <= cat.window_hi; ++s2) {
        if (s2 == st.twice_spin[e]) continue;
        SpinState nx = st;
        nx.twice_spin[e] = s2;
        if (!admissible(g, nx)) continue;
        ms.push_back({std::move(nx),
                      edge_cost(s2) - edge_cost(st.twice_spin[e]), 0, false});
      }
    }
  }
  return ms;
}

}  // namespace

Generator build_state_space(const SpinGraph& g, const SpinState& seed,
                            const MoveCatalogue& moves, int cap,
                            const std::vector<int>& closure_edges) {
  moves.validate(g);
  check_edge_list(g, closure_edges, "closure edges");
  if (static_cast<int>(seed.twice_spin.size()) != g.edge_count() ||
      static_cast<int>(seed.helicity.size()) != g.edge_count()) {
    throw SemanticError("seed labels do not match the edge count");
  }
  if (!admissible(g, seed)) {
    throw InadmissibleSeedError("seed configuration violates admissibility");
  }
  if (cap < 1) throw CapExceededError("state cap cannot hold the seed");
  if (cap > 100000) throw SizeError("state cap exceeds 10^5");

  Generator gen;
  gen.graph = g;
  gen.moves = moves;

  double r0d = to_double(moves.r0);
  double betad = to_double(moves.beta);
  double gammad = to_double(moves.gamma);
  bool beta_zero = moves.beta == 0;

  std::deque<int> queue;
  auto intern = [&](const SpinState& s) -> int {
    std::string key = state_key(s);
    auto it = gen.index.find(key);
    if (it != gen.index.end()) return it->second;
    if (gen.state_count() >= cap) return -1;
    int idx = gen.state_count();
    gen.states.push_back(s);
    gen.index.emplace(std::move(key), idx);
    queue.push_back(idx);
    return idx;
  };

  SpinState seed_full = seed;
  seed_full.intertwiner.assign(g.vertex_count(), 0);
  intern(seed_full);

  struct Acc {
    double rate = 0;
    Rational exact = 0;
    bool is_exact = true;
  };
  std::vector<std::map<int, Acc>> rows;

  while (!queue.empty()) {
    int i = queue.front();
    queue.pop_front();
    if (static_cast<int>(rows.size()) <= i) rows.resize(i + 1);
    SpinState st = gen.states[i];  // copy: states may reallocate below
    for (RawMove& mv : local_moves(g, st, moves)) {
      int j = intern(mv.target);
      if (j < 0) {
        gen.truncated = true;  // target beyond the cap: move dropped
        continue;
      }
      Acc& acc = rows[i][j];
      if (mv.zero_dc || beta_zero) {
        Rational er = moves.r0 * (mv.dh_plus > 0 ? moves.gamma : Rational(1));
        acc.exact += er;
        acc.rate += to_double(er);
      } else {
        acc.is_exact = false;
        acc.rate += r0d * std::exp(-betad * mv.dc) *
                    (mv.dh_plus > 0 ? gammad : 1.0);
      }
    }
    for (int e : closure_edges) {
      for (int sign : {+1, -1}) {
        if (st.helicity[e] == sign) continue;
        SpinState img = st;
        img.helicity[e] = sign;
        if (intern(img) < 0) gen.truncated = true;
      }
    }
  }

  rows.resize(gen.state_count());
  gen.out.assign(gen.state_count(), {});
  for (int i = 0; i < gen.state_count(); ++i) {
    for (auto& [j, acc] : rows[i]) {
      Transition t;
      t.to = j;
      t.is_exact = acc.is_exact;
      t.exact = acc.is_exact ? acc.exact : Rational(0);
      t.rate = acc.is_exact ? to_double(acc.exact) : acc.rate;
      gen.out[i].push_back(std::move(t));
    }
  }
  gen.finalize();
  return gen;
}

std::vector<double> evolve_density(const std::vector<double>& rho0,
                                   double tau, const Generator& gen) {
  int n = gen.state_count();
  if (static_cast<int>(rho0.size()) != n) {
    throw SemanticError("density size does not match the state count");
  }
  double sum = 0;
  for (double x : rho0) {
    if (x < -1e-12) throw NormalizationError("density has a negative entry");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw NormalizationError("density does not sum to 1");
  }
  if (tau < 0) throw SemanticError("tau must be nonnegative");

  std::vector<double> v(rho0);
  for (double& x : v) x = std::max(x, 0.0);
  double lam = 0;
  for (double e : gen.exit_rate) lam = std::max(lam, e);
  double lam_tau = lam * tau;
  if (lam_tau == 0) return v;

  std::vector<double> diag(n);
  for (int i = 0; i < n; ++i) diag[i] = 1.0 - gen.exit_rate[i] / lam;

  long long kmax =
      static_cast<long long>(lam_tau + 12.0 * std::sqrt(lam_tau) + 200.0);
  std::vector<double> acc(n, 0.0), next(n);
  double cum = 0;
  double log_lt = std::log(lam_tau);
  bool converged = false;
  for (long long k = 0; k <= kmax; ++k) {
    double w = std::exp(-lam_tau + k * log_lt - std::lgamma(k + 1.0));
    for (int i = 0; i < n; ++i) acc[i] += w * v[i];
    cum += w;
    if (1.0 - cum < 1e-12) {
      converged = true;
      break;
    }
    std::fill(next.begin(), next.end(), 0.0);
    for (int i = 0; i < n; ++i) {
      double vi = v[i];
      if (vi == 0) continue;
      next[i] += vi * diag[i];
      for (const Transition& t : gen.out[i]) next[t.to] += vi * t.rate / lam;
    }
    v.swap(next);
  }
  if (!converged) {
    throw ToleranceError("uniformization series did not reach tolerance");
  }
  double total = 0;
  for (double& x : acc) {
    x = std::max(x, 0.0);
    total += x;
  }
  for (double& x : acc) x /= total;
  return acc;
}

namespace {

// Iterative Tarjan strongly connected components over positive-rate edges.
std::vector<std::vector<int>> scc_components(const Generator& gen) {
  int n = gen.state_count();
  std::vector<int> idx(n, -1), low(n, 0), on(n, 0);
  std::vector<int> stack;
  std::vector<std::vector<int>> comps;
  int counter = 0;
  struct Frame {
    int v;
    size_t edge;
  };
  for (int root = 0; root < n; ++root) {
    if (idx[root] >= 0) continue;
    std::vector<Frame> call{{root, 0}};
    idx[root] = low[root] = counter++;
    stack.push_back(root);
    on[root] = 1;
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.edge < gen.out[f.v].size()) {
        const Transition& t = gen.out[f.v][f.edge++];
        if (t.rate <= 0) continue;
        int w = t.to;
        if (idx[w] < 0) {
          idx[w] = low[w] = counter++;
          stack.push_back(w);
          on[w] = 1;
          call.push_back({w, 0});
        } else if (on[w]) {
          low[f.v] = std::min(low[f.v], idx[w]);
        }
      } else {
        int v = f.v;
        call.pop_back();
        if (low[v] == idx[v]) {
          std::vector<int> comp;
          while (true) {
            int w = stack.back();
            stack.pop_back();
            on[w] = 0;
            comp.push_back(w);
            if (w == v) break;
          }
          std::sort(comp.begin(), comp.end());
          comps.push_back(std::move(comp));
        }
        if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
      }
    }
  }
  std::sort(comps.begin(), comps.end(),
            [](const auto& a, const auto& b) { return a[0] < b[0]; });
  return comps;
}

std::vector<Rational> solve_class_exact(const Generator& gen,
                                        const std::vector<int>& cls) {
  int m = static_cast<int>(cls.size());
  std::map<int, int> pos;
  for (int k = 0; k < m; ++k) pos[cls[k]] = k;
  // Balance equations (transposed generator), last row replaced by the
  // normalization sum = 1.
  std::vector<std::vector<Rational>> a(m, std::vector<Rational>(m + 1, 0));
  for (int k = 0; k < m; ++k) {
    int i = cls[k];
    Rational ex = 0;
    for (const Transition& t : gen.out[i]) {
      auto it = pos.find(t.to);
      if (it == pos.end()) continue;  // bottom classes keep all mass inside
      Rational r = t.is_exact ? t.exact : Rational(0);
      ex += r;
      if (it->second != m - 1) a[it->second][k] += r;
    }
    if (k != m - 1) a[k][k] -= ex;
  }
  for (int k = 0; k < m; ++k) a[m - 1][k] = 1;
  a[m - 1][m] = 1;
  // Exact Gaussian elimination with first-nonzero pivoting.
  for (int col = 0; col < m; ++col) {
    int piv = -1;
    for (int r = col; r < m; ++r) {
      if (a[r][col] != 0) {
        piv = r;
        break;
      }
    }
    if (piv < 0) throw NumericalRankError("singular stationary system");
    std::swap(a[col], a[piv]);
    for (int r = 0; r < m; ++r) {
      if (r == col || a[r][col] == 0) continue;
      Rational f = a[r][col] / a[col][col];
      for (int c = col; c <= m; ++c) a[r][c] -= f * a[col][c];
    }
  }
  std::vector<Rational> pi(m);
  for (int k = 0; k < m; ++k) pi[k] = a[k][m] / a[k][k];
  for (const Rational& x : pi) {
    if (x <= 0) throw NumericalRankError("stationary solution not positive");
  }
  return pi;
}

std::vector<double> solve_class_double(const Generator& gen,
                                       const std::vector<int>& cls) {
  int m = static_cast<int>(cls.size());
  std::map<int, int> pos;
  for (int k = 0; k < m; ++k) pos[cls[k]] = k;
  std::vector<std::vector<double>> a(m, std::vector<double>(m + 1, 0));
  double scale = 0;
  for (int k = 0; k < m; ++k) {
    int i = cls[k];
    double ex = 0;
    for (const Transition& t : gen.out[i]) {
      auto it = pos.find(t.to);
      if (it == pos.end()) continue;
      ex += t.rate;
      scale = std::max(scale, t.rate);
      if (it->second != m - 1) a[it->second][k] += t.rate;
    }
    if (k != m - 1) a[k][k] -= ex;
  }
  for (int k = 0; k < m; ++k) a[m - 1][k] = 1;
  a[m - 1][m] = 1;
  scale = std::max(scale, 1.0);
  for (int col = 0; col < m; ++col) {
    int piv = col;
    for (int r = col + 1; r < m; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    if (std::abs(a[piv][col]) < 1e-12 * scale) {
      throw NumericalRankError("stationary system numerically singular");
    }
    std::swap(a[col], a[piv]);
    for (int r = 0; r < m; ++r) {
      if (r == col) continue;
      double f = a[r][col] / a[col][col];
      if (f == 0) continue;
      for (int c = col; c <= m; ++c) a[r][c] -= f * a[col][c];
    }
  }
  std::vector<double> pi(m);
  for (int k = 0; k < m; ++k) pi[k] = a[k][m] / a[k][k];
  return pi;
}

}  // namespace

StationaryResult stationary_density(const Generator& gen) {
  int n = gen.state_count();
  if (n == 0) throw SemanticError("empty generator");
  auto comps = scc_components(gen);
  std::vector<int> comp_of(n, -1);
  for (int c = 0; c < static_cast<int>(comps.size()); ++c) {
    for (int v : comps[c]) comp_of[v] = c;
  }
  StationaryResult res;
  for (const auto& comp : comps) {
    bool bottom = true;
    for (int v : comp) {
      for (const Transition& t : gen.out[v]) {
        if (t.rate > 0 && comp_of[t.to] != comp_of[v]) {
          bottom = false;
          break;
        }
      }
      if (!bottom) break;
    }
    if (bottom) res.classes.push_back(comp);
  }
  int k = static_cast<int>(res.classes.size());
  res.density.assign(n, 0.0);
  if (gen.all_exact) res.exact = std::vector<Rational>(n, Rational(0));
  Rational kinv = frac(1, k);
  for (const auto& cls : res.classes) {
    if (gen.all_exact) {
      std::vector<Rational> pi = solve_class_exact(gen, cls);
      for (size_t j = 0; j < cls.size(); ++j) {
        (*res.exact)[cls[j]] += pi[j] * kinv;
      }
    } else {
      std::vector<double> pi = solve_class_double(gen, cls);
      for (size_t j = 0; j < cls.size(); ++j) {
        res.density[cls[j]] += pi[j] / k;
      }
    }
  }
  if (gen.all_exact) {
    for (int i = 0; i < n; ++i) res.density[i] = to_double((*res.exact)[i]);
  } else {
    // Residual check of the transposed balance equations.
    double resid = 0;
    for (int j = 0; j < n; ++j) {
      double s = -res.density[j] * gen.exit_rate[j];
      for (int i = 0; i < n; ++i) {
        for (const Transition& t : gen.out[i]) {
          if (t.to == j) s += res.density[i] * t.rate;
        }
      }
      resid = std::max(resid, std::abs(s));
    }
    if (resid > 1e-10) {
      throw NumericalRankError("stationary residual exceeds tolerance");
    }
  }
  return res;
}

uint64_t mix64(uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

uint64_t substream(uint64_t master, uint64_t run, uint64_t lane) {
  uint64_t h = mix64(master ^ (0x9E3779B97F4A7C15ull * (run + 1)));
  return mix64(h ^ (0xC2B2AE3D27D4EB4Full * (lane + 1)));
}

double u01(std::mt19937_64& eng) {
  return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53;
}

namespace {

int pick_successor(const Generator& gen, int cur, double u) {
  const auto& row = gen.out[cur];
  double target = u * gen.exit_rate[cur];
  double acc = 0;
  for (const Transition& t : row) {
    acc += t.rate;
    if (acc >= target) return t.to;
  }
  return row.back().to;
}

}  // namespace

TrajectorySample simulate_trajectory(const Generator& gen, int seed_state,
                                     double horizon, uint64_t rng_seed) {
  if (seed_state < 0 || seed_state >= gen.state_count()) {
    throw SemanticError("seed state index out of range");
  }
  if (!(horizon > 0)) throw SemanticError("horizon must be positive");
  TrajectorySample s;
  s.seed_state = seed_state;
  s.rng_seed = rng_seed;
  s.horizon = horizon;
  s.visited.push_back(seed_state);
  std::mt19937_64 eng(rng_seed);
  int cur = seed_state;
  double t = 0;
  while (true) {
    double ex = gen.exit_rate[cur];
    if (ex <= 0) break;
    t += -std::log(u01(eng)) / ex;
    if (t > horizon) break;
    cur = pick_successor(gen, cur, u01(eng));
    s.jump_times.push_back(t);
    s.visited.push_back(cur);
  }
  return s;
}

int state_at(const TrajectorySample& s, double tau) {
  auto it = std::upper_bound(s.jump_times.begin(), s.jump_times.end(), tau);
  return s.visited[it - s.jump_times.begin()];
}

void EventPredicate::validate(const SpinGraph& g) const {
  for (const SpinTest& t : spin_tests) {
    if (t.edge < 0 || t.edge >= g.edge_count()) {
      throw SemanticError("event '" + name + "': spin-test edge out of range");
    }
    if (t.lo > t.hi) {
      throw SemanticError("event '" + name + "': empty spin window");
    }
  }
  for (const HelicityTest& t : helicity_tests) {
    if (t.edge < 0 || t.edge >= g.edge_count()) {
      throw SemanticError("event '" + name + "': helicity edge out of range");
    }
    if (t.sign != 1 && t.sign != -1) {
      throw SemanticError("event '" + name + "': helicity sign must be +/-");
    }
  }
  if (clock_window && !clock_edge) {
    throw SemanticError("event '" + name + "': clock window without a clock edge");
  }
  if (clock_edge && (*clock_edge < 0 || *clock_edge >= g.edge_count())) {
    throw SemanticError("event '" + name + "': clock edge out of range");
  }
  if (clock_window && clock_window->first > clock_window->second) {
    throw SemanticError("event '" + name + "': empty clock window");
  }
}

bool EventPredicate::eval(const SpinState& s) const {
  for (const SpinTest& t : spin_tests) {
    int x = s.twice_spin[t.edge];
    if (x < t.lo || x > t.hi) return false;
  }
  for (const HelicityTest& t : helicity_tests) {
    if (s.helicity[t.edge] != t.sign) return false;
  }
  if (clock_window) {
    int x = s.twice_spin[*clock_edge];
    if (x < clock_window->first || x > clock_window->second) return false;
  }
  return true;
}

std::optional<double> hitting_time(const TrajectorySample& sample,
                                   const EventPredicate& e,
                                   const Generator& gen) {
  for (size_t k = 0; k < sample.visited.size(); ++k) {
    if (e.eval(gen.states[sample.visited[k]])) {
      return k == 0 ? 0.0 : sample.jump_times[k - 1];
    }
  }
  return std::nullopt;
}

namespace {

double wald_halfwidth(double p, long long n) {
  if (n <= 0) return 0;
  return 1.96 * std::sqrt(std::max(p * (1 - p), 0.0) / n);
}

}  // namespace

OrderStats order_statistics(const Generator& gen, const EventPredicate& a,
                            const EventPredicate& b, int seed_state,
                            long long n_samples, double horizon,
                            uint64_t master_seed) {
  if (n_samples < 1) throw SemanticError("need at least one sample");
  if (seed_state < 0 || seed_state >= gen.state_count()) {
    throw SemanticError("seed state index out of range");
  }
  a.validate(gen.graph);
  b.validate(gen.graph);
  OrderStats st;
  st.n = n_samples;
  for (long long run = 0; run < n_samples; ++run) {
    std::mt19937_64 eng(substream(master_seed, run, 0));
    int cur = seed_state;
    double t = 0;
    std::optional<double> ta, tb;
    if (a.eval(gen.states[cur])) ta = 0.0;
    if (b.eval(gen.states[cur])) tb = 0.0;
    while (!(ta && tb)) {
      double ex = gen.exit_rate[cur];
      if (ex <= 0) break;
      t += -std::log(u01(eng)) / ex;
      if (t > horizon) break;
      cur = pick_successor(gen, cur, u01(eng));
      if (!ta && a.eval(gen.states[cur])) ta = t;
      if (!tb && b.eval(gen.states[cur])) tb = t;
    }
    if (ta && (!tb || *ta < *tb)) {
      ++st.count_a_first;
    } else if (tb && (!ta || *tb < *ta)) {
      ++st.count_b_first;
    } else {
      ++st.count_tie_or_none;
    }
  }
  st.p_a_first = static_cast<double>(st.count_a_first) / st.n;
  st.p_b_first = static_cast<double>(st.count_b_first) / st.n;
  st.p_tie_or_none = static_cast<double>(st.count_tie_or_none) / st.n;
  st.ci_a = wald_halfwidth(st.p_a_first, st.n);
  st.ci_b = wald_halfwidth(st.p_b_first, st.n);
  st.ci_tie = wald_halfwidth(st.p_tie_or_none, st.n);
  return st;
}

EnvelopeHistogram envelope_histogram(const Generator& gen,
                                     const EventPredicate& e, int seed_state,
                                     long long n_samples, double horizon,
                                     int bins, uint64_t master_seed) {
  if (bins < 1) throw SemanticError("need at least one bin");
  if (n_samples < 1) throw SemanticError("need at least one sample");
  if (seed_state < 0 || seed_state >= gen.state_count()) {
    throw SemanticError("seed state index out of range");
  }
  if (!(horizon > 0)) throw SemanticError("horizon must be positive");
  e.validate(gen.graph);
  EnvelopeHistogram h;
  h.bin_width = horizon / bins;
  h.horizon = horizon;
  h.samples = n_samples;
  std::vector<long long> counts(bins, 0);
  for (long long run = 0; run < n_samples; ++run) {
    std::mt19937_64 eng(substream(master_seed, run, 0));
    int cur = seed_state;
    double t = 0;
    std::optional<double> hit;
    if (e.eval(gen.states[cur])) hit = 0.0;
    while (!hit) {
      double ex = gen.exit_rate[cur];
      if (ex <= 0) break;
      t += -std::log(u01(eng)) / ex;
      if (t > horizon) break;
      cur = pick_successor(gen, cur, u01(eng));
      if (e.eval(gen.states[cur])) hit = t;
    }
    if (hit) {
      int b = std::min(static_cast<int>(*hit / h.bin_width), bins - 1);
      ++counts[b];
      ++h.hits;
    }
  }
  h.mass.assign(bins, 0.0);
  if (h.hits > 0) {
    for (int b = 0; b < bins; ++b) {
      h.mass[b] = static_cast<double>(counts[b]) / h.hits;
    }
  }
  return h;
}

double envelope_overlap(const EnvelopeHistogram& fa,
                        const EnvelopeHistogram& fb) {
  if (fa.mass.size() != fb.mass.size() || fa.bin_width != fb.bin_width ||
      fa.horizon != fb.horizon) {
    throw BinMismatchError("envelope binnings do not match");
  }
  double s = 0;
  for (size_t i = 0; i < fa.mass.size(); ++i) {
    s += std::min(fa.mass[i], fb.mass[i]);
  }
  return s;
}

const std::vector<Rational>& Intervention::kernel_row(int setting,
                                                      int feature) const {
  static const std::pair<int, int> probes[4] = {
      {0, 0}, {0, -1}, {-1, 0}, {-1, -1}};
  for (auto [ws, wf] : probes) {
    auto it = kernel.find({ws == 0 ? setting : -1, wf == 0 ? feature : -1});
    if (it != kernel.end()) return it->second;
  }
  throw SemanticError("party '" + party + "': no kernel row for setting " +
                      std::to_string(setting) + ", feature " +
                      std::to_string(feature));
}

void Intervention::validate(const SpinGraph& g, int settings,
                            int outcomes) const {
  event.validate(g);
  if (read_edge && (*read_edge < 0 || *read_edge >= g.edge_count())) {
    throw SemanticError("party '" + party + "': read edge out of range");
  }
  if (write_edge && (*write_edge < 0 || *write_edge >= g.edge_count())) {
    throw SemanticError("party '" + party + "': write edge out of range");
  }
  for (const auto& [key, row] : kernel) {
    auto [s, f] = key;
    if (s < -1 || s >= settings || f < -1 || f > 1) {
      throw SemanticError("party '" + party + "': kernel row key (" +
                          std::to_string(s) + ", " + std::to_string(f) +
                          ") out of range");
    }
    if (static_cast<int>(row.size()) != outcomes) {
      throw SemanticError("party '" + party +
                          "': kernel row arity does not match outcomes");
    }
    Rational sum = 0;
    for (const Rational& q : row) {
      if (q < 0) {
        throw KernelNormalizationError("party '" + party +
                                       "': kernel row has a negative entry");
      }
      sum += q;
    }
    if (sum != 1) {
      throw KernelNormalizationError(
          "party '" + party + "': kernel row sums to " + rational_str(sum) +
          ", expected 1");
    }
  }
  int fmax = read_edge ? 1 : 0;
  for (int s = 0; s < settings; ++s) {
    for (int f = 0; f <= fmax; ++f) {
      kernel_row(s, f);  // throws when uncovered
    }
  }
}

InducedResult induced_behavior(const Generator& gen,
                               const std::vector<Intervention>& interventions,
                               const gluing::Scenario& sc, int seed_state,
                               long long n_samples, double horizon,
                               uint64_t master_seed) {
  int n = sc.party_count();
  if (static_cast<int>(interventions.size()) != n) {
    throw SemanticError("need exactly one intervention per party");
  }
  if (seed_state < 0 || seed_state >= gen.state_count()) {
    throw SemanticError("seed state index out of range");
  }
  if (n_samples < 1) throw SemanticError("need at least one sample");
  if (!(horizon > 0)) throw SemanticError("horizon must be positive");
  // Match interventions to scenario parties by name, in scenario order.
  std::vector<const Intervention*> iv(n, nullptr);
  for (const Intervention& in : interventions) {
    int k = -1;
    for (int j = 0; j < n; ++j) {
      if (sc.parties()[j] == in.party) k = j;
    }
    if (k < 0) {
      throw SemanticError("intervention party '" + in.party +
                          "' is not in the scenario");
    }
    if (iv[k]) {
      throw SemanticError("duplicate intervention for party '" + in.party + "'");
    }
    iv[k] = &in;
  }
  for (int k = 0; k < n; ++k) {
    iv[k]->validate(gen.graph, sc.settings()[k], sc.outcomes()[k]);
  }

  std::vector<int> ext_outcomes(sc.outcomes());
  for (int& m : ext_outcomes) m += 1;
  gluing::Scenario ext = gluing::Scenario::make(sc.parties(), sc.settings(),
                                                ext_outcomes);

  std::vector<long long> counts(ext.entry_count(), 0);
  long long no_hit = 0;
  long long s_count = sc.settings_count();
  std::vector<std::vector<int>> setting_tuples(s_count);
  for (long long s = 0; s < s_count; ++s) setting_tuples[s] = sc.setting_tuple(s);

  std::vector<char> fired(n);
  std::vector<int> feature(n), outcome(n);
  for (long long run = 0; run < n_samples; ++run) {
    for (long long s = 0; s < s_count; ++s) {
      const std::vector<int>& xs = setting_tuples[s];
      std::mt19937_64 eng(substream(master_seed, run, 0));
      int cur = seed_state;
      double t = 0;
      std::fill(fired.begin(), fired.end(), 0);
      int n_fired = 0;
      auto process_entry = [&]() {
        bool changed = true;
        while (changed) {
          changed = false;
          for (int k = 0; k < n; ++k) {
            if (fired[k] || !iv[k]->event.eval(gen.states[cur])) continue;
            fired[k] = 1;
            ++n_fired;
            feature[k] = iv[k]->read_edge
                             ? (gen.states[cur].helicity[*iv[k]->read_edge] > 0
                                    ? 0
                                    : 1)
                             : 0;
            if (iv[k]->write_edge) {
              int sign = xs[k] % 2 == 0 ? +1 : -1;
              int nxt = gen.with_helicity(cur, *iv[k]->write_edge, sign);
              if (nxt < 0) {
                throw SemanticError(
                    "party '" + iv[k]->party +
                    "': write image missing from the state space (build it "
                    "with the write edge in closure_edges)");
              }
              if (nxt != cur) {
                cur = nxt;
                changed = true;
              }
            }
          }
        }
      };
      process_entry();
      while (n_fired < n) {
        double ex = gen.exit_rate[cur];
        if (ex <= 0) break;
        t += -std::log(u01(eng)) / ex;
        if (t > horizon) break;
        cur = pick_successor(gen, cur, u01(eng));
        process_entry();
      }
      for (int k = 0; k < n; ++k) {
        if (!fired[k]) {
          outcome[k] = sc.outcomes()[k];  // reserved no-hit value
          ++no_hit;
          continue;
        }
        const std::vector<Rational>& row = iv[k]->kernel_row(xs[k], feature[k]);
        std::mt19937_64 oeng(substream(master_seed, run, 1 + k));
        double u = u01(oeng);
        Rational acc = 0;
        int pick = static_cast<int>(row.size()) - 1;
        for (int o = 0; o < static_cast<int>(row.size()); ++o) {
          acc += row[o];
          if (u <= to_double(acc)) {
            pick = o;
            break;
          }
        }
        outcome[k] = pick;
      }
      ++counts[ext.entry_index(s, ext.outcome_index(outcome))];
    }
  }

  InducedResult res;
  res.counts = counts;
  res.samples_per_setting = n_samples;
  res.no_hit_fraction =
      static_cast<double>(no_hit) / (static_cast<double>(n_samples) * s_count * n);
  res.table.scenario = ext;
  res.table.p.resize(ext.entry_count());
  for (long i = 0; i < ext.entry_count(); ++i) {
    res.table.p[i] = frac(counts[i], n_samples);
  }
  res.table.validate();
  return res;
}

}  // namespace causord::spindyn
