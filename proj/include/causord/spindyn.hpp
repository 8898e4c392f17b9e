#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "causord/behavior.hpp"
#include "causord/rational.hpp"

namespace causord::spindyn {

// Fixed trivalent connected multigraph. Self-loops are allowed and count
// twice toward the degree of their vertex.
class SpinGraph {
 public:
  SpinGraph() = default;

  // Validates endpoint ranges, trivalence, connectedness; throws
  // SemanticError on violations.
  static SpinGraph make(int vertex_count,
                        std::vector<std::pair<int, int>> edges);

  int vertex_count() const { return vertex_count_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  bool is_loop(int e) const {
    return edges_[e].first == edges_[e].second;
  }
  // Incident edge indices, loops listed twice; always 3 entries.
  const std::vector<int>& incident(int v) const { return incident_[v]; }

 private:
  int vertex_count_ = 0;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> incident_;
};

// Edge labelling of a SpinGraph: twice-spins (2j, so half-integer spins are
// exact integers), helicities in {+1,-1}, and a per-vertex intertwiner label
// (trivalent intertwiner spaces are at most one-dimensional, so the label is
// fixed to 0 and kept only for shape compatibility).
struct SpinState {
  std::vector<int> twice_spin;
  std::vector<int> helicity;
  std::vector<int> intertwiner;

  bool operator==(const SpinState& o) const = default;
};

SpinState make_state(const SpinGraph& g, std::vector<int> twice_spin,
                     std::vector<int> helicity);

// Triangle inequality and even parity of the three incident twice-spins at
// every vertex (a loop contributes its spin twice), plus nonnegativity.
bool admissible(const SpinGraph& g, const SpinState& s);

enum class MoveKind { SpinStep, HelicityFlip, Recouple };

// Enabled local moves plus the rate law r = r0 * exp(-beta * dC) *
// gamma^{dh+}, where C(state) = sum_e sqrt(j_e (j_e + 1)) with j = s/2 and
// dh+ counts edges flipping - to +. An empty edge list for a kind means
// "all edges". The window bounds the twice-spins reachable by SpinStep and
// Recouple targets.
struct MoveCatalogue {
  bool spin_step = false;
  bool helicity_flip = false;
  bool recouple = false;
  std::vector<int> spin_step_edges;      // empty = all
  std::vector<int> helicity_flip_edges;  // empty = all
  std::vector<int> recouple_edges;       // empty = all
  int window_lo = 0;
  int window_hi = 8;
  Rational r0 = 1;
  Rational beta = 0;
  Rational gamma = 1;

  // Throws SemanticError on nonpositive r0/gamma, negative beta, a bad
  // window, or out-of-range edge indices.
  void validate(const SpinGraph& g) const;
};

struct Transition {
  int to = 0;
  double rate = 0.0;
  Rational exact;        // meaningful iff is_exact
  bool is_exact = false;
};

// Finite CTMC over enumerated spin states. Off-diagonal rates live in
// `out`; the diagonal is minus the row sum. `exact` data is kept per
// transition whenever the rate involves no irrational factor (helicity
// flips always; spin moves when beta == 0), and all_exact says every
// transition qualifies.
struct Generator {
  SpinGraph graph;
  MoveCatalogue moves;
  std::vector<SpinState> states;
  std::vector<std::vector<Transition>> out;  // sorted by target index
  std::vector<double> exit_rate;
  bool all_exact = true;
  bool truncated = false;

  int state_count() const { return static_cast<int>(states.size()); }
  // Index of a state, or -1 if it was not enumerated.
  int find_state(const SpinState& s) const;
  // Index of `state` with helicity[edge] set to sign; -1 if absent.
  int with_helicity(int state, int edge, int sign) const;
  // Exact off-diagonal rate lookup (0 when absent); valid iff all_exact.
  Rational exact_rate(int from, int to) const;

  // Recomputes exit rates, the index map and all_exact from `out`; for
  // generators assembled by hand (tests, fixtures).
  void finalize();

  std::map<std::string, int> index;  // canonical state key -> index
};

std::string state_key(const SpinState& s);

// Breadth-first closure of the seed under the enabled moves, capped at
// `cap` states. Moves that would leave the cap region are dropped and
// recorded via `truncated`. States reachable by rewriting the helicity of
// any edge in `closure_edges` are enumerated too (rate-free), so that
// intervention writes stay inside the space. Throws InadmissibleSeedError,
// CapExceededError (cap < 1), SizeError (cap > 1e5), SemanticError.
Generator build_state_space(const SpinGraph& g, const SpinState& seed,
                            const MoveCatalogue& moves, int cap,
                            const std::vector<int>& closure_edges = {});

// rho(tau) from rho0 by uniformization, truncating the Poisson series at
// total-variation tail 1e-12; output normalized and nonnegative. Throws
// NormalizationError on a bad rho0, SemanticError on tau < 0,
// ToleranceError if the series cap is hit.
std::vector<double> evolve_density(const std::vector<double>& rho0,
                                   double tau, const Generator& gen);

struct StationaryResult {
  std::vector<double> density;                    // always filled
  std::optional<std::vector<Rational>> exact;     // iff gen.all_exact
  std::vector<std::vector<int>> classes;          // recurrent classes
};

// Normalized null vector of the transposed generator: per-recurrent-class
// stationary densities averaged with equal weight (the uniform mixing
// convention when the chain is reducible). Exact rational elimination when
// every rate is exact; throws NumericalRankError when the class solve is
// singular or the double-path residual exceeds 1e-10.
StationaryResult stationary_density(const Generator& gen);

struct TrajectorySample {
  int seed_state = 0;
  uint64_t rng_seed = 0;
  double horizon = 0.0;
  std::vector<double> jump_times;  // strictly increasing, > 0
  std::vector<int> visited;        // jump_times.size() + 1 entries
};

// Exact event-driven CTMC simulation to the horizon, deterministic in
// rng_seed. Throws SemanticError on a bad seed state or horizon <= 0.
TrajectorySample simulate_trajectory(const Generator& gen, int seed_state,
                                     double horizon, uint64_t rng_seed);

// State occupied at time tau (entry times are closed on the left).
int state_at(const TrajectorySample& s, double tau);

// Conjunction of primitive tests on a state: twice-spin ranges, helicity
// signs, and a window on the clock edge's twice-spin.
struct EventPredicate {
  struct SpinTest {
    int edge;
    int lo, hi;
  };
  struct HelicityTest {
    int edge;
    int sign;
  };
  std::string name;
  std::vector<SpinTest> spin_tests;
  std::vector<HelicityTest> helicity_tests;
  std::optional<int> clock_edge;
  std::optional<std::pair<int, int>> clock_window;

  // Throws SemanticError on out-of-range edges or a clock window without a
  // clock edge.
  void validate(const SpinGraph& g) const;
  bool eval(const SpinState& s) const;
};

// First entry time (0 for the seed) whose state satisfies E; nullopt if the
// trajectory never satisfies it.
std::optional<double> hitting_time(const TrajectorySample& sample,
                                   const EventPredicate& e,
                                   const Generator& gen);

struct OrderStats {
  long long n = 0;
  long long count_a_first = 0, count_b_first = 0, count_tie_or_none = 0;
  double p_a_first = 0, p_b_first = 0, p_tie_or_none = 0;
  double ci_a = 0, ci_b = 0, ci_tie = 0;  // Wald 95% half-widths
};

// Monte-Carlo estimate of which event fires first, both evaluated on one
// trajectory per run. A run counts toward A when tau_A is finite and either
// tau_B is not or tau_A < tau_B; ties and double-misses land in the third
// bucket. Per-run seeds derive from master_seed and the run index.
OrderStats order_statistics(const Generator& gen, const EventPredicate& a,
                            const EventPredicate& b, int seed_state,
                            long long n_samples, double horizon,
                            uint64_t master_seed);

struct EnvelopeHistogram {
  std::vector<double> mass;  // unit sum over hits; all zero if none
  double bin_width = 0.0;
  double horizon = 0.0;
  long long hits = 0;
  long long samples = 0;

  double hit_fraction() const {
    return samples == 0 ? 0.0 : static_cast<double>(hits) / samples;
  }
};

// Histogram of hitting times over [0, horizon] in `bins` equal bins,
// normalized over hitting runs only. Throws SemanticError on bins < 1.
EnvelopeHistogram envelope_histogram(const Generator& gen,
                                     const EventPredicate& e, int seed_state,
                                     long long n_samples, double horizon,
                                     int bins, uint64_t master_seed);

// Overlap coefficient sum_bins min(fa, fb); throws BinMismatchError unless
// the binnings agree.
double envelope_overlap(const EnvelopeHistogram& fa,
                        const EnvelopeHistogram& fb);

// One party's coupling to the process: an event, an optional helicity
// feature read, an optional helicity write (the written sign encodes the
// party's setting parity: even -> +, odd -> -), and a response kernel
// K(outcome | setting, feature). Kernel rows use -1 as a wildcard setting
// or feature, with specific entries taking precedence.
struct Intervention {
  std::string party;
  EventPredicate event;
  std::optional<int> read_edge;   // feature: + -> 0, - -> 1; none -> 0
  std::optional<int> write_edge;
  std::map<std::pair<int, int>, std::vector<Rational>> kernel;

  // Row for (setting, feature); throws SemanticError when no row matches.
  const std::vector<Rational>& kernel_row(int setting, int feature) const;
  // Coverage + normalization + outcome-arity checks; throws
  // KernelNormalizationError / SemanticError.
  void validate(const SpinGraph& g, int settings, int outcomes) const;
};

struct InducedResult {
  gluing::BehaviorTable table;      // over the no-hit-extended scenario
  std::vector<long long> counts;    // entry-aligned raw counts
  long long samples_per_setting = 0;
  double no_hit_fraction = 0.0;     // over (run, party) pairs
};

// Empirical behaviour table induced by running the process once per (run,
// settings tuple) with common random numbers across settings: party k's
// outcome is drawn from its kernel at its hitting-time state, and runs in
// which an event never fires map to a reserved extra outcome (the last
// index). `sc` carries the kernel-level outcome counts; the returned table
// lives on the extended scenario with outcomes + 1 per party. Entries are
// exact counts over n_samples. Throws SemanticError (party mismatch,
// missing write image), KernelNormalizationError.
InducedResult induced_behavior(const Generator& gen,
                               const std::vector<Intervention>& interventions,
                               const gluing::Scenario& sc, int seed_state,
                               long long n_samples, double horizon,
                               uint64_t master_seed);

// splitmix64-style avalanche, used for substream derivation.
uint64_t mix64(uint64_t z);
// Deterministic per-(run, lane) seed stream.
uint64_t substream(uint64_t master, uint64_t run, uint64_t lane);
// Uniform in the open interval (0,1), safe for log().
double u01(std::mt19937_64& eng);

}  // namespace causord::spindyn
