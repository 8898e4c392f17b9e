#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "causord/errors.hpp"
#include "causord/gluing.hpp"
#include "causord/spindyn.hpp"

using namespace causord;
using namespace causord::spindyn;

namespace {

SpinGraph theta() { return SpinGraph::make(2, {{0, 1}, {0, 1}, {0, 1}}); }

// Bridge e0 between the vertices, a loop at each: e1 at v0, e2 at v1.
SpinGraph dumbbell() { return SpinGraph::make(2, {{0, 1}, {0, 0}, {1, 1}}); }

MoveCatalogue flips_only(Rational gamma, std::vector<int> edges = {}) {
  MoveCatalogue cat;
  cat.helicity_flip = true;
  cat.helicity_flip_edges = std::move(edges);
  cat.gamma = gamma;
  return cat;
}

// gamma = 3 exponential race: e0 leaves + at rate 1, e1 leaves - at rate 3.
Generator race_generator(const std::vector<int>& closure = {}) {
  MoveCatalogue cat = flips_only(3, {0, 1});
  return build_state_space(theta(), make_state(theta(), {2, 1, 1}, {1, -1, 1}),
                           cat, 100, closure);
}

EventPredicate hel_event(std::string name, int edge, int sign) {
  EventPredicate e;
  e.name = std::move(name);
  e.helicity_tests.push_back({edge, sign});
  return e;
}

// Dense row-vector matrix exponential by scaling-and-squaring Taylor, an
// independent check on uniformization.
std::vector<double> expm_oracle(const std::vector<double>& rho0, double tau,
                                const Generator& gen) {
  int n = gen.state_count();
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    a[i][i] = -gen.exit_rate[i] * tau;
    for (const Transition& t : gen.out[i]) a[i][t.to] += t.rate * tau;
  }
  double norm = 0;
  for (int i = 0; i < n; ++i) {
    double s = 0;
    for (int j = 0; j < n; ++j) s += std::abs(a[i][j]);
    norm = std::max(norm, s);
  }
  int squarings = 0;
  while (norm > 0.5) {
    for (auto& row : a)
      for (double& x : row) x /= 2;
    norm /= 2;
    ++squarings;
  }
  auto matmul = [n](const std::vector<std::vector<double>>& x,
                    const std::vector<std::vector<double>>& y) {
    std::vector<std::vector<double>> z(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        double v = x[i][k];
        if (v == 0) continue;
        for (int j = 0; j < n; ++j) z[i][j] += v * y[k][j];
      }
    return z;
  };
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> term = m;
  for (int i = 0; i < n; ++i) m[i][i] = term[i][i] = 1.0;
  for (int j = 1; j <= 30; ++j) {
    term = matmul(term, a);
    for (auto& row : term)
      for (double& x : row) x /= j;
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) m[i][k] += term[i][k];
  }
  for (int s = 0; s < squarings; ++s) m = matmul(m, m);
  std::vector<double> out(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out[j] += rho0[i] * m[i][j];
  return out;
}

}  // namespace

TEST_CASE("graph construction and validation") {
  SpinGraph g = theta();
  CHECK(g.vertex_count() == 2);
  CHECK(g.edge_count() == 3);
  CHECK_FALSE(g.is_loop(0));
  SpinGraph d = dumbbell();
  CHECK(d.is_loop(1));
  CHECK(d.is_loop(2));
  CHECK(d.incident(0) == std::vector<int>{0, 1, 1});

  CHECK_THROWS_AS(SpinGraph::make(2, {{0, 1}, {0, 1}}), SemanticError);
  CHECK_THROWS_AS(SpinGraph::make(2, {{0, 1}, {0, 1}, {0, 2}}), SemanticError);
  CHECK_THROWS_AS(
      SpinGraph::make(4, {{0, 1}, {0, 1}, {0, 1}, {2, 3}, {2, 3}, {2, 3}}),
      SemanticError);
  CHECK_THROWS_AS(SpinGraph::make(1, {}), SemanticError);
}

TEST_CASE("admissibility") {
  SpinGraph g = theta();
  CHECK(admissible(g, make_state(g, {1, 1, 2}, {1, 1, 1})));
  CHECK_FALSE(admissible(g, make_state(g, {1, 1, 4}, {1, 1, 1})));
  CHECK_FALSE(admissible(g, make_state(g, {1, 1, 1}, {1, 1, 1})));

  SpinGraph d = dumbbell();
  CHECK(admissible(d, make_state(d, {0, 0, 0}, {1, 1, 1})));
  CHECK(admissible(d, make_state(d, {2, 1, 1}, {1, 1, 1})));
  CHECK_FALSE(admissible(d, make_state(d, {1, 1, 1}, {1, 1, 1})));
  CHECK_FALSE(admissible(d, make_state(d, {4, 1, 1}, {1, 1, 1})));

  CHECK_THROWS_AS(make_state(g, {1, 1}, {1, 1, 1}), SemanticError);
  CHECK_THROWS_AS(make_state(g, {1, 1, -2}, {1, 1, 1}), SemanticError);
  CHECK_THROWS_AS(make_state(g, {1, 1, 2}, {1, 0, 1}), SemanticError);
}

TEST_CASE("spin steps on a loop give the birth-death chain") {
  SpinGraph d = dumbbell();
  MoveCatalogue cat;
  cat.spin_step = true;
  cat.spin_step_edges = {1};
  cat.window_lo = 0;
  cat.window_hi = 4;
  Generator gen =
      build_state_space(d, make_state(d, {0, 2, 0}, {1, 1, 1}), cat, 100);
  CHECK(gen.state_count() == 5);
  CHECK_FALSE(gen.truncated);
  CHECK(gen.all_exact);  // beta = 0
  std::set<int> loop_spins;
  for (const SpinState& s : gen.states) loop_spins.insert(s.twice_spin[1]);
  CHECK(loop_spins == std::set<int>{0, 1, 2, 3, 4});
  for (int i = 0; i < 5; ++i) {
    int l = gen.states[i].twice_spin[1];
    size_t expect = (l == 0 || l == 4) ? 1 : 2;
    CHECK(gen.out[i].size() == expect);
    for (const Transition& t : gen.out[i]) {
      CHECK(std::abs(gen.states[t.to].twice_spin[1] - l) == 1);
      CHECK(t.exact == 1);
    }
  }
}

TEST_CASE("spin steps on ordinary edges are parity-blocked") {
  SpinGraph g = theta();
  MoveCatalogue cat;
  cat.spin_step = true;
  cat.window_lo = 0;
  cat.window_hi = 4;
  Generator gen =
      build_state_space(g, make_state(g, {1, 1, 2}, {1, 1, 1}), cat, 100);
  CHECK(gen.state_count() == 1);
  CHECK(gen.out[0].empty());
  CHECK(gen.exit_rate[0] == 0.0);
}

TEST_CASE("recoupling relabels the internal edge over admissible values") {
  SpinGraph g = theta();
  MoveCatalogue cat;
  cat.recouple = true;
  cat.recouple_edges = {0};
  cat.window_lo = 0;
  cat.window_hi = 4;
  Generator gen =
      build_state_space(g, make_state(g, {2, 2, 2}, {1, 1, 1}), cat, 100);
  CHECK(gen.state_count() == 3);
  std::set<int> vals;
  for (const SpinState& s : gen.states) vals.insert(s.twice_spin[0]);
  CHECK(vals == std::set<int>{0, 2, 4});
  for (int i = 0; i < 3; ++i) CHECK(gen.out[i].size() == 2);

  MoveCatalogue on_loop;
  on_loop.recouple = true;
  on_loop.recouple_edges = {1};
  SpinGraph d = dumbbell();
  Generator g2 =
      build_state_space(d, make_state(d, {0, 2, 0}, {1, 1, 1}), on_loop, 100);
  CHECK(g2.state_count() == 1);  // loops have no recoupling partner
}

TEST_CASE("helicity flips enumerate independent bits") {
  Generator gen = build_state_space(
      theta(), make_state(theta(), {1, 1, 2}, {1, 1, 1}), flips_only(1), 100);
  CHECK(gen.state_count() == 8);
  for (int i = 0; i < 8; ++i) CHECK(gen.out[i].size() == 3);

  MoveCatalogue none;
  Generator empty = build_state_space(
      theta(), make_state(theta(), {1, 1, 2}, {1, 1, 1}), none, 100);
  CHECK(empty.state_count() == 1);
  CHECK(empty.out[0].empty());
}

TEST_CASE("cap handling") {
  SpinGraph d = dumbbell();
  MoveCatalogue cat;
  cat.spin_step = true;
  cat.spin_step_edges = {1};
  cat.window_lo = 0;
  cat.window_hi = 4;
  SpinState seed = make_state(d, {0, 2, 0}, {1, 1, 1});
  Generator gen = build_state_space(d, seed, cat, 3);
  CHECK(gen.state_count() == 3);
  CHECK(gen.truncated);
  CHECK_THROWS_AS(build_state_space(d, seed, cat, 0), CapExceededError);
  CHECK_THROWS_AS(build_state_space(d, seed, cat, 200000), SizeError);
  CHECK_THROWS_AS(
      build_state_space(theta(), make_state(theta(), {1, 1, 1}, {1, 1, 1}),
                        cat, 100),
      InadmissibleSeedError);
}

TEST_CASE("catalogue validation") {
  MoveCatalogue cat;
  cat.r0 = 0;
  CHECK_THROWS_AS(cat.validate(theta()), SemanticError);
  cat = MoveCatalogue{};
  cat.gamma = -1;
  CHECK_THROWS_AS(cat.validate(theta()), SemanticError);
  cat = MoveCatalogue{};
  cat.window_lo = 3;
  cat.window_hi = 1;
  CHECK_THROWS_AS(cat.validate(theta()), SemanticError);
  cat = MoveCatalogue{};
  cat.helicity_flip = true;
  cat.helicity_flip_edges = {7};
  CHECK_THROWS_AS(cat.validate(theta()), SemanticError);
}

TEST_CASE("closure edges keep write images enumerable") {
  Generator gen = build_state_space(
      theta(), make_state(theta(), {2, 1, 1}, {1, 1, 1}),
      flips_only(2, {0}), 100, {2});
  CHECK(gen.state_count() == 4);  // e0 flip times e2 closure
  for (int i = 0; i < 4; ++i) {
    CHECK(gen.out[i].size() == 1);
    CHECK(gen.with_helicity(i, 2, 1) >= 0);
    CHECK(gen.with_helicity(i, 2, -1) >= 0);
  }
}

TEST_CASE("biased two-state helicity chain has exact rates") {
  Generator gen = build_state_space(
      theta(), make_state(theta(), {2, 1, 1}, {-1, 1, 1}),
      flips_only(2, {0}), 100);
  REQUIRE(gen.state_count() == 2);
  CHECK(gen.all_exact);
  // State 0 is the seed (e0 = -); flipping - to + is gamma-boosted.
  CHECK(gen.exact_rate(0, 1) == 2);
  CHECK(gen.exact_rate(1, 0) == 1);

  StationaryResult st = stationary_density(gen);
  REQUIRE(st.exact.has_value());
  CHECK((*st.exact)[0] == frac(1, 3));
  CHECK((*st.exact)[1] == frac(2, 3));
  CHECK(st.classes.size() == 1);
}

TEST_CASE("gibbs form is stationary for helicity dynamics") {
  Rational gamma = frac(5, 2);
  MoveCatalogue cat = flips_only(gamma);
  cat.r0 = frac(3, 2);
  cat.beta = 7;  // irrelevant: flips cost nothing
  Generator gen = build_state_space(
      theta(), make_state(theta(), {1, 1, 2}, {-1, -1, -1}), cat, 100);
  REQUIRE(gen.state_count() == 8);
  REQUIRE(gen.all_exact);
  StationaryResult st = stationary_density(gen);
  REQUIRE(st.exact.has_value());
  Rational z = (gamma + 1) * (gamma + 1) * (gamma + 1);
  for (int i = 0; i < 8; ++i) {
    int plus = 0;
    for (int h : gen.states[i].helicity) plus += h > 0;
    Rational expect = 1;
    for (int k = 0; k < plus; ++k) expect *= gamma;
    CHECK((*st.exact)[i] == expect / z);
  }
  // Exact transposed balance: inflow equals outflow per state.
  for (int j = 0; j < 8; ++j) {
    Rational net = 0;
    for (int i = 0; i < 8; ++i) {
      if (i == j) continue;
      net += (*st.exact)[i] * gen.exact_rate(i, j);
      net -= (*st.exact)[j] * gen.exact_rate(j, i);
    }
    CHECK(net == 0);
  }
}

TEST_CASE("gibbs form for costed spin steps, double path") {
  SpinGraph d = dumbbell();
  MoveCatalogue cat;
  cat.spin_step = true;
  cat.spin_step_edges = {1};
  cat.window_lo = 0;
  cat.window_hi = 4;
  cat.beta = frac(1, 2);
  Generator gen =
      build_state_space(d, make_state(d, {0, 2, 0}, {1, 1, 1}), cat, 100);
  CHECK_FALSE(gen.all_exact);
  StationaryResult st = stationary_density(gen);
  CHECK_FALSE(st.exact.has_value());
  // The rate ratio doubles the exponent: pi(k) ~ exp(-2 beta cost(k)).
  double beta = 0.5;
  auto cost = [](int s) { return 0.5 * std::sqrt(double(s) * (s + 2.0)); };
  double z = 0;
  std::vector<double> expect(5, 0.0);
  for (int i = 0; i < 5; ++i) {
    int l = gen.states[i].twice_spin[1];
    expect[i] = std::exp(-2.0 * beta * cost(l));
    z += expect[i];
  }
  for (int i = 0; i < 5; ++i) {
    CHECK(st.density[i] == doctest::Approx(expect[i] / z).epsilon(1e-10));
  }
}

TEST_CASE("window-induced transient states") {
  SpinGraph d = dumbbell();
  MoveCatalogue cat;
  cat.spin_step = true;
  cat.spin_step_edges = {1};
  cat.window_lo = 3;
  cat.window_hi = 4;
  Generator gen =
      build_state_space(d, make_state(d, {0, 2, 0}, {1, 1, 1}), cat, 100);
  REQUIRE(gen.state_count() == 3);  // loop spins 2 -> 3 <-> 4; 2 is transient
  StationaryResult st = stationary_density(gen);
  REQUIRE(st.classes.size() == 1);
  CHECK(st.classes[0] == std::vector<int>{1, 2});
  REQUIRE(st.exact.has_value());
  CHECK((*st.exact)[0] == 0);
  CHECK((*st.exact)[1] == frac(1, 2));
  CHECK((*st.exact)[2] == frac(1, 2));
}

TEST_CASE("uniform mixing over multiple recurrent classes") {
  SpinGraph g = theta();
  Generator gen;
  gen.graph = g;
  gen.states = {make_state(g, {2, 1, 1}, {1, 1, 1}),
                make_state(g, {0, 1, 1}, {1, 1, 1}),
                make_state(g, {2, 1, 3}, {1, 1, 1})};
  gen.out.resize(3);
  gen.out[0].push_back({1, 1.0, Rational(1), true});
  gen.out[0].push_back({2, 1.0, Rational(1), true});
  gen.finalize();
  StationaryResult st = stationary_density(gen);
  CHECK(st.classes.size() == 2);
  REQUIRE(st.exact.has_value());
  CHECK((*st.exact)[0] == 0);
  CHECK((*st.exact)[1] == frac(1, 2));
  CHECK((*st.exact)[2] == frac(1, 2));
}

TEST_CASE("density evolution: identity, limit, conservation, oracle") {
  Generator two = build_state_space(
      theta(), make_state(theta(), {2, 1, 1}, {-1, 1, 1}),
      flips_only(2, {0}), 100);
  std::vector<double> rho0 = {1.0, 0.0};
  CHECK(evolve_density(rho0, 0.0, two) == rho0);

  std::vector<double> late = evolve_density(rho0, 40.0, two);
  CHECK(late[0] == doctest::Approx(1.0 / 3).epsilon(1e-9));
  CHECK(late[1] == doctest::Approx(2.0 / 3).epsilon(1e-9));

  Generator eight = build_state_space(
      theta(), make_state(theta(), {1, 1, 2}, {-1, -1, -1}),
      flips_only(frac(3, 2)), 100);
  std::vector<double> r8(8, 0.0);
  r8[0] = 0.25;
  r8[3] = 0.5;
  r8[5] = 0.25;
  std::vector<double> out = evolve_density(r8, 0.7, eight);
  double sum = 0;
  for (double x : out) {
    CHECK(x >= 0);
    sum += x;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  std::vector<double> oracle = expm_oracle(r8, 0.7, eight);
  for (int i = 0; i < 8; ++i) {
    CHECK(out[i] == doctest::Approx(oracle[i]).epsilon(1e-9));
  }

  SpinGraph d = dumbbell();
  MoveCatalogue costed;
  costed.spin_step = true;
  costed.spin_step_edges = {1};
  costed.window_lo = 0;
  costed.window_hi = 4;
  costed.beta = frac(1, 2);
  Generator bd =
      build_state_space(d, make_state(d, {0, 2, 0}, {1, 1, 1}), costed, 100);
  std::vector<double> r5 = {0.2, 0.2, 0.2, 0.2, 0.2};
  std::vector<double> o5 = expm_oracle(r5, 1.9, bd);
  std::vector<double> u5 = evolve_density(r5, 1.9, bd);
  for (int i = 0; i < 5; ++i) {
    CHECK(u5[i] == doctest::Approx(o5[i]).epsilon(1e-9));
  }

  CHECK_THROWS_AS(evolve_density({0.5, 0.4}, 1.0, two), NormalizationError);
  CHECK_THROWS_AS(evolve_density({1.5, -0.5}, 1.0, two), NormalizationError);
  CHECK_THROWS_AS(evolve_density(rho0, -1.0, two), SemanticError);
  CHECK_THROWS_AS(evolve_density({1.0}, 1.0, two), SemanticError);
}

TEST_CASE("trajectories: determinism, structure, absorbing states") {
  Generator race = race_generator();
  TrajectorySample a = simulate_trajectory(race, 0, 20.0, 99);
  TrajectorySample b = simulate_trajectory(race, 0, 20.0, 99);
  CHECK(a.visited == b.visited);
  CHECK(a.jump_times == b.jump_times);
  CHECK(a.visited.size() == a.jump_times.size() + 1);
  CHECK(a.visited[0] == 0);
  for (size_t i = 0; i < a.jump_times.size(); ++i) {
    CHECK(a.jump_times[i] > (i == 0 ? 0.0 : a.jump_times[i - 1]));
    CHECK(a.jump_times[i] <= 20.0);
  }

  MoveCatalogue none;
  Generator still = build_state_space(
      theta(), make_state(theta(), {1, 1, 2}, {1, 1, 1}), none, 100);
  TrajectorySample s = simulate_trajectory(still, 0, 5.0, 1);
  CHECK(s.visited == std::vector<int>{0});
  CHECK(s.jump_times.empty());
  CHECK(state_at(s, 4.9) == 0);

  CHECK_THROWS_AS(simulate_trajectory(race, -1, 1.0, 0), SemanticError);
  CHECK_THROWS_AS(simulate_trajectory(race, 0, 0.0, 0), SemanticError);
}

TEST_CASE("monte carlo occupancy matches uniformization") {
  Generator two = build_state_space(
      theta(), make_state(theta(), {2, 1, 1}, {-1, 1, 1}),
      flips_only(2, {0}), 100);
  double tau = 1.3;
  std::vector<double> exact = evolve_density({1.0, 0.0}, tau, two);
  long long n = 20000;
  long long in1 = 0;
  for (long long run = 0; run < n; ++run) {
    TrajectorySample s =
        simulate_trajectory(two, 0, tau, substream(4242, run, 0));
    if (state_at(s, tau) == 1) ++in1;
  }
  double emp = static_cast<double>(in1) / n;
  double sigma = std::sqrt(exact[1] * (1 - exact[1]) / n);
  CHECK(std::abs(emp - exact[1]) <= 3 * sigma);
}

TEST_CASE("hitting times") {
  Generator race = race_generator();
  EventPredicate at_seed = hel_event("seed", 0, +1);  // e0 starts +
  EventPredicate ea = hel_event("E_A", 0, -1);
  EventPredicate never;
  never.name = "never";
  never.spin_tests.push_back({1, 9, 9});

  TrajectorySample s = simulate_trajectory(race, 0, 10.0, 7);
  CHECK(hitting_time(s, at_seed, race) == 0.0);
  CHECK_FALSE(hitting_time(s, never, race).has_value());
  auto ta = hitting_time(s, ea, race);
  REQUIRE(ta.has_value());
  CHECK(*ta > 0.0);

  EventPredicate bad;
  bad.name = "bad";
  bad.spin_tests.push_back({9, 0, 1});
  CHECK_THROWS_AS(bad.validate(race.graph), SemanticError);
  EventPredicate empty_window;
  empty_window.name = "w";
  empty_window.clock_edge = 0;
  empty_window.clock_window = {{3, 1}};
  CHECK_THROWS_AS(empty_window.validate(race.graph), SemanticError);
}

TEST_CASE("exponential race order statistics") {
  Generator race = race_generator();
  EventPredicate ea = hel_event("E_A", 0, -1);
  EventPredicate eb = hel_event("E_B", 1, +1);
  OrderStats st = order_statistics(race, ea, eb, 0, 100000, 50.0, 2024);
  CHECK(st.count_a_first + st.count_b_first + st.count_tie_or_none == st.n);
  double sigma = std::sqrt(0.25 * 0.75 / st.n);
  CHECK(std::abs(st.p_a_first - 0.25) <= 3 * sigma);
  CHECK(std::abs(st.p_b_first - 0.75) <= 3 * sigma);
  CHECK(st.p_tie_or_none == 0.0);
  CHECK(st.ci_a > 0.0);

  OrderStats tie = order_statistics(race, ea, ea, 0, 500, 50.0, 1);
  CHECK(tie.count_tie_or_none == 500);
  CHECK(tie.p_tie_or_none == 1.0);
}

TEST_CASE("symmetric race is even") {
  Generator sym = build_state_space(
      theta(), make_state(theta(), {2, 1, 1}, {1, -1, 1}),
      flips_only(1, {0, 1}), 100);
  EventPredicate ea = hel_event("E_A", 0, -1);
  EventPredicate eb = hel_event("E_B", 1, +1);
  OrderStats st = order_statistics(sym, ea, eb, 0, 40000, 50.0, 77);
  double sigma = std::sqrt(0.25 / st.n);
  CHECK(std::abs(st.p_a_first - 0.5) <= 3 * sigma);
  CHECK(std::abs(st.p_b_first - 0.5) <= 3 * sigma);
}

TEST_CASE("envelope histograms") {
  Generator flip0 = build_state_space(
      theta(), make_state(theta(), {2, 1, 1}, {1, 1, 1}),
      flips_only(1, {0}), 100);
  EventPredicate ea = hel_event("E_A", 0, -1);

  EnvelopeHistogram h = envelope_histogram(flip0, ea, 0, 20000, 5.0, 10, 31);
  CHECK(h.hits > 19000);
  double mass = 0;
  for (double x : h.mass) mass += x;
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
  // Exponential(1) hitting law, conditioned on hitting inside the horizon.
  double z = 1.0 - std::exp(-5.0);
  for (int b = 0; b < 10; ++b) {
    double p = (std::exp(-0.5 * b) - std::exp(-0.5 * (b + 1))) / z;
    double sigma = std::sqrt(p * (1 - p) / h.hits);
    CHECK(std::abs(h.mass[b] - p) <= 3 * sigma);
  }

  EventPredicate at_seed = hel_event("seed", 0, +1);
  EnvelopeHistogram h0 = envelope_histogram(flip0, at_seed, 0, 100, 5.0, 10, 1);
  CHECK(h0.mass[0] == 1.0);
  CHECK(h0.hit_fraction() == 1.0);

  EventPredicate never;
  never.name = "never";
  never.spin_tests.push_back({1, 9, 9});
  EnvelopeHistogram hn = envelope_histogram(flip0, never, 0, 100, 5.0, 10, 1);
  CHECK(hn.hits == 0);
  CHECK(hn.hit_fraction() == 0.0);
  for (double x : hn.mass) CHECK(x == 0.0);

  CHECK(envelope_overlap(h, h) == doctest::Approx(1.0).epsilon(1e-12));
  EnvelopeHistogram da = hn, db = hn;
  da.mass = {1.0, 0.0};
  db.mass = {0.0, 1.0};
  da.bin_width = db.bin_width = 2.5;
  CHECK(envelope_overlap(da, db) == 0.0);
  CHECK_THROWS_AS(envelope_overlap(h, da), BinMismatchError);

  Generator race = race_generator();
  EventPredicate eb = hel_event("E_B", 1, +1);
  EnvelopeHistogram fa = envelope_histogram(race, ea, 0, 5000, 8.0, 16, 5);
  EnvelopeHistogram fb = envelope_histogram(race, eb, 0, 5000, 8.0, 16, 5);
  double ov = envelope_overlap(fa, fb);
  CHECK(ov > 0.0);
  CHECK(ov < 1.0);
}

namespace {

Intervention outcome_equals_setting(std::string party, EventPredicate ev) {
  Intervention iv;
  iv.party = std::move(party);
  iv.event = std::move(ev);
  iv.kernel[{0, -1}] = {Rational(1), Rational(0)};
  iv.kernel[{1, -1}] = {Rational(0), Rational(1)};
  return iv;
}

}  // namespace

TEST_CASE("induced behaviour: product kernels give the product table") {
  Generator race = race_generator();
  std::vector<Intervention> ivs = {
      outcome_equals_setting("A", hel_event("E_A", 0, -1)),
      outcome_equals_setting("B", hel_event("E_B", 1, +1))};
  gluing::Scenario sc = gluing::Scenario::make({"A", "B"}, {2, 2}, {2, 2});
  InducedResult res = induced_behavior(race, ivs, sc, 0, 400, 50.0, 9001);
  CHECK(res.no_hit_fraction == 0.0);
  gluing::Scenario ext = res.table.scenario;
  CHECK(ext.outcomes() == std::vector<int>{3, 3});
  for (long s = 0; s < ext.settings_count(); ++s) {
    std::vector<int> x = ext.setting_tuple(s);
    for (long o = 0; o < ext.outcomes_count(); ++o) {
      std::vector<int> a = ext.outcome_tuple(o);
      Rational expect = (a[0] == x[0] && a[1] == x[1]) ? 1 : 0;
      CHECK(res.table.at(s, o) == expect);
    }
  }
  auto orders = contexts::enumerate_total_orders({"A", "B"});
  gluing::GlueVerdict v = gluing::check_global_section(res.table, orders);
  CHECK(v.gluable);
  CHECK(v.causalFraction == 1);
}

TEST_CASE("induced behaviour: write/read copy is the race mixture") {
  Generator race = race_generator({2});
  REQUIRE(race.state_count() == 8);
  Intervention a = outcome_equals_setting("A", hel_event("E_A", 0, -1));
  a.write_edge = 2;
  Intervention b;
  b.party = "B";
  b.event = hel_event("E_B", 1, +1);
  b.read_edge = 2;
  b.kernel[{-1, 0}] = {Rational(1), Rational(0)};  // outcome = feature
  b.kernel[{-1, 1}] = {Rational(0), Rational(1)};
  gluing::Scenario sc = gluing::Scenario::make({"A", "B"}, {2, 2}, {2, 2});
  long long n = 20000;
  InducedResult res = induced_behavior(race, {a, b}, sc, 0, n, 50.0, 314159);
  const gluing::Scenario& ext = res.table.scenario;

  // a = x always; for x = 0 the write and the seed agree, so b = 0 surely.
  for (int y = 0; y < 2; ++y) {
    long s0 = ext.setting_index({0, y});
    CHECK(res.table.at(s0, ext.outcome_index({0, 0})) == 1);
    // For x = 1, b copies A's setting parity exactly when A fired first.
    long s1 = ext.setting_index({1, y});
    Rational mass_b1 = res.table.at(s1, ext.outcome_index({1, 1}));
    double sigma = std::sqrt(0.25 * 0.75 / n);
    CHECK(std::abs(to_double(mass_b1) - 0.25) <= 3 * sigma);
    CHECK(res.table.at(s1, ext.outcome_index({1, 0})) +
              res.table.at(s1, ext.outcome_index({1, 1})) ==
          1);
  }

  auto orders = contexts::enumerate_total_orders({"A", "B"});
  gluing::GlueVerdict v = gluing::check_global_section(res.table, orders);
  CHECK(v.gluable);
  CHECK(v.l1Distance == 0);

  InducedResult again = induced_behavior(race, {a, b}, sc, 0, n, 50.0, 314159);
  CHECK(again.table == res.table);
}

TEST_CASE("induced behaviour: no-hit runs land on the reserved outcome") {
  Generator race = race_generator();
  Intervention a = outcome_equals_setting("A", hel_event("E_A", 0, -1));
  Intervention b = outcome_equals_setting("B", hel_event("E_B", 1, +1));
  b.event.helicity_tests.clear();
  b.event.spin_tests.push_back({1, 9, 9});  // unreachable
  gluing::Scenario sc = gluing::Scenario::make({"A", "B"}, {2, 2}, {2, 2});
  InducedResult res = induced_behavior(race, {a, b}, sc, 0, 200, 50.0, 5);
  CHECK(res.no_hit_fraction == 0.5);
  const gluing::Scenario& ext = res.table.scenario;
  for (long s = 0; s < ext.settings_count(); ++s) {
    std::vector<int> x = ext.setting_tuple(s);
    CHECK(res.table.at(s, ext.outcome_index({x[0], 2})) == 1);
  }
}

TEST_CASE("induced behaviour input validation") {
  Generator race = race_generator();  // no closure on e2
  gluing::Scenario sc = gluing::Scenario::make({"A", "B"}, {2, 2}, {2, 2});
  Intervention a = outcome_equals_setting("A", hel_event("E_A", 0, -1));
  Intervention b = outcome_equals_setting("B", hel_event("E_B", 1, +1));

  Intervention bad = a;
  bad.kernel[{0, -1}] = {frac(1, 2), frac(1, 4)};
  CHECK_THROWS_AS(induced_behavior(race, {bad, b}, sc, 0, 10, 50.0, 1),
                  KernelNormalizationError);

  Intervention sparse = a;
  sparse.kernel.erase({1, -1});
  CHECK_THROWS_AS(induced_behavior(race, {sparse, b}, sc, 0, 10, 50.0, 1),
                  SemanticError);

  Intervention writer = a;
  writer.write_edge = 2;  // image states were never enumerated
  CHECK_THROWS_AS(induced_behavior(race, {writer, b}, sc, 0, 10, 50.0, 1),
                  SemanticError);

  Intervention misnamed = a;
  misnamed.party = "C";
  CHECK_THROWS_AS(induced_behavior(race, {misnamed, b}, sc, 0, 10, 50.0, 1),
                  SemanticError);
  CHECK_THROWS_AS(induced_behavior(race, {a}, sc, 0, 10, 50.0, 1),
                  SemanticError);
}

TEST_CASE("substreams and uniforms") {
  CHECK(substream(1, 2, 3) == substream(1, 2, 3));
  CHECK(substream(1, 2, 3) != substream(1, 2, 4));
  CHECK(substream(1, 2, 3) != substream(1, 3, 3));
  CHECK(substream(1, 2, 3) != substream(2, 2, 3));
  std::mt19937_64 eng(42);
  for (int i = 0; i < 1000; ++i) {
    double u = u01(eng);
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}
