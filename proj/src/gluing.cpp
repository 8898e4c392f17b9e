#include "causord/gluing.hpp"

#include <algorithm>
#include <cassert>

#include "causord/errors.hpp"
#include "causord/linprog.hpp"

namespace causord::gluing {

namespace {

constexpr long kLpVarCap = 200000;
constexpr long kStrategyCap = 1000000;

// Parties of sigma listed in causal order (rank 0 first).
std::vector<int> order_sequence(const Scenario& sc,
                                const contexts::CausalOrder& sigma) {
  if (sigma.parties() != sc.parties())
    throw SemanticError("order and scenario disagree on the party list");
  if (!sigma.is_total())
    throw NonTotalOrderError("operation needs a total order, got '" +
                             sigma.describe() + "'");
  const int n = sc.party_count();
  std::vector<int> seq(n, -1);
  for (int i = 0; i < n; ++i) {
    int rank = 0;
    for (int j = 0; j < n; ++j)
      if (sigma.before(j, i)) ++rank;
    seq[rank] = i;
  }
  return seq;
}

// Mixed-radix enumeration over a fixed subset of parties (ascending party
// index), writing decoded digits into a full tuple.
struct SubIndexer {
  std::vector<int> members;
  std::vector<int> radix;
  long count = 1;

  SubIndexer(const std::vector<int>& mem, const std::vector<int>& full_radix) {
    members = mem;
    std::sort(members.begin(), members.end());
    for (int m : members) {
      radix.push_back(full_radix[m]);
      count *= full_radix[m];
    }
  }

  void write(long code, std::vector<int>& full) const {
    for (size_t k = members.size(); k-- > 0;) {
      full[members[k]] = static_cast<int>(code % radix[k]);
      code /= radix[k];
    }
  }
};

}  // namespace

std::vector<std::vector<Rational>> order_constraints(
    const Scenario& sc, const contexts::CausalOrder& sigma) {
  const auto seq = order_sequence(sc, sigma);
  const int n = sc.party_count();
  std::vector<std::vector<Rational>> rows;
  std::vector<int> x(n), a(n);
  for (int k = 0; k < n; ++k) {  // prefix size; the full set is vacuous
    std::vector<int> prefix(seq.begin(), seq.begin() + k);
    std::vector<int> rest;
    for (int i = 0; i < n; ++i)
      if (std::find(prefix.begin(), prefix.end(), i) == prefix.end())
        rest.push_back(i);
    SubIndexer xP(prefix, sc.settings());
    SubIndexer aP(prefix, sc.outcomes());
    SubIndexer xR(rest, sc.settings());
    SubIndexer aR(rest, sc.outcomes());
    if (xR.count <= 1) continue;  // nothing outside the prefix can vary
    for (long xp = 0; xp < xP.count; ++xp) {
      for (long ap = 0; ap < aP.count; ++ap) {
        // The last outcome combination follows from the smaller prefixes.
        if (k > 0 && ap == aP.count - 1) continue;
        for (long xr = 1; xr < xR.count; ++xr) {
          std::vector<Rational> row(sc.entry_count(), Rational(0));
          xP.write(xp, x);
          aP.write(ap, a);
          for (long ar = 0; ar < aR.count; ++ar) {
            aR.write(ar, a);
            const long o = sc.outcome_index(a);
            xR.write(xr, x);
            row[sc.entry_index(sc.setting_index(x), o)] += 1;
            xR.write(0, x);
            row[sc.entry_index(sc.setting_index(x), o)] -= 1;
          }
          rows.push_back(std::move(row));
        }
      }
    }
  }
  return rows;
}

bool is_compatible_with_order(const BehaviorTable& p,
                              const contexts::CausalOrder& sigma) {
  for (const auto& row : order_constraints(p.scenario, sigma)) {
    Rational dot = 0;
    for (long t = 0; t < p.scenario.entry_count(); ++t) dot += row[t] * p.p[t];
    if (dot != 0) return false;
  }
  return true;
}

std::vector<BehaviorTable> enumerate_deterministic_strategies(
    const Scenario& sc, const contexts::CausalOrder& sigma) {
  const auto seq = order_sequence(sc, sigma);
  const int n = sc.party_count();

  // Per party (in causal order): the settings visible to it and the number
  // of response functions; the overall strategy count is the product.
  std::vector<SubIndexer> dom;
  std::vector<long> fn_count(n, 1);
  unsigned long long total = 1;
  for (int k = 0; k < n; ++k) {
    std::vector<int> visible(seq.begin(), seq.begin() + k + 1);
    dom.emplace_back(visible, sc.settings());
    const int out = sc.outcomes()[seq[k]];
    long c = 1;
    for (long d = 0; d < dom[k].count; ++d) {
      c *= out;
      if (c > kStrategyCap)
        throw SizeError("deterministic strategy count exceeds the 10^6 cap");
    }
    fn_count[k] = c;
    total *= static_cast<unsigned long long>(c);
    if (total > static_cast<unsigned long long>(kStrategyCap))
      throw SizeError("deterministic strategy count exceeds the 10^6 cap");
  }

  std::vector<BehaviorTable> out;
  out.reserve(static_cast<size_t>(total));
  std::vector<int> x(n), a(n);
  for (unsigned long long code = 0; code < total; ++code) {
    // Split the strategy code into per-party response functions, then each
    // function into base-outcome digits indexed by the visible settings.
    std::vector<std::vector<int>> digits(n);
    unsigned long long rem = code;
    for (int k = n - 1; k >= 0; --k) {
      long f = static_cast<long>(rem % fn_count[k]);
      rem /= fn_count[k];
      const int outk = sc.outcomes()[seq[k]];
      digits[k].assign(dom[k].count, 0);
      for (long d = 0; d < dom[k].count; ++d) {
        digits[k][d] = static_cast<int>(f % outk);
        f /= outk;
      }
    }
    BehaviorTable table = zero_behavior(sc);
    for (long s = 0; s < sc.settings_count(); ++s) {
      x = sc.setting_tuple(s);
      for (int k = 0; k < n; ++k) {
        // Mixed-radix code of x restricted to the visible parties.
        long d = 0;
        for (size_t j = 0; j < dom[k].members.size(); ++j)
          d = d * dom[k].radix[j] + x[dom[k].members[j]];
        a[seq[k]] = digits[k][d];
      }
      table.at(s, sc.outcome_index(a)) = 1;
    }
    out.push_back(std::move(table));
  }
  return out;
}

namespace {

// Shared layout for the gluing LPs: one block of entry variables per order.
struct GlueLp {
  const Scenario& sc;
  long E;
  int K;
  std::vector<std::vector<std::vector<Rational>>> order_rows;

  GlueLp(const BehaviorTable& p,
         const std::vector<contexts::CausalOrder>& orders)
      : sc(p.scenario), E(p.scenario.entry_count()),
        K(static_cast<int>(orders.size())) {
    if (orders.empty())
      throw EmptyFamilyError("gluing needs at least one total order");
    p.validate();
    if (static_cast<long>(K) * E > kLpVarCap)
      throw SizeError("gluing LP exceeds the variable cap");
    for (const auto& sigma : orders)
      order_rows.push_back(order_constraints(sc, sigma));
  }

  long var(int k, long t) const { return static_cast<long>(k) * E + t; }

  // Homogeneous cone rows for every order block, over `width` variables.
  void append_cone_rows(std::vector<linprog::Row>& rows, long width) const {
    for (int k = 0; k < K; ++k)
      for (const auto& r : order_rows[k]) {
        linprog::Row row{std::vector<Rational>(width, Rational(0)),
                         linprog::Rel::Eq, Rational(0)};
        for (long t = 0; t < E; ++t) row.a[var(k, t)] = r[t];
        rows.push_back(std::move(row));
      }
  }
};

}  // namespace

Rational causal_fraction(const BehaviorTable& p,
                         const std::vector<contexts::CausalOrder>& orders) {
  GlueLp lp(p, orders);
  const long width = static_cast<long>(lp.K) * lp.E;
  std::vector<linprog::Row> rows;
  for (long t = 0; t < lp.E; ++t) {
    linprog::Row row{std::vector<Rational>(width, Rational(0)),
                     linprog::Rel::Le, p.p[t]};
    for (int k = 0; k < lp.K; ++k) row.a[lp.var(k, t)] = 1;
    rows.push_back(std::move(row));
  }
  lp.append_cone_rows(rows, width);
  // Each block's mass is setting-independent; read it off setting 0.
  std::vector<Rational> obj(width, Rational(0));
  for (int k = 0; k < lp.K; ++k)
    for (long o = 0; o < lp.sc.outcomes_count(); ++o)
      obj[lp.var(k, lp.sc.entry_index(0, o))] = 1;
  auto res = linprog::maximize(obj, rows);
  assert(res.status == linprog::Status::Optimal);
  return res.objective;
}

Rational l1_distance_to_gluable(
    const BehaviorTable& p, const std::vector<contexts::CausalOrder>& orders) {
  GlueLp lp(p, orders);
  const long blocks = static_cast<long>(lp.K) * lp.E;
  const long width = blocks + 2 * lp.E;  // u blocks, then e+, then e-
  std::vector<linprog::Row> rows;
  // q = sum_k u_k is a normalized behaviour: per-block mass rows are part
  // of the cone; one global row pins the total mass to 1.
  {
    linprog::Row row{std::vector<Rational>(width, Rational(0)),
                     linprog::Rel::Eq, Rational(1)};
    for (int k = 0; k < lp.K; ++k)
      for (long o = 0; o < lp.sc.outcomes_count(); ++o)
        row.a[lp.var(k, lp.sc.entry_index(0, o))] = 1;
    rows.push_back(std::move(row));
  }
  // p - q = e+ - e-  component-wise.
  for (long t = 0; t < lp.E; ++t) {
    linprog::Row row{std::vector<Rational>(width, Rational(0)),
                     linprog::Rel::Eq, p.p[t]};
    for (int k = 0; k < lp.K; ++k) row.a[lp.var(k, t)] = 1;
    row.a[blocks + t] = 1;
    row.a[blocks + lp.E + t] = -1;
    rows.push_back(std::move(row));
  }
  lp.append_cone_rows(rows, width);
  std::vector<Rational> obj(width, Rational(0));
  for (long t = 0; t < 2 * lp.E; ++t) obj[blocks + t] = 1;
  auto res = linprog::minimize(obj, rows);
  assert(res.status == linprog::Status::Optimal);
  return res.objective;
}

GlueVerdict check_global_section(
    const BehaviorTable& p, const std::vector<contexts::CausalOrder>& orders) {
  GlueLp lp(p, orders);
  const long width = static_cast<long>(lp.K) * lp.E;
  std::vector<linprog::Row> rows;
  for (long t = 0; t < lp.E; ++t) {
    linprog::Row row{std::vector<Rational>(width, Rational(0)),
                     linprog::Rel::Eq, p.p[t]};
    for (int k = 0; k < lp.K; ++k) row.a[lp.var(k, t)] = 1;
    rows.push_back(std::move(row));
  }
  lp.append_cone_rows(rows, width);
  auto res = linprog::maximize(std::vector<Rational>(width, Rational(0)),
                               rows);

  GlueVerdict verdict;
  if (res.status == linprog::Status::Optimal) {
    verdict.gluable = true;
    std::vector<CertComponent> cert;
    for (int k = 0; k < lp.K; ++k) {
      Rational mass = 0;
      for (long o = 0; o < lp.sc.outcomes_count(); ++o)
        mass += res.x[lp.var(k, lp.sc.entry_index(0, o))];
      if (mass == 0) continue;
      BehaviorTable q = zero_behavior(lp.sc);
      for (long t = 0; t < lp.E; ++t) q.p[t] = res.x[lp.var(k, t)] / mass;
      q.validate();
      cert.push_back({orders[k], mass, std::move(q)});
    }
    verdict.certificate = std::move(cert);
  } else {
    assert(res.status == linprog::Status::Infeasible);
    // The multipliers on the p-rows give a functional w with w.u <= 0 on
    // every order cone and w.p > 0.
    CausalWitness wit;
    std::vector<Rational> w(lp.E);
    for (long t = 0; t < lp.E; ++t) w[t] = -res.farkas[t];
    Rational scale;
    wit.w = integer_normalize(w, scale);
    bool first = true;
    for (const auto& sigma : orders) {
      for (const auto& q : enumerate_deterministic_strategies(lp.sc, sigma)) {
        Rational v = 0;
        for (long t = 0; t < lp.E; ++t) v += wit.w[t] * q.p[t];
        if (first || v > wit.bound) wit.bound = v;
        first = false;
      }
    }
    wit.value = 0;
    for (long t = 0; t < lp.E; ++t) wit.value += wit.w[t] * p.p[t];
    assert(wit.value > wit.bound);
    verdict.witness = std::move(wit);
  }
  verdict.causalFraction = causal_fraction(p, orders);
  verdict.l1Distance = l1_distance_to_gluable(p, orders);
  return verdict;
}

bool verify_section_family(const SectionFamily& fam) {
  const auto& poset = fam.poset;
  const auto& parties = poset.at(0).order.parties();
  // Coverage first, so a missing context is an error rather than `false`.
  for (const auto& ctx : poset.contexts())
    if (fam.tables.find(ctx.name) == fam.tables.end())
      throw MissingContextError("no table assigned to context '" + ctx.name +
                                "'");
  const auto totals = contexts::enumerate_total_orders(parties);
  for (const auto& ctx : poset.contexts()) {
    const auto& table = fam.tables.at(ctx.name);
    if (table.scenario.parties() != parties)
      throw SemanticError("table for '" + ctx.name +
                          "' disagrees with the poset party list");
    table.validate();
    const auto& need = ctx.order.relation();
    for (const auto& sigma : totals) {
      const auto& rel = sigma.relation();
      bool extends =
          std::includes(rel.begin(), rel.end(), need.begin(), need.end());
      if (extends && !is_compatible_with_order(table, sigma)) return false;
    }
  }
  for (int i = 0; i < poset.size(); ++i)
    for (int j = 0; j < poset.size(); ++j)
      if (i != j && poset.leq(i, j) &&
          !(fam.tables.at(poset.at(i).name) ==
            fam.tables.at(poset.at(j).name)))
        return false;
  return true;
}

}  // namespace causord::gluing
