#include "causord/linprog.hpp"

#include <cassert>
#include <stdexcept>

namespace causord::linprog {

namespace {

struct Tableau {
  int m = 0;       // constraint rows
  int n = 0;       // columns excluding rhs
  std::vector<std::vector<Rational>> t;  // m x (n+1), last column = rhs
  std::vector<Rational> obj;             // reduced costs; obj[n] = -objective
  std::vector<int> basis;                // basic column per row

  void pivot(int r, int e) {
    auto& pr = t[r];
    const Rational pv = pr[e];
    for (auto& v : pr) v /= pv;
    for (int i = 0; i < m; ++i) {
      if (i == r) continue;
      const Rational f = t[i][e];
      if (f != 0)
        for (int j = 0; j <= n; ++j) t[i][j] -= f * pr[j];
    }
    const Rational f = obj[e];
    if (f != 0)
      for (int j = 0; j <= n; ++j) obj[j] -= f * pr[j];
    basis[r] = e;
  }

  // Sets obj to the reduced costs of `cost` (size n, rhs cost 0) under the
  // current basis.
  void price(const std::vector<Rational>& cost) {
    obj.assign(n + 1, Rational(0));
    for (int j = 0; j < n; ++j) obj[j] = cost[j];
    for (int i = 0; i < m; ++i) {
      const Rational cb = cost[basis[i]];
      if (cb != 0)
        for (int j = 0; j <= n; ++j) obj[j] -= cb * t[i][j];
    }
  }

  // Bland's rule: entering = lowest-index improving column; leaving = the
  // min-ratio row, ties broken by lowest basic column index.
  Status run(const std::vector<char>& blocked) {
    for (;;) {
      int e = -1;
      for (int j = 0; j < n; ++j)
        if (!blocked[j] && obj[j] > 0) {
          e = j;
          break;
        }
      if (e < 0) return Status::Optimal;
      int r = -1;
      Rational best;
      for (int i = 0; i < m; ++i) {
        if (t[i][e] > 0) {
          Rational ratio = t[i][n] / t[i][e];
          if (r < 0 || ratio < best ||
              (ratio == best && basis[i] < basis[r])) {
            r = i;
            best = ratio;
          }
        }
      }
      if (r < 0) return Status::Unbounded;
      pivot(r, e);
    }
  }
};

}  // namespace

Result maximize(const std::vector<Rational>& c, const std::vector<Row>& rows) {
  const int nvars = static_cast<int>(c.size());
  const int m = static_cast<int>(rows.size());
  for (const auto& row : rows)
    if (static_cast<int>(row.a.size()) != nvars)
      throw std::invalid_argument("LP row width disagrees with objective");

  // Orient every row so the rhs is nonnegative.
  std::vector<Rel> rel(m);
  std::vector<char> flipped(m, 0);
  for (int i = 0; i < m; ++i) {
    rel[i] = rows[i].rel;
    if (rows[i].b < 0) {
      flipped[i] = 1;
      if (rel[i] == Rel::Le)
        rel[i] = Rel::Ge;
      else if (rel[i] == Rel::Ge)
        rel[i] = Rel::Le;
    }
  }

  // Column layout: originals, then one slack/surplus per inequality row,
  // then one artificial per Ge/Eq row.
  std::vector<int> slack(m, -1), art(m, -1);
  int ncols = nvars;
  for (int i = 0; i < m; ++i)
    if (rel[i] != Rel::Eq) slack[i] = ncols++;
  const int art_begin = ncols;
  for (int i = 0; i < m; ++i)
    if (rel[i] != Rel::Le) art[i] = ncols++;

  Tableau tab;
  tab.m = m;
  tab.n = ncols;
  tab.t.assign(m, std::vector<Rational>(ncols + 1, Rational(0)));
  tab.basis.assign(m, -1);
  for (int i = 0; i < m; ++i) {
    const Rational sign = flipped[i] ? Rational(-1) : Rational(1);
    for (int j = 0; j < nvars; ++j) tab.t[i][j] = sign * rows[i].a[j];
    tab.t[i][ncols] = sign * rows[i].b;
    if (slack[i] >= 0) tab.t[i][slack[i]] = rel[i] == Rel::Le ? 1 : -1;
    if (art[i] >= 0) tab.t[i][art[i]] = 1;
    tab.basis[i] = rel[i] == Rel::Le ? slack[i] : art[i];
  }

  std::vector<char> blocked(ncols, 0);

  // Phase 1: drive the artificials to zero (maximize -sum of artificials).
  if (art_begin < ncols) {
    std::vector<Rational> cost1(ncols, Rational(0));
    for (int j = art_begin; j < ncols; ++j) cost1[j] = -1;
    tab.price(cost1);
    Status st = tab.run(blocked);
    assert(st == Status::Optimal);  // phase-1 objective is bounded by 0
    (void)st;
    const Rational z1 = -tab.obj[ncols];
    if (z1 < 0) {
      // Infeasible; read the simplex multipliers off the designated unit
      // column of each row (slack for Le, artificial otherwise).
      Result res;
      res.status = Status::Infeasible;
      res.farkas.assign(m, Rational(0));
      for (int i = 0; i < m; ++i) {
        const int u = rel[i] == Rel::Le ? slack[i] : art[i];
        const Rational cu = u >= art_begin ? Rational(-1) : Rational(0);
        Rational y = cu - tab.obj[u];
        if (flipped[i]) y = -y;
        res.farkas[i] = y;
      }
      return res;
    }
    // Pivot leftover artificials out of the basis; a row that cannot be
    // pivoted is redundant and is dropped.
    for (int i = tab.m - 1; i >= 0; --i) {
      if (tab.basis[i] < art_begin) continue;
      int e = -1;
      for (int j = 0; j < art_begin; ++j)
        if (tab.t[i][j] != 0) {
          e = j;
          break;
        }
      if (e >= 0) {
        tab.pivot(i, e);
      } else {
        tab.t.erase(tab.t.begin() + i);
        tab.basis.erase(tab.basis.begin() + i);
        --tab.m;
      }
    }
    for (int j = art_begin; j < ncols; ++j) blocked[j] = 1;
  }

  // Phase 2: the real objective.
  std::vector<Rational> cost2(ncols, Rational(0));
  for (int j = 0; j < nvars; ++j) cost2[j] = c[j];
  tab.price(cost2);
  Status st = tab.run(blocked);
  Result res;
  res.status = st;
  if (st != Status::Optimal) return res;
  res.objective = -tab.obj[ncols];
  res.x.assign(nvars, Rational(0));
  for (int i = 0; i < tab.m; ++i)
    if (tab.basis[i] < nvars) res.x[tab.basis[i]] = tab.t[i][ncols];
  return res;
}

Result minimize(const std::vector<Rational>& c, const std::vector<Row>& rows) {
  std::vector<Rational> nc(c.size());
  for (size_t j = 0; j < c.size(); ++j) nc[j] = -c[j];
  Result res = maximize(nc, rows);
  if (res.status == Status::Optimal) res.objective = -res.objective;
  return res;
}

}  // namespace causord::linprog
