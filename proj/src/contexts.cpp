#include "causord/contexts.hpp"

#include <algorithm>
#include <numeric>

#include "causord/errors.hpp"

namespace causord::contexts {

CausalOrder CausalOrder::make(std::vector<Party> parties,
                              const std::vector<std::pair<int, int>>& pairs) {
  CausalOrder o;
  o.parties_ = std::move(parties);
  const int n = o.size();
  for (int i = 0; i < n; ++i) {
    if (!o.index_.emplace(o.parties_[i], i).second)
      throw DuplicatePartyError("duplicate party id '" + o.parties_[i] + "'");
  }
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  for (auto [i, j] : pairs) {
    if (i < 0 || i >= n || j < 0 || j >= n)
      throw UnknownPartyError("order pair references party index out of range");
    adj[i][j] = true;
  }
  // Transitive closure (Floyd–Warshall).
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      if (adj[i][k])
        for (int j = 0; j < n; ++j)
          if (adj[k][j]) adj[i][j] = true;
  for (int i = 0; i < n; ++i)
    if (adj[i][i])
      throw CycleError("causal order contains a cycle through '" +
                       o.parties_[i] + "'");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (adj[i][j]) o.rel_.insert({i, j});
  return o;
}

CausalOrder CausalOrder::make_named(
    std::vector<Party> parties,
    const std::vector<std::pair<Party, Party>>& pairs) {
  std::map<Party, int> idx;
  for (int i = 0; i < static_cast<int>(parties.size()); ++i) {
    if (!idx.emplace(parties[i], i).second)
      throw DuplicatePartyError("duplicate party id '" + parties[i] + "'");
  }
  std::vector<std::pair<int, int>> ip;
  ip.reserve(pairs.size());
  for (const auto& [a, b] : pairs) {
    auto ia = idx.find(a);
    auto ib = idx.find(b);
    if (ia == idx.end()) throw UnknownPartyError("unknown party '" + a + "'");
    if (ib == idx.end()) throw UnknownPartyError("unknown party '" + b + "'");
    ip.emplace_back(ia->second, ib->second);
  }
  return make(std::move(parties), ip);
}

int CausalOrder::index_of(const Party& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw UnknownPartyError("unknown party '" + id + "'");
  return it->second;
}

bool CausalOrder::is_total() const {
  const int n = size();
  return static_cast<int>(rel_.size()) == n * (n - 1) / 2;
}

std::string CausalOrder::describe() const {
  if (rel_.empty()) return "-";
  std::string out;
  for (auto [i, j] : rel_) {
    if (!out.empty()) out += ", ";
    out += parties_[i] + "<" + parties_[j];
  }
  return out;
}

std::vector<CausalOrder> enumerate_total_orders(
    const std::vector<Party>& parties) {
  const int n = static_cast<int>(parties.size());
  if (n < 1 || n > 6)
    throw SizeError("total-order enumeration supports 1..6 parties, got " +
                    std::to_string(n));
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<CausalOrder> out;
  do {
    std::vector<std::pair<int, int>> pairs;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) pairs.emplace_back(perm[a], perm[b]);
    out.push_back(CausalOrder::make(parties, pairs));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

int OrderContextPoset::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end())
    throw UnknownContextError("unknown context '" + name + "'");
  return it->second;
}

std::vector<int> OrderContextPoset::upset_indices(int c) const {
  std::vector<int> out;
  for (int d = 0; d < size(); ++d)
    if (leq_[c][d]) out.push_back(d);
  return out;
}

std::set<std::string> OrderContextPoset::upset(const std::string& c) const {
  std::set<std::string> out;
  for (int d : upset_indices(index_of(c))) out.insert(ctxs_[d].name);
  return out;
}

std::vector<int> OrderContextPoset::maximal_indices() const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i) {
    bool maximal = true;
    for (int j = 0; j < size(); ++j)
      if (j != i && leq_[i][j]) maximal = false;
    if (maximal) out.push_back(i);
  }
  return out;
}

OrderContextPoset build_context_poset(std::vector<OrderContext> ctxs,
                                      std::vector<std::string>* warnings) {
  if (ctxs.empty())
    throw EmptyFamilyError("context poset needs at least one context");
  OrderContextPoset p;
  p.ctxs_ = std::move(ctxs);
  const int n = p.size();
  for (int i = 0; i < n; ++i) {
    if (!p.index_.emplace(p.ctxs_[i].name, i).second)
      throw DuplicateNameError("duplicate context name '" + p.ctxs_[i].name +
                               "'");
    if (p.ctxs_[i].order.parties() != p.ctxs_[0].order.parties())
      throw SemanticError("context '" + p.ctxs_[i].name +
                          "' disagrees with '" + p.ctxs_[0].name +
                          "' on the party list");
  }
  p.leq_.assign(n, std::vector<bool>(n, false));
  for (int i = 0; i < n; ++i) {
    const auto& ri = p.ctxs_[i].order.relation();
    for (int j = 0; j < n; ++j) {
      if (i == j) {
        p.leq_[i][j] = true;
        continue;
      }
      const auto& rj = p.ctxs_[j].order.relation();
      bool proper = ri.size() < rj.size() &&
                    std::includes(rj.begin(), rj.end(), ri.begin(), ri.end());
      p.leq_[i][j] = proper;
      if (j > i && ri == rj) {
        p.warnings_.push_back("contexts '" + p.ctxs_[i].name + "' and '" +
                              p.ctxs_[j].name +
                              "' carry identical relations; kept as "
                              "incomparable points");
      }
    }
  }
  if (warnings)
    warnings->insert(warnings->end(), p.warnings_.begin(), p.warnings_.end());
  return p;
}

}  // namespace causord::contexts
