#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace causord::contexts {

using Party = std::string;

// A strict partial order on a fixed, ordered party list. The relation is
// kept transitively closed; (i,j) present means party i strictly precedes
// party j. Immutable after construction.
class CausalOrder {
 public:
  CausalOrder() = default;

  // `pairs` holds (before, after) index pairs; the result is the transitive
  // closure. Throws DuplicatePartyError, UnknownPartyError, CycleError.
  static CausalOrder make(std::vector<Party> parties,
                          const std::vector<std::pair<int, int>>& pairs);

  // Same, with parties referenced by id.
  static CausalOrder make_named(
      std::vector<Party> parties,
      const std::vector<std::pair<Party, Party>>& pairs);

  int size() const { return static_cast<int>(parties_.size()); }
  const std::vector<Party>& parties() const { return parties_; }

  // Index of a party id; throws UnknownPartyError if absent.
  int index_of(const Party& id) const;

  bool before(int i, int j) const { return rel_.count({i, j}) != 0; }
  bool before(const Party& a, const Party& b) const {
    return before(index_of(a), index_of(b));
  }
  bool comparable(int i, int j) const {
    return i == j || before(i, j) || before(j, i);
  }
  bool is_total() const;

  const std::set<std::pair<int, int>>& relation() const { return rel_; }

  // "A<B, A<C" over the full relation; "-" for the empty order.
  std::string describe() const;

  bool operator==(const CausalOrder& o) const {
    return parties_ == o.parties_ && rel_ == o.rel_;
  }

 private:
  std::vector<Party> parties_;
  std::map<Party, int> index_;
  std::set<std::pair<int, int>> rel_;
};

// All |parties|! total orders as transitively closed chains, enumerated in
// lexicographic order of the underlying index permutation. Throws SizeError
// outside 1..6 parties.
std::vector<CausalOrder> enumerate_total_orders(
    const std::vector<Party>& parties);

struct OrderContext {
  std::string name;
  CausalOrder order;
};

// Named causal orders under the refinement relation: c <= d iff c == d or
// relation(c) is a proper subset of relation(d). Distinct contexts with
// identical relations stay incomparable (recorded as warnings, not errors).
class OrderContextPoset {
 public:
  int size() const { return static_cast<int>(ctxs_.size()); }
  const OrderContext& at(int i) const { return ctxs_[i]; }
  const std::vector<OrderContext>& contexts() const { return ctxs_; }

  // Throws UnknownContextError.
  int index_of(const std::string& name) const;
  bool has(const std::string& name) const { return index_.count(name) != 0; }

  bool leq(int i, int j) const { return leq_[i][j]; }
  bool leq(const std::string& a, const std::string& b) const {
    return leq(index_of(a), index_of(b));
  }

  // { d : c <= d }, as names; always contains c.
  std::set<std::string> upset(const std::string& c) const;
  std::vector<int> upset_indices(int c) const;

  std::vector<int> maximal_indices() const;

  const std::vector<std::string>& warnings() const { return warnings_; }

  friend OrderContextPoset build_context_poset(
      std::vector<OrderContext> ctxs, std::vector<std::string>* warnings);

 private:
  std::vector<OrderContext> ctxs_;
  std::map<std::string, int> index_;
  std::vector<std::vector<bool>> leq_;
  std::vector<std::string> warnings_;
};

// Throws DuplicateNameError on repeated names, EmptyFamilyError on an empty
// list, SemanticError if the contexts disagree on the party universe.
// Identical-relation pairs produce warnings (also kept on the poset itself).
OrderContextPoset build_context_poset(
    std::vector<OrderContext> ctxs,
    std::vector<std::string>* warnings = nullptr);

}  // namespace causord::contexts
