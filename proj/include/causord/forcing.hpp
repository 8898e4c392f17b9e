#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "causord/contexts.hpp"

namespace causord::forcing {

enum class PropKind { Atom, Prec, Bottom, And, Or, Implies };

struct Prop;
using PropPtr = std::shared_ptr<const Prop>;

// Immutable proposition AST. Negation is sugar: ~p == p -> false.
struct Prop {
  PropKind kind;
  std::string name;  // Atom
  std::string a, b;  // Prec
  PropPtr l, r;      // And / Or / Implies
};

PropPtr atom(std::string name);
PropPtr prec(std::string a, std::string b);  // throws SemanticError if a == b
PropPtr bottom();
PropPtr conj(PropPtr l, PropPtr r);
PropPtr disj(PropPtr l, PropPtr r);
PropPtr implies(PropPtr l, PropPtr r);
PropPtr neg(PropPtr p);

// Surface syntax: A<B, ~p, p & q, p | q, p -> q, false, parentheses.
// Precedence ~ > & > | > ->, with -> right-associative.
PropPtr parse_prop(const std::string& text);

// Renders with minimal parentheses; Implies(x, false) prints as ~x.
std::string prop_str(const PropPtr& p);

// How declared context sets relate to the required upward closure.
enum class Closure {
  Auto,    // close upward, record a warning if that changed the set
  Strict,  // throw MonotonicityError if not already upward closed
  Raw,     // store as given (for tests probing check_monotone)
};

struct MonotoneViolation {
  std::string atom;  // atom name or Prec surface form
  std::string c, d;  // c <= d, forced at c but not at d
};

// Context poset + monotone atomic valuation + posedness map.
// Prec(A,B) is forced at c iff (A,B) is in c's relation (the default order
// valuation); named atoms are forced where declared. Propositions are posed
// at c iff every atom/Prec in them is posed at c; undeclared keys are posed
// everywhere. Immutable in use; declarations happen at load time.
class KripkeModel {
 public:
  explicit KripkeModel(contexts::OrderContextPoset poset);

  const contexts::OrderContextPoset& poset() const { return poset_; }

  // `key` is an atom name; `at` context names. Throws UnknownContextError,
  // and MonotonicityError under Closure::Strict.
  void declare_atom(const std::string& key, const std::set<std::string>& at,
                    Closure how = Closure::Auto);
  // `key` is an atom name or a Prec surface form like "A<B".
  void declare_posed(const std::string& key, const std::set<std::string>& at,
                     Closure how = Closure::Auto);

  bool has_atom(const std::string& key) const {
    return atom_forced_.count(key) != 0;
  }

  bool forces(int c, const PropPtr& p) const;
  bool forces(const std::string& c, const PropPtr& p) const;

  bool posed_at(int c, const PropPtr& p) const;
  bool indeterminate_at(int c, const PropPtr& p) const;
  bool indeterminate_at(const std::string& c, const PropPtr& p) const;

  // Violations of valuation monotonicity (declared atoms and posedness
  // sets), in deterministic order. Empty for models built with Auto/Strict.
  std::vector<MonotoneViolation> check_monotone() const;

  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  const std::vector<bool>* find_posed(const std::string& key) const;
  std::vector<bool> to_mask(const std::set<std::string>& at) const;
  std::vector<bool> close_up(const std::string& key, std::vector<bool> mask,
                             Closure how);

  contexts::OrderContextPoset poset_;
  std::map<std::string, std::vector<bool>> atom_forced_;
  std::map<std::string, std::vector<bool>> posed_;
  std::vector<std::string> warnings_;
};

// The model induced by the poset alone: Prec by relation membership, posed
// everywhere, no named atoms.
KripkeModel default_order_valuation(contexts::OrderContextPoset poset);

}  // namespace causord::forcing
