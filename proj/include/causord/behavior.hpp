#pragma once

#include <string>
#include <vector>

#include "causord/rational.hpp"

namespace causord::gluing {

// Party list plus per-party setting/outcome cardinalities. Behaviour
// vectors are entry-indexed: entry t = s * outcomes_count() + o where s, o
// are party-major mixed-radix codes of the setting/outcome tuples.
class Scenario {
 public:
  Scenario() = default;

  // Throws DuplicatePartyError, SemanticError (shape), SizeError (cap).
  static Scenario make(std::vector<std::string> parties,
                       std::vector<int> settings, std::vector<int> outcomes);

  int party_count() const { return static_cast<int>(parties_.size()); }
  const std::vector<std::string>& parties() const { return parties_; }
  const std::vector<int>& settings() const { return settings_; }
  const std::vector<int>& outcomes() const { return outcomes_; }

  long settings_count() const { return settings_count_; }
  long outcomes_count() const { return outcomes_count_; }
  long entry_count() const { return settings_count_ * outcomes_count_; }

  long setting_index(const std::vector<int>& x) const;
  long outcome_index(const std::vector<int>& a) const;
  std::vector<int> setting_tuple(long s) const;
  std::vector<int> outcome_tuple(long o) const;
  long entry_index(long s, long o) const { return s * outcomes_count_ + o; }

  bool operator==(const Scenario& o) const = default;

 private:
  std::vector<std::string> parties_;
  std::vector<int> settings_, outcomes_;
  long settings_count_ = 1;
  long outcomes_count_ = 1;
};

// Conditional distribution p(outcomes | settings), exact rationals.
struct BehaviorTable {
  Scenario scenario;
  std::vector<Rational> p;  // size entry_count()

  const Rational& at(long s, long o) const {
    return p[scenario.entry_index(s, o)];
  }
  Rational& at(long s, long o) { return p[scenario.entry_index(s, o)]; }

  // Entries >= 0 and each setting's outcomes sum to 1 exactly; throws
  // NormalizationError otherwise (SemanticError on a size mismatch).
  void validate() const;

  bool operator==(const BehaviorTable& o) const = default;
};

BehaviorTable zero_behavior(const Scenario& sc);
BehaviorTable uniform_behavior(const Scenario& sc);

}  // namespace causord::gluing
