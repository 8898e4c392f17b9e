#include "causord/behavior.hpp"

#include <set>

#include "causord/errors.hpp"

namespace causord::gluing {

namespace {

constexpr long kEntryCap = 1000000;

long tuple_index(const std::vector<int>& tuple, const std::vector<int>& radix,
                 const char* what) {
  if (tuple.size() != radix.size())
    throw SemanticError(std::string(what) + " tuple has wrong arity");
  long idx = 0;
  for (size_t k = 0; k < radix.size(); ++k) {
    if (tuple[k] < 0 || tuple[k] >= radix[k])
      throw SemanticError(std::string(what) + " value out of range");
    idx = idx * radix[k] + tuple[k];
  }
  return idx;
}

std::vector<int> index_tuple(long idx, const std::vector<int>& radix) {
  std::vector<int> tuple(radix.size(), 0);
  for (size_t k = radix.size(); k-- > 0;) {
    tuple[k] = static_cast<int>(idx % radix[k]);
    idx /= radix[k];
  }
  return tuple;
}

}  // namespace

Scenario Scenario::make(std::vector<std::string> parties,
                        std::vector<int> settings, std::vector<int> outcomes) {
  Scenario sc;
  if (parties.empty()) throw SemanticError("scenario needs at least one party");
  if (settings.size() != parties.size() || outcomes.size() != parties.size())
    throw SemanticError("per-party cardinality lists must match party count");
  std::set<std::string> seen;
  for (const auto& id : parties) {
    if (id.empty()) throw SemanticError("empty party id");
    if (!seen.insert(id).second)
      throw DuplicatePartyError("duplicate party id '" + id + "'");
  }
  long total = 1;
  for (size_t k = 0; k < parties.size(); ++k) {
    if (settings[k] < 1 || outcomes[k] < 1)
      throw SemanticError("party '" + parties[k] +
                          "' needs at least one setting and one outcome");
    total *= settings[k];
    total *= outcomes[k];
    if (total > kEntryCap)
      throw SizeError("scenario table exceeds the 10^6 entry cap");
  }
  sc.parties_ = std::move(parties);
  sc.settings_ = std::move(settings);
  sc.outcomes_ = std::move(outcomes);
  for (int s : sc.settings_) sc.settings_count_ *= s;
  for (int o : sc.outcomes_) sc.outcomes_count_ *= o;
  return sc;
}

long Scenario::setting_index(const std::vector<int>& x) const {
  return tuple_index(x, settings_, "setting");
}

long Scenario::outcome_index(const std::vector<int>& a) const {
  return tuple_index(a, outcomes_, "outcome");
}

std::vector<int> Scenario::setting_tuple(long s) const {
  return index_tuple(s, settings_);
}

std::vector<int> Scenario::outcome_tuple(long o) const {
  return index_tuple(o, outcomes_);
}

void BehaviorTable::validate() const {
  if (static_cast<long>(p.size()) != scenario.entry_count())
    throw SemanticError("behaviour vector size disagrees with scenario");
  for (long s = 0; s < scenario.settings_count(); ++s) {
    Rational sum = 0;
    for (long o = 0; o < scenario.outcomes_count(); ++o) {
      const Rational& v = at(s, o);
      if (v < 0)
        throw NormalizationError("negative probability at setting index " +
                                 std::to_string(s));
      sum += v;
    }
    if (sum != 1)
      throw NormalizationError(
          "outcome probabilities at setting index " + std::to_string(s) +
          " sum to " + rational_str(sum) + ", expected 1");
  }
}

BehaviorTable zero_behavior(const Scenario& sc) {
  return {sc, std::vector<Rational>(sc.entry_count(), Rational(0))};
}

BehaviorTable uniform_behavior(const Scenario& sc) {
  BehaviorTable t{sc, std::vector<Rational>(
                          sc.entry_count(),
                          Rational(1) / Rational(sc.outcomes_count()))};
  return t;
}

}  // namespace causord::gluing
