#pragma once

#include <map>
#include <optional>
#include <vector>

#include "causord/behavior.hpp"
#include "causord/contexts.hpp"

namespace causord::gluing {

// Homogeneous equality rows r (meaning r . u = 0) expressing one-way
// signalling along the total order sigma, over entry-indexed vectors u.
// Every proper prefix of sigma contributes, including the empty prefix,
// whose rows force equal total mass across setting tuples (a normalized
// behaviour satisfies those automatically; subnormalized cone elements need
// them). For nonempty prefixes the lexicographically last outcome
// combination of each (prefix, prefix-settings) group is dropped as
// redundant. Throws NonTotalOrderError, SemanticError on party mismatch.
std::vector<std::vector<Rational>> order_constraints(
    const Scenario& sc, const contexts::CausalOrder& sigma);

// Exact test of the order_constraints rows on a behaviour table.
bool is_compatible_with_order(const BehaviorTable& p,
                              const contexts::CausalOrder& sigma);

// All deterministic behaviours where party k's outcome is a function of the
// settings of parties at or before k in sigma. Throws SizeError when the
// strategy count exceeds 10^6.
std::vector<BehaviorTable> enumerate_deterministic_strategies(
    const Scenario& sc, const contexts::CausalOrder& sigma);

struct CertComponent {
  contexts::CausalOrder order;
  Rational weight;   // > 0, weights sum to 1
  BehaviorTable q;   // compatible with `order`
};

struct CausalWitness {
  std::vector<Rational> w;  // entry-indexed; integers with gcd 1
  Rational bound;           // max of w.q over all deterministic strategies
  Rational value;           // w.p, strictly above bound
};

struct GlueVerdict {
  bool gluable = false;
  std::optional<std::vector<CertComponent>> certificate;  // iff gluable
  std::optional<CausalWitness> witness;                   // iff not gluable
  Rational causalFraction;
  Rational l1Distance;
};

// Exact LP decision of p = sum_sigma u_sigma with each u_sigma >= 0 in
// sigma's one-way-signalling cone. Feasible: certificate with lambda_sigma
// the (setting-independent) mass of u_sigma and q_sigma = u_sigma /
// lambda_sigma. Infeasible: Farkas dual turned into a causal inequality,
// with the bound tightened to the enumerated deterministic maximum. Also
// fills both non-gluability measures. Throws EmptyFamilyError,
// NonTotalOrderError, SizeError.
GlueVerdict check_global_section(
    const BehaviorTable& p, const std::vector<contexts::CausalOrder>& orders);

// Maximal lambda with p = lambda * s + (1 - lambda) * r, s a mixture of
// definite-order behaviours and r any valid behaviour. Exact LP.
Rational causal_fraction(const BehaviorTable& p,
                         const std::vector<contexts::CausalOrder>& orders);

// min over separable q of sum_{x,a} |p - q| (plain sum, settings weighted
// uniformly), by absolute-value splitting. Exact LP.
Rational l1_distance_to_gluable(
    const BehaviorTable& p, const std::vector<contexts::CausalOrder>& orders);

// One behaviour table per context of a poset.
struct SectionFamily {
  contexts::OrderContextPoset poset;
  std::map<std::string, BehaviorTable> tables;  // keyed by context name
};

// True iff every table satisfies its context's admissibility (the
// constraints of every linear extension of the context's partial order) and
// tables at comparable contexts coincide (restriction maps are identities).
// Throws MissingContextError if a context has no table.
bool verify_section_family(const SectionFamily& fam);

}  // namespace causord::gluing
