#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "causord/classifier.hpp"
#include "causord/errors.hpp"

using namespace causord;
using namespace causord::classifier;
using contexts::CausalOrder;
using forcing::KripkeModel;

namespace {

// The two-party fixture: c0 below the two total orders, plus an
// incomparable point where the order proposition is not posed.
KripkeModel fixture() {
  std::vector<std::string> parties{"A", "B"};
  auto poset = contexts::build_context_poset(
      {{"c0", CausalOrder::make_named(parties, {})},
       {"c_AB", CausalOrder::make_named(parties, {{"A", "B"}})},
       {"c_BA", CausalOrder::make_named(parties, {{"B", "A"}})},
       {"c_ico", CausalOrder::make_named(parties, {})}});
  KripkeModel m(poset);
  m.declare_posed("A<B", {"c0", "c_AB", "c_BA"});
  m.declare_posed("B<A", {"c0", "c_AB", "c_BA"});
  return m;
}

}  // namespace

TEST_CASE("seven-value rendering order is T, F, I") {
  CHECK(SevenValue{true, false, false}.str() == "T");
  CHECK(SevenValue{false, true, false}.str() == "F");
  CHECK(SevenValue{false, false, true}.str() == "I");
  CHECK(SevenValue{true, true, false}.str() == "TF");
  CHECK(SevenValue{true, false, true}.str() == "TI");
  CHECK(SevenValue{false, true, true}.str() == "FI");
  CHECK(SevenValue{true, true, true}.str() == "TFI");
}

TEST_CASE("two-party fixture classification") {
  auto m = fixture();
  auto phi = forcing::parse_prop("A<B");

  CHECK(classify(m, {"c_AB", "c_BA"}, phi).str() == "TF");
  CHECK(classify(m, {"c_AB", "c_BA", "c_ico"}, phi).str() == "TFI");
  CHECK(classify(m, {"c_AB"}, phi).str() == "T");
  CHECK(classify(m, {"c_BA"}, phi).str() == "F");
  CHECK(classify(m, {"c_ico"}, phi).str() == "I");
  CHECK(classify(m, {"c0"}, phi).str() == "I");
  CHECK(classify(m, {"c0", "c_AB", "c_BA"}, phi).str() == "TFI");

  // The mirrored proposition behaves symmetrically.
  auto psi = forcing::parse_prop("B<A");
  CHECK(classify(m, {"c_AB", "c_BA"}, psi).str() == "TF");
  CHECK(classify(m, {"c_AB", "c_BA", "c_ico"}, psi).str() == "TFI");
}

TEST_CASE("classify of false is F on any nonempty family") {
  auto m = fixture();
  CHECK(classify(m, {"c0"}, forcing::bottom()).str() == "F");
  CHECK(classify(m, {"c0", "c_AB", "c_BA", "c_ico"}, forcing::bottom())
            .str() == "F");
}

TEST_CASE("errors") {
  auto m = fixture();
  CHECK_THROWS_AS(classify(m, {}, forcing::parse_prop("A<B")),
                  EmptyFamilyError);
  CHECK_THROWS_AS(classify(m, {"zzz"}, forcing::parse_prop("A<B")),
                  UnknownContextError);
}

TEST_CASE("family monotonicity and negation duality") {
  auto m = fixture();
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> coin(0, 1);
  std::vector<std::string> all{"c0", "c_AB", "c_BA", "c_ico"};
  std::vector<forcing::PropPtr> props{
      forcing::parse_prop("A<B"), forcing::parse_prop("~(A<B)"),
      forcing::parse_prop("A<B | B<A"), forcing::parse_prop("A<B -> B<A"),
      forcing::parse_prop("A<B & ~(B<A)"), forcing::bottom()};
  for (int round = 0; round < 100; ++round) {
    std::set<std::string> small, big;
    for (const auto& c : all) {
      if (coin(rng)) big.insert(c);
      if (coin(rng) && big.count(c)) small.insert(c);
    }
    if (small.empty() || big.empty()) continue;
    for (const auto& phi : props) {
      auto vs = classify(m, small, phi);
      auto vb = classify(m, big, phi);
      CHECK((!vs.t || vb.t));
      CHECK((!vs.f || vb.f));
      CHECK((!vs.i || vb.i));
      // F(phi) iff T(~phi).
      CHECK(classify(m, big, phi).f == classify(m, big, forcing::neg(phi)).t);
      // Nonempty by trichotomy.
      CHECK((vb.t || vb.f || vb.i));
    }
  }
}

TEST_CASE("discrete decided poset never reports I") {
  std::vector<std::string> parties{"A", "B"};
  auto poset = contexts::build_context_poset(
      {{"c_AB", CausalOrder::make_named(parties, {{"A", "B"}})},
       {"c_BA", CausalOrder::make_named(parties, {{"B", "A"}})}});
  KripkeModel m(poset);
  auto phi = forcing::parse_prop("A<B");
  auto v = classify(m, {"c_AB", "c_BA"}, phi);
  CHECK(v.str() == "TF");
  CHECK_FALSE(v.i);
}

TEST_CASE("classify_report rows and deterministic ordering") {
  auto m = fixture();
  std::vector<forcing::PropPtr> props{forcing::parse_prop("A<B"),
                                      forcing::parse_prop("B<A")};
  auto rows = classify_report(m, {"c_AB", "c_BA", "c_ico"}, props);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].value.str() == "TFI");
  CHECK(rows[1].value.str() == "TFI");
  CHECK(rows[0].support == std::vector<std::string>{"c_AB"});
  CHECK(rows[0].refute == std::vector<std::string>{"c_BA"});
  CHECK(rows[0].indet == std::vector<std::string>{"c_ico"});
  CHECK(rows[1].support == std::vector<std::string>{"c_BA"});
  CHECK(rows[1].refute == std::vector<std::string>{"c_AB"});
  CHECK(rows[1].indet == std::vector<std::string>{"c_ico"});

  CHECK(classify_report(m, {"c0"}, {}).empty());
}
