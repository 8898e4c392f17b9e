#pragma once

#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "causord/behavior.hpp"
#include "causord/contexts.hpp"
#include "causord/forcing.hpp"
#include "causord/spindyn.hpp"

namespace causord::io {

// In-memory form of a scenario file: party universe, named causal contexts,
// atomic valuations, posedness declarations, optional behaviour table.
// Sections: [scenario], [contexts], [atoms], [posed], [behavior]; '#' starts
// a comment; section order is irrelevant.
struct ScenarioData {
  std::vector<std::string> parties;
  std::vector<int> settings;  // empty unless declared
  std::vector<int> outcomes;
  std::vector<contexts::OrderContext> contexts;
  std::vector<std::pair<std::string, std::set<std::string>>> atoms;
  std::vector<std::pair<std::string, std::set<std::string>>> posed;
  std::optional<gluing::BehaviorTable> behavior;

  // Assembles the Kripke model from the declarations. strict rejects
  // valuations that are not already upward closed instead of auto-closing.
  forcing::KripkeModel model(bool strict = false) const;

  // The behaviour's scenario shape; requires settings and outcomes.
  gluing::Scenario scenario() const;
};

ScenarioData parse_scenario(std::istream& in);
ScenarioData load_scenario(const std::string& path);

// In-memory form of a model file. Sections: [graph], [spins], [helicity],
// [moves], [events], [interventions]. Edges are referenced by the names
// declared in [graph]; `clock` is a reserved event name declaring the clock
// edge. Intervention parties appear in file order.
struct ModelData {
  spindyn::SpinGraph graph;
  std::vector<std::string> edge_names;
  std::vector<int> twice_spin;  // per edge
  std::vector<int> helicity;    // per edge
  spindyn::MoveCatalogue moves;
  int cap = 100000;
  std::optional<int> clock_edge;
  std::vector<spindyn::EventPredicate> events;
  std::vector<spindyn::Intervention> interventions;  // events resolved
  std::vector<int> party_settings;                   // aligned with above
  std::vector<int> party_outcomes;

  // Shape-checked seed; admissibility is judged by build_state_space.
  spindyn::SpinState seed_state() const;

  // Sorted distinct write edges, for state-space closure.
  std::vector<int> closure_edges() const;

  // Operational scenario induced by the interventions.
  gluing::Scenario scenario() const;
};

ModelData parse_model(std::istream& in);
ModelData load_model(const std::string& path);

// [behavior] section lines for a table, exact rationals, zero entries
// omitted. save_behavior writes a complete scenario file that re-parses to
// the identical table.
std::string behavior_lines(const gluing::BehaviorTable& t);
void save_behavior(std::ostream& out, const gluing::BehaviorTable& t);

}  // namespace causord::io
