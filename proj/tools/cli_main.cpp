#include <CLI11.hpp>

#include <array>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "causord/classifier.hpp"
#include "causord/errors.hpp"
#include "causord/gluing.hpp"
#include "causord/io.hpp"
#include "causord/spindyn.hpp"

namespace {

using namespace causord;

constexpr int kExitNotGluable = 10;

std::string join(const std::vector<std::string>& xs) {
  if (xs.empty()) return "-";
  std::string out;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ' ';
    out += xs[i];
  }
  return out;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (!isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

void print_aligned(std::ostream& os,
                   const std::vector<std::array<std::string, 5>>& rows) {
  std::array<size_t, 5> w{};
  for (const auto& r : rows)
    for (int c = 0; c < 5; ++c) w[c] = std::max(w[c], r[c].size());
  for (const auto& r : rows) {
    for (int c = 0; c < 5; ++c) {
      os << r[c];
      if (c < 4) os << std::string(w[c] - r[c].size() + 2, ' ');
    }
    os << '\n';
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write to '" + path + "'");
  return f;
}

std::string tuple_str(const std::vector<int>& t) {
  std::string s;
  for (size_t i = 0; i < t.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(t[i]);
  }
  return s;
}

// ---------------------------------------------------------------- contexts

int run_contexts(const std::string& path) {
  io::ScenarioData data = io::load_scenario(path);
  std::vector<std::string> warnings;
  contexts::OrderContextPoset poset =
      contexts::build_context_poset(data.contexts, &warnings);

  std::cout << "contexts (" << poset.size() << "):\n";
  for (const contexts::OrderContext& c : poset.contexts())
    std::cout << "  " << c.name << ": " << c.order.describe() << '\n';

  std::cout << "hasse covers:\n";
  bool any = false;
  for (int i = 0; i < poset.size(); ++i)
    for (int j = 0; j < poset.size(); ++j) {
      if (i == j || !poset.leq(i, j)) continue;
      bool cover = true;
      for (int k = 0; k < poset.size() && cover; ++k)
        if (k != i && k != j && poset.leq(i, k) && poset.leq(k, j))
          cover = false;
      if (cover) {
        std::cout << "  " << poset.at(i).name << " < " << poset.at(j).name
                  << '\n';
        any = true;
      }
    }
  if (!any) std::cout << "  (none)\n";

  std::cout << "maximal:";
  for (int i : poset.maximal_indices()) std::cout << ' ' << poset.at(i).name;
  std::cout << '\n';

  for (const std::string& w : warnings)
    std::cerr << "warning: " << w << '\n';
  return 0;
}

// ---------------------------------------------------------------- classify

int run_classify(const std::string& path, const std::string& family_csv,
                 const std::vector<std::string>& prop_texts, bool strict,
                 bool bind_sep, const std::string& csv_path) {
  io::ScenarioData data = io::load_scenario(path);
  forcing::KripkeModel model = data.model(strict);

  if (bind_sep) {
    if (!data.behavior)
      throw SemanticError("--bind-sep needs a [behavior] section");
    gluing::GlueVerdict v = gluing::check_global_section(
        *data.behavior, contexts::enumerate_total_orders(data.parties));
    std::set<std::string> at;
    if (v.gluable)
      for (const contexts::OrderContext& c : data.contexts)
        at.insert(c.name);
    model.declare_atom("chi", at);
  }

  std::vector<std::string> fam_list = split_csv(family_csv);
  if (fam_list.empty()) throw EmptyFamilyError("empty context family");
  std::set<std::string> family(fam_list.begin(), fam_list.end());

  std::vector<forcing::PropPtr> props;
  for (const std::string& t : prop_texts) props.push_back(
      forcing::parse_prop(t));

  std::vector<classifier::ClassifyRow> rows =
      classifier::classify_report(model, family, props);

  std::cout << "family: " << join(fam_list) << '\n';
  std::vector<std::array<std::string, 5>> cells;
  cells.push_back({"prop", "value", "support", "refute", "indet"});
  for (const classifier::ClassifyRow& r : rows)
    cells.push_back({forcing::prop_str(r.prop), r.value.str(),
                     join(r.support), join(r.refute), join(r.indet)});
  print_aligned(std::cout, cells);

  if (!csv_path.empty()) {
    std::ofstream f = open_out(csv_path);
    f << "prop,value,support,refute,indet\n";
    for (const classifier::ClassifyRow& r : rows)
      f << forcing::prop_str(r.prop) << ',' << r.value.str() << ','
        << join(r.support) << ',' << join(r.refute) << ',' << join(r.indet)
        << '\n';
  }

  for (const std::string& w : model.warnings())
    std::cerr << "warning: " << w << '\n';
  return 0;
}

// -------------------------------------------------------------------- glue

const gluing::BehaviorTable& require_behavior(const io::ScenarioData& data) {
  if (!data.behavior)
    throw SemanticError("scenario has no [behavior] section");
  return *data.behavior;
}

void print_scenario_line(const gluing::Scenario& sc) {
  std::cout << "scenario: parties " << join(sc.parties()) << " | settings "
            << tuple_str(sc.settings()) << " | outcomes "
            << tuple_str(sc.outcomes()) << '\n';
}

// Shared by `glue` and `simulate --then-glue`.
int report_glue(const gluing::BehaviorTable& table, bool show_witness,
                const std::string& csv_path) {
  const gluing::Scenario& sc = table.scenario;
  gluing::GlueVerdict v = gluing::check_global_section(
      table, contexts::enumerate_total_orders(sc.parties()));

  std::cout << "verdict: " << (v.gluable ? "GLUABLE" : "NOT GLUABLE")
            << '\n';
  if (v.certificate) {
    std::cout << "decomposition:\n";
    for (const gluing::CertComponent& c : *v.certificate)
      std::cout << "  weight " << c.order.describe() << ": "
                << rational_with_float(c.weight) << '\n';
  }
  if (v.witness) {
    std::cout << "witness value: " << rational_with_float(v.witness->value)
              << "\nwitness bound: " << rational_with_float(v.witness->bound)
              << '\n';
    if (show_witness) {
      std::cout << "witness coefficients (settings ; outcomes ; w):\n";
      for (long s = 0; s < sc.settings_count(); ++s)
        for (long o = 0; o < sc.outcomes_count(); ++o) {
          const Rational& w = v.witness->w[sc.entry_index(s, o)];
          if (w == 0) continue;
          std::cout << "  " << tuple_str(sc.setting_tuple(s)) << " ; "
                    << tuple_str(sc.outcome_tuple(o)) << " ; "
                    << rational_str(w) << '\n';
        }
    }
  }
  std::cout << "causal fraction: " << rational_with_float(v.causalFraction)
            << '\n'
            << "l1 distance: " << rational_with_float(v.l1Distance) << '\n';

  if (!csv_path.empty()) {
    std::ofstream f = open_out(csv_path);
    f << "key,value\n";
    f << "verdict," << (v.gluable ? "GLUABLE" : "NOT GLUABLE") << '\n';
    if (v.certificate)
      for (const gluing::CertComponent& c : *v.certificate)
        f << "weight " << c.order.describe() << ','
          << rational_str(c.weight) << '\n';
    if (v.witness) {
      f << "witness_value," << rational_str(v.witness->value) << '\n';
      f << "witness_bound," << rational_str(v.witness->bound) << '\n';
      for (long s = 0; s < sc.settings_count(); ++s)
        for (long o = 0; o < sc.outcomes_count(); ++o) {
          const Rational& w = v.witness->w[sc.entry_index(s, o)];
          if (w == 0) continue;
          f << "w " << tuple_str(sc.setting_tuple(s)) << " ; "
            << tuple_str(sc.outcome_tuple(o)) << ','
            << rational_str(w) << '\n';
        }
    }
    f << "causal_fraction," << rational_str(v.causalFraction) << '\n';
    f << "l1_distance," << rational_str(v.l1Distance) << '\n';
  }
  return v.gluable ? 0 : kExitNotGluable;
}

int run_glue(const std::string& path, bool show_witness,
             const std::string& csv_path) {
  io::ScenarioData data = io::load_scenario(path);
  const gluing::BehaviorTable& table = require_behavior(data);
  print_scenario_line(table.scenario);
  return report_glue(table, show_witness, csv_path);
}

int run_fraction(const std::string& path, const std::string& measure,
                 const std::string& csv_path) {
  io::ScenarioData data = io::load_scenario(path);
  const gluing::BehaviorTable& table = require_behavior(data);
  std::vector<contexts::CausalOrder> orders =
      contexts::enumerate_total_orders(table.scenario.parties());
  print_scenario_line(table.scenario);

  std::optional<Rational> cf, l1;
  if (measure == "cf" || measure == "both")
    cf = gluing::causal_fraction(table, orders);
  if (measure == "l1" || measure == "both")
    l1 = gluing::l1_distance_to_gluable(table, orders);
  if (cf)
    std::cout << "causal fraction: " << rational_with_float(*cf) << '\n';
  if (l1) std::cout << "l1 distance: " << rational_with_float(*l1) << '\n';

  if (!csv_path.empty()) {
    std::ofstream f = open_out(csv_path);
    f << "key,value\n";
    if (cf) f << "causal_fraction," << rational_str(*cf) << '\n';
    if (l1) f << "l1_distance," << rational_str(*l1) << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------- simulate

int run_simulate(const std::string& path, long long samples, uint64_t seed,
                 std::optional<double> horizon_opt, int bins,
                 const std::string& csv_path, const std::string& behav_path,
                 bool then_glue) {
  io::ModelData d = io::load_model(path);
  if (d.interventions.empty())
    throw SemanticError("model declares no interventions");
  if (samples < 1) throw SemanticError("samples must be positive");
  if (bins < 1) throw SemanticError("bins must be positive");

  spindyn::Generator gen = spindyn::build_state_space(
      d.graph, d.seed_state(), d.moves, d.cap, d.closure_edges());
  double horizon =
      horizon_opt ? *horizon_opt : 50.0 / to_double(d.moves.r0);
  if (horizon <= 0) throw SemanticError("horizon must be positive");

  gluing::Scenario sc = d.scenario();
  std::cout << "parties: " << join(sc.parties()) << '\n'
            << "states: " << gen.state_count() << '\n'
            << "samples: " << samples << '\n'
            << "seed: " << seed << '\n'
            << "horizon: " << fixed6(horizon) << '\n';
  if (gen.truncated)
    std::cerr << "warning: state space truncated at cap " << d.cap << '\n';

  const size_t np = d.interventions.size();
  std::optional<spindyn::OrderStats> os;
  if (np == 2) {
    os = spindyn::order_statistics(
        gen, d.interventions[0].event, d.interventions[1].event, 0, samples,
        horizon, spindyn::substream(seed, 0, 1));
    std::cout << "order statistics (" << d.interventions[0].event.name
              << " vs " << d.interventions[1].event.name << "):\n"
              << "  P(" << d.interventions[0].event.name
              << " first): " << rational_with_float(frac(os->count_a_first,
                                                         os->n))
              << " ci " << fixed6(os->ci_a) << '\n'
              << "  P(" << d.interventions[1].event.name
              << " first): " << rational_with_float(frac(os->count_b_first,
                                                         os->n))
              << " ci " << fixed6(os->ci_b) << '\n'
              << "  P(tie or none): "
              << rational_with_float(frac(os->count_tie_or_none, os->n))
              << " ci " << fixed6(os->ci_tie) << '\n';
  }

  std::vector<spindyn::EnvelopeHistogram> envs;
  for (size_t k = 0; k < np; ++k) {
    envs.push_back(spindyn::envelope_histogram(
        gen, d.interventions[k].event, 0, samples, horizon, bins,
        spindyn::substream(seed, 0, 2 + static_cast<int>(k))));
    const spindyn::EnvelopeHistogram& h = envs.back();
    std::cout << "envelope " << d.interventions[k].event.name
              << ": hit fraction "
              << rational_with_float(frac(h.hits, h.samples))
              << ", bin width " << fixed6(h.bin_width) << '\n'
              << " ";
    for (double m : h.mass) std::cout << ' ' << fixed6(m);
    std::cout << '\n';
  }
  if (np == 2)
    std::cout << "envelope overlap: "
              << fixed6(spindyn::envelope_overlap(envs[0], envs[1])) << '\n';

  spindyn::InducedResult ind = spindyn::induced_behavior(
      gen, d.interventions, sc, 0, samples, horizon, seed);
  const gluing::Scenario& ext = ind.table.scenario;
  std::cout << "induced behaviour (no-hit outcome appended; outcomes "
            << tuple_str(ext.outcomes()) << "):\n";
  for (long s = 0; s < ext.settings_count(); ++s)
    for (long o = 0; o < ext.outcomes_count(); ++o) {
      const Rational& q = ind.table.at(s, o);
      if (q == 0) continue;
      std::cout << "  " << tuple_str(ext.setting_tuple(s)) << " ; "
                << tuple_str(ext.outcome_tuple(o)) << " ; "
                << rational_with_float(q) << '\n';
    }
  std::cout << "no-hit fraction: " << fixed6(ind.no_hit_fraction) << '\n';
  if (ind.no_hit_fraction > 0.001)
    std::cerr << "warning: no-hit fraction above 0.1%\n";

  if (!behav_path.empty()) {
    std::ofstream f = open_out(behav_path);
    io::save_behavior(f, ind.table);
  }

  if (!csv_path.empty()) {
    std::ofstream f = open_out(csv_path);
    f << "section,name,index,value\n";
    if (os) {
      f << "orderstat,p_a_first,," << fixed6(os->p_a_first) << '\n';
      f << "orderstat,ci_a,," << fixed6(os->ci_a) << '\n';
      f << "orderstat,p_b_first,," << fixed6(os->p_b_first) << '\n';
      f << "orderstat,ci_b,," << fixed6(os->ci_b) << '\n';
      f << "orderstat,p_tie_or_none,," << fixed6(os->p_tie_or_none) << '\n';
      f << "orderstat,ci_tie,," << fixed6(os->ci_tie) << '\n';
    }
    for (size_t k = 0; k < envs.size(); ++k)
      for (size_t b = 0; b < envs[k].mass.size(); ++b)
        f << "envelope," << d.interventions[k].event.name << ',' << b << ','
          << fixed6(envs[k].mass[b]) << '\n';
    if (np == 2)
      f << "overlap,,,"
        << fixed6(spindyn::envelope_overlap(envs[0], envs[1])) << '\n';
    for (long s = 0; s < ext.settings_count(); ++s)
      for (long o = 0; o < ext.outcomes_count(); ++o) {
        const Rational& q = ind.table.at(s, o);
        if (q == 0) continue;
        f << "behavior," << tuple_str(ext.setting_tuple(s)) << " ; "
          << tuple_str(ext.outcome_tuple(o)) << ",," << rational_str(q)
          << '\n';
      }
    f << "nohit,,," << fixed6(ind.no_hit_fraction) << '\n';
  }

  if (then_glue) {
    std::cout << "glue check on the induced behaviour:\n";
    return report_glue(ind.table, false, "");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "causord: definite causal contexts, forcing, gluing and spin-network "
      "dynamics"};
  app.require_subcommand(1);

  std::string scenario_path, model_path, family_csv, csv_path, behav_path;
  std::string measure = "both";
  std::vector<std::string> props;
  bool strict = false, bind_sep = false, show_witness = false;
  bool then_glue = false;
  long long samples = 100000;
  uint64_t seed = 0;
  int bins = 20;
  std::optional<double> horizon;
  double horizon_val = 0;

  CLI::App* c_contexts =
      app.add_subcommand("contexts", "print the context poset");
  c_contexts->add_option("--scenario", scenario_path, "scenario file")
      ->required();

  CLI::App* c_classify =
      app.add_subcommand("classify", "seven-valued contextual classifier");
  c_classify->add_option("--scenario", scenario_path, "scenario file")
      ->required();
  c_classify->add_option("--family", family_csv, "contexts, comma separated")
      ->required();
  c_classify->add_option("--prop", props, "proposition (repeatable)")
      ->required();
  c_classify->add_flag("--strict", strict,
                       "reject non-up-closed declarations");
  c_classify->add_flag("--bind-sep", bind_sep,
                       "bind atom 'chi' to the gluing verdict");
  c_classify->add_option("--emit-csv", csv_path, "write rows as CSV");

  CLI::App* c_glue =
      app.add_subcommand("glue", "decide definite-order gluability");
  c_glue->add_option("--scenario", scenario_path, "scenario file")
      ->required();
  c_glue->add_flag("--witness", show_witness, "print witness coefficients");
  c_glue->add_option("--emit-csv", csv_path, "write the verdict as CSV");

  CLI::App* c_fraction =
      app.add_subcommand("fraction", "non-gluability measures");
  c_fraction->add_option("--scenario", scenario_path, "scenario file")
      ->required();
  c_fraction->add_option("--measure", measure, "cf, l1 or both")
      ->check(CLI::IsMember({"cf", "l1", "both"}));
  c_fraction->add_option("--emit-csv", csv_path, "write measures as CSV");

  CLI::App* c_simulate =
      app.add_subcommand("simulate", "run the spin-network dynamics");
  c_simulate->add_option("--model", model_path, "model file")->required();
  c_simulate->add_option("--samples", samples, "Monte-Carlo runs per batch");
  CLI::Option* seed_opt =
      c_simulate->add_option("--seed", seed, "master RNG seed")->required();
  CLI::Option* hor_opt =
      c_simulate->add_option("--horizon", horizon_val, "time horizon");
  c_simulate->add_option("--bins", bins, "envelope histogram bins");
  c_simulate->add_option("--emit-csv", csv_path, "write estimates as CSV");
  c_simulate->add_option("--emit-behavior", behav_path,
                         "write the induced behaviour as a scenario file");
  c_simulate->add_flag("--then-glue", then_glue,
                       "run the gluing decision on the induced behaviour");
  (void)seed_opt;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*hor_opt) horizon = horizon_val;
    if (c_contexts->parsed()) return run_contexts(scenario_path);
    if (c_classify->parsed())
      return run_classify(scenario_path, family_csv, props, strict,
                          bind_sep, csv_path);
    if (c_glue->parsed())
      return run_glue(scenario_path, show_witness, csv_path);
    if (c_fraction->parsed())
      return run_fraction(scenario_path, measure, csv_path);
    if (c_simulate->parsed())
      return run_simulate(model_path, samples, seed, horizon, bins,
                          csv_path, behav_path, then_glue);
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const InadmissibleSeedError& e) {
    std::cerr << "inadmissible seed: " << e.what() << '\n';
    return 4;
  } catch (const SemanticError& e) {
    std::cerr << "semantic error: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
