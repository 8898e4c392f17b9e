#include "causord/io.hpp"

#include <algorithm>
#include <climits>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "causord/errors.hpp"
#include "causord/rational.hpp"

namespace causord::io {

namespace {

struct Line {
  int no;
  std::string text;
};

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string t;
  while (is >> t) out.push_back(t);
  return out;
}

// Splits on `sep`, trimming each piece; empty pieces are kept.
std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

// name ':' rest, split at the first colon.
std::pair<std::string, std::string> split_colon(const std::string& s,
                                                int no) {
  size_t pos = s.find(':');
  if (pos == std::string::npos)
    throw ParseError("expected 'name: ...'", no);
  std::string name = trim(s.substr(0, pos));
  if (name.empty() || split_ws(name).size() != 1)
    throw ParseError("bad name before ':'", no);
  return {name, trim(s.substr(pos + 1))};
}

int parse_int(const std::string& t, int no) {
  try {
    size_t pos = 0;
    long v = std::stol(t, &pos);
    if (pos != t.size()) throw ParseError("trailing characters", no);
    if (v < -1000000000L || v > 1000000000L)
      throw ParseError("integer out of range", no);
    return static_cast<int>(v);
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception&) {
    throw ParseError("expected an integer, got '" + t + "'", no);
  }
}

std::pair<int, int> parse_range(const std::string& t, int no) {
  size_t pos = t.find("..");
  if (pos == std::string::npos)
    throw ParseError("expected a range 'lo..hi', got '" + t + "'", no);
  return {parse_int(t.substr(0, pos), no), parse_int(t.substr(pos + 2), no)};
}

Rational parse_prob(const std::string& t, int no) {
  try {
    return parse_rational(t);
  } catch (const Error& e) {
    throw ParseError(e.what(), no);
  }
}

using SectionMap = std::map<std::string, std::vector<Line>>;

SectionMap read_sections(std::istream& in,
                         const std::set<std::string>& allowed,
                         const std::string& filekind) {
  SectionMap out;
  std::string raw, cur;
  int no = 0;
  while (std::getline(in, raw)) {
    ++no;
    if (size_t h = raw.find('#'); h != std::string::npos) raw.resize(h);
    std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ParseError("malformed section header", no);
      cur = trim(line.substr(1, line.size() - 2));
      if (!allowed.count(cur))
        throw ParseError(
            "unknown section [" + cur + "] in a " + filekind + " file", no);
      if (out.count(cur))
        throw ParseError("duplicate section [" + cur + "]", no);
      out[cur];
      continue;
    }
    if (cur.empty())
      throw ParseError("content before the first section header", no);
    out[cur].push_back({no, line});
  }
  return out;
}

// `P1<P2` items, comma separated; "-" means the empty order.
std::vector<std::pair<std::string, std::string>> parse_order_spec(
    const std::string& spec, int no) {
  std::vector<std::pair<std::string, std::string>> pairs;
  if (spec == "-") return pairs;
  if (spec.empty()) throw ParseError("empty order (use '-')", no);
  for (const std::string& item : split_on(spec, ',')) {
    std::vector<std::string> sides = split_on(item, '<');
    if (sides.size() != 2 || sides[0].empty() || sides[1].empty() ||
        split_ws(sides[0]).size() != 1 || split_ws(sides[1]).size() != 1)
      throw ParseError("malformed precedence pair '" + item + "'", no);
    pairs.emplace_back(sides[0], sides[1]);
  }
  return pairs;
}

// `name @ c1 c2 ...` declaration lines.
std::vector<std::pair<std::string, std::set<std::string>>> parse_decls(
    const std::vector<Line>& lines) {
  std::vector<std::pair<std::string, std::set<std::string>>> out;
  std::set<std::string> seen;
  for (const Line& ln : lines) {
    std::vector<std::string> toks = split_ws(ln.text);
    if (toks.size() < 2 || toks[1] != "@")
      throw ParseError("expected 'name @ context...'", ln.no);
    if (!seen.insert(toks[0]).second)
      throw ParseError("duplicate declaration for '" + toks[0] + "'", ln.no);
    std::set<std::string> at(toks.begin() + 2, toks.end());
    out.emplace_back(toks[0], std::move(at));
  }
  return out;
}

}  // namespace

forcing::KripkeModel ScenarioData::model(bool strict) const {
  forcing::KripkeModel m(contexts::build_context_poset(contexts));
  forcing::Closure how =
      strict ? forcing::Closure::Strict : forcing::Closure::Auto;
  for (const auto& [key, at] : atoms) m.declare_atom(key, at, how);
  for (const auto& [key, at] : posed) m.declare_posed(key, at, how);
  return m;
}

gluing::Scenario ScenarioData::scenario() const {
  if (settings.empty() || outcomes.empty())
    throw SemanticError("scenario declares no settings/outcomes");
  return gluing::Scenario::make(parties, settings, outcomes);
}

ScenarioData parse_scenario(std::istream& in) {
  static const std::set<std::string> allowed = {"scenario", "contexts",
                                                "atoms", "posed", "behavior"};
  SectionMap secs = read_sections(in, allowed, "scenario");
  ScenarioData d;

  if (!secs.count("scenario"))
    throw ParseError("missing [scenario] section");
  int shape_line = 0;
  for (const Line& ln : secs["scenario"]) {
    std::vector<std::string> toks = split_ws(ln.text);
    const std::string& key = toks[0];
    if (key == "parties") {
      if (!d.parties.empty())
        throw ParseError("duplicate parties line", ln.no);
      d.parties.assign(toks.begin() + 1, toks.end());
      if (d.parties.empty()) throw ParseError("no parties listed", ln.no);
    } else if (key == "settings" || key == "outcomes") {
      std::vector<int>& dst = key == "settings" ? d.settings : d.outcomes;
      if (!dst.empty())
        throw ParseError("duplicate " + key + " line", ln.no);
      for (size_t i = 1; i < toks.size(); ++i)
        dst.push_back(parse_int(toks[i], ln.no));
      if (dst.empty()) throw ParseError("no " + key + " listed", ln.no);
      shape_line = ln.no;
    } else {
      throw ParseError("unknown [scenario] entry '" + key + "'", ln.no);
    }
  }
  if (d.parties.empty()) throw ParseError("parties not declared");
  if (d.settings.empty() != d.outcomes.empty())
    throw ParseError("settings and outcomes must be declared together",
                     shape_line);
  if (!d.settings.empty() && (d.settings.size() != d.parties.size() ||
                              d.outcomes.size() != d.parties.size()))
    throw ParseError("settings/outcomes count must match the party count",
                     shape_line);

  if (secs.count("contexts")) {
    for (const Line& ln : secs["contexts"]) {
      auto [name, spec] = split_colon(ln.text, ln.no);
      contexts::CausalOrder order = contexts::CausalOrder::make_named(
          d.parties, parse_order_spec(spec, ln.no));
      d.contexts.push_back({name, std::move(order)});
    }
  }

  std::set<std::string> ctx_names;
  for (const contexts::OrderContext& c : d.contexts) ctx_names.insert(c.name);
  auto check_contexts = [&](const std::set<std::string>& at,
                            const std::string& where) {
    for (const std::string& c : at)
      if (!ctx_names.count(c))
        throw UnknownContextError("unknown context '" + c + "' in [" +
                                  where + "]");
  };

  if (secs.count("atoms")) {
    d.atoms = parse_decls(secs["atoms"]);
    for (const auto& [key, at] : d.atoms) check_contexts(at, "atoms");
  }
  if (secs.count("posed")) {
    d.posed = parse_decls(secs["posed"]);
    std::set<std::string> atom_names;
    for (const auto& [key, at] : d.atoms) atom_names.insert(key);
    for (const auto& [key, at] : d.posed) {
      check_contexts(at, "posed");
      if (key.find('<') != std::string::npos) {
        for (auto& [a, b] : parse_order_spec(key, 0)) {
          auto in = [&](const std::string& p) {
            return std::count(d.parties.begin(), d.parties.end(), p) != 0;
          };
          if (!in(a) || !in(b))
            throw UnknownPartyError("unknown party in posed key '" + key +
                                    "'");
        }
      } else if (!atom_names.count(key)) {
        throw UnknownAtomError("posed key '" + key +
                               "' is neither a declared atom nor a "
                               "precedence");
      }
    }
  }

  if (secs.count("behavior")) {
    gluing::Scenario sc = d.scenario();
    gluing::BehaviorTable table = gluing::zero_behavior(sc);
    std::set<long> seen;
    for (const Line& ln : secs["behavior"]) {
      std::vector<std::string> parts = split_on(ln.text, ';');
      if (parts.size() != 3)
        throw ParseError("expected 'x... ; a... ; p'", ln.no);
      std::vector<std::string> xs = split_ws(parts[0]);
      std::vector<std::string> as = split_ws(parts[1]);
      if (xs.size() != d.parties.size() || as.size() != d.parties.size())
        throw ParseError("tuple arity must match the party count", ln.no);
      std::vector<int> x(xs.size()), a(as.size());
      for (size_t i = 0; i < xs.size(); ++i) {
        x[i] = parse_int(xs[i], ln.no);
        a[i] = parse_int(as[i], ln.no);
        if (x[i] < 0 || x[i] >= d.settings[i])
          throw SemanticError("setting out of range at line " +
                              std::to_string(ln.no));
        if (a[i] < 0 || a[i] >= d.outcomes[i])
          throw SemanticError("outcome out of range at line " +
                              std::to_string(ln.no));
      }
      long entry = sc.entry_index(sc.setting_index(x), sc.outcome_index(a));
      if (!seen.insert(entry).second)
        throw ParseError("duplicate behaviour entry", ln.no);
      table.p[entry] = parse_prob(parts[2], ln.no);
    }
    table.validate();
    d.behavior = std::move(table);
  }
  return d;
}

ScenarioData load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file '" + path + "'");
  return parse_scenario(in);
}

spindyn::SpinState ModelData::seed_state() const {
  return spindyn::make_state(graph, twice_spin, helicity);
}

std::vector<int> ModelData::closure_edges() const {
  std::set<int> s;
  for (const spindyn::Intervention& iv : interventions)
    if (iv.write_edge) s.insert(*iv.write_edge);
  return {s.begin(), s.end()};
}

gluing::Scenario ModelData::scenario() const {
  std::vector<std::string> names;
  for (const spindyn::Intervention& iv : interventions)
    names.push_back(iv.party);
  return gluing::Scenario::make(names, party_settings, party_outcomes);
}

ModelData parse_model(std::istream& in) {
  static const std::set<std::string> allowed = {
      "graph", "spins", "helicity", "moves", "events", "interventions"};
  SectionMap secs = read_sections(in, allowed, "model");
  ModelData d;

  if (!secs.count("graph")) throw ParseError("missing [graph] section");
  int nv = -1;
  std::vector<std::pair<int, int>> edges;
  std::map<std::string, int> eidx;
  for (const Line& ln : secs["graph"]) {
    std::vector<std::string> toks = split_ws(ln.text);
    if (toks[0] == "vertices") {
      if (nv >= 0) throw ParseError("duplicate vertices line", ln.no);
      if (toks.size() != 2) throw ParseError("expected 'vertices N'", ln.no);
      nv = parse_int(toks[1], ln.no);
      continue;
    }
    if (nv < 0)
      throw ParseError("vertices must be declared before edges", ln.no);
    auto [name, rest] = split_colon(ln.text, ln.no);
    std::vector<std::string> uv = split_ws(rest);
    if (uv.size() != 2) throw ParseError("expected 'name: u v'", ln.no);
    if (eidx.count(name))
      throw ParseError("duplicate edge name '" + name + "'", ln.no);
    int u = parse_int(uv[0], ln.no), v = parse_int(uv[1], ln.no);
    if (u < 0 || u >= nv || v < 0 || v >= nv)
      throw SemanticError("edge endpoint out of range at line " +
                          std::to_string(ln.no));
    eidx[name] = static_cast<int>(edges.size());
    d.edge_names.push_back(name);
    edges.emplace_back(u, v);
  }
  d.graph = spindyn::SpinGraph::make(nv, edges);

  auto edge_of = [&](const std::string& name, int no) {
    auto it = eidx.find(name);
    if (it == eidx.end())
      throw SemanticError("unknown edge '" + name + "' at line " +
                          std::to_string(no));
    return it->second;
  };

  auto fill_edge_values = [&](const char* section, auto parse_value) {
    std::vector<int> vals(d.edge_names.size(), INT_MIN);
    if (!secs.count(section))
      throw ParseError(std::string("missing [") + section + "] section");
    for (const Line& ln : secs[section]) {
      auto [name, rest] = split_colon(ln.text, ln.no);
      int e = edge_of(name, ln.no);
      if (vals[e] != INT_MIN)
        throw ParseError("duplicate value for edge '" + name + "'", ln.no);
      vals[e] = parse_value(rest, ln.no);
    }
    for (size_t e = 0; e < vals.size(); ++e)
      if (vals[e] == INT_MIN)
        throw SemanticError(std::string("[") + section +
                            "] missing edge '" + d.edge_names[e] + "'");
    return vals;
  };
  d.twice_spin = fill_edge_values("spins", [](const std::string& t, int no) {
    int s = parse_int(t, no);
    if (s < 0)
      throw SemanticError("negative spin at line " + std::to_string(no));
    return s;
  });
  d.helicity = fill_edge_values("helicity", [](const std::string& t,
                                               int no) {
    if (t == "+") return +1;
    if (t == "-") return -1;
    throw ParseError("helicity must be '+' or '-'", no);
    return 0;
  });

  if (secs.count("moves")) {
    std::set<std::string> seen;
    auto once = [&](const std::string& key, int no) {
      if (!seen.insert(key).second)
        throw ParseError("duplicate " + key + " line", no);
    };
    auto kind_flag = [&](const std::string& k, int no) -> bool& {
      if (k == "SpinStep") return d.moves.spin_step;
      if (k == "HelicityFlip") return d.moves.helicity_flip;
      if (k == "Recouple") return d.moves.recouple;
      throw ParseError("unknown move kind '" + k + "'", no);
    };
    auto kind_edges = [&](const std::string& k,
                          int no) -> std::vector<int>& {
      if (k == "SpinStep") return d.moves.spin_step_edges;
      if (k == "HelicityFlip") return d.moves.helicity_flip_edges;
      if (k == "Recouple") return d.moves.recouple_edges;
      throw ParseError("unknown move kind '" + k + "'", no);
    };
    for (const Line& ln : secs["moves"]) {
      std::vector<std::string> toks = split_ws(ln.text);
      const std::string& key = toks[0];
      if (key == "kinds") {
        once(key, ln.no);
        for (size_t i = 1; i < toks.size(); ++i)
          kind_flag(toks[i], ln.no) = true;
      } else if (key == "edges") {
        auto [left, rest] = split_colon(ln.text.substr(5), ln.no);
        once("edges " + left, ln.no);
        std::vector<int>& dst = kind_edges(left, ln.no);
        for (const std::string& e : split_ws(rest))
          dst.push_back(edge_of(e, ln.no));
        if (dst.empty())
          throw ParseError("empty edge restriction for " + left, ln.no);
      } else if (key == "window") {
        once(key, ln.no);
        if (toks.size() != 3) throw ParseError("expected 'window lo hi'",
                                               ln.no);
        d.moves.window_lo = parse_int(toks[1], ln.no);
        d.moves.window_hi = parse_int(toks[2], ln.no);
      } else if (key == "r0" || key == "beta" || key == "gamma") {
        once(key, ln.no);
        if (toks.size() != 2)
          throw ParseError("expected '" + key + " value'", ln.no);
        Rational q = parse_prob(toks[1], ln.no);
        if (key == "r0") d.moves.r0 = q;
        if (key == "beta") d.moves.beta = q;
        if (key == "gamma") d.moves.gamma = q;
      } else if (key == "cap") {
        once(key, ln.no);
        if (toks.size() != 2) throw ParseError("expected 'cap N'", ln.no);
        d.cap = parse_int(toks[1], ln.no);
      } else {
        throw ParseError("unknown [moves] entry '" + key + "'", ln.no);
      }
    }
  }
  d.moves.validate(d.graph);

  if (secs.count("events")) {
    // The clock declaration may appear anywhere in the section.
    for (const Line& ln : secs["events"]) {
      auto [name, spec] = split_colon(ln.text, ln.no);
      if (name != "clock") continue;
      if (d.clock_edge) throw ParseError("duplicate clock line", ln.no);
      std::vector<std::string> toks = split_ws(spec);
      if (toks.size() != 1) throw ParseError("expected 'clock: edge'",
                                             ln.no);
      d.clock_edge = edge_of(toks[0], ln.no);
    }
    std::set<std::string> names;
    for (const Line& ln : secs["events"]) {
      auto [name, spec] = split_colon(ln.text, ln.no);
      if (name == "clock") continue;
      if (!names.insert(name).second)
        throw ParseError("duplicate event '" + name + "'", ln.no);
      spindyn::EventPredicate ev;
      ev.name = name;
      std::vector<std::string> clauses = split_on(spec, '&');
      for (const std::string& cl : clauses) {
        std::vector<std::string> t = split_ws(cl);
        if (t.size() == 5 && t[0] == "edge" && t[2] == "spin" &&
            t[3] == "in") {
          auto [lo, hi] = parse_range(t[4], ln.no);
          ev.spin_tests.push_back({edge_of(t[1], ln.no), lo, hi});
        } else if (t.size() == 4 && t[0] == "helicity" && t[2] == "=") {
          int sign = t[3] == "+" ? +1 : t[3] == "-" ? -1 : 0;
          if (sign == 0) throw ParseError("helicity must be '+' or '-'",
                                          ln.no);
          ev.helicity_tests.push_back({edge_of(t[1], ln.no), sign});
        } else if (t.size() == 3 && t[0] == "clock" && t[1] == "in") {
          if (!d.clock_edge)
            throw SemanticError(
                "clock clause without a clock declaration at line " +
                std::to_string(ln.no));
          if (ev.clock_edge)
            throw ParseError("duplicate clock clause", ln.no);
          ev.clock_edge = *d.clock_edge;
          ev.clock_window = parse_range(t[2], ln.no);
        } else {
          throw ParseError("malformed event clause '" + cl + "'", ln.no);
        }
      }
      if (ev.spin_tests.empty() && ev.helicity_tests.empty() &&
          !ev.clock_edge)
        throw ParseError("event '" + name + "' has no clauses", ln.no);
      ev.validate(d.graph);
      d.events.push_back(std::move(ev));
    }
  }

  if (secs.count("interventions")) {
    std::map<std::string, int> party_slot;
    for (const Line& ln : secs["interventions"]) {
      std::vector<std::string> toks = split_ws(ln.text);
      if (toks[0] == "party") {
        auto [pname, rest] = split_colon(trim(ln.text.substr(5)), ln.no);
        if (party_slot.count(pname))
          throw ParseError("duplicate party '" + pname + "'", ln.no);
        spindyn::Intervention iv;
        iv.party = pname;
        int nset = -1, nout = -1;
        for (const std::string& cl : split_on(rest, ',')) {
          std::vector<std::string> t = split_ws(cl);
          if (t.size() != 2)
            throw ParseError("malformed clause '" + cl + "'", ln.no);
          if (t[0] == "settings") {
            nset = parse_int(t[1], ln.no);
          } else if (t[0] == "outcomes") {
            nout = parse_int(t[1], ln.no);
          } else if (t[0] == "event") {
            for (const spindyn::EventPredicate& ev : d.events)
              if (ev.name == t[1]) iv.event = ev;
            if (iv.event.name != t[1])
              throw SemanticError("unknown event '" + t[1] + "' at line " +
                                  std::to_string(ln.no));
          } else if (t[0] == "read") {
            iv.read_edge = edge_of(t[1], ln.no);
          } else if (t[0] == "write") {
            iv.write_edge = edge_of(t[1], ln.no);
          } else {
            throw ParseError("unknown clause '" + t[0] + "'", ln.no);
          }
        }
        if (nset < 1 || nout < 1 || iv.event.name.empty())
          throw ParseError(
              "party needs settings, outcomes and an event", ln.no);
        party_slot[pname] = static_cast<int>(d.interventions.size());
        d.interventions.push_back(std::move(iv));
        d.party_settings.push_back(nset);
        d.party_outcomes.push_back(nout);
      } else if (toks[0] == "kernel") {
        size_t pos = ln.text.find(':');
        if (pos == std::string::npos)
          throw ParseError("expected 'kernel P s f : q...'", ln.no);
        std::vector<std::string> left =
            split_ws(trim(ln.text.substr(6, pos - 6)));
        if (left.size() != 3)
          throw ParseError("expected 'kernel P s f : q...'", ln.no);
        auto it = party_slot.find(left[0]);
        if (it == party_slot.end())
          throw ParseError(
              "kernel for undeclared party '" + left[0] + "'", ln.no);
        int s = left[1] == "*" ? -1 : parse_int(left[1], ln.no);
        int f = left[2] == "*" ? -1 : parse_int(left[2], ln.no);
        std::vector<Rational> row;
        for (const std::string& q : split_ws(trim(ln.text.substr(pos + 1))))
          row.push_back(parse_prob(q, ln.no));
        spindyn::Intervention& iv = d.interventions[it->second];
        if (iv.kernel.count({s, f}))
          throw ParseError("duplicate kernel row", ln.no);
        iv.kernel[{s, f}] = std::move(row);
      } else {
        throw ParseError("unknown [interventions] entry '" + toks[0] + "'",
                         ln.no);
      }
    }
    for (size_t k = 0; k < d.interventions.size(); ++k)
      d.interventions[k].validate(d.graph, d.party_settings[k],
                                  d.party_outcomes[k]);
  }
  return d;
}

ModelData load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file '" + path + "'");
  return parse_model(in);
}

std::string behavior_lines(const gluing::BehaviorTable& t) {
  const gluing::Scenario& sc = t.scenario;
  std::ostringstream os;
  for (long s = 0; s < sc.settings_count(); ++s) {
    std::vector<int> x = sc.setting_tuple(s);
    for (long o = 0; o < sc.outcomes_count(); ++o) {
      const Rational& q = t.at(s, o);
      if (q == 0) continue;
      std::vector<int> a = sc.outcome_tuple(o);
      for (size_t i = 0; i < x.size(); ++i) os << x[i] << ' ';
      os << ';';
      for (size_t i = 0; i < a.size(); ++i) os << ' ' << a[i];
      os << " ; " << rational_str(q) << '\n';
    }
  }
  return os.str();
}

void save_behavior(std::ostream& out, const gluing::BehaviorTable& t) {
  const gluing::Scenario& sc = t.scenario;
  out << "[scenario]\nparties";
  for (const std::string& p : sc.parties()) out << ' ' << p;
  out << "\nsettings";
  for (int v : sc.settings()) out << ' ' << v;
  out << "\noutcomes";
  for (int v : sc.outcomes()) out << ' ' << v;
  out << "\n\n[behavior]\n" << behavior_lines(t);
}

}  // namespace causord::io
