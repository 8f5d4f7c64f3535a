#include "rail/petri.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace rail::petri {

PlaceIndex PetriNet::place_index(const std::string& nm) const {
  for (int i = 0; i < place_count(); ++i)
    if (places[i].name == nm) return i;
  throw Error(ErrorCode::ParseError, "unknown place " + nm);
}

TransitionIndex PetriNet::transition_index(const std::string& nm) const {
  for (int i = 0; i < transition_count(); ++i)
    if (transitions[i].name == nm) return i;
  throw Error(ErrorCode::ParseError, "unknown transition " + nm);
}

const ColourRule* PetriNet::rule_for_place(PlaceIndex p) const {
  for (const auto& r : colour_rules)
    if (r.place == p) return &r;
  return nullptr;
}

std::optional<PlaceIndex> PetriNet::emitter_of(const std::string& colour) const {
  for (const auto& r : colour_rules) {
    if (std::find(r.alternatives.begin(), r.alternatives.end(), colour) !=
        r.alternatives.end())
      return r.place;
  }
  return std::nullopt;
}

int PetriNet::input_weight(PlaceIndex p, TransitionIndex t) const {
  int w = 0;
  for (const auto& a : input_flows)
    if (a.place == p && a.transition == t) w += a.weight;
  return w;
}

int PetriNet::output_weight(PlaceIndex p, TransitionIndex t) const {
  int w = 0;
  for (const auto& a : output_flows)
    if (a.place == p && a.transition == t) w += a.weight;
  return w;
}

void PetriNet::validate() const {
  auto check_arc = [&](const Arc& a) {
    if (a.place < 0 || a.place >= place_count() || a.transition < 0 ||
        a.transition >= transition_count() || a.weight <= 0) {
      throw Error(ErrorCode::ParseError, name + ": arc references missing node");
    }
  };
  for (const auto& a : input_flows) check_arc(a);
  for (const auto& a : output_flows) check_arc(a);
  for (int t = 0; t < transition_count(); ++t) {
    bool is_colour = transitions[t].kind == TransitionKind::Colour;
    bool guarded = colour_guards.count(t) && !colour_guards.at(t).empty();
    if (is_colour != guarded) {
      throw Error(ErrorCode::ParseError,
                  name + ": " + transitions[t].name +
                      " guard/kind mismatch");
    }
  }
  for (const auto& r : colour_rules) {
    if (r.place < 0 || r.place >= place_count() || r.alternatives.empty())
      throw Error(ErrorCode::ParseError, name + ": bad colour rule");
    if (places[r.place].kind != PlaceKind::Function)
      throw Error(ErrorCode::ParseError,
                  name + ": colour rule on plain place " + places[r.place].name);
    if (r.alternatives.size() > 1 && r.decision_input.empty())
      throw Error(ErrorCode::ParseError,
                  name + ": rule at " + places[r.place].name +
                      " needs a decision input");
  }
}

std::string Marking::to_string() const {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < counts.size(); ++i) {
    if (i) os << ",";
    os << counts[i];
  }
  os << "]";
  if (!colours.empty()) {
    os << "{";
    bool first = true;
    for (const auto& c : colours) {
      if (!first) os << ",";
      first = false;
      os << c.colour << "@" << c.place;
    }
    os << "}";
  }
  return os.str();
}

std::string IncidenceMatrix::to_string(const PetriNet& net) const {
  std::ostringstream os;
  for (int r = 0; r < rows; ++r) {
    os << net.places[r].name << ":";
    for (int c = 0; c < cols; ++c) os << "\t" << entries[r][c];
    os << "\n";
  }
  return os.str();
}

IncidenceMatrix incidence_matrix(const PetriNet& net) {
  net.validate();
  IncidenceMatrix a;
  a.rows = net.place_count();
  a.cols = net.transition_count();
  a.entries.assign(a.rows, std::vector<int>(a.cols, 0));
  for (const auto& arc : net.output_flows)
    a.entries[arc.place][arc.transition] += arc.weight;
  for (const auto& arc : net.input_flows)
    a.entries[arc.place][arc.transition] -= arc.weight;
  return a;
}

namespace {

void require_dimension(const PetriNet& net, const Marking& m) {
  if (static_cast<int>(m.counts.size()) != net.place_count()) {
    throw Error(ErrorCode::MarkingDimensionMismatch,
                net.name + ": marking has " + std::to_string(m.counts.size()) +
                    " places, net has " + std::to_string(net.place_count()));
  }
  for (int c : m.counts) {
    if (c < 0)
      throw Error(ErrorCode::MarkingDimensionMismatch, "negative token count");
  }
}

bool agent_enabled(const PetriNet& net, const Marking& m, TransitionIndex tr) {
  for (const auto& a : net.input_flows) {
    if (a.transition == tr && m.counts[a.place] < net.input_weight(a.place, tr))
      return false;
  }
  return true;
}

// Guard colour that could be taken right now: either resting in the
// marking, or pending at an occupied sensing place.
std::optional<std::string> obtainable_guard(const PetriNet& net,
                                            const Marking& m,
                                            TransitionIndex tr) {
  auto it = net.colour_guards.find(tr);
  if (it == net.colour_guards.end()) return std::nullopt;
  for (const auto& colour : it->second) {
    auto emitter = net.emitter_of(colour);
    if (emitter && m.has_colour_at(*emitter, colour)) return colour;
  }
  for (const auto& colour : it->second) {
    auto emitter = net.emitter_of(colour);
    if (emitter && m.counts[*emitter] > 0) return colour;
  }
  return std::nullopt;
}

// Count-vector effect of one firing.
std::vector<int> step_counts(const PetriNet& net, const std::vector<int>& counts,
                             TransitionIndex tr) {
  std::vector<int> out = counts;
  for (const auto& a : net.input_flows)
    if (a.transition == tr) out[a.place] -= a.weight;
  for (const auto& a : net.output_flows)
    if (a.transition == tr) out[a.place] += a.weight;
  for (int c : out) {
    if (c < 0)
      throw Error(ErrorCode::TransitionNotEnabled,
                  net.transitions[tr].name + " would drive a place negative");
  }
  return out;
}

// The emitted token under the net's bound decision inputs. A
// single-alternative rule with an input is an external gate: false means
// no token at all.
std::optional<std::string> chosen_emission(const PetriNet& net,
                                           const ColourRule& rule) {
  bool v = true;
  if (!rule.decision_input.empty()) {
    auto it = net.decision_inputs.find(rule.decision_input);
    v = it == net.decision_inputs.end() ? true : it->second;
  }
  if (rule.alternatives.size() == 1) {
    if (!v) return std::nullopt;
    return rule.alternatives.front();
  }
  return v ? rule.alternatives.front() : rule.alternatives[1];
}

void clear_colours_at(Marking& m, PlaceIndex p) {
  for (auto it = m.colours.begin(); it != m.colours.end();) {
    it = it->place == p ? m.colours.erase(it) : std::next(it);
  }
}

Marking fire_with_colour(const PetriNet& net, const Marking& m,
                         TransitionIndex tr,
                         const std::optional<std::string>& guard_colour) {
  Marking out;
  out.counts = step_counts(net, m.counts, tr);
  out.colours = m.colours;

  if (guard_colour) {
    auto emitter = net.emitter_of(*guard_colour);
    if (emitter) out.colours.erase({*emitter, *guard_colour});
  }
  // A departing token voids whatever decision was resting at its place.
  for (const auto& a : net.input_flows) {
    if (a.transition == tr) clear_colours_at(out, a.place);
  }
  // Destination sensing places take a fresh decision.
  for (const auto& a : net.output_flows) {
    if (a.transition != tr) continue;
    const ColourRule* rule = net.rule_for_place(a.place);
    if (rule && rule->trigger == EmissionTrigger::OnPresence &&
        out.counts[a.place] > 0) {
      clear_colours_at(out, a.place);
      if (auto c = chosen_emission(net, *rule)) out.colours.insert({a.place, *c});
    }
  }
  return out;
}

}  // namespace

std::set<TransitionIndex> enabled_transitions(const PetriNet& net,
                                              const Marking& m) {
  require_dimension(net, m);
  std::set<TransitionIndex> out;
  for (int tr = 0; tr < net.transition_count(); ++tr) {
    if (!agent_enabled(net, m, tr)) continue;
    if (net.transitions[tr].kind == TransitionKind::Colour) {
      const auto& guard = net.colour_guards.at(tr);
      bool ok = false;
      for (const auto& colour : guard) {
        auto emitter = net.emitter_of(colour);
        if (emitter && m.has_colour_at(*emitter, colour)) {
          ok = true;
          break;
        }
      }
      if (!ok) continue;
    }
    out.insert(tr);
  }
  return out;
}

Marking fire(const PetriNet& net, const Marking& m, TransitionIndex tr) {
  require_dimension(net, m);
  if (tr < 0 || tr >= net.transition_count())
    throw Error(ErrorCode::TransitionNotEnabled, "no such transition");
  if (!enabled_transitions(net, m).count(tr))
    throw Error(ErrorCode::TransitionNotEnabled, net.transitions[tr].name);

  std::optional<std::string> guard_colour;
  if (net.transitions[tr].kind == TransitionKind::Colour) {
    for (const auto& colour : net.colour_guards.at(tr)) {
      auto emitter = net.emitter_of(colour);
      if (emitter && m.has_colour_at(*emitter, colour)) {
        guard_colour = colour;
        break;
      }
    }
  }
  return fire_with_colour(net, m, tr, guard_colour);
}

Marking sense(const PetriNet& net, const Marking& m) {
  require_dimension(net, m);
  Marking out = m;
  for (const auto& rule : net.colour_rules) {
    if (rule.trigger != EmissionTrigger::OnPresence) continue;
    if (out.counts[rule.place] > 0) {
      clear_colours_at(out, rule.place);
      if (auto c = chosen_emission(net, rule)) out.colours.insert({rule.place, *c});
    }
  }
  return out;
}

FireSequenceResult fire_sequence(const PetriNet& net, const Marking& m0,
                                 const std::vector<TransitionIndex>& sigma) {
  require_dimension(net, m0);
  FireSequenceResult res;
  res.marking = m0;
  res.occurrences.assign(net.transition_count(), 0);
  for (size_t i = 0; i < sigma.size(); ++i) {
    TransitionIndex tr = sigma[i];
    if (tr < 0 || tr >= net.transition_count())
      throw Error(ErrorCode::TransitionNotEnabled,
                  "index " + std::to_string(i) + ": no such transition");
    if (!agent_enabled(net, res.marking, tr)) {
      throw Error(ErrorCode::TransitionNotEnabled,
                  "index " + std::to_string(i) + " (" +
                      net.transitions[tr].name + "): missing input tokens");
    }
    std::optional<std::string> guard_colour;
    if (net.transitions[tr].kind == TransitionKind::Colour) {
      guard_colour = obtainable_guard(net, res.marking, tr);
      if (!guard_colour) {
        throw Error(ErrorCode::TransitionNotEnabled,
                    "index " + std::to_string(i) + " (" +
                        net.transitions[tr].name + "): guard token unavailable");
      }
    }
    res.marking = fire_with_colour(net, res.marking, tr, guard_colour);
    res.occurrences[tr] += 1;
  }
  return res;
}

bool check_state_equation(const PetriNet& net, const Marking& m0,
                          const std::vector<TransitionIndex>& sigma,
                          const Marking& expected) {
  require_dimension(net, m0);
  require_dimension(net, expected);
  std::vector<int> occurrences(net.transition_count(), 0);
  for (TransitionIndex tr : sigma) {
    if (tr < 0 || tr >= net.transition_count())
      throw Error(ErrorCode::MarkingDimensionMismatch, "sigma out of range");
    occurrences[tr] += 1;
  }
  IncidenceMatrix a = incidence_matrix(net);
  for (int p = 0; p < net.place_count(); ++p) {
    long long v = m0.counts[p];
    for (int t = 0; t < net.transition_count(); ++t)
      v += static_cast<long long>(a.entries[p][t]) * occurrences[t];
    if (v != expected.counts[p]) return false;
  }
  return true;
}

namespace {

// Exploration state: agent counts plus the sensing places whose resting
// token already spent its decision. A place re-arms only when its token
// count changes; an unmoved token never decides twice.
struct ExploreState {
  std::vector<int> counts;
  std::set<ColourToken> colours;  // tokens resting in the root marking
  std::set<PlaceIndex> spent;

  bool operator<(const ExploreState& o) const {
    if (counts != o.counts) return counts < o.counts;
    if (colours != o.colours) return colours < o.colours;
    return spent < o.spent;
  }
};

bool rule_is_eager(const PetriNet& net, PlaceIndex p) {
  const ColourRule* rule = net.rule_for_place(p);
  return rule && rule->trigger == EmissionTrigger::OnPresence;
}

// Guard colour the state could take: resting, or pending at an occupied
// sensing place that has not spent its decision. Returns the emitter.
std::optional<std::pair<std::string, PlaceIndex>> tree_guard(
    const PetriNet& net, const ExploreState& s, TransitionIndex tr) {
  auto it = net.colour_guards.find(tr);
  if (it == net.colour_guards.end()) return std::nullopt;
  for (const auto& colour : it->second) {
    auto emitter = net.emitter_of(colour);
    if (emitter && s.colours.count({*emitter, colour}))
      return std::make_pair(colour, *emitter);
  }
  for (const auto& colour : it->second) {
    auto emitter = net.emitter_of(colour);
    if (!emitter || s.counts[*emitter] <= 0) continue;
    const ColourRule* rule = net.rule_for_place(*emitter);
    if (rule->trigger == EmissionTrigger::OnFiring ||
        !s.spent.count(*emitter)) {
      return std::make_pair(colour, *emitter);
    }
  }
  return std::nullopt;
}

}  // namespace

ReachabilityResult reachability_analysis(const PetriNet& net, const Marking& m0,
                                         int max_nodes) {
  require_dimension(net, m0);
  if (max_nodes <= 0)
    throw Error(ErrorCode::NodeBudgetExceeded, "max_nodes must be positive");
  net.validate();

  ReachabilityResult res;
  res.tree.nodes.push_back({m0, -1, -1, false});

  ExploreState root{m0.counts, m0.colours, {}};
  std::set<ExploreState> seen{root};
  std::deque<std::pair<int, ExploreState>> open{{0, root}};

  auto place_load = [&](const ExploreState& s, PlaceIndex p) {
    int load = s.counts[p];
    for (const auto& c : s.colours)
      if (c.place == p) load += 1;
    // An occupied sensing place co-holds the decision token it announced.
    if (s.counts[p] > 0 && rule_is_eager(net, p) && !s.spent.count(p) &&
        std::none_of(s.colours.begin(), s.colours.end(),
                     [&](const ColourToken& c) { return c.place == p; })) {
      load += 1;
    }
    return load;
  };
  auto update_bound = [&](const ExploreState& s) {
    for (int p = 0; p < net.place_count(); ++p)
      res.bound = std::max(res.bound, place_load(s, p));
  };
  update_bound(root);

  std::set<TransitionIndex> fired;
  while (!open.empty()) {
    auto [node_idx, state] = open.front();
    open.pop_front();
    for (int tr = 0; tr < net.transition_count(); ++tr) {
      Marking probe;
      probe.counts = state.counts;
      if (!agent_enabled(net, probe, tr)) continue;
      std::optional<std::pair<std::string, PlaceIndex>> guard;
      if (net.transitions[tr].kind == TransitionKind::Colour) {
        guard = tree_guard(net, state, tr);
        if (!guard) continue;
      }
      ExploreState next;
      next.counts = step_counts(net, state.counts, tr);
      next.colours = state.colours;
      next.spent = state.spent;
      if (guard) {
        next.colours.erase({guard->second, guard->first});
        if (next.counts[guard->second] == state.counts[guard->second])
          next.spent.insert(guard->second);
      }
      for (int p = 0; p < net.place_count(); ++p) {
        if (next.counts[p] != state.counts[p]) {
          next.spent.erase(p);
          // A departing or arriving token voids resting decisions here.
          for (auto it2 = next.colours.begin(); it2 != next.colours.end();) {
            it2 = it2->place == p ? next.colours.erase(it2) : std::next(it2);
          }
        }
      }

      fired.insert(tr);
      bool old = seen.count(next) > 0;
      Marking nm;
      nm.counts = next.counts;
      nm.colours = next.colours;
      res.tree.nodes.push_back({nm, node_idx, tr, old});
      int new_idx = static_cast<int>(res.tree.nodes.size()) - 1;
      if (!old) {
        seen.insert(next);
        update_bound(next);
        open.push_back({new_idx, next});
      }
      if (static_cast<int>(res.tree.nodes.size()) > max_nodes) {
        throw Error(ErrorCode::NodeBudgetExceeded,
                    net.name + ": budget " + std::to_string(max_nodes) +
                        " exhausted before the tree closed");
      }
    }
  }

  for (int tr = 0; tr < net.transition_count(); ++tr)
    if (!fired.count(tr)) res.dead_transitions.insert(tr);
  return res;
}

}  // namespace rail::petri
