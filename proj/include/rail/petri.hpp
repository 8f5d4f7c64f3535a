#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rail/error.hpp"

namespace rail::petri {

using PlaceIndex = int;       // 0-based position in the net's place order
using TransitionIndex = int;  // 0-based position in the transition order

enum class PlaceKind { Plain, Function };
enum class TransitionKind { Immediate, Colour };

// When a function place announces its sensed decision token.
//   OnPresence: the token rests at the place as soon as the place is
//               occupied (sensing happens while waiting/approaching).
//   OnFiring:   the decision materialises only at the instant a guarded
//               transition consumes it; it never rests in a marking.
enum class EmissionTrigger { OnPresence, OnFiring };

struct Place {
  std::string name;
  PlaceKind kind = PlaceKind::Plain;
  std::string note;
};

struct Transition {
  std::string name;
  TransitionKind kind = TransitionKind::Immediate;
  std::string note;
};

// Sensing rule of one function place: on trigger it emits exactly one of
// `alternatives`, chosen by the named boolean decision input (true picks
// alternatives[0]); single-alternative rules ignore the input.
struct ColourRule {
  PlaceIndex place = 0;
  std::vector<std::string> alternatives;
  EmissionTrigger trigger = EmissionTrigger::OnPresence;
  std::string decision_input;  // empty for single-alternative rules
};

struct PetriNet {
  std::string name;
  std::vector<Place> places;
  std::vector<Transition> transitions;
  // Arc multisets. weight is the arc multiplicity (1 everywhere here, but
  // the algebra supports more).
  struct Arc {
    PlaceIndex place;
    TransitionIndex transition;
    int weight = 1;
  };
  std::vector<Arc> input_flows;   // place -> transition
  std::vector<Arc> output_flows;  // transition -> place
  std::vector<ColourRule> colour_rules;
  // One guard condition per colour transition: any listed token satisfies it.
  std::map<TransitionIndex, std::vector<std::string>> colour_guards;
  // Decision inputs referenced by colour rules, with defaults.
  std::map<std::string, bool> decision_inputs;

  int place_count() const { return static_cast<int>(places.size()); }
  int transition_count() const { return static_cast<int>(transitions.size()); }
  PlaceIndex place_index(const std::string& name) const;
  TransitionIndex transition_index(const std::string& name) const;
  const ColourRule* rule_for_place(PlaceIndex p) const;
  // Place whose rule can emit `colour`, if any.
  std::optional<PlaceIndex> emitter_of(const std::string& colour) const;
  int input_weight(PlaceIndex p, TransitionIndex t) const;
  int output_weight(PlaceIndex p, TransitionIndex t) const;
  void validate() const;  // structural invariants; throws on breach
};

struct ColourToken {
  PlaceIndex place;
  std::string colour;
  bool operator<(const ColourToken& o) const {
    return place != o.place ? place < o.place : colour < o.colour;
  }
  bool operator==(const ColourToken& o) const {
    return place == o.place && colour == o.colour;
  }
};

struct Marking {
  std::vector<int> counts;       // agent tokens per place
  std::set<ColourToken> colours; // resting decision tokens

  bool operator==(const Marking& o) const {
    return counts == o.counts && colours == o.colours;
  }
  bool operator<(const Marking& o) const {
    return counts != o.counts ? counts < o.counts : colours < o.colours;
  }
  bool has_colour_at(PlaceIndex p, const std::string& c) const {
    return colours.count({p, c}) > 0;
  }
  std::string to_string() const;
};

struct IncidenceMatrix {
  int rows = 0;  // places
  int cols = 0;  // transitions
  std::vector<std::vector<int>> entries;

  const std::vector<int>& row(int r) const { return entries[r]; }
  std::string to_string(const PetriNet& net) const;
};

struct ReachabilityNode {
  Marking marking;
  int parent = -1;                 // node index, -1 for root
  TransitionIndex via = -1;        // transition fired to reach this node
  bool old_marking = false;        // equals an earlier-seen marking
};

struct ReachabilityTree {
  std::vector<ReachabilityNode> nodes;  // nodes[0] is the root
};

struct ReachabilityResult {
  ReachabilityTree tree;
  int bound = 0;
  std::set<TransitionIndex> dead_transitions;
};

struct FireSequenceResult {
  Marking marking;
  std::vector<int> occurrences;  // X_sigma, one entry per transition
};

IncidenceMatrix incidence_matrix(const PetriNet& net);

// Strict enabling: agent tokens on every input place and, for colour
// transitions, a resting guard token.
std::set<TransitionIndex> enabled_transitions(const PetriNet& net,
                                              const Marking& m);

// Fires one strictly enabled transition: consumes inputs, produces
// outputs, consumes the guard token, voids stale decisions at drained
// places, and lets destination function places sense again.
Marking fire(const PetriNet& net, const Marking& m, TransitionIndex tr);

// Replays sigma, taking each pending decision so that the requested
// transition can fire whenever its agent tokens are in place. Reports the
// failing index when a transition is not enableable.
FireSequenceResult fire_sequence(const PetriNet& net, const Marking& m0,
                                 const std::vector<TransitionIndex>& sigma);

// m0 + A * X_sigma == expected, elementwise over agent counts.
bool check_state_equation(const PetriNet& net, const Marking& m0,
                          const std::vector<TransitionIndex>& sigma,
                          const Marking& expected);

// Exhaustive firing with 'old'-marking cutoff. Bound counts the tokens a
// place can hold at once, including a resting decision token on occupied
// sensing places. Throws NodeBudgetExceeded when the frontier outgrows
// max_nodes before closing.
ReachabilityResult reachability_analysis(const PetriNet& net, const Marking& m0,
                                         int max_nodes);

// Runs the OnPresence sensing rules against the current tokens, resting
// the chosen decision tokens in the marking.
Marking sense(const PetriNet& net, const Marking& m);

enum class Preset { PN1, PN2, PN3, PN4 };

struct PresetNet {
  PetriNet net;
  Marking initial;
};

PresetNet build_preset(Preset which);
std::optional<Preset> preset_from_name(const std::string& name);
const char* preset_name(Preset p);

// Line-oriented net exchange format: ordered places, ordered transitions,
// arcs, guards, rules, decisions and the initial marking.
std::string serialize_net(const PetriNet& net, const Marking& m0);
PresetNet parse_net(const std::string& text);

}  // namespace rail::petri
