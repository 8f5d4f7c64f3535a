#include <sstream>

#include "rail/petri.hpp"

namespace rail::petri {

namespace {

class NetBuilder {
 public:
  explicit NetBuilder(std::string name) { net_.name = std::move(name); }

  NetBuilder& place(const std::string& name, const std::string& note = "") {
    net_.places.push_back({name, PlaceKind::Plain, note});
    return *this;
  }

  NetBuilder& function_place(const std::string& name,
                             const std::string& note = "") {
    net_.places.push_back({name, PlaceKind::Function, note});
    return *this;
  }

  // tr("Tr1", {"P1"}, {"P3"}) wires input and output arcs by place name.
  NetBuilder& tr(const std::string& name, const std::vector<std::string>& in,
                 const std::vector<std::string>& out,
                 const std::vector<std::string>& guard = {},
                 const std::string& note = "") {
    TransitionIndex t = static_cast<TransitionIndex>(net_.transitions.size());
    net_.transitions.push_back(
        {name, guard.empty() ? TransitionKind::Immediate : TransitionKind::Colour,
         note});
    for (const auto& p : in) net_.input_flows.push_back({net_.place_index(p), t, 1});
    for (const auto& p : out)
      net_.output_flows.push_back({net_.place_index(p), t, 1});
    if (!guard.empty()) net_.colour_guards[t] = guard;
    return *this;
  }

  NetBuilder& rule(const std::string& place,
                   const std::vector<std::string>& alternatives,
                   const std::string& decision_input = "",
                   EmissionTrigger trigger = EmissionTrigger::OnPresence) {
    net_.colour_rules.push_back(
        {net_.place_index(place), alternatives, trigger, decision_input});
    if (!decision_input.empty()) net_.decision_inputs[decision_input] = true;
    return *this;
  }

  PetriNet build() {
    net_.validate();
    return net_;
  }

 private:
  PetriNet net_;
};

Marking marking_of(std::vector<int> counts) {
  Marking m;
  m.counts = std::move(counts);
  return m;
}

PresetNet make_pn2() {
  NetBuilder b("PN2");
  b.function_place("P1", "Tj on track l approaching the blocked station")
      .function_place("P2", "Tj' on track l' approaching the blocked station")
      .function_place("P3", "both trains approaching the same station")
      .function_place("P4", "Tj reached and is at the station")
      .place("P5", "Tj reached its destination")
      .place("P6", "Tj completed its previous journey and started the next")
      .place("P7", "Tj waiting for availability of resources");

  // Tr1 holds both approach tokens in place: no platform on arrival.
  b.tr("Tr1", {"P1", "P2"}, {"P1", "P2"}, {"ct1", "ct3"})
      .tr("Tr2", {"P1", "P2"}, {"P3"}, {"ct2", "ct4"})
      .tr("Tr3", {"P3"}, {"P2", "P4"}, {"ct5"})
      .tr("Tr4", {"P4"}, {"P5"}, {"ct6"})
      .tr("Tr5", {"P4"}, {"P7"}, {"ct7"})
      .tr("Tr6", {"P5"}, {"P6"})
      .tr("Tr7", {"P6"}, {"P1"})
      .tr("Tr8", {"P7"}, {"P4"});

  b.rule("P1", {"ct2", "ct1"}, "tj_platform_free")
      .rule("P2", {"ct4", "ct3"}, "tjp_platform_free")
      .rule("P3", {"ct5"})
      .rule("P4", {"ct6", "ct7"}, "resources_available");

  return {b.build(), marking_of({1, 1, 0, 0, 0, 0, 0})};
}

PresetNet make_pn3() {
  NetBuilder b("PN3");
  b.place("P1", "trains at the blocked station, one usable platform")
      .place("P2", "trains at a station connecting to the blocked one")
      .function_place("P3", "several trains requesting the single platform")
      .place("P4", "top-priority train reached the station")
      .function_place("P5", "trains waiting to depart")
      .place("P6", "top-priority train departed");

  b.tr("Tr1", {"P1", "P2"}, {"P3"})
      .tr("Tr2", {"P3"}, {"P1", "P4"}, {"ct1"})
      .tr("Tr3", {"P1", "P4"}, {"P5"})
      .tr("Tr4", {"P5"}, {"P5", "P6"}, {"ct2"})
      .tr("Tr5", {"P5"}, {"P5", "P6"}, {"ct3"});

  b.rule("P3", {"ct1"}).rule("P5", {"ct2", "ct3"}, "reorder_departures");

  return {b.build(), marking_of({2, 3, 0, 0, 0, 0})};
}

PresetNet make_pn4() {
  NetBuilder b("PN4");
  b.function_place("P1", "trains at the neighbour station")
      .place("P2", "one connecting track is free")
      .place("P3", "trains ready to leave")
      .place("P4", "top-priority train running on the track")
      .place("P5", "platform free at the blocked station")
      .place("P6", "top-priority train reached the blocked station");

  b.tr("Tr1", {"P1", "P2"}, {"P3"}, {"ct1"})
      .tr("Tr2", {"P3", "P5"}, {"P4"})
      .tr("Tr3", {"P4"}, {"P2", "P6"});

  // Priority is decided at the instant of departure; the token never rests.
  b.rule("P1", {"ct1"}, "", EmissionTrigger::OnFiring);

  return {b.build(), marking_of({2, 1, 0, 0, 1, 0})};
}

PresetNet make_pn1() {
  NetBuilder b("PN1");
  b.place("P1", "Tj at its station, counting down dwell")
      .place("P2", "Tj' at its station, counting down dwell")
      .place("P3", "Tj starts running")
      .place("P4", "Tj' starts running")
      .function_place("P5", "Tj on track, sensing the station ahead")
      .function_place("P6", "Tj' on track, sensing the station ahead")
      .function_place("P7", "junction ahead, checking for a free platform")
      .function_place("P8", "Tj sensing a simple station's platforms")
      .function_place("P9", "Tj' sensing a simple station's platforms")
      .place("P10", "journey completed, ready for the next one")
      .place("P11", "train entering the station")
      .place("P12", "no free platform for Tj'")
      .place("P13", "no free platform for Tj")
      .place("P14", "train reached the station");

  b.tr("Tr1", {"P1"}, {"P3"})
      .tr("Tr2", {"P2"}, {"P4"})
      .tr("Tr3", {"P3"}, {"P5"})
      .tr("Tr4", {"P4"}, {"P6"})
      .tr("Tr5", {"P5"}, {"P8"}, {"ct1"})
      .tr("Tr6", {"P5"}, {"P7"}, {"ct2"})
      .tr("Tr7", {"P6"}, {"P7"}, {"ct3"})
      .tr("Tr8", {"P6"}, {"P9"}, {"ct4"})
      .tr("Tr9", {"P8"}, {"P13"}, {"ct5"})
      .tr("Tr10", {"P8"}, {"P11"}, {"ct6"})
      .tr("Tr11", {"P9"}, {"P11"}, {"ct8"})
      .tr("Tr12", {"P9"}, {"P12"}, {"ct9"})
      .tr("Tr13", {"P7"}, {"P11"}, {"ct7"})
      .tr("Tr14", {"P13"}, {"P11"})
      .tr("Tr15", {"P12"}, {"P11"})
      .tr("Tr16", {"P11"}, {"P14"})
      .tr("Tr17", {"P14"}, {"P3"})
      .tr("Tr18", {"P14"}, {"P10"})
      .tr("Tr19", {"P10"}, {"P1"});

  b.rule("P5", {"ct2", "ct1"}, "tj_next_is_junction")
      .rule("P6", {"ct3", "ct4"}, "tjp_next_is_junction")
      // Whether the junction can host the top-priority train is decided
      // outside the net; expose it as a plain boolean input.
      .rule("P7", {"ct7"}, "junction_platform_free_for_top_priority")
      .rule("P8", {"ct6", "ct5"}, "tj_platform_free")
      .rule("P9", {"ct8", "ct9"}, "tjp_platform_free");

  Marking m0 = marking_of({1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0});
  return {b.build(), m0};
}

}  // namespace

PresetNet build_preset(Preset which) {
  switch (which) {
    case Preset::PN1: return make_pn1();
    case Preset::PN2: return make_pn2();
    case Preset::PN3: return make_pn3();
    case Preset::PN4: return make_pn4();
  }
  throw Error(ErrorCode::ParseError, "unknown preset");
}

std::optional<Preset> preset_from_name(const std::string& name) {
  if (name == "PN1") return Preset::PN1;
  if (name == "PN2") return Preset::PN2;
  if (name == "PN3") return Preset::PN3;
  if (name == "PN4") return Preset::PN4;
  return std::nullopt;
}

const char* preset_name(Preset p) {
  switch (p) {
    case Preset::PN1: return "PN1";
    case Preset::PN2: return "PN2";
    case Preset::PN3: return "PN3";
    case Preset::PN4: return "PN4";
  }
  return "?";
}

std::string serialize_net(const PetriNet& net, const Marking& m0) {
  std::ostringstream os;
  os << "net\t" << net.name << "\n";
  for (const auto& p : net.places) {
    os << "place\t" << p.name << "\t"
       << (p.kind == PlaceKind::Function ? "function" : "plain") << "\n";
  }
  for (const auto& t : net.transitions) {
    os << "transition\t" << t.name << "\t"
       << (t.kind == TransitionKind::Colour ? "colour" : "immediate") << "\n";
  }
  for (const auto& a : net.input_flows) {
    os << "arc\tin\t" << net.places[a.place].name << "\t"
       << net.transitions[a.transition].name << "\t" << a.weight << "\n";
  }
  for (const auto& a : net.output_flows) {
    os << "arc\tout\t" << net.transitions[a.transition].name << "\t"
       << net.places[a.place].name << "\t" << a.weight << "\n";
  }
  for (const auto& [tr, colours] : net.colour_guards) {
    os << "guard\t" << net.transitions[tr].name;
    for (const auto& c : colours) os << "\t" << c;
    os << "\n";
  }
  for (const auto& r : net.colour_rules) {
    os << "rule\t" << net.places[r.place].name << "\t"
       << (r.trigger == EmissionTrigger::OnPresence ? "on_presence"
                                                    : "on_firing")
       << "\t" << (r.decision_input.empty() ? "-" : r.decision_input);
    for (const auto& c : r.alternatives) os << "\t" << c;
    os << "\n";
  }
  for (const auto& [name, value] : net.decision_inputs) {
    os << "decision\t" << name << "\t" << (value ? 1 : 0) << "\n";
  }
  os << "marking";
  for (int c : m0.counts) os << "\t" << c;
  os << "\n";
  for (const auto& c : m0.colours) {
    os << "colour_at\t" << net.places[c.place].name << "\t" << c.colour << "\n";
  }
  return os.str();
}

PresetNet parse_net(const std::string& text) {
  PresetNet out;
  PetriNet& net = out.net;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  bool have_marking = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f;
    std::istringstream ls(line);
    std::string tok;
    while (std::getline(ls, tok, '\t')) f.push_back(tok);
    if (f.empty()) continue;
    auto want = [&](size_t n) {
      if (f.size() < n)
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(lineno) + ": truncated record");
    };
    try {
      if (f[0] == "net") {
        want(2);
        net.name = f[1];
      } else if (f[0] == "place") {
        want(3);
        net.places.push_back({f[1],
                              f[2] == "function" ? PlaceKind::Function
                                                 : PlaceKind::Plain,
                              ""});
      } else if (f[0] == "transition") {
        want(3);
        net.transitions.push_back({f[1],
                                   f[2] == "colour" ? TransitionKind::Colour
                                                    : TransitionKind::Immediate,
                                   ""});
      } else if (f[0] == "arc") {
        want(5);
        int weight = std::stoi(f[4]);
        if (f[1] == "in") {
          net.input_flows.push_back(
              {net.place_index(f[2]), net.transition_index(f[3]), weight});
        } else {
          net.output_flows.push_back(
              {net.place_index(f[3]), net.transition_index(f[2]), weight});
        }
      } else if (f[0] == "guard") {
        want(3);
        std::vector<std::string> colours(f.begin() + 2, f.end());
        net.colour_guards[net.transition_index(f[1])] = colours;
      } else if (f[0] == "rule") {
        want(5);
        ColourRule r;
        r.place = net.place_index(f[1]);
        r.trigger = f[2] == "on_firing" ? EmissionTrigger::OnFiring
                                        : EmissionTrigger::OnPresence;
        r.decision_input = f[3] == "-" ? "" : f[3];
        r.alternatives.assign(f.begin() + 4, f.end());
        net.colour_rules.push_back(r);
      } else if (f[0] == "decision") {
        want(3);
        net.decision_inputs[f[1]] = f[2] != "0";
      } else if (f[0] == "marking") {
        out.initial.counts.clear();
        for (size_t i = 1; i < f.size(); ++i)
          out.initial.counts.push_back(std::stoi(f[i]));
        have_marking = true;
      } else if (f[0] == "colour_at") {
        want(3);
        out.initial.colours.insert({net.place_index(f[1]), f[2]});
      } else {
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(lineno) + ": unknown record '" +
                        f[0] + "'");
      }
    } catch (const std::invalid_argument&) {
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(lineno) + ": bad integer");
    }
  }
  if (!have_marking || out.initial.counts.size() != net.places.size())
    throw Error(ErrorCode::ParseError, "marking missing or wrong length");
  net.validate();
  return out;
}

}  // namespace rail::petri
