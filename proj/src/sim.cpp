#include "rail/sim.hpp"

#include <algorithm>
#include <sstream>

namespace rail {

std::string AgentId::to_string() const {
  return (kind == AgentKind::StationAgent ? "S" : "T") + std::to_string(ref);
}

const char* message_kind_name(MessageKind k) {
  switch (k) {
    case MessageKind::DisasterNotice: return "DisasterNotice";
    case MessageKind::RecoveryStatus: return "RecoveryStatus";
    case MessageKind::ResourceRequest: return "ResourceRequest";
    case MessageKind::ResourceGrant: return "ResourceGrant";
    case MessageKind::ResourceDeny: return "ResourceDeny";
    case MessageKind::ScheduleUpdate: return "ScheduleUpdate";
  }
  return "?";
}

void check_message_legality(const RailwayNetwork& net, const Message& m) {
  if (m.from.kind == AgentKind::TrainAgent) {
    if (m.to.kind != AgentKind::StationAgent) {
      throw Error(ErrorCode::IllegalMessageRoute,
                  m.from.to_string() + " -> " + m.to.to_string() +
                      ": trains talk to stations only");
    }
    return;
  }
  // station sender
  if (m.to.kind == AgentKind::TrainAgent) return;
  const auto& nbrs = net.adjacency.at(m.from.ref);
  for (const auto& [nbr, _] : nbrs) {
    if (nbr == m.to.ref) return;
  }
  throw Error(ErrorCode::IllegalMessageRoute,
              m.from.to_string() + " -> " + m.to.to_string() +
                  ": stations reach neighbours only");
}

std::vector<Message> station_agent_step(const RailwayNetwork& net,
                                        const Fleet& fleet,
                                        const PriorityPolicy& policy,
                                        StationAgentState& state,
                                        const std::vector<Message>& inbox,
                                        Minutes now) {
  std::vector<Message> outbox;
  for (const auto& m : inbox) {
    if (!(m.to.kind == AgentKind::StationAgent && m.to.ref == state.station)) {
      throw Error(ErrorCode::IllegalMessageRoute,
                  "message addressed to " + m.to.to_string() +
                      " delivered to S" + std::to_string(state.station));
    }
    check_message_legality(net, m);
  }

  // recovery flooding with per-event dedup
  for (const auto& m : inbox) {
    if (m.kind != MessageKind::RecoveryStatus) continue;
    if (!state.seen_recovery_events.insert(m.event_id).second) continue;
    for (const auto& [nbr, _] : net.adjacency.at(state.station)) {
      Message fwd;
      fwd.from = station_agent(state.station);
      fwd.to = station_agent(nbr);
      fwd.at = now;
      fwd.kind = MessageKind::RecoveryStatus;
      fwd.event_id = m.event_id;
      fwd.station = m.station;
      fwd.when = m.when;
      fwd.digest = m.digest;
      outbox.push_back(fwd);
    }
  }

  // platform requests served strictly by priority
  std::vector<const Message*> requests;
  for (const auto& m : inbox) {
    if (m.kind == MessageKind::ResourceRequest &&
        m.from.kind == AgentKind::TrainAgent)
      requests.push_back(&m);
  }
  std::vector<std::pair<Train, Minutes>> contenders;
  for (const auto* r : requests) {
    contenders.push_back(
        {fleet.at(r->from.ref), std::max(0, now - r->when)});
  }
  bool ctx = delayed_context_active(policy, contenders);
  std::sort(requests.begin(), requests.end(),
            [&](const Message* a, const Message* b) {
              const Train& ta = fleet.at(a->from.ref);
              const Train& tb = fleet.at(b->from.ref);
              Minutes da = std::max(0, now - a->when);
              Minutes db = std::max(0, now - b->when);
              if (higher_priority(policy, ta, da, tb, db, now, ctx))
                return true;
              if (higher_priority(policy, tb, db, ta, da, now, ctx))
                return false;
              return a->from.ref < b->from.ref;
            });
  for (const auto* r : requests) {
    PlatformIndex free_k = 0;
    for (PlatformIndex k = 1; k <= state.platform_count; ++k) {
      if (state.blocked.count(k) || state.occupied.count(k)) continue;
      free_k = k;
      break;
    }
    Message reply;
    reply.from = station_agent(state.station);
    reply.to = r->from;
    reply.at = now;
    reply.station = state.station;
    reply.when = r->when;
    if (free_k != 0) {
      state.occupied.insert(free_k);
      reply.kind = MessageKind::ResourceGrant;
      reply.track = free_k;  // granted platform index rides in 'track'
    } else {
      reply.kind = MessageKind::ResourceDeny;
    }
    outbox.push_back(reply);
  }
  return outbox;
}

std::vector<Message> train_agent_step(const RailwayNetwork& net,
                                      TrainAgentState& state,
                                      const std::vector<Message>& inbox,
                                      Minutes now, Minutes lookahead) {
  std::vector<Message> outbox;
  for (const auto& m : inbox) {
    if (!(m.to.kind == AgentKind::TrainAgent && m.to.ref == state.train)) {
      throw Error(ErrorCode::IllegalMessageRoute,
                  "message addressed to " + m.to.to_string() +
                      " delivered to T" + std::to_string(state.train));
    }
    if (m.kind == MessageKind::ScheduleUpdate) {
      state.requested_next = false;  // re-aim at the updated plan
    } else if (m.kind == MessageKind::ResourceGrant) {
      if (state.next_station_index + 1 < state.itinerary.size())
        state.next_station_index += 1;
      state.requested_next = false;
      state.mdp = MdpState::AtDisasterStationPlatform;
    }
  }
  if (!state.requested_next &&
      state.next_station_index < state.itinerary.size()) {
    const auto& next = state.itinerary[state.next_station_index];
    if (now >= next.actual_arrival - lookahead) {
      net.station(next.station);  // must exist
      Message req;
      req.from = train_agent(state.train);
      req.to = station_agent(next.station);
      req.at = now;
      req.kind = MessageKind::ResourceRequest;
      req.station = next.station;
      req.when = next.actual_arrival;
      outbox.push_back(req);
      state.requested_next = true;
    }
  }
  for (const auto& m : outbox) check_message_legality(net, m);
  return outbox;
}

std::string SimReport::serialize() const {
  std::ostringstream os;
  os << "horizon\t" << horizon << "\n";
  os << "total_delay\t" << total_delay << "\n";
  if (baseline_total_delay >= 0)
    os << "baseline_total_delay\t" << baseline_total_delay << "\n";
  for (const auto& [train, delay] : per_train_delay)
    os << "train\t" << train << "\t" << delay << "\n";
  for (const auto& d : decisions) {
    os << "decision\t" << d.train << "\t" << decision_kind_name(d.kind) << "\t"
       << case_label_name(d.case_label) << "\t" << d.added_delay << "\n";
  }
  for (const auto& m : message_log) {
    os << "msg\t" << m.at << "\t" << m.from.to_string() << "\t"
       << m.to.to_string() << "\t" << message_kind_name(m.kind) << "\t"
       << m.event_id << "\t" << m.station << "\t" << m.when << "\n";
  }
  for (const auto& e : final_schedule) {
    os << "entry\t" << e.train << "\t" << e.station << "\t"
       << format_hhmm(e.actual_arrival) << "\t"
       << format_hhmm(e.actual_departure) << "\t" << e.platform << "\t"
       << e.track_from_prev << "\n";
  }
  return os.str();
}

namespace {

struct Runner {
  const RailwayNetwork& net;
  const Fleet& fleet;
  const PriorityPolicy& policy;
  const SimConfig& config;
  Minutes horizon;
  unsigned long long seed;

  Timetable adopted;   // current plan being executed
  Timetable original;  // for delay accounting
  SimReport report;
  long next_seq = 0;
  std::set<SimEvent> queue;

  Runner(const RailwayNetwork& n, const Fleet& f, const PriorityPolicy& p,
         const SimConfig& c, Minutes h, unsigned long long s)
      : net(n), fleet(f), policy(p), config(c), horizon(h), seed(s) {}

  void push(Minutes at, SimEvent::Action action, TrainId train,
            StationId station, int payload = 0) {
    queue.insert({at, next_seq++, action, train, station, payload});
  }

  void log(Message m) {
    check_message_legality(net, m);
    report.message_log.push_back(std::move(m));
  }

  // Movement plus request/grant messaging for the adopted schedule, from
  // a given time onward.
  void schedule_movements(Minutes from) {
    // wipe pending movement events, keep disaster/recovery ones
    for (auto it = queue.begin(); it != queue.end();) {
      bool movement = it->action == SimEvent::Action::Arrival ||
                      it->action == SimEvent::Action::Departure ||
                      it->action == SimEvent::Action::MessageDelivery;
      it = movement && it->at >= from ? queue.erase(it) : std::next(it);
    }
    std::set<TrainId> trains;
    for (const auto& e : adopted) trains.insert(e.train);
    for (TrainId id : trains) {
      auto ents = itinerary_of(adopted, id);
      for (size_t i = 0; i < ents.size(); ++i) {
        const auto* e = ents[i];
        if (e->actual_arrival >= from) {
          push(e->actual_arrival, SimEvent::Action::Arrival, id, e->station);
          // the approach request runs ahead of the arrival
          Minutes ask = std::max(from, e->actual_arrival -
                                           config.request_lookahead);
          if (i > 0) ask = std::max(ask, ents[i - 1]->actual_departure);
          push(ask, SimEvent::Action::MessageDelivery, id, e->station,
               e->actual_arrival);
        }
        if (e->actual_departure >= from)
          push(e->actual_departure, SimEvent::Action::Departure, id,
               e->station);
      }
    }
  }

  void on_request(TrainId train, StationId station, Minutes arrival,
                  Minutes now) {
    Message req;
    req.from = train_agent(train);
    req.to = station_agent(station);
    req.at = now;
    req.kind = MessageKind::ResourceRequest;
    req.station = station;
    req.when = arrival;
    log(req);

    PlatformIndex k = 0;
    for (const auto& e : adopted) {
      if (e.train == train && e.station == station &&
          e.actual_arrival == arrival)
        k = e.platform;
    }
    Message reply;
    reply.from = station_agent(station);
    reply.to = train_agent(train);
    reply.at = now;
    reply.kind = MessageKind::ResourceGrant;
    reply.station = station;
    reply.track = k;
    reply.when = arrival;
    log(reply);
  }

  void flood_recovery(StationId origin, int event_id, Minutes recovery_end,
                      Minutes now) {
    // breadth-first neighbour flooding with per-station dedup
    std::set<StationId> seen{origin};
    std::deque<StationId> frontier{origin};
    while (!frontier.empty()) {
      StationId cur = frontier.front();
      frontier.pop_front();
      for (const auto& [nbr, _] : net.adjacency.at(cur)) {
        Message m;
        m.from = station_agent(cur);
        m.to = station_agent(nbr);
        m.at = now;
        m.kind = MessageKind::RecoveryStatus;
        m.event_id = event_id;
        m.station = origin;
        m.when = recovery_end;
        m.digest = "recovery";
        if (seen.insert(nbr).second) {
          log(m);
          frontier.push_back(nbr);
        }
      }
    }
  }

  SimReport run(const std::vector<DisasterEvent>& events) {
    original = adopted;
    schedule_movements(0);

    std::vector<DisasterEvent> ordered = events;
    std::sort(ordered.begin(), ordered.end(),
              [](const DisasterEvent& a, const DisasterEvent& b) {
                return a.onset < b.onset;
              });
    int event_id = 0;
    for (const auto& ev : ordered)
      push(ev.onset, SimEvent::Action::DisasterOnset, 0, 0, event_id++);

    while (!queue.empty()) {
      SimEvent ev = *queue.begin();
      queue.erase(queue.begin());
      if (ev.at > horizon) {
        throw Error(ErrorCode::HorizonExceeded,
                    "event at minute " + std::to_string(ev.at));
      }
      switch (ev.action) {
        case SimEvent::Action::DisasterOnset:
          on_disaster(ordered[ev.payload], ev.payload, ev.at);
          break;
        case SimEvent::Action::MessageDelivery:
          on_request(ev.train, ev.station, ev.payload, ev.at);
          break;
        case SimEvent::Action::Arrival:
        case SimEvent::Action::Departure:
        case SimEvent::Action::RecoveryComplete:
          break;  // movement bookkeeping; the plan already resolved it
      }
    }

    report.final_schedule = adopted;
    auto delays = total_delay(net, original, adopted);
    report.per_train_delay = delays.per_train;
    report.total_delay = delays.total;
    report.horizon = horizon;
    return report;
  }

  void on_disaster(const DisasterEvent& ev, int event_id, Minutes now) {
    // the affected stations tell neighbours, incoming and outgoing trains
    Minutes buffer = buffer_time(ev);
    auto affected = affected_trains(net, adopted, ev, buffer);
    std::vector<StationId> origins = ev.blocked_stations();
    if (origins.empty()) {
      // track-only outage: both endpoints of each blocked track speak
      std::set<StationId> ends;
      for (TrackId l : ev.blocked_tracks) {
        ends.insert(net.track(l).a);
        ends.insert(net.track(l).b);
      }
      origins.assign(ends.begin(), ends.end());
    }
    for (StationId origin : origins) {
      for (TrainId t : affected) {
        Message m;
        m.from = station_agent(origin);
        m.to = train_agent(t);
        m.at = now;
        m.kind = MessageKind::DisasterNotice;
        m.event_id = event_id;
        m.station = origin;
        m.when = ev.onset;
        m.digest = "disaster";
        log(m);
      }
      for (const auto& [nbr, _] : net.adjacency.at(origin)) {
        Message m;
        m.from = station_agent(origin);
        m.to = station_agent(nbr);
        m.at = now;
        m.kind = MessageKind::DisasterNotice;
        m.event_id = event_id;
        m.station = origin;
        m.when = ev.onset;
        m.digest = "disaster";
        log(m);
      }
    }

    // plan against the outage
    auto result = reschedule(net, fleet, adopted, ev, policy, seed,
                             config.projection);
    for (const auto& d : result.decisions)
      report.decisions.push_back(d);

    Minutes recovery_end = ev.onset + result.recovery_time;
    push(recovery_end, SimEvent::Action::RecoveryComplete, 0,
         origins.empty() ? 0 : origins.front());
    for (StationId origin : origins)
      flood_recovery(origin, event_id, recovery_end, now);

    for (TrainId t : affected) {
      Message m;
      m.from = station_agent(origins.empty() ? net.stations.front().id
                                             : origins.front());
      m.to = train_agent(t);
      m.at = now;
      m.kind = MessageKind::ScheduleUpdate;
      m.event_id = event_id;
      m.when = recovery_end;
      m.digest = "adopt";
      log(m);
    }

    adopted = result.new_schedule;
    schedule_movements(now);
  }
};

}  // namespace

SimReport run_simulation(const RailwayNetwork& net, const Fleet& fleet,
                         const Timetable& timetable,
                         const std::vector<DisasterEvent>& events,
                         const PriorityPolicy& policy, unsigned long long seed,
                         Minutes horizon, const SimConfig& config) {
  for (const auto& e : timetable) {
    if (e.planned_departure > horizon) {
      throw Error(ErrorCode::HorizonExceeded,
                  "timetable runs past the horizon");
    }
  }
  Runner runner(net, fleet, policy, config, horizon, seed);
  runner.adopted = timetable;
  SimReport report = runner.run(events);

  if (config.run_baseline && !events.empty()) {
    Minutes baseline_total = 0;
    Timetable base = timetable;
    for (const auto& ev : events) {
      auto r = centralized_baseline(net, fleet, base, ev, policy, seed,
                                    config.projection, config.baseline);
      base = r.new_schedule;
    }
    baseline_total = total_delay(net, timetable, base).total;
    report.baseline_total_delay = baseline_total;
  }
  return report;
}

}  // namespace rail
