#include "rail/rescheduler.hpp"

#include <algorithm>
#include <random>

namespace rail {

std::vector<StationId> DisasterEvent::blocked_stations() const {
  std::set<StationId> s;
  for (const auto& [station, _] : blocked_platforms) s.insert(station);
  return {s.begin(), s.end()};
}

bool DisasterEvent::blocks_station(StationId s) const {
  for (const auto& [station, _] : blocked_platforms)
    if (station == s) return true;
  return false;
}

Minutes sample_recovery(const RecoveryModel& model, unsigned long long seed) {
  if (model.min_minutes > model.max_minutes || model.min_minutes < 0) {
    throw Error(ErrorCode::InvalidInterval,
                "[" + std::to_string(model.min_minutes) + ", " +
                    std::to_string(model.max_minutes) + "]");
  }
  if (model.min_minutes == model.max_minutes) return model.min_minutes;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Minutes> dist(model.min_minutes,
                                              model.max_minutes);
  return dist(rng);
}

Minutes buffer_time(const DisasterEvent& event) {
  const RecoveryModel& m = event.recovery;
  if (m.min_minutes > m.max_minutes)
    throw Error(ErrorCode::InvalidInterval, "recovery interval");
  return event.onset + (m.min_minutes + m.max_minutes) / 2;
}

const char* decision_kind_name(DecisionKind k) {
  switch (k) {
    case DecisionKind::Retime: return "Retime";
    case DecisionKind::Reorder: return "Reorder";
    case DecisionKind::Reroute: return "Reroute";
    case DecisionKind::NoChange: return "NoChange";
  }
  return "?";
}

const char* case_label_name(CaseLabel c) {
  switch (c) {
    case CaseLabel::C1_1_1: return "1.1.1";
    case CaseLabel::C1_1_2: return "1.1.2";
    case CaseLabel::C1_2: return "1.2";
    case CaseLabel::C2: return "2";
    case CaseLabel::C3_1: return "3.1";
    case CaseLabel::C3_2: return "3.2";
    case CaseLabel::None: return "-";
  }
  return "?";
}

ScheduleEntry minimize_station_delay(const ScheduleEntry& entry,
                                     Minutes incurred_arrival_delay,
                                     Minutes min_dwell) {
  ScheduleEntry out = entry;
  out.actual_arrival = entry.planned_arrival + incurred_arrival_delay;
  Minutes floor = entry.stopping() ? min_dwell : 0;
  floor = std::min<Minutes>(floor, entry.planned_dwell());
  out.actual_departure =
      std::max(entry.planned_departure, out.actual_arrival + floor);
  return out;
}

std::vector<ScheduleEntry> minimize_track_delay(
    const RailwayNetwork& net, std::vector<ScheduleEntry> leg_entries) {
  for (size_t i = 1; i < leg_entries.size(); ++i) {
    auto& prev = leg_entries[i - 1];
    auto& next = leg_entries[i];
    TrackId l = next.track_from_prev;
    Minutes journey = l != 0
                          ? net.track(l).journey_time
                          : net.min_journey(prev.station, next.station).value();
    next.actual_arrival = prev.actual_departure + journey;
    if (next.actual_departure < next.actual_arrival)
      next.actual_departure = next.actual_arrival;
  }
  return leg_entries;
}

OccupancyState occupancy_at(const RailwayNetwork& net, const Timetable& schedule,
                            Minutes t) {
  OccupancyState occ;
  std::set<TrainId> trains;
  for (const auto& e : schedule) trains.insert(e.train);
  for (TrainId train : trains) {
    auto ents = itinerary_of(schedule, train);
    for (size_t i = 0; i < ents.size(); ++i) {
      const auto* e = ents[i];
      if (t >= e->actual_arrival && t < e->actual_departure) {
        occ.occupy_platform(train, e->station,
                            e->platform > 0 ? e->platform : 1);
      }
      if (i + 1 < ents.size()) {
        const auto* nxt = ents[i + 1];
        if (t >= e->actual_departure && t < nxt->actual_arrival) {
          TrackId l = nxt->track_from_prev;
          if (l == 0) {
            auto ts = net.tracks_between(e->station, nxt->station);
            l = ts.empty() ? 0 : ts.front();
          }
          if (l != 0) occ.occupy_track(train, nxt->station, l);
        }
      }
    }
  }
  return occ;
}

namespace {

struct BlockedWindow {
  Minutes from = 0;
  Minutes to = 0;  // half-open
  bool covers(Minutes t) const { return t >= from && t < to; }
  bool overlaps(Minutes a, Minutes b) const { return a < to && from < b; }
};

struct Blockage {
  std::map<std::pair<StationId, PlatformIndex>, BlockedWindow> platforms;
  std::map<TrackId, BlockedWindow> tracks;

  static Blockage from_event(const DisasterEvent& event, Minutes recovery_end) {
    Blockage b;
    for (const auto& key : event.blocked_platforms)
      b.platforms[key] = {event.onset, recovery_end};
    for (TrackId l : event.blocked_tracks)
      b.tracks[l] = {event.onset, recovery_end};
    return b;
  }
  bool platform_blocked(StationId s, PlatformIndex k, Minutes t) const {
    auto it = platforms.find({s, k});
    return it != platforms.end() && it->second.covers(t);
  }
  // Entry-time rule: a train on the track when the outage starts keeps
  // rolling; only new entries during the window are barred.
  bool track_blocked(TrackId l, Minutes entry) const {
    auto it = tracks.find(l);
    return it != tracks.end() && it->second.covers(entry);
  }
  int usable_platforms(const RailwayNetwork& net, StationId s, Minutes t) const {
    int p = net.station(s).platform_count;
    int blocked = 0;
    for (PlatformIndex k = 1; k <= p; ++k)
      if (platform_blocked(s, k, t)) ++blocked;
    return p - blocked;
  }
};

Minutes lateness(Minutes now, Minutes planned) {
  return std::max(0, now - planned);
}

}  // namespace

std::vector<TrainId> affected_trains(const RailwayNetwork& net,
                                     const Timetable& timetable,
                                     const DisasterEvent& event,
                                     Minutes buffer_deadline) {
  std::set<TrainId> out;
  std::set<TrainId> trains;
  for (const auto& e : timetable) trains.insert(e.train);
  for (TrainId train : trains) {
    auto ents = itinerary_of(timetable, train);
    for (size_t i = 0; i < ents.size(); ++i) {
      const auto* e = ents[i];
      if (event.blocks_station(e->station)) {
        bool arrives_in_window = e->planned_arrival >= event.onset &&
                                 e->planned_arrival <= buffer_deadline;
        bool departs_in_window = e->planned_departure >= event.onset &&
                                 e->planned_departure <= buffer_deadline;
        if (arrives_in_window || departs_in_window) out.insert(train);
      }
      if (i + 1 < ents.size()) {
        const auto* nxt = ents[i + 1];
        auto connecting = net.tracks_between(e->station, nxt->station);
        bool leg_blocked = false;
        for (TrackId l : connecting) {
          if (event.blocked_tracks.count(l)) leg_blocked = true;
        }
        // A leg over a blocked track matters when every parallel track is
        // blocked or the train would enter during the outage window.
        if (leg_blocked && e->planned_departure >= event.onset &&
            e->planned_departure <= buffer_deadline) {
          out.insert(train);
        }
      }
    }
  }
  return {out.begin(), out.end()};
}

namespace {

// ---------------------------------------------------------------------
// Projection: event-driven execution of all itineraries against platform
// and track resources, with queued requests served in priority order.
// ---------------------------------------------------------------------

struct ItineraryStep {
  StationId station = 0;
  Minutes planned_arrival = 0;
  Minutes planned_departure = 0;
  bool stopping = false;
  bool synthetic = false;  // introduced by a reroute
  TrackId fixed_track = 0; // reroute pins the track to use into this step
};

struct TrainPlan {
  Train info;
  std::vector<ItineraryStep> steps;
};

enum class Phase { NotStarted, AtPlatform, OnTrack, WaitingSpawn, Done };

struct TrainState {
  Phase phase = Phase::NotStarted;
  size_t step = 0;           // current/last reached step index
  PlatformIndex platform = 0;
  TrackId track = 0;
  Minutes ready_at = 0;      // when the pending request became active
  std::vector<Minutes> x_arr;
  std::vector<Minutes> x_dep;
  std::vector<PlatformIndex> x_platform;
  std::vector<TrackId> x_track;  // track used to reach step i
};

struct ProjectionPolicy {
  bool priority_service = true;     // false: first-come-first-served
  Minutes freeze_until = -1;        // affected trains hold until this time
  std::set<TrainId> frozen;         // trains subject to the freeze
};

class ProjectionEngine {
 public:
  ProjectionEngine(const RailwayNetwork& net,
                   const std::map<TrainId, TrainPlan>& plans,
                   const Blockage& blockage, const PriorityPolicy& policy,
                   const ProjectionConfig& config, const ProjectionPolicy& mode)
      : net_(net),
        plans_(plans),
        blockage_(blockage),
        policy_(policy),
        config_(config),
        mode_(mode) {}

  // Runs to completion and returns per-train actual times.
  std::map<TrainId, TrainState> run() {
    for (const auto& [id, plan] : plans_) {
      TrainState st;
      st.x_arr.assign(plan.steps.size(), 0);
      st.x_dep.assign(plan.steps.size(), 0);
      st.x_platform.assign(plan.steps.size(), 0);
      st.x_track.assign(plan.steps.size(), 0);
      states_[id] = st;
      if (!plan.steps.empty())
        push_event(plan.steps.front().planned_arrival, id, EventKind::Spawn);
    }
    if (mode_.freeze_until >= 0) push_event(mode_.freeze_until, 0, EventKind::Wake);

    while (!events_.empty()) {
      auto ev = *events_.begin();
      events_.erase(events_.begin());
      now_ = ev.at;
      if (now_ > config_.horizon) {
        throw Error(ErrorCode::InfeasibleAfterRecovery,
                    "projection passed the horizon at minute " +
                        std::to_string(now_));
      }
      process_pending_releases();
      dispatch(ev);
      grant_pass();
    }
    for (const auto& [id, st] : states_) {
      if (st.phase != Phase::Done) {
        throw Error(ErrorCode::InfeasibleAfterRecovery,
                    "train " + std::to_string(id) + " never finished");
      }
    }
    return states_;
  }

 private:
  enum class EventKind { Spawn, TryDepart, Arrive, Wake };
  struct Event {
    Minutes at;
    long seq;
    TrainId train;
    EventKind kind;
    bool operator<(const Event& o) const {
      return at != o.at ? at < o.at : seq < o.seq;
    }
  };

  void push_event(Minutes at, TrainId train, EventKind kind) {
    events_.insert({at, next_seq_++, train, kind});
  }

  bool frozen_now(TrainId train) const {
    return mode_.freeze_until >= 0 && now_ < mode_.freeze_until &&
           mode_.frozen.count(train) > 0;
  }

  void dispatch(const Event& ev) {
    switch (ev.kind) {
      case EventKind::Spawn: {
        auto& st = states_.at(ev.train);
        st.phase = Phase::WaitingSpawn;
        st.ready_at = now_;
        platform_queue_[plans_.at(ev.train).steps.front().station].insert(
            ev.train);
        break;
      }
      case EventKind::TryDepart: {
        auto& st = states_.at(ev.train);
        if (st.phase != Phase::AtPlatform) break;
        st.ready_at = now_;
        departure_queue_[plans_.at(ev.train).steps[st.step].station].insert(
            ev.train);
        break;
      }
      case EventKind::Arrive: {
        auto& st = states_.at(ev.train);
        st.ready_at = now_;
        // Keeps holding the track until a platform is granted.
        platform_queue_[plans_.at(ev.train).steps[st.step + 1].station].insert(
            ev.train);
        break;
      }
      case EventKind::Wake:
        break;
    }
  }

  // Delay used for tie-breaks and the delayed-order trigger.
  Minutes pending_delay(TrainId train) const {
    const auto& st = states_.at(train);
    const auto& plan = plans_.at(train);
    if (st.phase == Phase::AtPlatform)
      return lateness(now_, plan.steps[st.step].planned_departure);
    if (st.phase == Phase::OnTrack)
      return lateness(now_, plan.steps[st.step + 1].planned_arrival);
    if (st.phase == Phase::WaitingSpawn)
      return lateness(now_, plan.steps.front().planned_arrival);
    return 0;
  }

  // Who goes first among queued requesters.
  std::vector<TrainId> service_order(const std::set<TrainId>& queue) const {
    std::vector<TrainId> ready;
    for (TrainId t : queue) {
      if (!frozen_now(t)) ready.push_back(t);
    }
    if (!mode_.priority_service) {
      std::sort(ready.begin(), ready.end(), [&](TrainId a, TrainId b) {
        Minutes pa = pending_planned_time(a), pb = pending_planned_time(b);
        return pa != pb ? pa < pb : a < b;
      });
      return ready;
    }
    std::vector<std::pair<Train, Minutes>> contenders;
    for (TrainId t : ready)
      contenders.push_back({plans_.at(t).info, pending_delay(t)});
    bool delayed_ctx = delayed_context_active(policy_, contenders);
    std::sort(ready.begin(), ready.end(), [&](TrainId a, TrainId b) {
      return higher_priority(policy_, plans_.at(a).info, pending_delay(a),
                             plans_.at(b).info, pending_delay(b), now_,
                             delayed_ctx);
    });
    return ready;
  }

  Minutes pending_planned_time(TrainId train) const {
    const auto& st = states_.at(train);
    const auto& plan = plans_.at(train);
    if (st.phase == Phase::AtPlatform)
      return plan.steps[st.step].planned_departure;
    if (st.phase == Phase::OnTrack)
      return plan.steps[st.step + 1].planned_arrival;
    return plan.steps.front().planned_arrival;
  }

  bool platform_free(StationId s, PlatformIndex k) const {
    auto it = platform_holder_.find({s, k});
    return it == platform_holder_.end() || it->second == 0;
  }

  // Lowest usable free platform index, honouring blocked windows.
  PlatformIndex find_platform(StationId s) const {
    int p = net_.station(s).platform_count;
    for (PlatformIndex k = 1; k <= p; ++k) {
      if (blockage_.platform_blocked(s, k, now_)) continue;
      if (platform_free(s, k)) return k;
    }
    return 0;
  }

  bool track_available(TrackId l, Minutes depart) const {
    auto holder = track_holder_.find(l);
    if (holder != track_holder_.end() && holder->second != 0) return false;
    if (blockage_.track_blocked(l, depart)) return false;
    auto last = track_last_entry_.find(l);
    if (last != track_last_entry_.end() &&
        depart < last->second + config_.headway)
      return false;
    return true;
  }

  // Candidate tracks for a leg, preferred role first.
  std::vector<TrackId> leg_candidates(TrainId train, size_t from_step) const {
    const auto& plan = plans_.at(train);
    const auto& a = plan.steps[from_step];
    const auto& b = plan.steps[from_step + 1];
    if (b.fixed_track != 0) return {b.fixed_track};
    auto all = net_.tracks_between(a.station, b.station);
    TrackRole wanted = a.station < b.station ? TrackRole::Up : TrackRole::Down;
    std::stable_sort(all.begin(), all.end(), [&](TrackId x, TrackId y) {
      auto score = [&](TrackId l) {
        TrackRole r = net_.track(l).role;
        if (r == wanted) return 0;
        if (r == TrackRole::General) return 1;
        return 2;
      };
      return score(x) < score(y);
    });
    return all;
  }

  void grant_pass() {
    bool progressed = true;
    while (progressed) {
      progressed = false;
      // arrivals first: their grants free tracks for departures
      for (auto& [station, queue] : platform_queue_) {
        if (queue.empty()) continue;
        bool stalled = false;
        for (TrainId train : service_order(queue)) {
          PlatformIndex k = find_platform(station);
          if (k == 0) {
            stalled = true;
            break;  // nobody else can enter either
          }
          grant_platform(train, station, k);
          queue.erase(train);
          progressed = true;
        }
        if (stalled) schedule_platform_retry(station);
      }
      for (auto& [station, queue] : departure_queue_) {
        if (queue.empty()) continue;
        // Trains waiting for different outbound legs do not contend;
        // order strictly within each leg only.
        std::map<StationId, std::set<TrainId>> by_leg;
        for (TrainId t : queue)
          by_leg[plans_.at(t).steps[states_.at(t).step + 1].station].insert(t);
        for (auto& [next_station, group] : by_leg) {
          for (TrainId train : service_order(group)) {
            auto& st = states_.at(train);
            TrackId granted = 0;
            for (TrackId l : leg_candidates(train, st.step)) {
              if (track_available(l, now_)) {
                granted = l;
                break;
              }
            }
            if (granted == 0) {
              schedule_retry(train, st.step);
              // No overtaking within one leg's queue.
              break;
            }
            grant_departure(train, granted);
            queue.erase(train);
            progressed = true;
          }
        }
      }
    }
  }

  void grant_platform(TrainId train, StationId station, PlatformIndex k) {
    auto& st = states_.at(train);
    const auto& plan = plans_.at(train);
    size_t step = st.phase == Phase::WaitingSpawn ? 0 : st.step + 1;
    if (st.phase == Phase::OnTrack) {
      // release the inbound track
      track_holder_[st.track] = 0;
      st.track = 0;
    }
    platform_holder_[{station, k}] = train;
    st.phase = Phase::AtPlatform;
    st.step = step;
    st.platform = k;
    const auto& s = plan.steps[step];
    st.x_arr[step] = std::max(now_, s.planned_arrival);
    st.x_platform[step] = k;

    if (step + 1 >= plan.steps.size()) {
      // terminal: dwell out, then leave the network
      Minutes dep = std::max(s.planned_departure, st.x_arr[step]);
      st.x_dep[step] = dep;
      release_platform_at(train, station, k, dep);
      return;
    }
    Minutes floor = s.stopping ? std::min<Minutes>(config_.min_dwell,
                                                   s.planned_departure -
                                                       s.planned_arrival)
                               : 0;
    Minutes dep = std::max(s.planned_departure, st.x_arr[step] + floor);
    push_event(dep, train, EventKind::TryDepart);
  }

  // Terminal release happens in the future; model it as a wake event and
  // a scheduled clearing.
  void release_platform_at(TrainId train, StationId station, PlatformIndex k,
                           Minutes when) {
    pending_release_.insert({when, next_seq_++, train, station, k});
    push_event(when, train, EventKind::Wake);
    auto& st = states_.at(train);
    st.phase = Phase::Done;
  }

  void grant_departure(TrainId train, TrackId l) {
    auto& st = states_.at(train);
    const auto& plan = plans_.at(train);
    const auto& s = plan.steps[st.step];
    // vacate the platform
    platform_holder_[{s.station, st.platform}] = 0;
    st.x_dep[st.step] = now_;
    st.platform = 0;
    st.phase = Phase::OnTrack;
    st.track = l;
    st.x_track[st.step + 1] = l;
    track_holder_[l] = train;
    track_last_entry_[l] = now_;
    Minutes journey = net_.track(l).journey_time;
    // never earlier than the timetable allows
    Minutes arr = std::max(now_ + journey,
                           plan.steps[st.step + 1].planned_arrival);
    push_event(arr, train, EventKind::Arrive);
  }

  // A platform pool can reopen without any release event when its
  // blocked window closes.
  void schedule_platform_retry(StationId station) {
    Minutes best = -1;
    int p = net_.station(station).platform_count;
    for (PlatformIndex k = 1; k <= p; ++k) {
      auto it = blockage_.platforms.find({station, k});
      if (it != blockage_.platforms.end() && it->second.covers(now_))
        best = best < 0 ? it->second.to : std::min(best, it->second.to);
    }
    if (best > now_) push_event(best, 0, EventKind::Wake);
  }

  void schedule_retry(TrainId train, size_t step) {
    // Wake when a blocked window closes or a headway expires; holder
    // releases trigger grant passes anyway.
    Minutes best = -1;
    for (TrackId l : leg_candidates(train, step)) {
      auto itb = blockage_.tracks.find(l);
      if (itb != blockage_.tracks.end() && itb->second.covers(now_))
        best = best < 0 ? itb->second.to : std::min(best, itb->second.to);
      auto itl = track_last_entry_.find(l);
      if (itl != track_last_entry_.end() &&
          now_ < itl->second + config_.headway) {
        Minutes t = itl->second + config_.headway;
        best = best < 0 ? t : std::min(best, t);
      }
    }
    if (best > now_) push_event(best, train, EventKind::Wake);
  }

  void process_pending_releases() {
    for (auto it = pending_release_.begin(); it != pending_release_.end();) {
      if (it->when <= now_) {
        platform_holder_[{it->station, it->platform}] = 0;
        it = pending_release_.erase(it);
      } else {
        ++it;
      }
    }
  }

  struct PendingRelease {
    Minutes when;
    long seq;
    TrainId train;
    StationId station;
    PlatformIndex platform;
    bool operator<(const PendingRelease& o) const {
      return std::tie(when, seq) < std::tie(o.when, o.seq);
    }
  };

  const RailwayNetwork& net_;
  const std::map<TrainId, TrainPlan>& plans_;
  const Blockage& blockage_;
  const PriorityPolicy& policy_;
  const ProjectionConfig& config_;
  const ProjectionPolicy& mode_;

  Minutes now_ = 0;
  long next_seq_ = 0;
  std::set<Event> events_;
  std::map<TrainId, TrainState> states_;
  std::map<std::pair<StationId, PlatformIndex>, TrainId> platform_holder_;
  std::map<TrackId, TrainId> track_holder_;
  std::map<TrackId, Minutes> track_last_entry_;
  std::map<StationId, std::set<TrainId>> platform_queue_;
  std::map<StationId, std::set<TrainId>> departure_queue_;
  std::set<PendingRelease> pending_release_;
};

// Builds per-train plans from a timetable, applying reroute decisions.
std::map<TrainId, TrainPlan> build_plans(
    const RailwayNetwork& net, const Timetable& timetable,
    const std::map<TrainId, Train>& roster,
    const std::vector<RescheduleDecision>& decisions) {
  std::map<TrainId, TrainPlan> plans;
  std::set<TrainId> trains;
  for (const auto& e : timetable) trains.insert(e.train);
  for (TrainId id : trains) {
    TrainPlan plan;
    auto itr = roster.find(id);
    plan.info = itr != roster.end() ? itr->second
                                    : Train{id, std::to_string(id),
                                            TrainCategory::Passenger};
    for (const auto* e : itinerary_of(timetable, id)) {
      ItineraryStep s;
      s.station = e->station;
      s.planned_arrival = e->planned_arrival;
      s.planned_departure = e->planned_departure;
      s.stopping = e->stopping();
      s.fixed_track = e->track_from_prev;
      plan.steps.push_back(s);
    }
    plans[id] = std::move(plan);
  }

  for (const auto& d : decisions) {
    if (d.kind != DecisionKind::Reroute || !d.new_route) continue;
    auto& plan = plans.at(d.train);
    const Route& route = *d.new_route;
    // The new route starts at some station already on the plan; keep the
    // prefix, then splice the route in with pass-through steps.
    size_t anchor = 0;
    bool found = false;
    for (size_t i = 0; i < plan.steps.size(); ++i) {
      if (plan.steps[i].station == route.stations.front()) {
        anchor = i;
        found = true;
        break;
      }
    }
    if (!found) continue;
    std::map<StationId, ItineraryStep> old_steps;
    for (size_t i = anchor; i < plan.steps.size(); ++i)
      old_steps[plan.steps[i].station] = plan.steps[i];
    std::vector<ItineraryStep> tail;
    Minutes cursor = plan.steps[anchor].planned_departure;
    for (size_t i = 1; i < route.stations.size(); ++i) {
      cursor += net.track(route.tracks[i - 1]).journey_time;
      ItineraryStep s;
      s.station = route.stations[i];
      auto old = old_steps.find(s.station);
      if (old != old_steps.end()) {
        s = old->second;
        // keep original planned times where the route rejoins
      } else {
        s.planned_arrival = cursor;
        s.planned_departure = cursor;
        s.stopping = false;
        s.synthetic = true;
      }
      s.fixed_track = route.tracks[i - 1];
      cursor = std::max(cursor, s.planned_departure);
      tail.push_back(s);
    }
    plan.steps.resize(anchor + 1);
    plan.steps.insert(plan.steps.end(), tail.begin(), tail.end());
  }
  return plans;
}

Timetable schedule_from_states(const std::map<TrainId, TrainPlan>& plans,
                               const std::map<TrainId, TrainState>& states) {
  Timetable out;
  for (const auto& [id, plan] : plans) {
    const auto& st = states.at(id);
    for (size_t i = 0; i < plan.steps.size(); ++i) {
      ScheduleEntry e;
      e.train = id;
      e.station = plan.steps[i].station;
      // Synthetic reroute steps measure no local delay.
      e.planned_arrival =
          plan.steps[i].synthetic ? st.x_arr[i] : plan.steps[i].planned_arrival;
      e.planned_departure = plan.steps[i].synthetic
                                ? st.x_dep[i]
                                : plan.steps[i].planned_departure;
      e.actual_arrival = st.x_arr[i];
      e.actual_departure = st.x_dep[i];
      e.platform = st.x_platform[i];
      e.track_from_prev = st.x_track[i];
      out.push_back(e);
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ScheduleEntry& a, const ScheduleEntry& b) {
                     if (a.train != b.train) return a.train < b.train;
                     return a.planned_arrival < b.planned_arrival;
                   });
  return out;
}

// Free usable platform at `station` around time t, judged against the
// reference schedule's occupancy and the blocked windows. The asking
// train's own holds do not count against it.
bool platform_free_at(const RailwayNetwork& net, const Timetable& schedule,
                      const Blockage& blockage, StationId station, Minutes t,
                      TrainId asking = 0) {
  OccupancyState occ = occupancy_at(net, schedule, t);
  std::set<PlatformIndex> held;
  for (const auto& h : occ.platform_holds_at(station)) {
    if (h.train != asking) held.insert(h.platform);
  }
  int p = net.station(station).platform_count;
  for (PlatformIndex k = 1; k <= p; ++k) {
    if (blockage.platform_blocked(station, k, t)) continue;
    if (!held.count(k)) return true;
  }
  return false;
}

Minutes earliest_platform_time(const RailwayNetwork& net,
                               const Timetable& schedule,
                               const Blockage& blockage, StationId station,
                               Minutes from, Minutes horizon,
                               TrainId asking = 0) {
  for (Minutes t = from; t <= horizon; ++t) {
    if (platform_free_at(net, schedule, blockage, station, t, asking)) return t;
  }
  return horizon;
}

// Remaining legs of a train from `anchor` onward, judged against blocked
// windows only; availability in the route-product sense.
bool remaining_route_available(const RailwayNetwork& net, const Timetable& tt,
                               const DisasterEvent& event, TrainId train,
                               StationId anchor, Minutes recovery_end) {
  Blockage blockage = Blockage::from_event(event, recovery_end);
  auto ents = itinerary_of(tt, train);
  bool seen = false;
  for (size_t i = 0; i < ents.size(); ++i) {
    if (ents[i]->station == anchor) seen = true;
    if (!seen || i + 1 >= ents.size()) continue;
    const auto* a = ents[i];
    const auto* b = ents[i + 1];
    auto connecting = net.tracks_between(a->station, b->station);
    bool leg_ok = false;
    for (TrackId l : connecting) {
      if (!blockage.track_blocked(l, a->planned_departure)) leg_ok = true;
    }
    if (!leg_ok) return false;
    if (blockage.usable_platforms(net, b->station, b->planned_arrival) < 1 &&
        b->stopping())
      return false;
  }
  return true;
}

// First enumerated alternative route whose tracks and stations dodge the
// blocked windows across the projected traversal.
std::optional<Route> usable_alternative_route(
    const RailwayNetwork& net, const Timetable& tt, const DisasterEvent& event,
    TrainId train, StationId from, Minutes depart, Minutes recovery_end,
    int max_candidates) {
  auto ents = itinerary_of(tt, train);
  if (ents.empty()) return std::nullopt;
  StationId dest = ents.back()->station;
  if (from == dest) return std::nullopt;
  Blockage blockage = Blockage::from_event(event, recovery_end);

  std::vector<StationId> original_tail;
  bool seen = false;
  for (const auto* e : ents) {
    if (e->station == from) seen = true;
    if (seen) original_tail.push_back(e->station);
  }

  std::vector<Route> candidates;
  try {
    candidates = enumerate_routes(net, from, dest, max_candidates);
  } catch (const Error&) {
    return std::nullopt;
  }
  for (const auto& r : candidates) {
    if (r.stations == original_tail) continue;  // not an alternative
    Minutes cursor = depart;
    bool ok = true;
    for (size_t i = 0; i + 1 < r.stations.size(); ++i) {
      if (blockage.track_blocked(r.tracks[i], cursor)) {
        ok = false;
        break;
      }
      cursor += net.track(r.tracks[i]).journey_time;
      if (blockage.usable_platforms(net, r.stations[i + 1], cursor) < 1) {
        ok = false;
        break;
      }
    }
    if (ok) return r;
  }
  return std::nullopt;
}

// Contenders for the blocked station's resources inside the buffer
// window, with their current delays.
std::vector<std::pair<Train, Minutes>> contention_set(
    const RailwayNetwork& net, const Fleet& fleet, const Timetable& tt,
    const DisasterEvent& event, Minutes buffer_deadline) {
  std::vector<std::pair<Train, Minutes>> out;
  for (TrainId id : affected_trains(net, tt, event, buffer_deadline)) {
    Minutes delay = 0;
    for (const auto* e : itinerary_of(tt, id))
      delay = std::max(delay, e->actual_arrival - e->planned_arrival);
    out.push_back({fleet.at(id), delay});
  }
  return out;
}

bool top_priority_among(const PriorityPolicy& policy, const Train& train,
                        Minutes train_delay,
                        const std::vector<std::pair<Train, Minutes>>& others,
                        Minutes t) {
  bool ctx = delayed_context_active(policy, others);
  for (const auto& [other, delay] : others) {
    if (other.id == train.id) continue;
    if (higher_priority(policy, other, delay, train, train_delay, t, ctx))
      return false;
  }
  return true;
}

}  // namespace

Fleet Fleet::of(const std::vector<Train>& list) {
  Fleet f;
  for (const auto& t : list) f.trains[t.id] = t;
  return f;
}

const Train& Fleet::at(TrainId id) const {
  auto it = trains.find(id);
  if (it == trains.end())
    throw Error(ErrorCode::UnknownTrain, std::to_string(id));
  return it->second;
}

Minutes terminal_delay(const RailwayNetwork& net, const Timetable& original,
                       const Timetable& result, TrainId train) {
  (void)net;
  auto orig = itinerary_of(original, train);
  auto got = itinerary_of(result, train);
  if (orig.empty() || got.empty())
    throw Error(ErrorCode::ScheduleMismatch, "train " + std::to_string(train));
  if (orig.back()->station != got.back()->station)
    throw Error(ErrorCode::ScheduleMismatch,
                "terminal station changed for train " + std::to_string(train));
  return got.back()->actual_arrival - orig.back()->planned_arrival;
}

TotalDelayReport total_delay(const RailwayNetwork& net,
                             const Timetable& original,
                             const Timetable& result) {
  std::set<TrainId> a, b;
  for (const auto& e : original) a.insert(e.train);
  for (const auto& e : result) b.insert(e.train);
  if (a != b) throw Error(ErrorCode::ScheduleMismatch, "train sets differ");

  TotalDelayReport report;
  for (TrainId train : a) {
    Minutes d = terminal_delay(net, original, result, train);
    report.per_train[train] = d;
    report.total += d;

    // Split by matched stations: dwell stretch counts toward the station
    // component, the remainder rode in on the tracks.
    std::map<StationId, const ScheduleEntry*> orig_by_station;
    for (const auto* e : itinerary_of(original, train))
      orig_by_station[e->station] = e;
    Minutes station_sum = 0;
    for (const auto* e : itinerary_of(result, train)) {
      auto it = orig_by_station.find(e->station);
      if (it == orig_by_station.end()) continue;
      Minutes arr_late = e->actual_arrival - it->second->planned_arrival;
      Minutes dep_late = e->actual_departure - it->second->planned_departure;
      station_sum += dep_late - arr_late;
    }
    report.station_component[train] = station_sum;
    report.track_component[train] = d - station_sum;
  }
  return report;
}

RescheduleDecision handle_case1(const RailwayNetwork& net,
                                const Timetable& schedule,
                                const OccupancyState& occ,
                                const DisasterEvent& event, TrainId train,
                                const CaseContext& ctx) {
  // Eq-8 style precondition: the train is on a track heading somewhere.
  std::optional<OccupancyState::TrackHold> hold;
  for (const auto& h : occ.tracks)
    if (h.train == train) hold = h;
  if (!hold)
    throw Error(ErrorCode::TrainNotOnApproach,
                "train " + std::to_string(train) + " is not on a track");
  StationId target = hold->station;

  Minutes recovery_end = event.onset + ctx.recovery_time;
  Blockage blockage = Blockage::from_event(event, recovery_end);

  const ScheduleEntry* arrival_entry = nullptr;
  for (const auto* e : itinerary_of(schedule, train)) {
    if (e->station == target) arrival_entry = e;
  }
  if (!arrival_entry)
    throw Error(ErrorCode::TrainNotOnApproach,
                "no scheduled stop at the approached station");
  Minutes arrives = arrival_entry->actual_arrival;

  RescheduleDecision d;
  d.train = train;

  bool platform_free =
      platform_free_at(net, schedule, blockage, target, arrives, train);
  auto contenders = contention_set(net, ctx.fleet, schedule, event, ctx.buffer);
  bool top = top_priority_among(ctx.policy, ctx.fleet.at(train),
                                arrives - arrival_entry->planned_arrival,
                                contenders, arrives);

  if (platform_free && top) {
    if (remaining_route_available(net, schedule, event, train, target,
                                  recovery_end)) {
      d.kind = DecisionKind::NoChange;
      d.case_label = CaseLabel::None;
      d.note = "admitted; onward route clear";
      return d;
    }
    auto alt = usable_alternative_route(net, schedule, event, train, target,
                                        arrival_entry->planned_departure,
                                        recovery_end,
                                        ctx.config.max_route_candidates);
    if (alt) {
      d.kind = DecisionKind::Reroute;
      d.case_label = CaseLabel::C1_1_1;
      d.new_route = alt;
      d.note = "rerouted from the reached station";
      return d;
    }
    d.kind = DecisionKind::Retime;
    d.case_label = CaseLabel::C1_1_2;
    d.added_delay = std::max(
        0, event.onset + ctx.recovery_time - arrival_entry->planned_departure);
    d.note = "held at the station until recovery";
    return d;
  }

  d.kind = DecisionKind::Retime;
  d.case_label = CaseLabel::C1_2;
  Minutes granted = earliest_platform_time(net, schedule, blockage, target,
                                           arrives, ctx.config.horizon, train);
  d.added_delay = granted - arrival_entry->planned_arrival;
  d.note = "held on the approach track";
  return d;
}

std::vector<RescheduleDecision> handle_case2(const RailwayNetwork& net,
                                             const Timetable& schedule,
                                             const OccupancyState& occ,
                                             const DisasterEvent& event,
                                             StationId station,
                                             const CaseContext& ctx) {
  if (!event.blocks_station(station)) {
    throw Error(ErrorCode::PreconditionUnsatisfied,
                "station has no blocked platform");
  }
  // The departure track must be clear of the outage.
  bool track_clear = false;
  for (const auto& [nbr, l] : net.adjacency.at(station)) {
    (void)nbr;
    if (!event.blocked_tracks.count(l) && occ.holders_of_track(l).empty())
      track_clear = true;
  }
  if (!track_clear) {
    throw Error(ErrorCode::PreconditionUnsatisfied,
                "no free departure track");
  }

  // Waiting set: departures from this station inside the buffer window.
  struct Waiting {
    TrainId train;
    Minutes planned_departure;
  };
  std::vector<Waiting> waiting;
  std::set<TrainId> trains;
  for (const auto& e : schedule) trains.insert(e.train);
  for (TrainId id : trains) {
    for (const auto* e : itinerary_of(schedule, id)) {
      if (e->station != station) continue;
      if (e->planned_departure >= event.onset &&
          e->planned_departure <= ctx.buffer) {
        waiting.push_back({id, e->planned_departure});
      }
    }
  }
  if (waiting.empty()) return {};

  Minutes t0 = waiting.front().planned_departure;
  for (const auto& w : waiting) t0 = std::min(t0, w.planned_departure);

  std::vector<std::pair<Train, Minutes>> contenders;
  for (const auto& w : waiting) contenders.push_back({ctx.fleet.at(w.train), 0});
  bool delayed_ctx = delayed_context_active(ctx.policy, contenders);

  std::sort(waiting.begin(), waiting.end(), [&](const Waiting& a,
                                                const Waiting& b) {
    const Train& ta = ctx.fleet.at(a.train);
    const Train& tb = ctx.fleet.at(b.train);
    if (higher_priority(ctx.policy, ta, 0, tb, 0, t0, delayed_ctx)) return true;
    if (higher_priority(ctx.policy, tb, 0, ta, 0, t0, delayed_ctx)) return false;
    return a.train < b.train;
  });

  std::vector<RescheduleDecision> out;
  Minutes last_departure = -1;
  for (size_t pos = 0; pos < waiting.size(); ++pos) {
    Minutes dep = waiting[pos].planned_departure;
    if (last_departure >= 0)
      dep = std::max(dep, last_departure + ctx.config.headway);
    RescheduleDecision d;
    d.train = waiting[pos].train;
    d.kind = DecisionKind::Reorder;
    d.case_label = CaseLabel::C2;
    d.departure_position = static_cast<int>(pos);
    d.added_delay = dep - waiting[pos].planned_departure;
    d.note = "departure order by priority";
    out.push_back(d);
    last_departure = dep;
  }
  std::sort(out.begin(), out.end(),
            [](const RescheduleDecision& a, const RescheduleDecision& b) {
              return a.train < b.train;
            });
  return out;
}

RescheduleDecision handle_case3(const RailwayNetwork& net,
                                const Timetable& schedule,
                                const OccupancyState& occ,
                                const DisasterEvent& event, TrainId train,
                                const CaseContext& ctx) {
  // Not at the blocked station, not on a track adjacent to it.
  for (const auto& h : occ.platforms) {
    if (h.train == train && event.blocks_station(h.station))
      throw Error(ErrorCode::PreconditionUnsatisfied,
                  "train already at the blocked station");
  }
  for (const auto& h : occ.tracks) {
    if (h.train == train && event.blocks_station(h.station))
      throw Error(ErrorCode::PreconditionUnsatisfied,
                  "train already approaching the blocked station");
  }

  Minutes recovery_end = event.onset + ctx.recovery_time;
  Blockage blockage = Blockage::from_event(event, recovery_end);
  auto ents = itinerary_of(schedule, train);
  auto contenders = contention_set(net, ctx.fleet, schedule, event, ctx.buffer);
  bool top =
      top_priority_among(ctx.policy, ctx.fleet.at(train), 0, contenders,
                         event.onset);

  RescheduleDecision d;
  d.train = train;

  // Case 3.2: the train's planned track is blocked and parallel tracks
  // exist over the same leg.
  for (size_t i = 0; i + 1 < ents.size(); ++i) {
    const auto* a = ents[i];
    const auto* b = ents[i + 1];
    if (a->planned_departure < event.onset ||
        a->planned_departure > ctx.buffer)
      continue;  // not entered inside the window
    auto connecting = net.tracks_between(a->station, b->station);
    if (connecting.size() < 2) continue;
    TrackId planned = b->track_from_prev != 0 ? b->track_from_prev
                                              : connecting.front();
    if (!blockage.track_blocked(planned, a->planned_departure)) continue;
    std::vector<TrackId> open;
    for (TrackId l : connecting) {
      if (!blockage.track_blocked(l, a->planned_departure)) open.push_back(l);
    }

    // Free of other trains through the projected window?
    std::optional<TrackId> clear;
    for (TrackId l : open) {
      bool busy = false;
      Minutes journey = net.track(l).journey_time;
      for (Minutes t = a->planned_departure;
           t < a->planned_departure + journey && !busy; ++t) {
        auto snapshot = occupancy_at(net, schedule, t);
        for (const auto& h : snapshot.holders_of_track(l))
          if (h.train != train) busy = true;
      }
      if (!busy) {
        clear = l;
        break;
      }
    }
    if (clear && top) {
      Route r;
      bool seen = false;
      for (size_t j = 0; j < ents.size(); ++j) {
        if (ents[j]->station == a->station) seen = true;
        if (!seen) continue;
        r.stations.push_back(ents[j]->station);
        if (j > 0 && r.stations.size() > 1) {
          TrackId use = r.stations.size() == 2
                            ? *clear
                            : (ents[j]->track_from_prev != 0
                                   ? ents[j]->track_from_prev
                                   : net.tracks_between(ents[j - 1]->station,
                                                        ents[j]->station)
                                         .front());
          r.tracks.push_back(use);
          r.total_journey += net.track(use).journey_time;
        }
      }
      d.kind = DecisionKind::Reroute;
      d.case_label = CaseLabel::C3_2;
      d.new_route = r;
      d.note = "parallel track assigned";
      return d;
    }
    // wait for the earliest release of either track
    Minutes wait_until = recovery_end;
    if (!open.empty()) {
      // an occupied parallel track frees when its holder arrives
      for (Minutes t = a->planned_departure; t <= ctx.config.horizon; ++t) {
        bool free = false;
        auto snapshot = occupancy_at(net, schedule, t);
        for (TrackId l : open)
          if (snapshot.holders_of_track(l).empty()) free = true;
        if (free) {
          wait_until = std::min(wait_until, t);
          break;
        }
      }
    }
    d.kind = DecisionKind::Retime;
    d.case_label = CaseLabel::C3_2;
    d.added_delay = std::max(0, wait_until - a->planned_departure);
    d.note = "waiting for a track release";
    return d;
  }

  // Case 3.1: heading to the blocked station from a neighbouring stop.
  const ScheduleEntry* at_blocked = nullptr;
  const ScheduleEntry* before = nullptr;
  for (size_t i = 0; i < ents.size(); ++i) {
    if (event.blocks_station(ents[i]->station) &&
        ents[i]->planned_arrival >= event.onset &&
        ents[i]->planned_arrival <= ctx.buffer) {
      at_blocked = ents[i];
      if (i > 0) before = ents[i - 1];
      break;
    }
  }
  if (!at_blocked) {
    throw Error(ErrorCode::PreconditionUnsatisfied,
                "train never reaches the blocked resources in the window");
  }

  bool platform_ok = platform_free_at(net, schedule, blockage,
                                      at_blocked->station,
                                      at_blocked->planned_arrival, train);
  bool track_ok = false;
  if (before) {
    for (TrackId l : net.tracks_between(before->station, at_blocked->station)) {
      if (!blockage.track_blocked(l, before->planned_departure) &&
          occ.holders_of_track(l).empty())
        track_ok = true;
    }
  }

  if (platform_ok && track_ok && top) {
    d.kind = DecisionKind::NoChange;
    d.case_label = CaseLabel::C3_1;
    d.note = "keeps its original schedule";
    return d;
  }
  d.kind = DecisionKind::Retime;
  d.case_label = CaseLabel::C3_1;
  Minutes granted =
      earliest_platform_time(net, schedule, blockage, at_blocked->station,
                             at_blocked->planned_arrival, ctx.config.horizon,
                             train);
  d.added_delay = granted - at_blocked->planned_arrival;
  d.note = "held until the blocked station can host it";
  return d;
}

namespace {

RescheduleResult run_plan(const RailwayNetwork& net, const Fleet& fleet,
                          const Timetable& timetable, const DisasterEvent& event,
                          const PriorityPolicy& policy,
                          const ProjectionConfig& config,
                          unsigned long long seed,
                          const ProjectionPolicy& mode_in,
                          bool allow_reroutes) {
  RescheduleResult result;
  result.recovery_time = sample_recovery(event.recovery, seed);
  result.buffer = buffer_time(event);
  Minutes recovery_end = event.onset + result.recovery_time;

  OccupancyState occ0 = occupancy_at(net, timetable, event.onset);
  auto affected = affected_trains(net, timetable, event, result.buffer);

  CaseContext ctx;
  ctx.fleet = fleet;
  ctx.policy = policy;
  ctx.config = config;
  ctx.recovery_time = result.recovery_time;
  ctx.buffer = result.buffer;

  // Partition the affected trains into the three cases by their position
  // at onset.
  std::set<StationId> case2_stations;
  std::map<TrainId, RescheduleDecision> decisions;
  for (TrainId train : affected) {
    Resource r = resource_of(occ0, train, event.onset);
    if (r.kind == ResourceKind::Platform && event.blocks_station(r.station)) {
      case2_stations.insert(r.station);
      continue;
    }
    if (r.kind == ResourceKind::Track && event.blocks_station(r.station)) {
      decisions[train] =
          handle_case1(net, timetable, occ0, event, train, ctx);
      continue;
    }
    try {
      decisions[train] = handle_case3(net, timetable, occ0, event, train, ctx);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::PreconditionUnsatisfied) throw;
      RescheduleDecision d;
      d.train = train;
      d.kind = DecisionKind::NoChange;
      d.case_label = CaseLabel::None;
      d.note = "outside every case precondition";
      decisions[train] = d;
    }
  }
  for (StationId s : case2_stations) {
    for (auto& d : handle_case2(net, timetable, occ0, event, s, ctx)) {
      decisions[d.train] = d;
    }
  }
  // Trains in the affected set without a recorded decision keep their
  // schedule on paper.
  for (TrainId train : affected) {
    if (!decisions.count(train)) {
      RescheduleDecision d;
      d.train = train;
      d.kind = DecisionKind::NoChange;
      d.case_label = CaseLabel::None;
      decisions[train] = d;
    }
  }

  std::vector<RescheduleDecision> decision_list;
  for (const auto& [_, d] : decisions) decision_list.push_back(d);
  if (!allow_reroutes) {
    for (auto& d : decision_list) {
      if (d.kind == DecisionKind::Reroute) {
        d.kind = DecisionKind::Retime;
        d.new_route.reset();
        d.note = "reroute suppressed";
      }
    }
  }

  ProjectionPolicy mode = mode_in;
  for (TrainId t : affected) mode.frozen.insert(t);

  Blockage blockage = Blockage::from_event(event, recovery_end);
  auto plans = build_plans(net, timetable, fleet.trains, decision_list);
  ProjectionEngine engine(net, plans, blockage, policy, config, mode);
  auto states = engine.run();
  result.new_schedule = schedule_from_states(plans, states);
  result.decisions = decision_list;

  auto report = total_delay(net, timetable, result.new_schedule);
  result.per_train_delay = report.per_train;
  result.total_delay = report.total;
  return result;
}

}  // namespace

RescheduleResult reschedule(const RailwayNetwork& net, const Fleet& fleet,
                            const Timetable& timetable,
                            const DisasterEvent& event,
                            const PriorityPolicy& policy,
                            unsigned long long seed,
                            const ProjectionConfig& config) {
  ProjectionPolicy mode;
  mode.priority_service = true;
  return run_plan(net, fleet, timetable, event, policy, config, seed, mode,
                  /*allow_reroutes=*/true);
}

RescheduleResult centralized_baseline(const RailwayNetwork& net,
                                      const Fleet& fleet,
                                      const Timetable& timetable,
                                      const DisasterEvent& event,
                                      const PriorityPolicy& policy,
                                      unsigned long long seed,
                                      const ProjectionConfig& config,
                                      const BaselineConfig& baseline) {
  ProjectionPolicy mode;
  mode.priority_service = true;
  mode.freeze_until =
      event.onset + baseline.latency_per_level * baseline.hierarchy_levels;
  return run_plan(net, fleet, timetable, event, policy, config, seed, mode,
                  /*allow_reroutes=*/true);
}

RescheduleResult wait_in_place_baseline(const RailwayNetwork& net,
                                        const Fleet& fleet,
                                        const Timetable& timetable,
                                        const DisasterEvent& event,
                                        const PriorityPolicy& policy,
                                        unsigned long long seed,
                                        const ProjectionConfig& config) {
  RescheduleResult r;
  r.recovery_time = sample_recovery(event.recovery, seed);
  ProjectionPolicy mode;
  mode.priority_service = false;
  mode.freeze_until = event.onset + r.recovery_time;
  return run_plan(net, fleet, timetable, event, policy, config, seed, mode,
                  /*allow_reroutes=*/false);
}

}  // namespace rail
