#include "rail/constraints.hpp"

#include <algorithm>

namespace rail {

std::vector<OccupancyState::PlatformHold> OccupancyState::platform_holds_at(
    StationId i) const {
  std::vector<PlatformHold> out;
  for (const auto& h : platforms)
    if (h.station == i) out.push_back(h);
  return out;
}

std::vector<OccupancyState::TrackHold> OccupancyState::holders_of_track(
    TrackId l) const {
  std::vector<TrackHold> out;
  for (const auto& h : tracks)
    if (h.track == l) out.push_back(h);
  return out;
}

bool PriorityPolicy::in_busy_window(Minutes t) const {
  Minutes d = time_of_day(t);
  for (const auto& [lo, hi] : busy_windows) {
    if (d >= lo && d < hi) return true;  // half-open
  }
  return false;
}

int rank_in_order(OrderKind order, PriorityLevel level) {
  switch (order) {
    case OrderKind::Normal:
      switch (level) {
        case PriorityLevel::Y1: return 0;
        case PriorityLevel::Y2: return 1;
        case PriorityLevel::Y4: return 2;
        case PriorityLevel::Y5: return 3;
        case PriorityLevel::Y3: return 4;
      }
      break;
    case OrderKind::Busy:
      switch (level) {
        case PriorityLevel::Y1: return 0;
        case PriorityLevel::Y4: return 1;
        case PriorityLevel::Y5: return 2;
        case PriorityLevel::Y2: return 3;
        case PriorityLevel::Y3: return 4;
      }
      break;
    case OrderKind::Delayed:
      // y4 >= y1 >= y5 >= y2 > y3: the first four tie and defer to the
      // on-time-first tie-break; freight stays last.
      return level == PriorityLevel::Y3 ? 1 : 0;
  }
  return 4;
}

OrderKind active_order(const PriorityPolicy& policy, Minutes t,
                       bool delayed_context) {
  if (delayed_context) return OrderKind::Delayed;
  return policy.in_busy_window(t) ? OrderKind::Busy : OrderKind::Normal;
}

int priority_rank(const PriorityPolicy& policy, const Train& train, Minutes t,
                  Minutes delay, bool delayed_context) {
  (void)delay;
  return rank_in_order(active_order(policy, t, delayed_context),
                       train.base_priority());
}

bool higher_priority(const PriorityPolicy& policy, const Train& a,
                     Minutes delay_a, const Train& b, Minutes delay_b,
                     Minutes t, bool delayed_context) {
  int ra = priority_rank(policy, a, t, delay_a, delayed_context);
  int rb = priority_rank(policy, b, t, delay_b, delayed_context);
  if (ra != rb) return ra < rb;
  if (delay_a != delay_b) return delay_a < delay_b;  // on time first
  return a.id < b.id;
}

bool delayed_context_active(
    const PriorityPolicy& policy,
    const std::vector<std::pair<Train, Minutes>>& contenders) {
  for (const auto& [train, delay] : contenders) {
    if (train.long_distance() && delay > policy.delay_threshold) return true;
  }
  return false;
}

bool check_continuity(const ScheduleEntry& prev, const ScheduleEntry& next,
                      Minutes journey) {
  if (prev.train != next.train)
    throw Error(ErrorCode::NonAdjacentStations, "entries of different trains");
  return next.actual_arrival >= prev.actual_departure + journey;
}

Minutes compute_delay(const ScheduleEntry& entry) {
  if (entry.actual_arrival < entry.planned_arrival) {
    throw Error(ErrorCode::EarlyArrivalViolation,
                "train " + std::to_string(entry.train) + " at station " +
                    std::to_string(entry.station));
  }
  return entry.actual_arrival - entry.planned_arrival;
}

bool check_platform_capacity(const OccupancyState& occ, StationId station,
                             int platform_count) {
  auto holds = occ.platform_holds_at(station);
  std::set<PlatformIndex> used;
  for (const auto& h : holds) {
    if (h.platform < 1 || h.platform > platform_count) return false;
    if (!used.insert(h.platform).second) return false;  // double booking
  }
  return static_cast<int>(used.size()) <= platform_count;
}

bool check_track_exclusivity(const OccupancyState& occ, StationId station,
                             TrackId track) {
  (void)station;
  return occ.holders_of_track(track).size() <= 1;
}

Resource resource_of(const OccupancyState& occ, TrainId train, Minutes t) {
  (void)t;
  Resource found;
  int held = 0;
  for (const auto& h : occ.platforms) {
    if (h.train == train) {
      found = {ResourceKind::Platform, h.station, h.platform};
      ++held;
    }
  }
  for (const auto& h : occ.tracks) {
    if (h.train == train) {
      found = {ResourceKind::Track, h.station, h.track};
      ++held;
    }
  }
  if (held > 1) {
    throw Error(ErrorCode::MultipleResourcesHeld,
                "train " + std::to_string(train));
  }
  return held == 0 ? Resource{} : found;
}

std::string MdpGuard::describe() const {
  switch (kind) {
    case Kind::PlatformFreeAt:
      return "platform free at station " + std::to_string(station);
    case Kind::TrackFreeToward:
      return "track free toward station " + std::to_string(station);
  }
  return "?";
}

MdpModel MdpModel::build(const RailwayNetwork& net, StationId disaster,
                         StationId neighbor,
                         const std::map<StationId, int>& usable) {
  net.station(disaster);
  net.station(neighbor);
  MdpModel m;
  m.disaster_station = disaster;
  m.neighbor_station = neighbor;
  m.usable_platforms = usable;
  for (const auto& s : net.stations) {
    if (!m.usable_platforms.count(s.id))
      m.usable_platforms[s.id] = s.platform_count;
  }
  return m;
}

bool mdp_guard_holds(const MdpModel& model, const RailwayNetwork& net,
                     const OccupancyState& occ, const MdpGuard& guard) {
  switch (guard.kind) {
    case MdpGuard::Kind::PlatformFreeAt: {
      int usable = model.usable_platforms.count(guard.station)
                       ? model.usable_platforms.at(guard.station)
                       : net.station(guard.station).platform_count;
      return static_cast<int>(occ.platform_holds_at(guard.station).size()) <
             usable;
    }
    case MdpGuard::Kind::TrackFreeToward: {
      auto corridor =
          net.tracks_between(model.neighbor_station, model.disaster_station);
      for (TrackId l : corridor) {
        if (occ.holders_of_track(l).empty()) return true;
      }
      return false;
    }
  }
  return false;
}

std::vector<MdpTransition> mdp_enabled_transitions(const MdpModel& model,
                                                   const RailwayNetwork& net,
                                                   const OccupancyState& occ,
                                                   TrainId train) {
  auto it = model.train_states.find(train);
  if (it == model.train_states.end()) {
    throw Error(ErrorCode::UnknownState, "train " + std::to_string(train));
  }
  std::vector<MdpTransition> all = {
      {MdpState::OnTrackToDisasterStation, MdpState::AtDisasterStationPlatform,
       {{MdpGuard::Kind::PlatformFreeAt, model.disaster_station}}},
      {MdpState::AtDisasterStationPlatform, MdpState::AtNeighborPlatform,
       {{MdpGuard::Kind::TrackFreeToward, model.neighbor_station},
        {MdpGuard::Kind::PlatformFreeAt, model.neighbor_station}}},
      {MdpState::AtNeighborPlatform, MdpState::OnTrackToDisasterStation,
       {{MdpGuard::Kind::TrackFreeToward, model.disaster_station},
        {MdpGuard::Kind::PlatformFreeAt, model.disaster_station}}},
  };
  std::vector<MdpTransition> out;
  for (const auto& tr : all) {
    if (tr.from != it->second) continue;
    bool ok = true;
    for (const auto& g : tr.guards) {
      if (!mdp_guard_holds(model, net, occ, g)) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(tr);
  }
  return out;
}

DcopInstance DcopInstance::build(const RailwayNetwork& net, const Timetable& tt,
                                 Minutes onset, Minutes recovery_span) {
  DcopInstance d;
  std::set<TrainId> trains;
  for (const auto& e : tt) trains.insert(e.train);
  d.train_count = static_cast<int>(trains.size());
  d.station_count = static_cast<int>(net.stations.size());
  d.agent_count = d.train_count + d.station_count;
  d.domain_lo = onset;
  d.domain_hi = onset + recovery_span;
  d.time_variable_count = 2 * static_cast<int>(tt.size());
  int indicators = 0;
  for (const auto& e : tt) indicators += net.station(e.station).platform_count;
  for (TrainId train : trains) {
    auto ents = itinerary_of(tt, train);
    for (size_t i = 1; i < ents.size(); ++i) {
      indicators += static_cast<int>(
          net.tracks_between(ents[i - 1]->station, ents[i]->station).size());
    }
  }
  d.indicator_variable_count = indicators;
  return d;
}

const OccupancyState& OccupancyTimeline::at(Minutes t) const {
  static const OccupancyState empty;
  auto it = snapshots.upper_bound(t);
  if (it == snapshots.begin()) return empty;
  return std::prev(it)->second;
}

OccupancyTimeline OccupancyTimeline::from_schedule(const RailwayNetwork& net,
                                                   const Timetable& schedule) {
  OccupancyTimeline tl;
  std::set<Minutes> times;
  for (const auto& e : schedule) {
    times.insert(e.actual_arrival);
    times.insert(e.actual_departure);
  }
  std::set<TrainId> trains;
  for (const auto& e : schedule) trains.insert(e.train);

  for (Minutes t : times) {
    OccupancyState snap;
    for (TrainId train : trains) {
      auto ents = itinerary_of(schedule, train);
      for (size_t i = 0; i < ents.size(); ++i) {
        const auto* e = ents[i];
        // Platform hold over [arrival, departure); a zero-dwell pass does
        // not pin a platform.
        if (t >= e->actual_arrival && t < e->actual_departure) {
          snap.occupy_platform(train, e->station,
                               e->platform > 0 ? e->platform : 1);
        }
        // Track hold over [departure, next arrival).
        if (i + 1 < ents.size()) {
          const auto* nxt = ents[i + 1];
          if (t >= e->actual_departure && t < nxt->actual_arrival) {
            TrackId l = nxt->track_from_prev;
            if (l == 0) {
              auto tracks = net.tracks_between(e->station, nxt->station);
              l = tracks.empty() ? 0 : tracks.front();
            }
            if (l != 0) snap.occupy_track(train, nxt->station, l);
          }
        }
      }
    }
    tl.snapshots[t] = std::move(snap);
  }
  return tl;
}

std::vector<Violation> validate_schedule(const RailwayNetwork& net,
                                         const Timetable& schedule) {
  return validate_schedule(net, schedule,
                           OccupancyTimeline::from_schedule(net, schedule));
}

std::vector<Violation> validate_schedule(const RailwayNetwork& net,
                                         const Timetable& schedule,
                                         const OccupancyTimeline& timeline) {
  std::vector<Violation> out;
  std::set<TrainId> trains;
  for (const auto& e : schedule) trains.insert(e.train);

  for (const auto& e : schedule) {
    if (e.actual_arrival < e.planned_arrival) {
      out.push_back({RuleId::ArrivalNotEarly, e.train, e.station, 0,
                     e.actual_arrival, "arrives before the timetable allows"});
    }
    if (e.actual_departure < e.actual_arrival) {
      out.push_back({RuleId::DepartureOrder, e.train, e.station, 0,
                     e.actual_arrival, "departure precedes arrival"});
    }
    int p = net.station(e.station).platform_count;
    if (e.platform != 0 && (e.platform < 1 || e.platform > p)) {
      out.push_back({RuleId::PlatformIndexRange, e.train, e.station, 0,
                     e.actual_arrival,
                     "platform " + std::to_string(e.platform) + " of " +
                         std::to_string(p)});
    }
  }

  for (TrainId train : trains) {
    auto ents = itinerary_of(schedule, train);
    for (size_t i = 1; i < ents.size(); ++i) {
      const auto* prev = ents[i - 1];
      const auto* next = ents[i];
      TrackId used = next->track_from_prev;
      auto connecting = net.tracks_between(prev->station, next->station);
      if (connecting.empty() ||
          (used != 0 && std::find(connecting.begin(), connecting.end(), used) ==
                            connecting.end())) {
        out.push_back({RuleId::RouteShape, train, next->station, used,
                       next->actual_arrival, "leg without a connecting track"});
        continue;
      }
      Minutes journey =
          used != 0 ? net.track(used).journey_time : *net.min_journey(prev->station, next->station);
      if (!check_continuity(*prev, *next, journey)) {
        out.push_back({RuleId::Continuity, train, next->station, used,
                       next->actual_arrival,
                       "arrival precedes departure + journey"});
      }
    }
  }

  for (const auto& [t, snap] : timeline.snapshots) {
    for (const auto& s : net.stations) {
      // Out-of-range indices are already reported per entry; capacity
      // counts only real platforms.
      std::set<PlatformIndex> used;
      bool double_booked = false;
      for (const auto& h : snap.platform_holds_at(s.id)) {
        if (h.platform < 1 || h.platform > s.platform_count) continue;
        if (!used.insert(h.platform).second) double_booked = true;
      }
      if (double_booked || static_cast<int>(used.size()) > s.platform_count) {
        out.push_back({RuleId::PlatformCapacity, 0, s.id, 0, t,
                       "platform overcommitted"});
      }
    }
    std::set<TrackId> seen_tracks;
    for (const auto& h : snap.tracks) seen_tracks.insert(h.track);
    for (TrackId l : seen_tracks) {
      if (snap.holders_of_track(l).size() > 1) {
        out.push_back({RuleId::TrackExclusive,
                       snap.holders_of_track(l)[0].train, 0, l, t,
                       "two trains on one track"});
      }
    }
    for (TrainId train : trains) {
      try {
        resource_of(snap, train, t);
      } catch (const Error&) {
        out.push_back({RuleId::SingleResource, train, 0, 0, t,
                       "train holds several resources"});
      }
    }
  }
  return out;
}

}  // namespace rail
