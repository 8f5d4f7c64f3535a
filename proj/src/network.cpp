#include "rail/network.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace rail {

PriorityLevel level_for_category(TrainCategory c) {
  switch (c) {
    case TrainCategory::Premium: return PriorityLevel::Y1;
    case TrainCategory::Mail: return PriorityLevel::Y2;
    case TrainCategory::Freight: return PriorityLevel::Y3;
    case TrainCategory::Passenger: return PriorityLevel::Y4;
    case TrainCategory::Local: return PriorityLevel::Y5;
  }
  return PriorityLevel::Y4;
}

const char* category_name(TrainCategory c) {
  switch (c) {
    case TrainCategory::Premium: return "Premium";
    case TrainCategory::Mail: return "Mail";
    case TrainCategory::Freight: return "Freight";
    case TrainCategory::Passenger: return "Passenger";
    case TrainCategory::Local: return "Local";
  }
  return "Passenger";
}

std::optional<TrainCategory> category_from_name(const std::string& name) {
  if (name == "Premium") return TrainCategory::Premium;
  if (name == "Mail") return TrainCategory::Mail;
  if (name == "Freight") return TrainCategory::Freight;
  if (name == "Passenger") return TrainCategory::Passenger;
  if (name == "Local") return TrainCategory::Local;
  return std::nullopt;
}

const char* track_role_name(TrackRole r) {
  switch (r) {
    case TrackRole::Up: return "UP";
    case TrackRole::Down: return "DOWN";
    case TrackRole::General: return "GENERAL";
  }
  return "GENERAL";
}

const Station* RailwayNetwork::find_station(StationId id) const {
  for (const auto& s : stations)
    if (s.id == id) return &s;
  return nullptr;
}

const Station& RailwayNetwork::station(StationId id) const {
  const Station* s = find_station(id);
  if (!s) throw Error(ErrorCode::UnknownStation, "station " + std::to_string(id));
  return *s;
}

const Station* RailwayNetwork::find_station_by_code(const std::string& code) const {
  for (const auto& s : stations)
    if (s.code == code) return &s;
  return nullptr;
}

const TrackSegment* RailwayNetwork::find_track(TrackId id) const {
  for (const auto& t : tracks)
    if (t.id == id) return &t;
  return nullptr;
}

const TrackSegment& RailwayNetwork::track(TrackId id) const {
  const TrackSegment* t = find_track(id);
  if (!t) throw Error(ErrorCode::DanglingTrackEndpoint, "track " + std::to_string(id));
  return *t;
}

std::vector<TrackId> RailwayNetwork::tracks_between(StationId a, StationId b) const {
  std::vector<TrackId> out;
  for (const auto& t : tracks) {
    if ((t.a == a && t.b == b) || (t.a == b && t.b == a)) out.push_back(t.id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<Minutes> RailwayNetwork::min_journey(StationId a, StationId b) const {
  std::optional<Minutes> best;
  for (const auto& t : tracks) {
    if ((t.a == a && t.b == b) || (t.a == b && t.b == a)) {
      if (!best || t.journey_time < *best) best = t.journey_time;
    }
  }
  return best;
}

bool Route::well_formed(const RailwayNetwork& net) const {
  if (stations.empty() || tracks.size() + 1 != stations.size()) return false;
  for (size_t i = 0; i < tracks.size(); ++i) {
    const TrackSegment* t = net.find_track(tracks[i]);
    if (!t) return false;
    if (!(t->touches(stations[i]) && t->touches(stations[i + 1]))) return false;
    if (stations[i] == stations[i + 1]) return false;
  }
  return true;
}

RailwayNetwork build_network(std::vector<Station> stations,
                             std::vector<TrackSegment> tracks) {
  if (stations.empty()) {
    throw Error(ErrorCode::DisconnectedGraph, "no stations");
  }
  std::sort(stations.begin(), stations.end(),
            [](const Station& x, const Station& y) { return x.id < y.id; });
  std::sort(tracks.begin(), tracks.end(),
            [](const TrackSegment& x, const TrackSegment& y) { return x.id < y.id; });

  std::set<StationId> ids;
  std::set<std::string> codes;
  for (const auto& s : stations) {
    if (!ids.insert(s.id).second)
      throw Error(ErrorCode::DuplicateStationId, "id " + std::to_string(s.id));
    if (!s.code.empty() && !codes.insert(s.code).second)
      throw Error(ErrorCode::DuplicateStationId, "code " + s.code);
    if (s.platform_count < 1)
      throw Error(ErrorCode::ParseError,
                  "station " + s.code + " platform_count < 1");
  }
  std::set<TrackId> tids;
  for (const auto& t : tracks) {
    if (!tids.insert(t.id).second)
      throw Error(ErrorCode::DanglingTrackEndpoint,
                  "duplicate track id " + std::to_string(t.id));
    if (!ids.count(t.a) || !ids.count(t.b))
      throw Error(ErrorCode::DanglingTrackEndpoint,
                  "track " + std::to_string(t.id));
    if (t.a == t.b)
      throw Error(ErrorCode::DanglingTrackEndpoint,
                  "track " + std::to_string(t.id) + " is a loop");
    if (t.journey_time <= 0)
      throw Error(ErrorCode::ParseError,
                  "track " + std::to_string(t.id) + " journey_time <= 0");
  }

  RailwayNetwork net;
  net.stations = std::move(stations);
  net.tracks = std::move(tracks);
  for (const auto& s : net.stations) net.adjacency[s.id];
  for (const auto& t : net.tracks) {
    net.adjacency[t.a].emplace_back(t.b, t.id);
    net.adjacency[t.b].emplace_back(t.a, t.id);
  }
  for (auto& [_, nbrs] : net.adjacency) std::sort(nbrs.begin(), nbrs.end());

  // connectivity
  std::set<StationId> seen;
  std::deque<StationId> frontier{net.stations.front().id};
  seen.insert(net.stations.front().id);
  while (!frontier.empty()) {
    StationId cur = frontier.front();
    frontier.pop_front();
    for (const auto& [nbr, _] : net.adjacency.at(cur)) {
      if (seen.insert(nbr).second) frontier.push_back(nbr);
    }
  }
  if (seen.size() != net.stations.size()) {
    throw Error(ErrorCode::DisconnectedGraph,
                std::to_string(net.stations.size() - seen.size()) +
                    " unreachable station(s)");
  }
  return net;
}

namespace {

struct PathCandidate {
  Minutes cost = 0;
  std::vector<StationId> stations;
  std::vector<TrackId> tracks;

  // Ordering: cost, then lexicographic (station, track) interleaving.
  bool operator<(const PathCandidate& o) const {
    if (cost != o.cost) return cost < o.cost;
    size_t n = std::max(stations.size(), o.stations.size());
    for (size_t i = 0; i < n; ++i) {
      StationId a = i < stations.size() ? stations[i] : -1;
      StationId b = i < o.stations.size() ? o.stations[i] : -1;
      if (a != b) return a < b;
      TrackId ta = i < tracks.size() ? tracks[i] : -1;
      TrackId tb = i < o.tracks.size() ? o.tracks[i] : -1;
      if (ta != tb) return ta < tb;
    }
    return false;
  }
  bool operator==(const PathCandidate& o) const {
    return stations == o.stations && tracks == o.tracks;
  }
};

}  // namespace

std::vector<Route> enumerate_routes(const RailwayNetwork& net, StationId origin,
                                    StationId dest, int max_routes) {
  net.station(origin);
  net.station(dest);
  if (origin == dest || max_routes <= 0) {
    throw Error(ErrorCode::NoRouteExists, "origin equals destination");
  }

  // Best-first enumeration of loop-free paths. Networks here are small
  // (tens of stations), so the simple frontier search is plenty and its
  // pop order is exactly the (cost, lexicographic) contract.
  std::vector<PathCandidate> done;
  PathCandidate start;
  start.stations = {origin};
  std::vector<PathCandidate> heap{start};
  auto cmp = [](const PathCandidate& a, const PathCandidate& b) { return b < a; };
  std::make_heap(heap.begin(), heap.end(), cmp);

  while (!heap.empty() && static_cast<int>(done.size()) < max_routes) {
    std::pop_heap(heap.begin(), heap.end(), cmp);
    PathCandidate cur = std::move(heap.back());
    heap.pop_back();
    StationId tail = cur.stations.back();
    if (tail == dest) {
      done.push_back(std::move(cur));
      continue;
    }
    for (const auto& [nbr, track] : net.adjacency.at(tail)) {
      if (std::find(cur.stations.begin(), cur.stations.end(), nbr) !=
          cur.stations.end())
        continue;  // loop-free
      PathCandidate next = cur;
      next.stations.push_back(nbr);
      next.tracks.push_back(track);
      next.cost += net.track(track).journey_time;
      heap.push_back(std::move(next));
      std::push_heap(heap.begin(), heap.end(), cmp);
    }
  }

  if (done.empty()) {
    throw Error(ErrorCode::NoRouteExists,
                std::to_string(origin) + " -> " + std::to_string(dest));
  }

  std::vector<Route> out;
  out.reserve(done.size());
  for (auto& p : done) {
    Route r;
    r.stations = std::move(p.stations);
    r.tracks = std::move(p.tracks);
    r.total_journey = p.cost;
    out.push_back(std::move(r));
  }
  return out;
}

const char* rule_name(RuleId id) {
  switch (id) {
    case RuleId::Continuity: return "continuity";
    case RuleId::ArrivalNotEarly: return "arrival-not-early";
    case RuleId::DepartureOrder: return "departure-order";
    case RuleId::PlatformIndexRange: return "platform-index";
    case RuleId::PlatformCapacity: return "platform-capacity";
    case RuleId::TrackExclusive: return "track-exclusive";
    case RuleId::SingleResource: return "single-resource";
    case RuleId::RouteShape: return "route-shape";
  }
  return "unknown";
}

std::vector<const ScheduleEntry*> itinerary_of(const Timetable& timetable,
                                               TrainId train) {
  std::vector<const ScheduleEntry*> ents;
  for (const auto& e : timetable)
    if (e.train == train) ents.push_back(&e);
  std::stable_sort(ents.begin(), ents.end(),
                   [](const ScheduleEntry* a, const ScheduleEntry* b) {
                     return a->planned_arrival < b->planned_arrival;
                   });
  return ents;
}

std::vector<Violation> validate_timetable(const RailwayNetwork& net,
                                          const Timetable& timetable) {
  std::vector<Violation> out;
  std::set<TrainId> trains;
  for (const auto& e : timetable) {
    net.station(e.station);  // throws UnknownStation
    trains.insert(e.train);
    if (e.planned_departure < e.planned_arrival) {
      out.push_back({RuleId::DepartureOrder, e.train, e.station, 0,
                     e.planned_arrival, "departure before arrival"});
    }
  }
  for (TrainId train : trains) {
    auto ents = itinerary_of(timetable, train);
    for (size_t i = 1; i < ents.size(); ++i) {
      const auto* prev = ents[i - 1];
      const auto* next = ents[i];
      auto journey = net.min_journey(prev->station, next->station);
      if (!journey) {
        out.push_back({RuleId::RouteShape, train, next->station, 0,
                       next->planned_arrival, "no track from previous station"});
        continue;
      }
      if (next->planned_arrival < prev->planned_departure + *journey) {
        out.push_back({RuleId::Continuity, train, next->station, 0,
                       next->planned_arrival,
                       "arrival precedes departure + journey"});
      }
    }
  }
  return out;
}

}  // namespace rail
