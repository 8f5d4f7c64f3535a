#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rail/error.hpp"
#include "rail/time.hpp"

namespace rail {

using StationId = int;
using TrackId = int;
using TrainId = int;
using PlatformIndex = int;  // 1-based

enum class TrackRole { Up, Down, General };

enum class TrainCategory { Premium, Mail, Freight, Passenger, Local };

// y1..y5; smaller number = structurally higher class, but ordering is
// owned by PriorityPolicy, not by this enum.
enum class PriorityLevel { Y1 = 1, Y2 = 2, Y3 = 3, Y4 = 4, Y5 = 5 };

PriorityLevel level_for_category(TrainCategory c);
const char* category_name(TrainCategory c);
std::optional<TrainCategory> category_from_name(const std::string& name);
const char* track_role_name(TrackRole r);

struct Station {
  StationId id = 0;
  std::string code;
  int platform_count = 1;
  bool is_junction = false;
};

struct TrackSegment {
  TrackId id = 0;
  StationId a = 0;
  StationId b = 0;
  TrackRole role = TrackRole::General;
  Minutes journey_time = 0;

  StationId other(StationId s) const { return s == a ? b : a; }
  bool touches(StationId s) const { return s == a || s == b; }
};

struct Train {
  TrainId id = 0;
  std::string number;
  TrainCategory category = TrainCategory::Passenger;

  PriorityLevel base_priority() const { return level_for_category(category); }
  bool long_distance() const {
    return category == TrainCategory::Premium || category == TrainCategory::Mail ||
           category == TrainCategory::Freight;
  }
};

struct ScheduleEntry {
  TrainId train = 0;
  StationId station = 0;
  Minutes planned_arrival = 0;    // original timetable
  Minutes planned_departure = 0;  // original timetable
  Minutes actual_arrival = 0;     // mutable during simulation
  Minutes actual_departure = 0;
  PlatformIndex platform = 0;     // 0 = unassigned
  TrackId track_from_prev = 0;    // track used to get here, 0 = derived

  Minutes planned_dwell() const { return planned_departure - planned_arrival; }
  Minutes actual_dwell() const { return actual_departure - actual_arrival; }
  bool stopping() const { return planned_dwell() > 0; }
};

using Timetable = std::vector<ScheduleEntry>;

struct RailwayNetwork {
  std::vector<Station> stations;       // sorted by id
  std::vector<TrackSegment> tracks;    // sorted by id
  // station -> (neighbor station, track id), sorted
  std::map<StationId, std::vector<std::pair<StationId, TrackId>>> adjacency;

  const Station* find_station(StationId id) const;
  const Station& station(StationId id) const;
  const Station* find_station_by_code(const std::string& code) const;
  const TrackSegment* find_track(TrackId id) const;
  const TrackSegment& track(TrackId id) const;
  // All tracks joining the two stations, sorted by id.
  std::vector<TrackId> tracks_between(StationId a, StationId b) const;
  // Shortest journey time among parallel tracks, if any connect a and b.
  std::optional<Minutes> min_journey(StationId a, StationId b) const;
};

// Alternating platform/track occupancy: stations[0], tracks[0], stations[1],
// ..., ending on a station. tracks.size() == stations.size() - 1.
struct Route {
  std::vector<StationId> stations;
  std::vector<TrackId> tracks;
  Minutes total_journey = 0;

  bool well_formed(const RailwayNetwork& net) const;
};

RailwayNetwork build_network(std::vector<Station> stations,
                             std::vector<TrackSegment> tracks);

// Up to max_routes loop-free routes ordered by (total journey time,
// lexicographic station/track sequence). Throws NoRouteExists when origin
// and destination are disconnected.
std::vector<Route> enumerate_routes(const RailwayNetwork& net, StationId origin,
                                    StationId dest, int max_routes);

enum class RuleId {
  Continuity,         // arrival >= previous departure + journey
  ArrivalNotEarly,    // actual arrival >= planned arrival
  DepartureOrder,     // departure >= arrival at the same station
  PlatformIndexRange, // assigned platform index within [1, p]
  PlatformCapacity,   // simultaneous occupants <= platform count
  TrackExclusive,     // one train per track at a time
  SingleResource,     // a train holds at most one resource at a time
  RouteShape,         // consecutive itinerary stations must share a track
};

const char* rule_name(RuleId id);

struct Violation {
  RuleId rule;
  TrainId train = 0;
  StationId station = 0;
  TrackId track = 0;
  Minutes at = 0;
  std::string detail;
};

// Static timetable checks: per-entry departure ordering and per-train
// continuity against the fastest connecting track.
std::vector<Violation> validate_timetable(const RailwayNetwork& net,
                                          const Timetable& timetable);

// Entries of one train ordered by planned arrival.
std::vector<const ScheduleEntry*> itinerary_of(const Timetable& timetable,
                                               TrainId train);

}  // namespace rail
