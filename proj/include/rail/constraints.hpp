#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rail/network.hpp"

namespace rail {

// Snapshot of who holds what at one instant: platform indicators keyed by
// (train, station, platform) and track indicators keyed by (train, track,
// station-of-reference).
struct OccupancyState {
  struct PlatformHold {
    TrainId train;
    StationId station;
    PlatformIndex platform;
    bool operator<(const PlatformHold& o) const {
      return std::tie(train, station, platform) <
             std::tie(o.train, o.station, o.platform);
    }
  };
  struct TrackHold {
    TrainId train;
    StationId station;  // the station the track is taken to connect to
    TrackId track;
    bool operator<(const TrackHold& o) const {
      return std::tie(train, station, track) <
             std::tie(o.train, o.station, o.track);
    }
  };

  std::set<PlatformHold> platforms;
  std::set<TrackHold> tracks;

  void occupy_platform(TrainId j, StationId i, PlatformIndex k) {
    platforms.insert({j, i, k});
  }
  void occupy_track(TrainId j, StationId i, TrackId l) {
    tracks.insert({j, i, l});
  }
  std::vector<PlatformHold> platform_holds_at(StationId i) const;
  std::vector<TrackHold> holders_of_track(TrackId l) const;
};

enum class ResourceKind { None, Platform, Track };

struct Resource {
  ResourceKind kind = ResourceKind::None;
  StationId station = 0;
  int index = 0;  // platform index or track id

  bool operator==(const Resource& o) const {
    return kind == o.kind && station == o.station && index == o.index;
  }
};

// Dynamic priority data: three orderings over y1..y5 plus the busy
// windows (half-open, minutes of day) and the delay threshold.
struct PriorityPolicy {
  std::vector<std::pair<Minutes, Minutes>> busy_windows = {{540, 660},
                                                           {1020, 1140}};
  Minutes delay_threshold = 30;

  static PriorityPolicy defaults() { return {}; }
  bool in_busy_window(Minutes t) const;
};

enum class OrderKind { Normal, Busy, Delayed };

// Rank of a priority level in one of the cited orderings; lower ranks
// first. The delayed ordering ties every non-freight level and leaves the
// resolution to compare_priority's tie-breaks.
int rank_in_order(OrderKind order, PriorityLevel level);

OrderKind active_order(const PriorityPolicy& policy, Minutes t,
                       bool delayed_context);

int priority_rank(const PriorityPolicy& policy, const Train& train, Minutes t,
                  Minutes delay, bool delayed_context = false);

// Full comparison used whenever two trains contend for one resource:
// rank, then smaller current delay, then train id.
bool higher_priority(const PriorityPolicy& policy, const Train& a,
                     Minutes delay_a, const Train& b, Minutes delay_b,
                     Minutes t, bool delayed_context);

// True when the contention set triggers the delayed ordering: some
// long-distance train in it is late beyond the threshold.
bool delayed_context_active(const PriorityPolicy& policy,
                            const std::vector<std::pair<Train, Minutes>>& contenders);

// --- individual constraint checks ---

bool check_continuity(const ScheduleEntry& prev, const ScheduleEntry& next,
                      Minutes journey);

Minutes compute_delay(const ScheduleEntry& entry);

bool check_platform_capacity(const OccupancyState& occ, StationId station,
                             int platform_count);

bool check_track_exclusivity(const OccupancyState& occ, StationId station,
                             TrackId track);

Resource resource_of(const OccupancyState& occ, TrainId train, Minutes t);

// --- MDP view of a train near the blocked station ---

enum class MdpState {
  OnTrackToDisasterStation,   // L = 1 toward the blocked station
  AtDisasterStationPlatform,  // P = 1 at the blocked station
  AtNeighborPlatform,         // P = 1 at a station next to it
};

struct MdpGuard {
  enum class Kind { PlatformFreeAt, TrackFreeToward } kind;
  StationId station = 0;
  std::string describe() const;
};

struct MdpTransition {
  MdpState from;
  MdpState to;
  std::vector<MdpGuard> guards;
};

struct MdpModel {
  StationId disaster_station = 0;
  StationId neighbor_station = 0;
  std::map<TrainId, MdpState> train_states;
  // Platform capacity per station, already net of blocked platforms.
  std::map<StationId, int> usable_platforms;

  static MdpModel build(const RailwayNetwork& net, StationId disaster,
                        StationId neighbor,
                        const std::map<StationId, int>& usable);
};

bool mdp_guard_holds(const MdpModel& model, const RailwayNetwork& net,
                     const OccupancyState& occ, const MdpGuard& guard);

std::vector<MdpTransition> mdp_enabled_transitions(const MdpModel& model,
                                                   const RailwayNetwork& net,
                                                   const OccupancyState& occ,
                                                   TrainId train);

// --- DCOP instance data ---

struct DcopInstance {
  int agent_count = 0;  // q = trains + stations
  int train_count = 0;
  int station_count = 0;
  Minutes domain_lo = 0;  // decision window start (disaster onset)
  Minutes domain_hi = 0;  // onset + recovery span
  int time_variable_count = 0;       // arrival/departure variables
  int indicator_variable_count = 0;  // platform/track indicators
  // Owning agent per (train, station) time variable pair: the train.
  static DcopInstance build(const RailwayNetwork& net, const Timetable& tt,
                            Minutes onset, Minutes recovery_span);
};

// --- whole-schedule validation (actual x-times) ---

struct OccupancyTimeline {
  // Occupancy snapshots at every change point, keyed by time.
  std::map<Minutes, OccupancyState> snapshots;

  const OccupancyState& at(Minutes t) const;
  static OccupancyTimeline from_schedule(const RailwayNetwork& net,
                                         const Timetable& schedule);
};

std::vector<Violation> validate_schedule(const RailwayNetwork& net,
                                         const Timetable& schedule,
                                         const OccupancyTimeline& timeline);

// Convenience: derives the timeline from the schedule itself.
std::vector<Violation> validate_schedule(const RailwayNetwork& net,
                                         const Timetable& schedule);

}  // namespace rail
