#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rail/constraints.hpp"
#include "rail/network.hpp"

namespace rail {

enum class RecoveryDensity { Uniform };

struct RecoveryModel {
  Minutes min_minutes = 0;  // tau1
  Minutes max_minutes = 0;  // tau2
  RecoveryDensity density = RecoveryDensity::Uniform;
};

struct DisasterEvent {
  Minutes onset = 0;  // t_D
  std::set<std::pair<StationId, PlatformIndex>> blocked_platforms;
  std::set<TrackId> blocked_tracks;
  RecoveryModel recovery;

  // Stations with at least one blocked platform, sorted.
  std::vector<StationId> blocked_stations() const;
  bool blocks_station(StationId s) const;
};

// Integer recovery duration drawn from the configured density; the same
// seed always yields the same draw.
Minutes sample_recovery(const RecoveryModel& model, unsigned long long seed);

// Absolute buffer deadline tau^B: onset plus the density's expected
// recovery span (midpoint for uniform).
Minutes buffer_time(const DisasterEvent& event);

enum class DecisionKind { Retime, Reorder, Reroute, NoChange };

enum class CaseLabel { C1_1_1, C1_1_2, C1_2, C2, C3_1, C3_2, None };

const char* decision_kind_name(DecisionKind k);
const char* case_label_name(CaseLabel c);

struct RescheduleDecision {
  TrainId train = 0;
  DecisionKind kind = DecisionKind::NoChange;
  CaseLabel case_label = CaseLabel::None;
  Minutes added_delay = 0;          // Retime
  int departure_position = -1;      // Reorder: 0 = first out
  std::optional<Route> new_route;   // Reroute
  std::string note;
};

struct RescheduleResult {
  std::vector<RescheduleDecision> decisions;  // sorted by train id
  Timetable new_schedule;
  std::map<TrainId, Minutes> per_train_delay;  // terminal-arrival delay
  Minutes total_delay = 0;
  Minutes recovery_time = 0;  // t_R actually used
  Minutes buffer = 0;         // tau^B actually used
};

struct ProjectionConfig {
  Minutes headway = 5;        // separation between departures onto one track
  Minutes min_dwell = 1;      // floor when compressing dwell at a stop
  Minutes horizon = 2 * kMinutesPerDay;
  int max_route_candidates = 8;
};

// Train roster: category lookup for priority decisions.
struct Fleet {
  std::map<TrainId, Train> trains;

  static Fleet of(const std::vector<Train>& list);
  const Train& at(TrainId id) const;
  bool has(TrainId id) const { return trains.count(id) > 0; }
};

// Shared inputs of the per-case handlers.
struct CaseContext {
  Fleet fleet;
  PriorityPolicy policy;
  ProjectionConfig config;
  Minutes recovery_time = 0;  // t_R
  Minutes buffer = 0;         // tau^B
};

Minutes terminal_delay(const RailwayNetwork& net, const Timetable& original,
                       const Timetable& result, TrainId train);

struct TotalDelayReport {
  Minutes total = 0;
  std::map<TrainId, Minutes> per_train;
  std::map<TrainId, Minutes> station_component;
  std::map<TrainId, Minutes> track_component;
};

// Sum of terminal-arrival delays plus the per-train split into dwell
// (station) and running (track) contributions. Both schedules must cover
// the same trains with the same terminal stations.
TotalDelayReport total_delay(const RailwayNetwork& net,
                             const Timetable& original,
                             const Timetable& result);

// Dwell compression: arrive late, leave as close to plan as min_dwell
// allows.
ScheduleEntry minimize_station_delay(const ScheduleEntry& entry,
                                     Minutes incurred_arrival_delay,
                                     Minutes min_dwell);

// Running times are never inflated: each arrival is exactly the actual
// departure plus the track's journey time.
std::vector<ScheduleEntry> minimize_track_delay(
    const RailwayNetwork& net, std::vector<ScheduleEntry> leg_entries);

RescheduleDecision handle_case1(const RailwayNetwork& net,
                                const Timetable& schedule,
                                const OccupancyState& occ,
                                const DisasterEvent& event, TrainId train,
                                const CaseContext& ctx);

std::vector<RescheduleDecision> handle_case2(const RailwayNetwork& net,
                                             const Timetable& schedule,
                                             const OccupancyState& occ,
                                             const DisasterEvent& event,
                                             StationId station,
                                             const CaseContext& ctx);

RescheduleDecision handle_case3(const RailwayNetwork& net,
                                const Timetable& schedule,
                                const OccupancyState& occ,
                                const DisasterEvent& event, TrainId train,
                                const CaseContext& ctx);

// The distributed rescheduling procedure: classify affected trains,
// decide per case, then project a feasible schedule with priority-ordered
// conflict resolution.
RescheduleResult reschedule(const RailwayNetwork& net, const Fleet& fleet,
                            const Timetable& timetable,
                            const DisasterEvent& event,
                            const PriorityPolicy& policy,
                            unsigned long long seed,
                            const ProjectionConfig& config = {});

struct BaselineConfig {
  Minutes latency_per_level = 3;
  int hierarchy_levels = 2;
};

// Comparison baseline: decisions arrive only after the hierarchy's
// message round trips, during which every affected train holds position.
RescheduleResult centralized_baseline(const RailwayNetwork& net,
                                      const Fleet& fleet,
                                      const Timetable& timetable,
                                      const DisasterEvent& event,
                                      const PriorityPolicy& policy,
                                      unsigned long long seed,
                                      const ProjectionConfig& config = {},
                                      const BaselineConfig& baseline = {});

// Naive comparison: every affected train waits where it is until
// recovery completes, keeps its route, and conflicts resolve first-come
// first-served.
RescheduleResult wait_in_place_baseline(const RailwayNetwork& net,
                                        const Fleet& fleet,
                                        const Timetable& timetable,
                                        const DisasterEvent& event,
                                        const PriorityPolicy& policy,
                                        unsigned long long seed,
                                        const ProjectionConfig& config = {});

// Where each train sits at instant t according to a schedule.
OccupancyState occupancy_at(const RailwayNetwork& net, const Timetable& schedule,
                            Minutes t);

// Trains whose projected use of a blocked resource falls inside
// [onset, buffer]; sorted by id.
std::vector<TrainId> affected_trains(const RailwayNetwork& net,
                                     const Timetable& timetable,
                                     const DisasterEvent& event,
                                     Minutes buffer_deadline);

}  // namespace rail
