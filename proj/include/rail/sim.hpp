#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rail/rescheduler.hpp"

namespace rail {

enum class AgentKind { StationAgent, TrainAgent };

struct AgentId {
  AgentKind kind = AgentKind::StationAgent;
  int ref = 0;  // station id or train id

  bool operator==(const AgentId& o) const {
    return kind == o.kind && ref == o.ref;
  }
  bool operator<(const AgentId& o) const {
    return kind != o.kind ? kind < o.kind : ref < o.ref;
  }
  std::string to_string() const;
};

inline AgentId station_agent(StationId s) {
  return {AgentKind::StationAgent, s};
}
inline AgentId train_agent(TrainId t) { return {AgentKind::TrainAgent, t}; }

enum class MessageKind {
  DisasterNotice,
  RecoveryStatus,
  ResourceRequest,
  ResourceGrant,
  ResourceDeny,
  ScheduleUpdate,
};

const char* message_kind_name(MessageKind k);

struct Message {
  AgentId from;
  AgentId to;
  Minutes at = 0;
  MessageKind kind = MessageKind::ResourceRequest;
  // kind-specific payload, kept flat for logging
  int event_id = 0;        // disaster/recovery correlation
  StationId station = 0;   // requested/affected station
  TrackId track = 0;       // requested track (0 = platform request)
  Minutes when = 0;        // requested occupancy time / recovery end
  std::string digest;      // free-form payload summary
};

// Station/train agents must respect the communication matrix: trains talk
// to stations only; stations talk to trains and to neighbouring stations.
void check_message_legality(const RailwayNetwork& net, const Message& m);

struct SimEvent {
  Minutes at = 0;
  long seq = 0;
  enum class Action {
    Arrival,
    Departure,
    MessageDelivery,
    DisasterOnset,
    RecoveryComplete
  } action = Action::MessageDelivery;
  TrainId train = 0;
  StationId station = 0;
  int payload = 0;

  bool operator<(const SimEvent& o) const {
    return at != o.at ? at < o.at : seq < o.seq;
  }
};

struct SimReport {
  std::map<TrainId, Minutes> per_train_delay;
  Minutes total_delay = 0;
  Minutes baseline_total_delay = -1;  // -1 when the baseline was not run
  std::vector<RescheduleDecision> decisions;
  std::vector<Message> message_log;
  Minutes horizon = 0;
  Timetable final_schedule;

  // Canonical line-oriented form; byte-identical across reruns.
  std::string serialize() const;
};

struct SimConfig {
  ProjectionConfig projection;
  Minutes request_lookahead = 10;  // ask the next station this early
  bool run_baseline = false;
  BaselineConfig baseline;
};

// Deterministic discrete-event run: trains follow the (re)planned
// schedule, request resources ahead of arrival, and stations grant or
// deny against their local occupancy. Disasters trigger notices,
// recovery-status flooding, replanning, and schedule updates.
SimReport run_simulation(const RailwayNetwork& net, const Fleet& fleet,
                         const Timetable& timetable,
                         const std::vector<DisasterEvent>& events,
                         const PriorityPolicy& policy, unsigned long long seed,
                         Minutes horizon, const SimConfig& config = {});

// --- station agent, exposed for direct testing ---

struct StationAgentState {
  StationId station = 0;
  int platform_count = 0;
  std::set<PlatformIndex> occupied;
  std::set<PlatformIndex> blocked;
  std::set<int> seen_recovery_events;  // dedup for flooding
};

// Processes one inbox batch; grants platform requests in priority order
// against local occupancy and forwards recovery status to neighbours
// exactly once per event id.
std::vector<Message> station_agent_step(const RailwayNetwork& net,
                                        const Fleet& fleet,
                                        const PriorityPolicy& policy,
                                        StationAgentState& state,
                                        const std::vector<Message>& inbox,
                                        Minutes now);

// --- train agent, exposed for direct testing ---

struct TrainAgentState {
  TrainId train = 0;
  MdpState mdp = MdpState::AtNeighborPlatform;
  std::vector<ScheduleEntry> itinerary;  // adopted schedule, sorted
  size_t next_station_index = 0;
  bool requested_next = false;
};

// Issues the next resource request when inside the lookahead window and
// adopts schedule updates; trains only ever address stations.
std::vector<Message> train_agent_step(const RailwayNetwork& net,
                                      TrainAgentState& state,
                                      const std::vector<Message>& inbox,
                                      Minutes now, Minutes lookahead);

}  // namespace rail
