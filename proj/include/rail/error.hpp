#pragma once

#include <stdexcept>
#include <string>

namespace rail {

enum class ErrorCode {
  // network
  DuplicateStationId,
  DanglingTrackEndpoint,
  DisconnectedGraph,
  NoRouteExists,
  UnknownTrain,
  UnknownStation,
  // petri
  MarkingDimensionMismatch,
  TransitionNotEnabled,
  NodeBudgetExceeded,
  // constraints
  NonAdjacentStations,
  EarlyArrivalViolation,
  MultipleResourcesHeld,
  UnknownState,
  // rescheduler
  InvalidInterval,
  TrainNotOnApproach,
  PreconditionUnsatisfied,
  ScheduleMismatch,
  InfeasibleAfterRecovery,
  // runtime
  IllegalMessageRoute,
  HorizonExceeded,
  // io
  ParseError,
  NonMonotoneItinerary,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rail
