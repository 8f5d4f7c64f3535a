#include "rail/error.hpp"

namespace rail {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DuplicateStationId: return "DuplicateStationId";
    case ErrorCode::DanglingTrackEndpoint: return "DanglingTrackEndpoint";
    case ErrorCode::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::NoRouteExists: return "NoRouteExists";
    case ErrorCode::UnknownTrain: return "UnknownTrain";
    case ErrorCode::UnknownStation: return "UnknownStation";
    case ErrorCode::MarkingDimensionMismatch: return "MarkingDimensionMismatch";
    case ErrorCode::TransitionNotEnabled: return "TransitionNotEnabled";
    case ErrorCode::NodeBudgetExceeded: return "NodeBudgetExceeded";
    case ErrorCode::NonAdjacentStations: return "NonAdjacentStations";
    case ErrorCode::EarlyArrivalViolation: return "EarlyArrivalViolation";
    case ErrorCode::MultipleResourcesHeld: return "MultipleResourcesHeld";
    case ErrorCode::UnknownState: return "UnknownState";
    case ErrorCode::InvalidInterval: return "InvalidInterval";
    case ErrorCode::TrainNotOnApproach: return "TrainNotOnApproach";
    case ErrorCode::PreconditionUnsatisfied: return "PreconditionUnsatisfied";
    case ErrorCode::ScheduleMismatch: return "ScheduleMismatch";
    case ErrorCode::InfeasibleAfterRecovery: return "InfeasibleAfterRecovery";
    case ErrorCode::IllegalMessageRoute: return "IllegalMessageRoute";
    case ErrorCode::HorizonExceeded: return "HorizonExceeded";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NonMonotoneItinerary: return "NonMonotoneItinerary";
  }
  return "UnknownError";
}

}  // namespace rail
