#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dvpp {

enum class ErrorCode {
  // ratfun
  DivisionByZeroTF,
  ConvergenceFailure,
  EvaluationAtPole,
  PoleAtOrigin,
  ImproperTF,
  UnstableSimulation,
  NoCrossover,
  // plants
  InvalidParams,
  GateOutOfRange,
  EmptyTrace,
  // synthesis
  NotRHPZero,
  WeightsNotNormalized,
  UnstablePlant,
  SumNotMinimumPhase,
  UnstableController,
  ImproperController,
  // coi_sim
  InvalidScenario,
  UnstableClosedLoop,
  SimulationTooShort,
  // scenario_io
  ParseError,
  ValidationError,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DivisionByZeroTF: return "DivisionByZeroTF";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::EvaluationAtPole: return "EvaluationAtPole";
    case ErrorCode::PoleAtOrigin: return "PoleAtOrigin";
    case ErrorCode::ImproperTF: return "ImproperTF";
    case ErrorCode::UnstableSimulation: return "UnstableSimulation";
    case ErrorCode::NoCrossover: return "NoCrossover";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::GateOutOfRange: return "GateOutOfRange";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    case ErrorCode::NotRHPZero: return "NotRHPZero";
    case ErrorCode::WeightsNotNormalized: return "WeightsNotNormalized";
    case ErrorCode::UnstablePlant: return "UnstablePlant";
    case ErrorCode::SumNotMinimumPhase: return "SumNotMinimumPhase";
    case ErrorCode::UnstableController: return "UnstableController";
    case ErrorCode::ImproperController: return "ImproperController";
    case ErrorCode::InvalidScenario: return "InvalidScenario";
    case ErrorCode::UnstableClosedLoop: return "UnstableClosedLoop";
    case ErrorCode::SimulationTooShort: return "SimulationTooShort";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dvpp
