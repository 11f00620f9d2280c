#include "airdraw/error.hpp"

namespace airdraw {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Configuration: return "configuration";
    case ErrorCode::Ingestion: return "ingestion";
    case ErrorCode::DegenerateGravity: return "degenerate_gravity";
    case ErrorCode::IndeterminateAngle: return "indeterminate_angle";
    case ErrorCode::Stream: return "stream";
    case ErrorCode::UndefinedSavings: return "undefined_savings";
    case ErrorCode::EmptyInput: return "empty_input";
    case ErrorCode::Alphabet: return "alphabet";
    case ErrorCode::NotTrained: return "not_trained";
    case ErrorCode::Synthesis: return "synthesis";
    case ErrorCode::IncompleteExperiment: return "incomplete_experiment";
    case ErrorCode::AmbiguousTraining: return "ambiguous_training";
    case ErrorCode::Parse: return "parse";
  }
  return "unknown";
}

}  // namespace airdraw
