#include "igl/error.hpp"

#include <sstream>

namespace igl {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::WeightSumViolation: return "WeightSumViolation";
    case ErrorCode::MissingSelfLoop: return "MissingSelfLoop";
    case ErrorCode::ParamOutOfRange: return "ParamOutOfRange";
    case ErrorCode::InvalidTopologyParams: return "InvalidTopologyParams";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::StateSpaceTooLarge: return "StateSpaceTooLarge";
    case ErrorCode::NotIrreducible: return "NotIrreducible";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

bool is_validation_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::WeightSumViolation:
    case ErrorCode::MissingSelfLoop:
    case ErrorCode::ParamOutOfRange:
    case ErrorCode::InvalidTopologyParams:
    case ErrorCode::TooShort:
    case ErrorCode::Parse:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

namespace {

std::string describe(const std::vector<Issue>& issues) {
  std::ostringstream os;
  os << issues.size() << " invariant violation(s)";
  for (const auto& issue : issues) {
    os << "\n  " << to_string(issue.kind);
    if (issue.node >= 0) os << " node=" << issue.node;
    if (issue.from >= 0) os << " from=" << issue.from;
    if (!issue.field.empty()) os << " field=" << issue.field;
    os << " value=" << issue.value;
    if (!issue.message.empty()) os << " (" << issue.message << ")";
  }
  return os.str();
}

ErrorCode first_kind(const std::vector<Issue>& issues) {
  return issues.empty() ? ErrorCode::InvalidArgument : issues.front().kind;
}

}  // namespace

ValidationError::ValidationError(std::vector<Issue> issues)
    : Error(first_kind(issues), describe(issues)), issues_(std::move(issues)) {}

}  // namespace igl
