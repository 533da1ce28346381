#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace igl {

enum class ErrorCode {
  InvalidArgument,
  WeightSumViolation,
  MissingSelfLoop,
  ParamOutOfRange,
  InvalidTopologyParams,
  TooShort,
  StateSpaceTooLarge,
  NotIrreducible,
  NoConvergence,
  Overflow,
  Io,
  Parse,
  Internal,
};

const char* to_string(ErrorCode code);

// Validation-class errors map to CLI exit status 1, everything else to 2.
bool is_validation_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct Issue {
  ErrorCode kind;
  int node = -1;       // -1 when not node-specific
  int from = -1;       // source node for edge issues
  std::string field;   // offending parameter name, if any
  double value = 0.0;  // offending value, if any
  std::string message;
};

// Thrown by graph validation; carries every violated invariant.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Issue> issues);
  const std::vector<Issue>& issues() const noexcept { return issues_; }

 private:
  std::vector<Issue> issues_;
};

}  // namespace igl
