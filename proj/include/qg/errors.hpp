#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qg {

/// Two fields (or a field and a parameter set) live on different grids.
struct ShapeMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A documented precondition of an operation does not hold.
struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// The time step does not resolve the fastest forcing oscillation.
struct ResolutionViolation : PreconditionError {
  using PreconditionError::PreconditionError;
};

/// A non-finite coefficient appeared during time integration.
class BlowUp : public std::runtime_error {
public:
  BlowUp(const std::string& what, double last_valid_time)
      : std::runtime_error(what), last_valid_time_(last_valid_time) {}
  double last_valid_time() const noexcept { return last_valid_time_; }

private:
  double last_valid_time_;
};

/// An iterative solver ran out of iterations or stagnated.
struct ConvergenceFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A configuration or spec file failed validation; `problems` lists every issue found.
class ParseError : public std::runtime_error {
public:
  explicit ParseError(std::vector<std::string> problems)
      : std::runtime_error(join(problems)), problems_(std::move(problems)) {}
  const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
  static std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) out += (out.empty() ? "" : "\n") + s;
    return out;
  }
  std::vector<std::string> problems_;
};

}  // namespace qg
