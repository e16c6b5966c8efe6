#pragma once

#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace muscup {

/// Raised when a configuration or precondition check fails.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Explicit scheme would be unstable for the requested step.
class CflError : public std::domain_error {
 public:
  CflError(const std::string& what, double cfl)
      : std::domain_error(what), cfl_(cfl) {}
  double cfl() const noexcept { return cfl_; }

 private:
  double cfl_;
};

/// A numerical failure inside a solver run. Carries the macro step index and
/// the parameter vector that produced it so sampled runs can be reproduced.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::size_t step,
              std::vector<double> params = {}, long sample = -1)
      : std::runtime_error(compose(what, step, params, sample)),
        step_(step),
        params_(std::move(params)),
        sample_(sample) {}

  std::size_t step() const noexcept { return step_; }
  const std::vector<double>& params() const noexcept { return params_; }
  long sample() const noexcept { return sample_; }

  SolverError with_sample(long sample) const {
    return SolverError(base_message(), step_, params_, sample);
  }

 private:
  static std::string compose(const std::string& what, std::size_t step,
                             const std::vector<double>& params, long sample) {
    std::ostringstream os;
    os.precision(17);
    os << what << " (step " << step;
    if (sample >= 0) os << ", sample " << sample;
    if (!params.empty()) {
      os << ", params [";
      for (std::size_t i = 0; i < params.size(); ++i)
        os << (i ? ", " : "") << params[i];
      os << "]";
    }
    os << ")";
    return os.str();
  }

  std::string base_message() const {
    std::string s = what();
    auto pos = s.rfind(" (step ");
    return pos == std::string::npos ? s : s.substr(0, pos);
  }

  std::size_t step_;
  std::vector<double> params_;
  long sample_;
};

/// Linear system could not be solved (duplicate centers, rank deficiency,
/// failed factorization).
class SingularSystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A result or configuration file could not be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace muscup
