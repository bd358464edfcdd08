#pragma once

#include <stdexcept>
#include <string>

namespace entrynav {

// Base for runtime failures raised by the filter, dynamics, or harness.
class FilterError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite state or covariance encountered; carries the epoch at which
// propagation broke down.
class NumericalDivergence : public FilterError {
 public:
  NumericalDivergence(const std::string& what, double epoch)
      : FilterError(what + " (epoch " + std::to_string(epoch) + " s)"),
        epoch_(epoch) {}
  double epoch() const { return epoch_; }

 private:
  double epoch_;
};

// Innovation matrix failed its Cholesky factorization.
class SingularInnovation : public FilterError {
 public:
  SingularInnovation(const std::string& what, double condition_estimate)
      : FilterError(what + " (condition estimate " +
                    std::to_string(condition_estimate) + ")"),
        cond_(condition_estimate) {}
  double condition_estimate() const { return cond_; }

 private:
  double cond_;
};

// Vectorized linear gain system is singular; carries the solve residual.
class SingularGainSystem : public FilterError {
 public:
  SingularGainSystem(const std::string& what, double residual_norm)
      : FilterError(what + " (residual norm " + std::to_string(residual_norm) +
                    ")"),
        residual_(residual_norm) {}
  double residual_norm() const { return residual_; }

 private:
  double residual_;
};

// Latitude reached a pole where tan/cos of latitude blow up.
class PoleSingularity : public FilterError {
 public:
  using FilterError::FilterError;
};

// Vehicle colocated with a beacon: the range Jacobian is undefined.
class UndefinedJacobian : public FilterError {
 public:
  using FilterError::FilterError;
};

// A nonpositive variance showed up where a standard deviation was needed.
class InvalidCovariance : public FilterError {
 public:
  using FilterError::FilterError;
};

// Statistics requested but every run diverged.
class EmptyReport : public FilterError {
 public:
  using FilterError::FilterError;
};

// Caller broke an operation's documented precondition (dimensions, signs).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Configuration file problem; carries the offending key path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, const std::string& key_path)
      : std::runtime_error(what + " [key: " + key_path + "]"),
        key_path_(key_path) {}
  explicit ConfigError(const std::string& what)
      : std::runtime_error(what) {}
  const std::string& key_path() const { return key_path_; }

 private:
  std::string key_path_;
};

}  // namespace entrynav
