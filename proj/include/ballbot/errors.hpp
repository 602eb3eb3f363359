#ifndef BALLBOT_ERRORS_HPP
#define BALLBOT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ballbot {

// Mass matrix (or its origin determinant d(theta)) within the singularity guard.
struct SingularMass : std::runtime_error {
  explicit SingularMass(const std::string& what) : std::runtime_error(what) {}
};

// Zenith angle alpha in {0, pi/2}: the torque conversion matrix degenerates.
struct DegenerateAngle : std::runtime_error {
  explicit DegenerateAngle(const std::string& what) : std::runtime_error(what) {}
};

// Adaptive integrator could not meet tolerances above the minimum step size.
struct StepFailure : std::runtime_error {
  explicit StepFailure(const std::string& what) : std::runtime_error(what) {}
};

struct Diverged : std::runtime_error {
  explicit Diverged(const std::string& what) : std::runtime_error(what) {}
};

struct SingularJacobian : std::runtime_error {
  explicit SingularJacobian(const std::string& what) : std::runtime_error(what) {}
};

struct SchedulingOutOfRange : std::runtime_error {
  explicit SchedulingOutOfRange(const std::string& what) : std::runtime_error(what) {}
};

// QP reported Infeasible (or worse) where the caller required a solution.
struct QpFailure : std::runtime_error {
  explicit QpFailure(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Singularity guard for d(theta); |d| for the refined parameters is O(1e-4),
// four orders above the guard.
inline constexpr double kDetGuard = 1e-12;

}  // namespace ballbot

#endif  // BALLBOT_ERRORS_HPP
