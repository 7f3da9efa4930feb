#ifndef RISKRNN_ERRORS_H_
#define RISKRNN_ERRORS_H_

#include <stdexcept>
#include <string>

namespace riskrnn {

// Caller broke a shape or precondition contract (dimension mismatch, empty
// input where one is required).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Invalid or inconsistent configuration values, duplicate parameter names,
// unknown config keys.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numeric input outside the supported range (e.g. extreme log-size terms).
class RangeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite gradients or losses during optimization.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Scenario construction gave up after its retry budget.
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A metric is undefined for the given inputs (e.g. AP with zero positives).
class MetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or unreadable files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace riskrnn

#endif  // RISKRNN_ERRORS_H_
