#pragma once

#include <stdexcept>
#include <string>

namespace nestor {

// Invalid argument to a library operation (bad epsilon, delta, stage, ...).
class ParameterError : public std::invalid_argument {
 public:
  explicit ParameterError(const std::string& what)
      : std::invalid_argument(what) {}
};

// A derandomized schedule assigned zero replications to some level.
class ScheduleInfeasibleError : public std::runtime_error {
 public:
  ScheduleInfeasibleError(int level, const std::string& what)
      : std::runtime_error(what), level_(level) {}
  int level() const { return level_; }

 private:
  int level_;
};

}  // namespace nestor
