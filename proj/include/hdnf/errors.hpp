#pragma once

#include <stdexcept>
#include <string>

namespace hdnf {

// Invalid configuration or file schema. CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite values or broken state encountered mid-run. Exit code 3.
class TrainingFault : public std::runtime_error {
 public:
  explicit TrainingFault(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hdnf
