#pragma once

#include <stdexcept>
#include <string>

namespace npaft {

// Error categories map one-to-one onto CLI exit codes.
enum class ErrorKind {
  kInput = 2,
  kNumeric = 3,
  kConfig = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string module, const std::string& message)
      : std::runtime_error(module + ": " + message),
        kind_(kind),
        module_(std::move(module)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
  std::string module_;
};

class InputError : public Error {
 public:
  InputError(std::string module, const std::string& message)
      : Error(ErrorKind::kInput, std::move(module), message) {}
};

class NumericError : public Error {
 public:
  NumericError(std::string module, const std::string& message)
      : Error(ErrorKind::kNumeric, std::move(module), message) {}
};

class ConfigError : public Error {
 public:
  ConfigError(std::string module, const std::string& message)
      : Error(ErrorKind::kConfig, std::move(module), message) {}
};

}  // namespace npaft
