#pragma once

#include <stdexcept>
#include <string>

namespace sra {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input data: bad JSON line, bad number, bad record shape.
struct ParseError : Error {
  using Error::Error;
};

// Structurally valid input that violates a dataset or model invariant.
struct ValidationError : Error {
  using Error::Error;
};

// Bad configuration value or unknown key.
struct ConfigError : Error {
  using Error::Error;
};

// A pipeline stage failed; carries the stage name for diagnostics.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message)
      : Error("[" + stage + "] " + message), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace sra
