#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace kms {

// Domain-level failure with a stable machine-readable code; the CLI maps
// these to exit status 1 and a JSON error object.
struct KmsError : std::runtime_error {
  std::string code;

  KmsError(std::string c, const std::string& detail)
      : std::runtime_error(detail), code(std::move(c)) {}
};

}  // namespace kms
