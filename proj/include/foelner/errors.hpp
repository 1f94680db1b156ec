#pragma once

#include <stdexcept>
#include <string>

namespace foelner {

// Raised when an input document or argument violates a contract.
// CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a request would exceed a hard size cap (dense windows, joins).
class ResourceError : public std::runtime_error {
public:
  explicit ResourceError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a measured quantity lands above a bound the run promised to
// certify.  CLI maps this to exit code 3.
class CertifiedBoundError : public std::runtime_error {
public:
  explicit CertifiedBoundError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace foelner
