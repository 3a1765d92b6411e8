#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace twophoto {

using Complex = std::complex<double>;

/// Thrown when a requested truncated Fock computation exceeds the
/// configured Hilbert-space dimension cap.
class ResourceLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Total Hilbert-space dimension cap for truncated-Fock computations.
/// Defaults to 200000; override with the TWOPHOTO_DIM_LIMIT env variable.
std::size_t dim_limit();

void require_dim(std::size_t dim, const std::string& what);

/// Non-fatal diagnostics (truncation warnings and the like) go to stderr.
void warn(const std::string& message);

}  // namespace twophoto
