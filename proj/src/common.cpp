#include "twophoto/common.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace twophoto {

std::size_t dim_limit() {
  static const std::size_t limit = [] {
    if (const char* env = std::getenv("TWOPHOTO_DIM_LIMIT")) {
      char* end = nullptr;
      unsigned long long v = std::strtoull(env, &end, 10);
      if (end != env && v > 0) return static_cast<std::size_t>(v);
      warn("ignoring unparsable TWOPHOTO_DIM_LIMIT value");
    }
    return static_cast<std::size_t>(200000);
  }();
  return limit;
}

void require_dim(std::size_t dim, const std::string& what) {
  if (dim > dim_limit()) {
    throw ResourceLimitError(what + ": dimension " + std::to_string(dim) +
                             " exceeds limit " + std::to_string(dim_limit()));
  }
}

void warn(const std::string& message) {
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  std::cerr << "[twophoto] warning: " << message << "\n";
}

}  // namespace twophoto
