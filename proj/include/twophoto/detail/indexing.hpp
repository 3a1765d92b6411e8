#pragma once

#include <cstddef>
#include <vector>

namespace twophoto::detail {

/// Row-major strides for a mixed-radix index (last mode fastest).
inline std::vector<std::ptrdiff_t> strides_for(const std::vector<int>& cutoffs) {
  std::vector<std::ptrdiff_t> strides(cutoffs.size(), 1);
  for (int k = static_cast<int>(cutoffs.size()) - 2; k >= 0; --k) {
    strides[k] = strides[k + 1] * cutoffs[k + 1];
  }
  return strides;
}

/// Flat offsets of every sub-index combination over the selected modes,
/// enumerated with the last selected mode fastest.
inline std::vector<std::ptrdiff_t> subspace_offsets(const std::vector<int>& cutoffs,
                                                    const std::vector<std::ptrdiff_t>& strides,
                                                    const std::vector<int>& modes) {
  std::ptrdiff_t count = 1;
  for (int m : modes) count *= cutoffs[m];
  std::vector<std::ptrdiff_t> offsets(static_cast<std::size_t>(count), 0);
  std::ptrdiff_t repeat = 1;
  for (int pos = static_cast<int>(modes.size()) - 1; pos >= 0; --pos) {
    const int m = modes[pos];
    const int c = cutoffs[m];
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      std::ptrdiff_t digit = (i / repeat) % c;
      offsets[i] += digit * strides[m];
    }
    repeat *= c;
  }
  return offsets;
}

}  // namespace twophoto::detail
