#include "gtsim/rng.hpp"

#include <algorithm>
#include <unordered_set>

#include "gtsim/errors.hpp"

namespace gtsim {

std::vector<std::uint32_t> sample_sorted_subset(std::uint64_t n, std::uint64_t k,
                                                SplitMix64& rng) {
  if (k > n) throw InvalidParameterError("sample_sorted_subset: k > n");
  std::vector<std::uint32_t> out;
  out.reserve(k);
  if (k == 0) return out;

  // Small k: linear membership scan beats hashing. The branch does not
  // change the draw sequence, only the lookup structure.
  if (k <= 128) {
    for (std::uint64_t j = n - k; j < n; ++j) {
      const std::uint64_t t = rng.below(j + 1);
      const auto tv = static_cast<std::uint32_t>(t);
      if (std::find(out.begin(), out.end(), tv) != out.end())
        out.push_back(static_cast<std::uint32_t>(j));
      else
        out.push_back(tv);
    }
  } else {
    std::unordered_set<std::uint32_t> taken;
    taken.reserve(k * 2);
    for (std::uint64_t j = n - k; j < n; ++j) {
      const std::uint64_t t = rng.below(j + 1);
      const auto tv = static_cast<std::uint32_t>(t);
      if (taken.insert(tv).second)
        out.push_back(tv);
      else {
        taken.insert(static_cast<std::uint32_t>(j));
        out.push_back(static_cast<std::uint32_t>(j));
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace gtsim
