#include <algorithm>
#include <functional>

#include "pbx/errors.hpp"
#include "pbx/solver.hpp"

namespace pbx {

namespace {

// Partitions of `total` into exactly `parts` positive parts, non-increasing,
// in decreasing lexicographic order.
void partitions(int total, int parts, int max_part, std::vector<int>& prefix,
                const std::function<void(const std::vector<int>&)>& emit) {
  if (parts == 0) {
    if (total == 0) emit(prefix);
    return;
  }
  const int hi = std::min(max_part, total - (parts - 1));
  // The remaining parts - 1 entries are at most `part` each.
  for (int part = hi; part >= 1; --part) {
    if (static_cast<long>(part) * parts < total) break;
    prefix.push_back(part);
    partitions(total - part, parts - 1, part, prefix, emit);
    prefix.pop_back();
  }
}

}  // namespace

std::vector<Structure> enumerate_structures(int n, int r) {
  if (n < 0 || r < 0) throw DomainError("enumerate_structures: negative n or r");
  std::vector<Structure> out;
  const int max_blocks = std::min(r, n);
  std::vector<int> prefix;
  for (int blocks = 0; blocks <= max_blocks; ++blocks) {
    for (int ones = 0; ones <= n; ++ones) {
      for (int zeros = 0; ones + zeros <= n; ++zeros) {
        const int rest = n - ones - zeros;
        partitions(rest, blocks, rest, prefix, [&](const std::vector<int>& mult) {
          out.push_back(Structure{ones, zeros, mult});
        });
      }
    }
  }
  return out;
}

}  // namespace pbx
