#pragma once

// Bucket grid for parabolic range queries: cells are r wide in space and r^2
// long in time, so a ball of radius r touches only the 3^(d+1) neighbouring
// cells.

#include "mcfsing/spacetime.hpp"

#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

namespace mcfsing::detail {

struct CellKeyHash {
  std::size_t operator()(const std::vector<std::int64_t>& key) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (auto v : key) {
      h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }
};

class ParabolicGrid {
 public:
  ParabolicGrid(int spatial_dim, double r) : dim_(spatial_dim), r_(r) {}

  std::vector<std::int64_t> key(const SpaceTimePoint& p) const {
    std::vector<std::int64_t> k(dim_ + 1);
    for (int i = 0; i < dim_; ++i) k[i] = static_cast<std::int64_t>(std::floor(p.x[i] / r_));
    k[dim_] = static_cast<std::int64_t>(std::floor(p.t / (r_ * r_)));
    return k;
  }

  void insert(const SpaceTimePoint& p, std::size_t index) { cells_[key(p)].push_back(index); }

  /// Calls f(index) for every stored index in the cells adjacent to p.
  template <class F>
  void for_each_candidate(const SpaceTimePoint& p, F&& f) const {
    const auto base = key(p);
    std::vector<std::int64_t> probe(base.size());
    const int n = dim_ + 1;
    std::int64_t combos = 1;
    for (int i = 0; i < n; ++i) combos *= 3;
    for (std::int64_t c = 0; c < combos; ++c) {
      std::int64_t rem = c;
      for (int i = 0; i < n; ++i) {
        probe[i] = base[i] + (rem % 3) - 1;
        rem /= 3;
      }
      auto it = cells_.find(probe);
      if (it == cells_.end()) continue;
      for (auto idx : it->second) f(idx);
    }
  }

 private:
  int dim_;
  double r_;
  std::unordered_map<std::vector<std::int64_t>, std::vector<std::size_t>, CellKeyHash> cells_;
};

}  // namespace mcfsing::detail
