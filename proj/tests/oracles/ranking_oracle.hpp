#pragma once

// Reference scorer: for every row, walk every factor and test membership in a
// std::set; order by an explicit (score desc, id asc) key with std::sort.

#include <algorithm>
#include <cstdint>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

struct OracleFactor {
  std::int64_t weight_hundredths;
  std::set<std::uint64_t> rows;
};

struct Ranking {
  std::vector<std::int64_t> scores;      // indexed by row id
  std::vector<std::uint64_t> order;      // row ids, best first
};

inline Ranking brute_force_rank(std::size_t row_count, const std::vector<OracleFactor>& factors) {
  Ranking r;
  r.scores.assign(row_count, 0);
  for (std::uint64_t row = 0; row < row_count; ++row) {
    for (const auto& f : factors) {
      if (f.rows.count(row)) r.scores[row] += f.weight_hundredths;
    }
  }
  std::vector<std::pair<std::int64_t, std::uint64_t>> keyed;
  for (std::uint64_t row = 0; row < row_count; ++row) keyed.emplace_back(-r.scores[row], row);
  std::sort(keyed.begin(), keyed.end());
  for (const auto& k : keyed) r.order.push_back(k.second);
  return r;
}

}  // namespace oracle
