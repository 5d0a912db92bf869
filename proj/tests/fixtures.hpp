#pragma once

#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "eventflow/core.hpp"
#include "oracles.hpp"

namespace fixture {

using eventflow::Date;
using eventflow::ThetaMatrix;

// One row per day for which `keep(day)` holds, filled by `row(day index)`.
inline ThetaMatrix corpus(const std::string& id, Date start, std::size_t days, std::size_t k,
                          const std::function<std::vector<double>(std::size_t)>& row,
                          const std::function<bool(Date)>& keep = [](Date) { return true; }) {
  std::vector<Date> dates;
  std::vector<double> rows;
  for (std::size_t i = 0; i < days; ++i) {
    const Date d = start + static_cast<std::int64_t>(i);
    if (!keep(d)) continue;
    dates.push_back(d);
    const auto r = row(i);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  return ThetaMatrix(id, dates, rows, k);
}

inline ThetaMatrix constant_corpus(const std::string& id, Date start, std::size_t days,
                                   std::vector<double> row = {0.2, 0.3, 0.5}) {
  const std::size_t k = row.size();
  return corpus(id, start, days, k, [row](std::size_t) { return row; });
}

inline ThetaMatrix dirichlet_corpus(const std::string& id, Date start, std::size_t days, std::size_t k,
                                    std::uint64_t seed, double alpha = 1.0) {
  auto rng = std::make_shared<std::mt19937_64>(seed);
  return corpus(id, start, days, k, [rng, k, alpha](std::size_t) { return oracle::random_simplex(*rng, k, alpha); });
}

}  // namespace fixture
