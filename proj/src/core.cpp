#include "eventflow/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "eventflow/error.hpp"

namespace eventflow {

ThetaMatrix::ThetaMatrix(std::string source_id, std::vector<Date> dates, std::vector<double> rows,
                         std::size_t topics)
    : source_id_(std::move(source_id)),
      dates_(std::move(dates)),
      rows_(std::move(rows)),
      topics_(topics) {
  if (topics_ < 2) throw DomainError("theta matrix needs at least 2 topics");
  if (rows_.size() != dates_.size() * topics_) {
    throw DomainError("theta matrix has " + std::to_string(rows_.size()) + " cells, expected " +
                      std::to_string(dates_.size()) + " x " + std::to_string(topics_));
  }
  for (std::size_t i = 1; i < dates_.size(); ++i) {
    if (!(dates_[i - 1] < dates_[i])) {
      throw DomainError("theta dates not strictly increasing at " + dates_[i].iso());
    }
  }
  for (std::size_t i = 0; i < dates_.size(); ++i) {
    double sum = 0.0;
    for (double p : row(i)) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw DomainError("theta row " + dates_[i].iso() + " has a negative or non-finite entry");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kSimplexTolerance) {
      throw DomainError("theta row " + dates_[i].iso() + " sums to " + std::to_string(sum));
    }
  }
}

std::pair<std::size_t, std::size_t> ThetaMatrix::row_range(Date first, Date last) const {
  auto lo = std::lower_bound(dates_.begin(), dates_.end(), first);
  auto hi = std::upper_bound(lo, dates_.end(), last);
  return {static_cast<std::size_t>(lo - dates_.begin()),
          static_cast<std::size_t>(hi - dates_.begin())};
}

Series::Series(std::vector<double> v, std::vector<std::int64_t> idx)
    : values(std::move(v)), index(std::move(idx)) {
  if (values.size() != index.size()) throw DomainError("series values/index length mismatch");
  for (std::size_t i = 1; i < index.size(); ++i) {
    if (index[i] <= index[i - 1]) throw DomainError("series index not strictly increasing");
  }
  for (double x : values) {
    if (!std::isfinite(x)) throw DomainError("series contains a non-finite value");
  }
}

Series::Series(std::vector<double> v) : values(std::move(v)), index(values.size()) {
  std::iota(index.begin(), index.end(), std::int64_t{0});
  for (double x : values) {
    if (!std::isfinite(x)) throw DomainError("series contains a non-finite value");
  }
}

double mean(std::span<const double> v) {
  if (v.empty()) throw DomainError("mean of an empty range");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double population_stddev(std::span<const double> v) {
  const double mu = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

std::vector<double> z_normalize(std::span<const double> values) {
  if (values.empty()) throw DomainError("z_normalize: empty series");
  const double mu = mean(values);
  const double sd = population_stddev(values);
  std::vector<double> out(values.size(), 0.0);
  if (sd < kFlatStdDev) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mu) / sd;
  return out;
}

Series z_normalize(const Series& s) {
  Series out;
  out.values = z_normalize(std::span<const double>(s.values));
  out.index = s.index;
  return out;
}

Series rolling_mean(const Series& s, std::size_t k) {
  const std::size_t n = s.size();
  if (k < 1 || k > n) {
    throw DomainError("rolling_mean: window " + std::to_string(k) + " outside [1, " +
                      std::to_string(n) + "]");
  }
  const std::size_t before = k / 2;
  const std::size_t after = k - 1 - before;
  Series out;
  out.index = s.index;
  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= before ? i - before : 0;
    const std::size_t hi = std::min(n - 1, i + after);
    double sum = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) sum += s.values[j];
    out.values[i] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

WindowRows slice_window(const ThetaMatrix& m, Date center, std::int64_t half_width) {
  if (half_width < 0) throw DomainError("slice_window: negative half width");
  if (m.empty()) throw DomainError("slice_window: empty corpus");
  const Date lo = center - half_width;
  const Date hi = center + half_width;
  if (hi < m.first_date() || lo > m.last_date()) {
    throw DomainError("slice_window: window around " + center.iso() + " lies outside " +
                      m.first_date().iso() + ".." + m.last_date().iso());
  }
  const auto [b, e] = m.row_range(lo, hi);
  if (b == e) throw EmptyWindowError("slice_window: no rows within " + lo.iso() + ".." + hi.iso());
  WindowRows w;
  for (std::size_t i = b; i < e; ++i) {
    w.indices.push_back(i);
    w.dates.push_back(m.dates()[i]);
  }
  return w;
}

}  // namespace eventflow
