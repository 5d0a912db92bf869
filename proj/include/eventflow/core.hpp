#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "eventflow/date.hpp"

namespace eventflow {

// Per-document topic distributions of one source, one row per dated document.
// Rows live on the probability simplex; dates are strictly increasing but may
// have gaps (days without an issue).
class ThetaMatrix {
 public:
  static constexpr double kSimplexTolerance = 1e-9;

  ThetaMatrix() = default;

  // Validates every invariant and throws DomainError on violation.
  ThetaMatrix(std::string source_id, std::vector<Date> dates, std::vector<double> rows,
              std::size_t topics);

  const std::string& source_id() const noexcept { return source_id_; }
  std::size_t size() const noexcept { return dates_.size(); }
  std::size_t topics() const noexcept { return topics_; }
  bool empty() const noexcept { return dates_.empty(); }

  const std::vector<Date>& dates() const noexcept { return dates_; }
  Date first_date() const { return dates_.front(); }
  Date last_date() const { return dates_.back(); }

  std::span<const double> row(std::size_t i) const {
    return {rows_.data() + i * topics_, topics_};
  }
  const std::vector<double>& data() const noexcept { return rows_; }

  // Half-open range [begin, end) of row indices with first <= date <= last.
  std::pair<std::size_t, std::size_t> row_range(Date first, Date last) const;

 private:
  std::string source_id_;
  std::vector<Date> dates_;
  std::vector<double> rows_;
  std::size_t topics_ = 0;
};

struct EventRecord {
  std::string name;
  Date date;

  bool operator==(const EventRecord&) const = default;
};

// Values over a strictly increasing integer index (day offsets or day numbers).
struct Series {
  std::vector<double> values;
  std::vector<std::int64_t> index;

  Series() = default;
  // Validates |values| == |index|, increasing index and finite values.
  Series(std::vector<double> v, std::vector<std::int64_t> idx);
  // Index 0..n-1.
  explicit Series(std::vector<double> v);

  std::size_t size() const noexcept { return values.size(); }
  bool empty() const noexcept { return values.empty(); }
};

// Zero-variance threshold for z_normalize; flatter inputs map to all zeros.
inline constexpr double kFlatStdDev = 1e-12;

// (x - mean) / population stddev. Throws DomainError on an empty series.
Series z_normalize(const Series& s);
std::vector<double> z_normalize(std::span<const double> values);

// Centered moving average of odd or even length k; windows are truncated at
// the boundaries. For even k the window spans k/2 before and k/2 - 1 after.
Series rolling_mean(const Series& s, std::size_t k);

// Rows with center - half_width <= date <= center + half_width, in date order.
struct WindowRows {
  std::vector<std::size_t> indices;
  std::vector<Date> dates;
};
WindowRows slice_window(const ThetaMatrix& m, Date center, std::int64_t half_width);

// Mean and population standard deviation.
double mean(std::span<const double> v);
double population_stddev(std::span<const double> v);

}  // namespace eventflow
