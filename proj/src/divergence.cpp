#include "eventflow/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "eventflow/error.hpp"

namespace eventflow::divergence {

namespace {

void check_dims(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw DomainError("divergence: dimension mismatch " + std::to_string(p.size()) + " vs " +
                      std::to_string(q.size()));
  }
  if (p.empty()) throw DomainError("divergence: empty distribution");
}

}  // namespace

double kld(std::span<const double> p, std::span<const double> q) {
  check_dims(p, q);
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) {
      throw SupportError("kld: p has mass at component " + std::to_string(i) + " where q has none");
    }
    sum += p[i] * std::log2(p[i] / q[i]);
  }
  // Rounding can leave tiny negatives for p ~= q.
  return std::max(sum, 0.0);
}

double jsd(std::span<const double> p, std::span<const double> q) {
  check_dims(p, q);
  // Both KL terms are accumulated in one pass; the mixture has support wherever
  // either argument does, so no term can diverge.
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0.0) sum += p[i] * std::log2(p[i] / m);
    if (q[i] > 0.0) sum += q[i] * std::log2(q[i] / m);
  }
  return std::clamp(0.5 * sum, 0.0, 1.0);
}

double jsd_distance(std::span<const double> p, std::span<const double> q) {
  return std::sqrt(jsd(p, q));
}

}  // namespace eventflow::divergence
