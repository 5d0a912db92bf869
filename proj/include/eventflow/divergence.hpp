#pragma once

#include <span>

namespace eventflow::divergence {

// All divergences are in bits (log base 2). Inputs are probability vectors of
// equal length; zero-mass terms of the first argument contribute nothing.

// Kullback-Leibler divergence sum_i p_i log2(p_i / q_i).
// Throws DomainError on a length mismatch and SupportError when some p_i > 0
// meets q_i == 0.
double kld(std::span<const double> p, std::span<const double> q);

// Jensen-Shannon divergence against the mixture M = (p + q) / 2, in [0, 1].
double jsd(std::span<const double> p, std::span<const double> q);

// sqrt(jsd): a metric on the simplex.
double jsd_distance(std::span<const double> p, std::span<const double> q);

}  // namespace eventflow::divergence
