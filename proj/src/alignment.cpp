#include "eventflow/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "eventflow/error.hpp"

namespace eventflow::alignment {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_inputs(std::span<const double> a, std::span<const double> b,
                  std::optional<std::size_t> band) {
  if (a.empty() || b.empty()) throw DomainError("dtw: empty series");
  if (band) {
    const std::size_t diff = a.size() > b.size() ? a.size() - b.size() : b.size() - a.size();
    if (*band < diff) {
      throw DomainError("dtw: band " + std::to_string(*band) + " cannot bridge length difference " +
                        std::to_string(diff));
    }
  }
}

inline double sq(double x) { return x * x; }

inline bool in_band(std::size_t i, std::size_t j, std::optional<std::size_t> band) {
  if (!band) return true;
  return (i > j ? i - j : j - i) <= *band;
}

// -gamma * log(exp(-a/gamma) + exp(-b/gamma) + exp(-c/gamma))
inline double softmin(double a, double b, double c, double gamma) {
  const double lo = std::min({a, b, c});
  if (lo == kInf) return kInf;
  const double s = std::exp((lo - a) / gamma) + std::exp((lo - b) / gamma) +
                   std::exp((lo - c) / gamma);
  return lo - gamma * std::log(s);
}

void check_members(const std::vector<std::vector<double>>& members) {
  if (members.empty()) throw DomainError("barycenter: no members");
  for (const auto& m : members) {
    if (m.empty()) throw DomainError("barycenter: empty member");
  }
}

std::size_t default_length(const std::vector<std::vector<double>>& members, std::size_t requested) {
  if (requested > 0) return requested;
  std::size_t len = 0;
  for (const auto& m : members) len = std::max(len, m.size());
  return len;
}

std::vector<std::vector<double>> resample_all(const std::vector<std::vector<double>>& members,
                                              std::size_t length) {
  std::vector<std::vector<double>> out;
  out.reserve(members.size());
  for (const auto& m : members) out.push_back(m.size() == length ? m : resample(m, length));
  return out;
}

double summed_cost(std::span<const double> center, const std::vector<std::vector<double>>& members) {
  double total = 0.0;
  for (const auto& m : members) total += dtw_cost(center, m);
  return total;
}

}  // namespace

DtwResult dtw(std::span<const double> a, std::span<const double> b,
              std::optional<std::size_t> band) {
  check_inputs(a, b, band);
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  // acc(i, j) holds the best cost of aligning a[0..i-1] with b[0..j-1].
  std::vector<double> acc((n + 1) * (m + 1), kInf);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return acc[i * (m + 1) + j]; };
  at(0, 0) = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      if (!in_band(i - 1, j - 1, band)) continue;
      const double best = std::min({at(i - 1, j - 1), at(i - 1, j), at(i, j - 1)});
      at(i, j) = sq(a[i - 1] - b[j - 1]) + best;
    }
  }

  DtwResult result;
  result.cost = at(n, m);
  std::size_t i = n;
  std::size_t j = m;
  while (true) {
    result.path.steps.emplace_back(i - 1, j - 1);
    if (i == 1 && j == 1) break;
    const double diag = at(i - 1, j - 1);
    const double up = at(i - 1, j);
    const double left = at(i, j - 1);
    if (diag <= up && diag <= left) {
      --i;
      --j;
    } else if (up <= left) {
      --i;
    } else {
      --j;
    }
  }
  std::reverse(result.path.steps.begin(), result.path.steps.end());
  return result;
}

double dtw_cost(std::span<const double> a, std::span<const double> b,
                std::optional<std::size_t> band) {
  check_inputs(a, b, band);
  const std::size_t m = b.size();
  std::vector<double> prev(m + 1, kInf);
  std::vector<double> cur(m + 1, kInf);
  prev[0] = 0.0;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = kInf;
    for (std::size_t j = 1; j <= m; ++j) {
      if (!in_band(i - 1, j - 1, band)) {
        cur[j] = kInf;
        continue;
      }
      cur[j] = sq(a[i - 1] - b[j - 1]) + std::min({prev[j - 1], prev[j], cur[j - 1]});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double soft_dtw(std::span<const double> a, std::span<const double> b, double gamma) {
  if (!(gamma > 0.0)) throw DomainError("soft_dtw: gamma must be > 0");
  if (a.empty() || b.empty()) throw DomainError("soft_dtw: empty series");
  const std::size_t m = b.size();
  std::vector<double> prev(m + 1, kInf);
  std::vector<double> cur(m + 1, kInf);
  prev[0] = 0.0;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = kInf;
    for (std::size_t j = 1; j <= m; ++j) {
      cur[j] = sq(a[i - 1] - b[j - 1]) + softmin(prev[j - 1], prev[j], cur[j - 1], gamma);
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

SoftDtwGradient soft_dtw_gradient(std::span<const double> x, std::span<const double> y,
                                  double gamma) {
  if (!(gamma > 0.0)) throw DomainError("soft_dtw: gamma must be > 0");
  if (x.empty() || y.empty()) throw DomainError("soft_dtw: empty series");
  const std::size_t n = x.size();
  const std::size_t m = y.size();
  const std::size_t cols = m + 2;
  // Padded (n + 2) x (m + 2) lattices, 1-based interior.
  std::vector<double> r((n + 2) * cols, kInf);
  std::vector<double> d((n + 2) * cols, 0.0);
  std::vector<double> e((n + 2) * cols, 0.0);
  auto R = [&](std::size_t i, std::size_t j) -> double& { return r[i * cols + j]; };
  auto D = [&](std::size_t i, std::size_t j) -> double& { return d[i * cols + j]; };
  auto E = [&](std::size_t i, std::size_t j) -> double& { return e[i * cols + j]; };

  R(0, 0) = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      D(i, j) = sq(x[i - 1] - y[j - 1]);
      R(i, j) = D(i, j) + softmin(R(i - 1, j - 1), R(i - 1, j), R(i, j - 1), gamma);
    }
  }
  const double value = R(n, m);

  for (std::size_t i = 1; i <= n; ++i) R(i, m + 1) = -kInf;
  for (std::size_t j = 1; j <= m; ++j) R(n + 1, j) = -kInf;
  R(n + 1, m + 1) = value;
  E(n + 1, m + 1) = 1.0;
  for (std::size_t j = m; j >= 1; --j) {
    for (std::size_t i = n; i >= 1; --i) {
      const double a = std::exp((R(i + 1, j) - R(i, j) - D(i + 1, j)) / gamma);
      const double b = std::exp((R(i, j + 1) - R(i, j) - D(i, j + 1)) / gamma);
      const double c = std::exp((R(i + 1, j + 1) - R(i, j) - D(i + 1, j + 1)) / gamma);
      E(i, j) = E(i + 1, j) * a + E(i, j + 1) * b + E(i + 1, j + 1) * c;
    }
  }

  SoftDtwGradient out;
  out.value = value;
  out.grad.assign(n, 0.0);
  for (std::size_t i = 1; i <= n; ++i) {
    double g = 0.0;
    for (std::size_t j = 1; j <= m; ++j) g += E(i, j) * 2.0 * (x[i - 1] - y[j - 1]);
    out.grad[i - 1] = g;
  }
  return out;
}

std::vector<double> resample(std::span<const double> s, std::size_t length) {
  if (s.empty()) throw DomainError("resample: empty series");
  if (length == 0) throw DomainError("resample: zero target length");
  if (s.size() == length) return {s.begin(), s.end()};
  std::vector<double> out(length, s[0]);
  if (length == 1 || s.size() == 1) return out;
  const double scale = static_cast<double>(s.size() - 1) / static_cast<double>(length - 1);
  for (std::size_t i = 0; i < length; ++i) {
    const double pos = static_cast<double>(i) * scale;
    const auto lo = std::min(static_cast<std::size_t>(pos), s.size() - 2);
    const double t = pos - static_cast<double>(lo);
    out[i] = (1.0 - t) * s[lo] + t * s[lo + 1];
  }
  return out;
}

std::size_t medoid(const std::vector<std::vector<double>>& members) {
  check_members(members);
  const std::size_t n = members.size();
  std::vector<double> total(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double c = dtw_cost(members[i], members[j]);
      total[i] += c;
      total[j] += c;
    }
  }
  return static_cast<std::size_t>(std::min_element(total.begin(), total.end()) - total.begin());
}

Barycenter dba(const std::vector<std::vector<double>>& members, const BarycenterOptions& opts) {
  check_members(members);
  if (opts.max_iter < 1) throw DomainError("dba: max_iter must be >= 1");
  const std::size_t length = default_length(members, opts.length);
  const auto series = resample_all(members, length);

  Barycenter bc;
  bc.values = series[medoid(series)];
  bc.objective = summed_cost(bc.values, series);
  bc.history.push_back(bc.objective);

  std::vector<double> mean(length);
  std::vector<std::size_t> count(length);
  while (bc.iterations < opts.max_iter) {
    // Incremental means keep identical contributions exact.
    std::fill(mean.begin(), mean.end(), 0.0);
    std::fill(count.begin(), count.end(), 0);
    for (const auto& s : series) {
      for (auto [i, j] : dtw(bc.values, s).path.steps) {
        ++count[i];
        mean[i] += (s[j] - mean[i]) / static_cast<double>(count[i]);
      }
    }
    const double next = summed_cost(mean, series);
    ++bc.iterations;
    if (next > bc.objective) {
      // Rounding-level regression; keep the previous average.
      bc.history.push_back(bc.objective);
      bc.converged = true;
      break;
    }
    const double improvement = bc.objective - next;
    bc.values = mean;
    bc.objective = next;
    bc.history.push_back(next);
    if (improvement < opts.tol) {
      bc.converged = true;
      break;
    }
  }
  return bc;
}

SoftDtwGradient soft_barycenter_objective(std::span<const double> x,
                                          const std::vector<std::vector<double>>& members,
                                          double gamma) {
  SoftDtwGradient out;
  out.grad.assign(x.size(), 0.0);
  const double w = 1.0 / static_cast<double>(members.size());
  for (const auto& y : members) {
    const auto g = soft_dtw_gradient(x, y, gamma);
    out.value += w * g.value;
    for (std::size_t i = 0; i < x.size(); ++i) out.grad[i] += w * g.grad[i];
  }
  return out;
}

Barycenter soft_dtw_barycenter(const std::vector<std::vector<double>>& members,
                               const SoftBarycenterOptions& opts) {
  check_members(members);
  if (!(opts.gamma > 0.0)) throw DomainError("soft_dtw_barycenter: gamma must be > 0");
  if (opts.max_iter < 1) throw DomainError("soft_dtw_barycenter: max_iter must be >= 1");
  const std::size_t length = default_length(members, opts.length);
  const auto series = resample_all(members, length);

  std::vector<double> x(length, 0.0);
  for (std::size_t k = 0; k < series.size(); ++k) {
    for (std::size_t i = 0; i < length; ++i) {
      x[i] += (series[k][i] - x[i]) / static_cast<double>(k + 1);
    }
  }

  Barycenter bc;
  auto current = soft_barycenter_objective(x, series, opts.gamma);
  bc.history.push_back(current.value);
  double step = 1.0;
  std::vector<double> trial(length);
  while (bc.iterations < opts.max_iter) {
    double gnorm2 = 0.0;
    for (double g : current.grad) gnorm2 += g * g;
    if (gnorm2 == 0.0) {
      bc.converged = true;
      break;
    }
    // Armijo backtracking on the steepest-descent direction.
    bool accepted = false;
    SoftDtwGradient next;
    for (int halvings = 0; halvings < 60; ++halvings) {
      for (std::size_t i = 0; i < length; ++i) trial[i] = x[i] - step * current.grad[i];
      next = soft_barycenter_objective(trial, series, opts.gamma);
      if (next.value <= current.value - 1e-4 * step * gnorm2) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    ++bc.iterations;
    if (!accepted) {
      bc.history.push_back(current.value);
      bc.converged = true;
      break;
    }
    const double improvement = current.value - next.value;
    x = trial;
    current = std::move(next);
    bc.history.push_back(current.value);
    step *= 2.0;
    if (improvement < opts.tol) {
      bc.converged = true;
      break;
    }
  }
  bc.values = std::move(x);
  bc.objective = current.value;
  return bc;
}

}  // namespace eventflow::alignment
