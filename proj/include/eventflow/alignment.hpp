#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace eventflow::alignment {

// Monotone, continuous alignment from (0, 0) to (n-1, m-1).
struct WarpPath {
  std::vector<std::pair<std::size_t, std::size_t>> steps;
};

struct DtwResult {
  double cost = 0.0;
  WarpPath path;
};

// Dynamic time warping with squared pointwise cost. `band` is a Sakoe-Chiba
// half-width (|i - j| <= band) and must be at least |len(a) - len(b)|.
// Ties between predecessors prefer the diagonal, then the vertical step.
DtwResult dtw(std::span<const double> a, std::span<const double> b,
              std::optional<std::size_t> band = std::nullopt);

// Cost only; O(min(n, m)) memory.
double dtw_cost(std::span<const double> a, std::span<const double> b,
                std::optional<std::size_t> band = std::nullopt);

// Soft-DTW: the DTW recursion with min replaced by the smoothed minimum
// -gamma * log(sum exp(-x / gamma)). Converges to dtw_cost as gamma -> 0.
double soft_dtw(std::span<const double> a, std::span<const double> b, double gamma);

struct SoftDtwGradient {
  double value = 0.0;
  std::vector<double> grad;  // d soft_dtw(x, y) / d x
};

// Value and gradient with respect to the first argument.
SoftDtwGradient soft_dtw_gradient(std::span<const double> x, std::span<const double> y,
                                  double gamma);

struct Barycenter {
  std::vector<double> values;
  // Final objective: summed DTW cost to the members (dba) or mean soft-DTW
  // cost (soft barycenter).
  double objective = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  // Objective before the first update followed by the value after each update.
  std::vector<double> history;
};

struct BarycenterOptions {
  std::size_t length = 0;  // 0 = common member length (or the longest member)
  std::size_t max_iter = 30;
  double tol = 1e-9;
};

// Linear-interpolation resampling to `length` points.
std::vector<double> resample(std::span<const double> s, std::size_t length);

// Index of the member with the smallest summed DTW cost to all members
// (lowest index on ties).
std::size_t medoid(const std::vector<std::vector<double>>& members);

// DTW barycenter averaging (Petitjean). Starts from the medoid and alternates
// between aligning every member to the current average and replacing each
// coordinate by the mean of the member values warped onto it. Stops when an
// update improves the objective by less than tol, when an update would not
// improve it at all, or after max_iter updates.
Barycenter dba(const std::vector<std::vector<double>>& members, const BarycenterOptions& opts = {});

struct SoftBarycenterOptions {
  std::size_t length = 0;
  double gamma = 1.0;
  std::size_t max_iter = 100;
  double tol = 1e-9;
};

// Minimises the mean soft-DTW cost to the members by gradient descent with
// Armijo backtracking, starting from the pointwise mean of the resampled
// members.
Barycenter soft_dtw_barycenter(const std::vector<std::vector<double>>& members,
                               const SoftBarycenterOptions& opts = {});

// Mean soft-DTW cost of x to the members and its gradient.
SoftDtwGradient soft_barycenter_objective(std::span<const double> x,
                                          const std::vector<std::vector<double>>& members,
                                          double gamma);

}  // namespace eventflow::alignment
