#include <doctest.h>

#include <cmath>
#include <random>

#include "eventflow/alignment.hpp"
#include "eventflow/error.hpp"
#include "oracles.hpp"

using namespace eventflow;
using namespace eventflow::alignment;
using V = std::vector<double>;

namespace {

double path_cost(const V& a, const V& b, const WarpPath& p) {
  double c = 0;
  for (auto [i, j] : p.steps) c += (a[i] - b[j]) * (a[i] - b[j]);
  return c;
}

bool valid_path(const WarpPath& p, std::size_t n, std::size_t m) {
  if (p.steps.empty() || p.steps.front() != std::pair<std::size_t, std::size_t>{0, 0}) return false;
  if (p.steps.back() != std::pair<std::size_t, std::size_t>{n - 1, m - 1}) return false;
  for (std::size_t k = 1; k < p.steps.size(); ++k) {
    const auto di = p.steps[k].first - p.steps[k - 1].first;
    const auto dj = p.steps[k].second - p.steps[k - 1].second;
    if (di > 1 || dj > 1 || di + dj == 0) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("dtw examples") {
  const V a{0.5, -1.0, 2.0, 3.5};
  const auto self = dtw(a, a);
  CHECK(self.cost == 0.0);
  REQUIRE(self.path.steps.size() == a.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(self.path.steps[i] == std::pair<std::size_t, std::size_t>{i, i});

  CHECK(dtw(V{0, 0, 1}, V{0, 1, 1}).cost == 0.0);
  CHECK(dtw(V{1, 2, 3}, V{1, 2, 2, 3}).cost == 0.0);
  CHECK(dtw(V{0, 0}, V{1}).cost == 2.0);

  CHECK_THROWS_AS(dtw(V{}, V{1}), DomainError);
  CHECK_THROWS_AS(dtw(V{1, 2, 3, 4}, V{1}, 2), DomainError);
  CHECK_NOTHROW(dtw(V{1, 2, 3, 4}, V{1}, 3));
}

TEST_CASE("dtw equals exhaustive warp-path enumeration") {
  std::mt19937_64 rng(606);
  std::uniform_int_distribution<std::size_t> len(1, 6);
  std::uniform_int_distribution<int> small(-3, 3);
  CHECK(oracle::count_warp_paths(6, 6) == 1683);
  int mismatches = 0;
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = len(rng);
    const std::size_t m = len(rng);
    V a(n);
    V b(m);
    // Half the pairs use small integers so that ties between paths occur.
    if (t % 2) {
      for (auto& x : a) x = small(rng);
      for (auto& x : b) x = small(rng);
    } else {
      a = oracle::random_series(rng, n);
      b = oracle::random_series(rng, m);
    }
    const auto r = dtw(a, b);
    if (r.cost != oracle::brute_force_dtw(a, b)) ++mismatches;
    CHECK(valid_path(r.path, n, m));
    CHECK(path_cost(a, b, r.path) == doctest::Approx(r.cost).epsilon(1e-12));
    CHECK(dtw_cost(a, b) == r.cost);

    const std::size_t diff = n > m ? n - m : m - n;
    const std::size_t band = diff + static_cast<std::size_t>(t % 3);
    const auto banded = dtw(a, b, band);
    if (banded.cost != oracle::brute_force_dtw(a, b, static_cast<std::ptrdiff_t>(band))) ++mismatches;
    CHECK(dtw_cost(a, b, band) == banded.cost);
  }
  CHECK(mismatches == 0);
}

TEST_CASE("dtw is symmetric and zero on identical inputs") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 1000; ++t) {
    const auto a = oracle::random_series(rng, 1 + t % 30);
    const auto b = oracle::random_series(rng, 1 + (t * 7) % 30);
    CHECK(dtw_cost(a, b) == doctest::Approx(dtw_cost(b, a)).epsilon(1e-12));
    CHECK(dtw_cost(a, a) == 0.0);
  }
}

TEST_CASE("soft-dtw limit, symmetry and monotonicity in gamma") {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 50; ++t) {
    const auto a = oracle::random_series(rng, 2 + t % 8);
    const auto b = oracle::random_series(rng, 2 + (t * 3) % 8);
    CHECK(std::abs(soft_dtw(a, b, 1e-6) - dtw_cost(a, b)) <= 1e-3);
    CHECK(soft_dtw(a, b, 0.5) == doctest::Approx(soft_dtw(b, a, 0.5)).epsilon(1e-12));
  }
  const auto a = oracle::random_series(rng, 12);
  const auto b = oracle::random_series(rng, 15);
  const double g001 = soft_dtw(a, b, 0.01);
  const double g01 = soft_dtw(a, b, 0.1);
  const double g1 = soft_dtw(a, b, 1.0);
  CHECK(g001 > g01);
  CHECK(g01 > g1);
  CHECK(soft_dtw(a, a, 1.0) < 0.0);
  CHECK_THROWS_AS(soft_dtw(a, b, 0.0), DomainError);
  CHECK_THROWS_AS(soft_dtw(a, b, -1.0), DomainError);
}

TEST_CASE("soft-dtw gradient matches central finite differences") {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 10; ++t) {
    const auto x = oracle::random_series(rng, 4 + t);
    const auto y = oracle::random_series(rng, 6 + t);
    const double gamma = t % 2 ? 1.0 : 0.3;
    const auto g = soft_dtw_gradient(x, y, gamma);
    CHECK(g.value == doctest::Approx(soft_dtw(x, y, gamma)).epsilon(1e-12));
    const auto fd = oracle::numeric_gradient([&](const V& z) { return soft_dtw(z, y, gamma); }, x);
    CHECK(oracle::max_relative_error(g.grad, fd) <= 1e-4);
  }

  // Two-member barycenter objective.
  const std::vector<V> members{oracle::random_series(rng, 8), oracle::random_series(rng, 8)};
  const auto x = oracle::random_series(rng, 8);
  const auto obj = soft_barycenter_objective(x, members, 1.0);
  const auto fd = oracle::numeric_gradient(
      [&](const V& z) { return soft_barycenter_objective(z, members, 1.0).value; }, x);
  CHECK(oracle::max_relative_error(obj.grad, fd) <= 1e-4);
}

TEST_CASE("resample and medoid") {
  CHECK(resample(V{0, 10}, 5) == V{0, 2.5, 5, 7.5, 10});
  CHECK(resample(V{3, 1, 4}, 3) == V{3, 1, 4});
  CHECK(resample(V{7}, 3) == V{7, 7, 7});
  CHECK(medoid({V{0, 0}, V{1, 1}, V{2, 2}}) == 1);
  CHECK(medoid({V{0, 0}, V{2, 2}}) == 0);
  CHECK_THROWS_AS(medoid({}), DomainError);
}

TEST_CASE("dba examples") {
  const V s{0.0, 1.5, -2.0, 4.0, 0.5};
  const auto fixed = dba({s, s, s, s});
  CHECK(fixed.values == s);
  CHECK(fixed.objective == 0.0);
  CHECK(fixed.iterations == 1);

  BarycenterOptions one;
  one.max_iter = 1;
  const auto avg = dba({V{0, 0}, V{2, 2}}, one);
  CHECK(avg.values == V{1, 1});
  CHECK(avg.iterations == 1);

  CHECK_THROWS_AS(dba({}), DomainError);
  CHECK_THROWS_AS(dba({V{}}), DomainError);
}

TEST_CASE("dba objective never increases") {
  std::mt19937_64 rng(4242);
  for (int set = 0; set < 20; ++set) {
    std::vector<V> members;
    const std::size_t n = 10;
    for (std::size_t i = 0; i < n; ++i) members.push_back(oracle::random_series(rng, 57));
    const auto b = dba(members);
    REQUIRE(b.history.size() >= 2);
    for (std::size_t i = 1; i < b.history.size(); ++i) CHECK(b.history[i] <= b.history[i - 1]);
    double from_medoid = 0;
    const auto& init = members[medoid(members)];
    for (const auto& m : members) from_medoid += dtw_cost(m, init);
    CHECK(b.objective <= from_medoid);
    CHECK(b.objective == b.history.back());
    CHECK(b.values.size() == 57);
  }
}

TEST_CASE("dba resamples members of different lengths") {
  BarycenterOptions opts;
  opts.length = 9;
  const auto b = dba({V{0, 1, 2, 3}, V{0, 0.5, 1, 1.5, 2, 2.5, 3}}, opts);
  CHECK(b.values.size() == 9);
}

TEST_CASE("soft-dtw barycenter contract") {
  const V s{0.0, 1.0, 3.0, 1.0, 0.0, -2.0};
  SoftBarycenterOptions opts;
  opts.gamma = 1e-3;
  const auto same = soft_dtw_barycenter({s, s, s}, opts);
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(std::abs(same.values[i] - s[i]) <= 1e-6);

  std::mt19937_64 rng(8);
  std::vector<V> members;
  for (int i = 0; i < 6; ++i) members.push_back(oracle::random_series(rng, 20));
  const auto b = soft_dtw_barycenter(members);
  REQUIRE(!b.history.empty());
  CHECK(b.objective <= b.history.front());
  for (std::size_t i = 1; i < b.history.size(); ++i) CHECK(b.history[i] <= b.history[i - 1]);
  opts.gamma = 0.0;
  CHECK_THROWS_AS(soft_dtw_barycenter(members, opts), DomainError);
  CHECK_THROWS_AS(soft_dtw_barycenter({}), DomainError);
}
