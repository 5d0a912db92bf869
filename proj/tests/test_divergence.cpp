#include <doctest.h>

#include <cmath>
#include <random>

#include "eventflow/divergence.hpp"
#include "eventflow/error.hpp"
#include "oracles.hpp"

using namespace eventflow;
using divergence::jsd;
using divergence::jsd_distance;
using divergence::kld;
using V = std::vector<double>;

TEST_CASE("kld examples") {
  CHECK(kld(V{0.3, 0.7}, V{0.3, 0.7}) == 0.0);
  CHECK(kld(V{1.0, 0.0}, V{0.5, 0.5}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(kld(V{0.5, 0.5}, V{0.9, 0.1}) == doctest::Approx(0.736966).epsilon(1e-6));
  CHECK_THROWS_AS(kld(V{0.5, 0.5}, V{1.0, 0.0}), SupportError);
  CHECK_THROWS_AS(kld(V{0.5, 0.5}, V{0.2, 0.3, 0.5}), DomainError);
}

TEST_CASE("jsd and jsd_distance examples") {
  CHECK(jsd(V{0.25, 0.75}, V{0.25, 0.75}) == 0.0);
  CHECK(jsd(V{1.0, 0.0}, V{0.0, 1.0}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(jsd_distance(V{0.25, 0.75}, V{0.25, 0.75}) == 0.0);
  CHECK(jsd_distance(V{1.0, 0.0}, V{0.0, 1.0}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(jsd(V{0.5, 0.5}, V{0.2, 0.3, 0.5}), DomainError);
}

TEST_CASE("kld and jsd agree with a 50-digit oracle") {
  std::mt19937_64 rng(2024);
  double worst_kld = 0.0;
  double worst_jsd = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t k = 2 + static_cast<std::size_t>(t) % 30;
    const auto p = oracle::random_simplex(rng, k, 0.5);
    const auto q = oracle::random_simplex(rng, k, 0.5);
    worst_kld = std::max(worst_kld, std::abs(kld(p, q) - oracle::big_kld(p, q).convert_to<double>()));
    worst_jsd = std::max(worst_jsd, std::abs(jsd(p, q) - oracle::big_jsd(p, q).convert_to<double>()));
    CHECK(kld(p, p) == 0.0);
  }
  CHECK(worst_kld <= 1e-12);
  CHECK(worst_jsd <= 1e-12);
}

TEST_CASE("jsd is symmetric, non-negative and at most one bit") {
  std::mt19937_64 rng(99);
  int bad = 0;
  for (int t = 0; t < 10000; ++t) {
    const std::size_t k = 2 + static_cast<std::size_t>(t) % 20;
    const double alpha = t % 3 == 0 ? 0.05 : 1.0;
    const auto p = oracle::random_simplex(rng, k, alpha);
    const auto q = oracle::random_simplex(rng, k, alpha);
    const double a = jsd(p, q);
    const double b = jsd(q, p);
    if (!(a >= 0.0 && a <= 1.0 + 1e-12) || std::abs(a - b) > 1e-15) ++bad;
  }
  CHECK(bad == 0);
}

TEST_CASE("jsd handles zero mass without smoothing") {
  const V p{0.5, 0.5, 0.0};
  const V q{0.0, 0.5, 0.5};
  CHECK(jsd(p, q) == doctest::Approx(oracle::big_jsd(p, q).convert_to<double>()).epsilon(1e-14));
  CHECK(jsd(p, q) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("sqrt-jsd satisfies the triangle inequality") {
  std::mt19937_64 rng(7);
  double worst = -1.0;
  for (int t = 0; t < 10000; ++t) {
    const std::size_t k = 2 + static_cast<std::size_t>(t) % 10;
    const double alpha = t % 2 ? 0.1 : 2.0;
    const auto p = oracle::random_simplex(rng, k, alpha);
    const auto q = oracle::random_simplex(rng, k, alpha);
    const auto r = oracle::random_simplex(rng, k, alpha);
    worst = std::max(worst, jsd_distance(p, r) - jsd_distance(p, q) - jsd_distance(q, r));
  }
  CHECK(worst <= 1e-9);
}
