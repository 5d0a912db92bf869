#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "eventflow/alignment.hpp"
#include "eventflow/clustering.hpp"
#include "eventflow/error.hpp"
#include "oracles.hpp"

using namespace eventflow;
using namespace eventflow::clustering;
using V = std::vector<double>;

namespace {

std::vector<std::string> names(std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("p" + std::to_string(i));
  return ids;
}

DistanceMatrix from_rows(const std::vector<V>& rows) {
  V flat;
  for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
  return DistanceMatrix(names(rows.size()), flat);
}

std::vector<V> random_matrix(std::mt19937_64& rng, std::size_t n, bool integer) {
  std::uniform_real_distribution<double> u(0.1, 10.0);
  std::uniform_int_distribution<int> ui(1, 4);
  std::vector<V> d(n, V(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) d[i][j] = d[j][i] = integer ? ui(rng) : u(rng);
  }
  return d;
}

std::vector<V> to_rows(const DistanceMatrix& dm) {
  std::vector<V> d(dm.size(), V(dm.size()));
  for (std::size_t i = 0; i < dm.size(); ++i) {
    for (std::size_t j = 0; j < dm.size(); ++j) d[i][j] = dm(i, j);
  }
  return d;
}

const std::vector<V> kTwoPairs{{0, 1, 10, 10}, {1, 0, 10, 10}, {10, 10, 0, 1}, {10, 10, 1, 0}};

}  // namespace

TEST_CASE("distance matrix validation") {
  CHECK_NOTHROW(from_rows({{0, 1}, {1, 0}}));
  CHECK_THROWS_AS(from_rows({{0, 1}, {2, 0}}), DomainError);
  CHECK_THROWS_AS(from_rows({{1, 1}, {1, 0}}), DomainError);
  CHECK_THROWS_AS(from_rows({{0, -1}, {-1, 0}}), DomainError);
  CHECK_THROWS_AS(from_rows({{0, NAN}, {NAN, 0}}), DomainError);
  CHECK_THROWS_AS(DistanceMatrix(names(2), V{0, 1, 1}), DomainError);
}

TEST_CASE("pairwise dtw") {
  std::mt19937_64 rng(10);
  std::vector<V> series;
  for (int i = 0; i < 10; ++i) series.push_back(oracle::random_series(rng, 20));
  series.push_back(series[3]);
  const auto dm = pairwise_dtw(series, names(series.size()), 3);
  for (std::size_t i = 0; i < series.size(); ++i) {
    for (std::size_t j = 0; j < series.size(); ++j) {
      CHECK(dm(i, j) == (i == j ? 0.0 : alignment::dtw_cost(series[std::min(i, j)], series[std::max(i, j)])));
      CHECK(dm(i, j) == dm(j, i));
    }
  }
  CHECK(dm(3, 10) == 0.0);

  const auto three = pairwise_dtw({V{0, 1, 2}, V{2, 1, 0}, V{5, 5, 7}}, names(3));
  std::set<double> off{three(0, 1), three(0, 2), three(1, 2)};
  CHECK(off.size() == 3);

  CHECK_THROWS_AS(pairwise_dtw({V{0, 1, 2}, V{0, 1}}, names(2)), DomainError);
  CHECK_THROWS_AS(pairwise_dtw({V{0, 1, 2}}, names(1)), DomainError);
}

TEST_CASE("upgma examples") {
  const auto two = upgma(from_rows({{0, 3.5}, {3.5, 0}}));
  REQUIRE(two.merges.size() == 1);
  CHECK(two.merges[0].height == 3.5);
  CHECK(two.merges[0].size == 2);

  const auto d = upgma(from_rows(kTwoPairs));
  REQUIRE(d.merges.size() == 3);
  CHECK(d.merges[0].a == 0);
  CHECK(d.merges[0].b == 1);
  CHECK(d.merges[0].height == 1.0);
  CHECK(d.merges[1].a == 2);
  CHECK(d.merges[1].b == 3);
  CHECK(d.merges[1].height == 1.0);
  CHECK(d.merges[2].a == 4);
  CHECK(d.merges[2].b == 5);
  CHECK(d.merges[2].height == 10.0);
  CHECK(d.monotone());
}

TEST_CASE("agglomeration agrees with the naive reference for n <= 8") {
  std::mt19937_64 rng(81);
  int mismatches = 0;
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 2 + static_cast<std::size_t>(t) % 7;
    const auto rows = random_matrix(rng, n, t % 2 == 0);
    const auto dm = from_rows(rows);
    const std::pair<Linkage, oracle::NaiveLinkage> kinds[] = {
        {Linkage::average, oracle::NaiveLinkage::average},
        {Linkage::complete, oracle::NaiveLinkage::complete},
        {Linkage::single, oracle::NaiveLinkage::single}};
    for (auto [lib, ref] : kinds) {
      const auto got = agglomerate(dm, lib);
      const auto want = oracle::naive_agglomerate(rows, ref);
      REQUIRE(got.merges.size() == want.size());
      for (std::size_t m = 0; m < want.size(); ++m) {
        if (got.merges[m].a != want[m].a || got.merges[m].b != want[m].b ||
            got.merges[m].size != want[m].size || std::abs(got.merges[m].height - want[m].height) > 1e-12) {
          ++mismatches;
        }
      }
    }
  }
  CHECK(mismatches == 0);
}

TEST_CASE("upgma heights are permutation-equivariant") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 3 + static_cast<std::size_t>(t) % 10;
    const auto rows = random_matrix(rng, n, false);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<V> permuted(n, V(n));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) permuted[i][j] = rows[perm[i]][perm[j]];
    }
    const auto a = upgma(from_rows(rows));
    const auto b = upgma(from_rows(permuted));
    for (std::size_t m = 0; m < a.merges.size(); ++m) {
      CHECK(a.merges[m].height == doctest::Approx(b.merges[m].height).epsilon(1e-12));
      CHECK(a.merges[m].size == b.merges[m].size);
    }
    // Flat partitions agree after undoing the permutation.
    const auto la = cut(a, 2);
    const auto lb = cut(b, 2);
    std::vector<std::size_t> back(n);
    for (std::size_t i = 0; i < n; ++i) back[perm[i]] = lb[i];
    CHECK(adjusted_rand_index(la, back) == doctest::Approx(1.0));
  }
}

TEST_CASE("cut examples") {
  const auto d = upgma(from_rows(kTwoPairs));
  CHECK(cut(d, 1) == std::vector<std::size_t>{0, 0, 0, 0});
  CHECK(cut(d, 4) == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(cut(d, 2) == std::vector<std::size_t>{0, 0, 1, 1});
  CHECK_THROWS_AS(cut(d, 0), DomainError);
  CHECK_THROWS_AS(cut(d, 5), DomainError);

  // Labels are numbered by the lowest leaf of each cluster.
  const auto e = upgma(from_rows({{0, 10, 1}, {10, 0, 10}, {1, 10, 0}}));
  CHECK(cut(e, 2) == std::vector<std::size_t>{0, 1, 0});
}

TEST_CASE("silhouette examples and naive agreement") {
  CHECK(silhouette(from_rows({{0, 0, 5, 5}, {0, 0, 5, 5}, {5, 5, 0, 0}, {5, 5, 0, 0}}), {0, 0, 1, 1}) == 1.0);

  std::vector<V> equi(6, V(6, 1.0));
  for (std::size_t i = 0; i < 6; ++i) equi[i][i] = 0.0;
  const std::vector<std::size_t> split{0, 1, 0, 1, 1, 0};
  const double s = silhouette(from_rows(equi), split);
  CHECK(s <= 0.0);
  CHECK(s == doctest::Approx(oracle::naive_silhouette(equi, split)).epsilon(1e-12));

  CHECK(silhouette(from_rows(kTwoPairs), {0, 0, 0, 1}) ==
        doctest::Approx(oracle::naive_silhouette(kTwoPairs, {0, 0, 0, 1})).epsilon(1e-12));
  CHECK_THROWS_AS(silhouette(from_rows(kTwoPairs), {0, 0, 0, 0}), DomainError);

  std::mt19937_64 rng(12);
  double worst = 0.0;
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 3 + static_cast<std::size_t>(t) % 15;
    const auto rows = random_matrix(rng, n, t % 3 == 0);
    std::uniform_int_distribution<std::size_t> lab(0, 1 + static_cast<std::size_t>(t) % 4);
    std::vector<std::size_t> labels(n);
    for (auto& l : labels) l = lab(rng);
    labels[0] = 0;
    labels[1] = 1;
    const double got = silhouette(from_rows(rows), labels);
    CHECK(got >= -1.0);
    CHECK(got <= 1.0);
    worst = std::max(worst, std::abs(got - oracle::naive_silhouette(rows, labels)));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("adjusted rand index") {
  CHECK(adjusted_rand_index({0, 0, 1, 1, 2}, {0, 0, 1, 1, 2}) == doctest::Approx(1.0));
  CHECK(adjusted_rand_index({0, 0, 1, 1, 2}, {2, 2, 0, 0, 1}) == doctest::Approx(1.0));
  // Hand-computed contingency example.
  CHECK(adjusted_rand_index({0, 0, 0, 1, 1, 1}, {0, 0, 1, 1, 2, 2}) == doctest::Approx(0.24242424242424243));
}

TEST_CASE("select_model examples") {
  // Two duplicated groups.
  std::vector<V> rows(6, V(6, 0.0));
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) rows[i][j] = (i < 3) == (j < 3) ? 0.0 : 4.0;
  }
  const auto sel = select_model(from_rows(rows), 2, 5, {Linkage::average, Linkage::complete});
  CHECK(sel.k == 2);
  CHECK(sel.silhouette == 1.0);
  CHECK(sel.grid.size() == 8);
  CHECK(sel.labels == std::vector<std::size_t>{0, 0, 0, 1, 1, 1});

  std::mt19937_64 rng(2);
  const auto fixed = select_model(from_rows(random_matrix(rng, 7, false)), 2, 2, {Linkage::average});
  CHECK(fixed.k == 2);
  CHECK(fixed.grid.size() == 1);

  CHECK_THROWS_AS(select_model(from_rows(rows), 3, 2, {Linkage::average}), DomainError);
  CHECK_THROWS_AS(select_model(from_rows(rows), 2, 3, {}), DomainError);
  CHECK_THROWS_AS(select_model(from_rows(rows), 2, 6, {Linkage::average}), DomainError);
}

TEST_CASE("embed_2d examples") {
  const auto tri = embed_2d(from_rows({{0, 1, 1}, {1, 0, 1}, {1, 1, 0}}));
  auto dist = [&](std::size_t i, std::size_t j) {
    return std::hypot(tri.coords[i][0] - tri.coords[j][0], tri.coords[i][1] - tri.coords[j][1]);
  };
  CHECK(std::abs(dist(0, 1) - 1.0) <= 1e-6);
  CHECK(std::abs(dist(0, 2) - 1.0) <= 1e-6);
  CHECK(std::abs(dist(1, 2) - 1.0) <= 1e-6);
  CHECK(tri.coords[0][0] >= 0.0);

  const auto dup = embed_2d(from_rows({{0, 0, 3}, {0, 0, 3}, {3, 3, 0}}));
  CHECK(dup.coords[0][0] == doctest::Approx(dup.coords[1][0]));
  CHECK(dup.coords[0][1] == doctest::Approx(dup.coords[1][1]));

  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd(0, 5);
  std::vector<std::array<double, 2>> pts(12);
  for (auto& p : pts) p = {nd(rng), nd(rng)};
  std::vector<V> rows(pts.size(), V(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < pts.size(); ++j) rows[i][j] = std::hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]);
  }
  const auto planar = embed_2d(from_rows(rows));
  CHECK(planar.stress <= 1e-9);
  CHECK_FALSE(planar.degenerate);
  const auto back = to_rows(euclidean_distances(planar, names(pts.size())));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j < pts.size(); ++j) CHECK(back[i][j] == doctest::Approx(rows[i][j]).epsilon(1e-9));
  }

  const auto zero = embed_2d(from_rows({{0, 0, 0}, {0, 0, 0}, {0, 0, 0}}));
  CHECK(zero.degenerate);
  for (const auto& c : zero.coords) {
    CHECK(c[0] == 0.0);
    CHECK(c[1] == 0.0);
  }
}

TEST_CASE("archetypes examples") {
  const V a{0, 1, 2, 1, 0};
  const V b{3, 3, 1, 0, 0};
  const auto arch = archetypes({a, a, a, b}, {0, 0, 0, 1});
  REQUIRE(arch.size() == 2);
  CHECK(arch[0].values == a);
  CHECK(arch[1].values == b);
  CHECK_THROWS_AS(archetypes({a, b}, {0, 2}), DomainError);
  CHECK_THROWS_AS(archetypes({a, b}, {0}), DomainError);
}

TEST_CASE("fit recovers planted groups deterministically in both spaces") {
  std::mt19937_64 rng(19);
  std::normal_distribution<double> noise(0.0, 0.15);
  std::vector<V> shapes{{0, 0, 0, 1, 2, 3, 3, 3, 3}, {3, 3, 3, 2, 1, 0, 0, 0, 0}, {0, 2, 0, 2, 0, 2, 0, 2, 0}};
  std::vector<V> series;
  std::vector<std::size_t> truth;
  for (std::size_t i = 0; i < 30; ++i) {
    V s = shapes[i % 3];
    for (auto& x : s) x += noise(rng);
    series.push_back(s);
    truth.push_back(i % 3);
  }
  ClusterOptions opts;
  opts.k_max = 6;
  const auto m = fit(series, names(series.size()), opts);
  CHECK(m.k == 3);
  CHECK(adjusted_rand_index(m.labels, truth) == doctest::Approx(1.0));
  CHECK(m.archetypes.size() == 3);
  CHECK(m.embedding.coords.size() == 30);

  opts.workers = 1;
  const auto again = fit(series, names(series.size()), opts);
  CHECK(again.labels == m.labels);
  CHECK(again.silhouette == m.silhouette);
  for (std::size_t c = 0; c < m.archetypes.size(); ++c) CHECK(again.archetypes[c].values == m.archetypes[c].values);

  opts.space = ClusterSpace::embedding;
  const auto emb = fit(series, names(series.size()), opts);
  CHECK(emb.space == ClusterSpace::embedding);
  CHECK(adjusted_rand_index(emb.labels, truth) == doctest::Approx(1.0));

  CHECK_THROWS_AS(fit({V{1, 2}, V{2, 1}}, names(2), opts), DomainError);
}
