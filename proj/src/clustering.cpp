#include "eventflow/clustering.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>

#include "eventflow/error.hpp"
#include "eventflow/parallel.hpp"

namespace eventflow::clustering {

DistanceMatrix::DistanceMatrix(std::vector<std::string> ids, std::vector<double> values)
    : ids_(std::move(ids)), d_(std::move(values)) {
  const std::size_t n = ids_.size();
  if (d_.size() != n * n) throw DomainError("distance matrix is not square over its ids");
  for (std::size_t i = 0; i < n; ++i) {
    if (d_[i * n + i] != 0.0) throw DomainError("distance matrix has a non-zero diagonal");
    for (std::size_t j = 0; j < n; ++j) {
      const double v = d_[i * n + j];
      if (!std::isfinite(v)) throw DomainError("distance matrix has a non-finite entry");
      if (v < 0.0) throw DomainError("distance matrix has a negative entry");
      if (std::abs(v - d_[j * n + i]) > kSymmetryTolerance) {
        throw DomainError("distance matrix is not symmetric");
      }
    }
  }
}

std::string flow_id(const jumpflow::EventFlow& f) {
  return f.source_id + "|" + f.event.name + "|" + f.event.date.iso();
}

DistanceMatrix pairwise_dtw(const std::vector<std::vector<double>>& series,
                            std::vector<std::string> ids, std::size_t workers) {
  const std::size_t n = series.size();
  if (n < 2) throw DomainError("pairwise_dtw: need at least 2 series");
  if (ids.size() != n) throw DomainError("pairwise_dtw: ids/series size mismatch");
  for (const auto& s : series) {
    if (s.size() != series.front().size()) throw DomainError("pairwise_dtw: length mismatch");
  }
  std::vector<double> d(n * n, 0.0);
  // Row i owns pairs (i, j > i); rows are handed out dynamically.
  parallel_for(n, workers, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double c = alignment::dtw_cost(series[i], series[j]);
      d[i * n + j] = c;
      d[j * n + i] = c;
    }
  });
  return DistanceMatrix(std::move(ids), std::move(d));
}

DistanceMatrix pairwise_dtw(const std::vector<jumpflow::EventFlow>& flows, std::size_t workers) {
  std::vector<std::vector<double>> series;
  std::vector<std::string> ids;
  for (const auto& f : flows) {
    series.push_back(f.values);
    ids.push_back(flow_id(f));
  }
  return pairwise_dtw(series, std::move(ids), workers);
}

std::string_view to_string(Linkage l) {
  switch (l) {
    case Linkage::average:
      return "average";
    case Linkage::complete:
      return "complete";
    case Linkage::single:
      return "single";
  }
  return "average";
}

Linkage linkage_from_string(std::string_view s) {
  if (s == "average" || s == "upgma") return Linkage::average;
  if (s == "complete") return Linkage::complete;
  if (s == "single") return Linkage::single;
  throw DomainError("unknown linkage '" + std::string(s) + "'");
}

std::string_view to_string(ClusterSpace s) {
  return s == ClusterSpace::dtw ? "dtw" : "embedding";
}

ClusterSpace cluster_space_from_string(std::string_view s) {
  if (s == "dtw") return ClusterSpace::dtw;
  if (s == "embedding") return ClusterSpace::embedding;
  throw DomainError("unknown cluster space '" + std::string(s) + "'");
}

Dendrogram agglomerate(const DistanceMatrix& dm, Linkage linkage) {
  const std::size_t n = dm.size();
  if (n < 2) throw DomainError("agglomerate: need at least 2 points");
  std::vector<double> d = dm.values();
  std::vector<std::size_t> id(n);
  std::iota(id.begin(), id.end(), std::size_t{0});
  std::vector<std::size_t> size(n, 1);
  std::vector<bool> active(n, true);

  Dendrogram tree;
  tree.leaves = n;
  for (std::size_t step = 0; step + 1 < n; ++step) {
    std::size_t bp = 0;
    std::size_t bq = 0;
    auto best = std::make_tuple(std::numeric_limits<double>::infinity(),
                                std::numeric_limits<std::size_t>::max(),
                                std::numeric_limits<std::size_t>::max());
    for (std::size_t p = 0; p < n; ++p) {
      if (!active[p]) continue;
      for (std::size_t q = p + 1; q < n; ++q) {
        if (!active[q]) continue;
        auto cand = std::make_tuple(d[p * n + q], std::min(id[p], id[q]), std::max(id[p], id[q]));
        if (cand < best) {
          best = cand;
          bp = p;
          bq = q;
        }
      }
    }
    const double height = std::get<0>(best);
    const std::size_t sp = size[bp];
    const std::size_t sq = size[bq];
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == bp || k == bq) continue;
      const double dp = d[k * n + bp];
      const double dq = d[k * n + bq];
      double merged = 0.0;
      switch (linkage) {
        case Linkage::average:
          merged = (static_cast<double>(sp) * dp + static_cast<double>(sq) * dq) /
                   static_cast<double>(sp + sq);
          break;
        case Linkage::complete:
          merged = std::max(dp, dq);
          break;
        case Linkage::single:
          merged = std::min(dp, dq);
          break;
      }
      d[k * n + bp] = merged;
      d[bp * n + k] = merged;
    }
    if (!tree.merges.empty() && height < tree.merges.back().height) {
      tree.inversions.push_back(tree.merges.size());
    }
    tree.merges.push_back({std::get<1>(best), std::get<2>(best), height, sp + sq});
    id[bp] = n + step;
    size[bp] = sp + sq;
    active[bq] = false;
  }
  return tree;
}

Dendrogram upgma(const DistanceMatrix& dm) { return agglomerate(dm, Linkage::average); }

std::vector<std::size_t> cut(const Dendrogram& dendrogram, std::size_t k) {
  const std::size_t n = dendrogram.leaves;
  if (k < 1 || k > n) {
    throw DomainError("cut: k=" + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  }
  // Union-find over leaves and internal nodes.
  std::vector<std::size_t> parent(2 * n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t m = 0; m < n - k; ++m) {
    const auto& mg = dendrogram.merges[m];
    parent[find(mg.a)] = n + m;
    parent[find(mg.b)] = n + m;
  }
  std::vector<std::size_t> labels(n);
  std::map<std::size_t, std::size_t> seen;
  for (std::size_t i = 0; i < n; ++i) {
    const auto root = find(i);
    auto [it, inserted] = seen.try_emplace(root, seen.size());
    labels[i] = it->second;
  }
  return labels;
}

double silhouette(const DistanceMatrix& dm, const std::vector<std::size_t>& labels) {
  const std::size_t n = dm.size();
  if (labels.size() != n) throw DomainError("silhouette: label count mismatch");
  if (n == 0) throw DomainError("silhouette: empty input");
  const std::size_t k = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<std::size_t> count(k, 0);
  for (auto l : labels) ++count[l];
  if (std::count_if(count.begin(), count.end(), [](auto c) { return c > 0; }) < 2) {
    throw DomainError("silhouette: need at least 2 clusters");
  }

  double total = 0.0;
  std::vector<double> sums(k);
  for (std::size_t i = 0; i < n; ++i) {
    if (count[labels[i]] == 1) continue;
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) sums[labels[j]] += dm(i, j);
    }
    const double a = sums[labels[i]] / static_cast<double>(count[labels[i]] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c == labels[i] || count[c] == 0) continue;
      b = std::min(b, sums[c] / static_cast<double>(count[c]));
    }
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

double adjusted_rand_index(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  if (a.size() != b.size()) throw DomainError("adjusted_rand_index: size mismatch");
  const std::size_t n = a.size();
  if (n < 2) return 1.0;
  std::map<std::pair<std::size_t, std::size_t>, double> table;
  std::map<std::size_t, double> rows;
  std::map<std::size_t, double> cols;
  for (std::size_t i = 0; i < n; ++i) {
    table[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  auto pairs = [](double x) { return x * (x - 1.0) / 2.0; };
  double index = 0.0;
  for (const auto& [key, c] : table) index += pairs(c);
  double sum_rows = 0.0;
  double sum_cols = 0.0;
  for (const auto& [key, c] : rows) sum_rows += pairs(c);
  for (const auto& [key, c] : cols) sum_cols += pairs(c);
  const double expected = sum_rows * sum_cols / pairs(static_cast<double>(n));
  const double max_index = 0.5 * (sum_rows + sum_cols);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

Embedding embed_2d(const DistanceMatrix& dm) {
  const auto n = static_cast<Eigen::Index>(dm.size());
  Embedding out;
  out.coords.assign(dm.size(), {0.0, 0.0});
  if (n == 0) return out;

  double total = 0.0;
  for (double v : dm.values()) total += v * v;
  if (total == 0.0) {
    out.degenerate = true;
    return out;
  }

  Eigen::MatrixXd sq(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = dm(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      sq(i, j) = v * v;
    }
  }
  const Eigen::MatrixXd centering =
      Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  const Eigen::MatrixXd gram = -0.5 * centering * sq * centering;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success) throw NumericError("embed_2d: eigen decomposition failed");

  // Eigenvalues come out ascending.
  const Eigen::VectorXd& evals = solver.eigenvalues();
  const Eigen::MatrixXd& evecs = solver.eigenvectors();
  for (int axis = 0; axis < 2 && axis < n; ++axis) {
    const Eigen::Index col = n - 1 - axis;
    const double lambda = std::max(evals(col), 0.0);
    const double scale = std::sqrt(lambda);
    double sign = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(evecs(i, col)) * scale > 1e-12) {
        sign = evecs(i, col) < 0.0 ? -1.0 : 1.0;
        break;
      }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      out.coords[static_cast<std::size_t>(i)][static_cast<std::size_t>(axis)] =
          sign * scale * evecs(i, col);
    }
  }

  double num = 0.0;
  for (std::size_t i = 0; i < dm.size(); ++i) {
    for (std::size_t j = i + 1; j < dm.size(); ++j) {
      const double e = std::hypot(out.coords[i][0] - out.coords[j][0],
                                  out.coords[i][1] - out.coords[j][1]);
      num += (dm(i, j) - e) * (dm(i, j) - e);
    }
  }
  out.stress = std::sqrt(num / (0.5 * total));
  return out;
}

DistanceMatrix euclidean_distances(const Embedding& e, std::vector<std::string> ids) {
  const std::size_t n = e.coords.size();
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = std::hypot(e.coords[i][0] - e.coords[j][0], e.coords[i][1] - e.coords[j][1]);
      d[i * n + j] = v;
      d[j * n + i] = v;
    }
  }
  return DistanceMatrix(std::move(ids), std::move(d));
}

Selection select_model(const DistanceMatrix& dm, std::size_t k_min, std::size_t k_max,
                       const std::vector<Linkage>& linkages) {
  const std::size_t n = dm.size();
  if (linkages.empty() || k_min > k_max) throw DomainError("select_model: empty grid");
  if (k_min < 2 || k_max > n - 1) {
    throw DomainError("select_model: k range [" + std::to_string(k_min) + ", " +
                      std::to_string(k_max) + "] outside [2, " + std::to_string(n - 1) + "]");
  }
  Selection best;
  bool have = false;
  // k outer so that ties keep the smaller k.
  std::vector<Dendrogram> trees;
  for (auto l : linkages) trees.push_back(agglomerate(dm, l));
  for (std::size_t k = k_min; k <= k_max; ++k) {
    for (std::size_t li = 0; li < linkages.size(); ++li) {
      auto labels = cut(trees[li], k);
      const double s = silhouette(dm, labels);
      best.grid.push_back({k, linkages[li], s});
      if (!have || s > best.silhouette) {
        have = true;
        best.k = k;
        best.linkage = linkages[li];
        best.silhouette = s;
        best.labels = std::move(labels);
        best.dendrogram = trees[li];
      }
    }
  }
  return best;
}

std::vector<alignment::Barycenter> archetypes(const std::vector<std::vector<double>>& series,
                                              const std::vector<std::size_t>& labels,
                                              const alignment::BarycenterOptions& opts,
                                              std::size_t workers) {
  if (labels.size() != series.size()) throw DomainError("archetypes: label count mismatch");
  if (labels.empty()) return {};
  const std::size_t k = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<std::vector<std::vector<double>>> groups(k);
  for (std::size_t i = 0; i < series.size(); ++i) groups[labels[i]].push_back(series[i]);
  for (std::size_t c = 0; c < k; ++c) {
    if (groups[c].empty()) throw DomainError("archetypes: cluster " + std::to_string(c) + " is empty");
  }
  std::vector<alignment::Barycenter> out(k);
  parallel_for(k, workers, [&](std::size_t c) { out[c] = alignment::dba(groups[c], opts); });
  return out;
}

std::vector<alignment::Barycenter> archetypes(const std::vector<jumpflow::EventFlow>& flows,
                                              const std::vector<std::size_t>& labels,
                                              const alignment::BarycenterOptions& opts,
                                              std::size_t workers) {
  std::vector<std::vector<double>> series;
  series.reserve(flows.size());
  for (const auto& f : flows) series.push_back(f.values);
  return archetypes(series, labels, opts, workers);
}

ClusterModel fit(const std::vector<std::vector<double>>& series, const DistanceMatrix& dtw_dm,
                 const ClusterOptions& opts) {
  const std::size_t n = series.size();
  if (n < 3) throw DomainError("cluster fit: need at least 3 flows");
  if (dtw_dm.size() != n) throw DomainError("cluster fit: distance matrix does not match the series");
  ClusterModel model;
  model.space = opts.space;
  model.embedding = embed_2d(dtw_dm);
  const DistanceMatrix cluster_dm =
      opts.space == ClusterSpace::dtw ? dtw_dm : euclidean_distances(model.embedding, dtw_dm.ids());

  const std::size_t k_max = std::min(opts.k_max, n - 1);
  const std::size_t k_min = std::min(opts.k_min, k_max);
  auto sel = select_model(cluster_dm, k_min, k_max, opts.linkages);
  model.ids = dtw_dm.ids();
  model.labels = std::move(sel.labels);
  model.k = sel.k;
  model.linkage = sel.linkage;
  model.silhouette = sel.silhouette;
  model.grid = std::move(sel.grid);
  model.dendrogram = std::move(sel.dendrogram);
  model.archetypes = archetypes(series, model.labels, opts.barycenter, opts.workers);
  return model;
}

ClusterModel fit(const std::vector<std::vector<double>>& series, std::vector<std::string> ids,
                 const ClusterOptions& opts) {
  if (series.size() < 3) throw DomainError("cluster fit: need at least 3 flows");
  return fit(series, pairwise_dtw(series, ids, opts.workers), opts);
}

ClusterModel fit(const std::vector<jumpflow::EventFlow>& flows, const ClusterOptions& opts) {
  std::vector<std::vector<double>> series;
  std::vector<std::string> ids;
  for (const auto& f : flows) {
    series.push_back(f.values);
    ids.push_back(flow_id(f));
  }
  return fit(series, std::move(ids), opts);
}

}  // namespace eventflow::clustering
