#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "eventflow/alignment.hpp"
#include "eventflow/jumpflow.hpp"

namespace eventflow::clustering {

// Symmetric, zero-diagonal, finite n x n matrix with one label per row.
class DistanceMatrix {
 public:
  static constexpr double kSymmetryTolerance = 1e-9;

  DistanceMatrix() = default;
  // Validates shape, symmetry, diagonal and finiteness; throws DomainError.
  DistanceMatrix(std::vector<std::string> ids, std::vector<double> values);

  std::size_t size() const noexcept { return ids_.size(); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  double operator()(std::size_t i, std::size_t j) const { return d_[i * ids_.size() + j]; }
  const std::vector<double>& values() const noexcept { return d_; }

 private:
  std::vector<std::string> ids_;
  std::vector<double> d_;
};

// "<source>|<event name>|<event date>"
std::string flow_id(const jumpflow::EventFlow& f);

// DTW cost between every pair of flows, each unordered pair computed once.
DistanceMatrix pairwise_dtw(const std::vector<jumpflow::EventFlow>& flows, std::size_t workers = 0);
DistanceMatrix pairwise_dtw(const std::vector<std::vector<double>>& series,
                            std::vector<std::string> ids, std::size_t workers = 0);

enum class Linkage { average, complete, single };

std::string_view to_string(Linkage l);
Linkage linkage_from_string(std::string_view s);

// Agglomeration history. Leaves are clusters 0..n-1; merge k creates cluster
// n + k out of clusters a < b.
struct Dendrogram {
  struct Merge {
    std::size_t a;
    std::size_t b;
    double height;
    std::size_t size;
  };

  std::size_t leaves = 0;
  std::vector<Merge> merges;
  // Indices of merges lower than their predecessor (reported, not repaired).
  std::vector<std::size_t> inversions;

  bool monotone() const noexcept { return inversions.empty(); }
};

// Generic agglomerative clustering with Lance-Williams updates. Ties on the
// merge distance go to the lexicographically smallest (cluster a, cluster b).
Dendrogram agglomerate(const DistanceMatrix& dm, Linkage linkage);

// Average linkage.
Dendrogram upgma(const DistanceMatrix& dm);

// Flat labels after applying the first n - k merges. Labels are 0..k-1,
// numbered in order of each cluster's lowest leaf index.
std::vector<std::size_t> cut(const Dendrogram& dendrogram, std::size_t k);

// Mean silhouette; singleton clusters score 0. Needs >= 2 clusters.
double silhouette(const DistanceMatrix& dm, const std::vector<std::size_t>& labels);

// Adjusted Rand index between two labelings of the same items.
double adjusted_rand_index(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b);

struct Embedding {
  std::vector<std::array<double, 2>> coords;
  double stress = 0.0;  // Kruskal stress-1 against the input distances
  bool degenerate = false;
};

// Classical (Torgerson) MDS onto the two leading eigenvectors of the
// double-centred squared distances. Each axis is oriented so the first point
// with a non-zero coordinate on it is positive.
Embedding embed_2d(const DistanceMatrix& dm);

// Euclidean distances between embedded points.
DistanceMatrix euclidean_distances(const Embedding& e, std::vector<std::string> ids);

struct GridEntry {
  std::size_t k;
  Linkage linkage;
  double silhouette;
};

struct Selection {
  std::size_t k = 0;
  Linkage linkage = Linkage::average;
  double silhouette = 0.0;
  std::vector<std::size_t> labels;
  Dendrogram dendrogram;
  std::vector<GridEntry> grid;
};

// Grid search over k in [k_min, k_max] and the given linkages; picks the
// highest silhouette, ties to smaller k then to the earlier linkage.
Selection select_model(const DistanceMatrix& dm, std::size_t k_min, std::size_t k_max,
                       const std::vector<Linkage>& linkages);

// One DBA barycenter per label 0..max(label).
std::vector<alignment::Barycenter> archetypes(const std::vector<std::vector<double>>& series,
                                              const std::vector<std::size_t>& labels,
                                              const alignment::BarycenterOptions& opts = {},
                                              std::size_t workers = 0);
std::vector<alignment::Barycenter> archetypes(const std::vector<jumpflow::EventFlow>& flows,
                                              const std::vector<std::size_t>& labels,
                                              const alignment::BarycenterOptions& opts = {},
                                              std::size_t workers = 0);

// Where the agglomeration runs: on the DTW matrix itself, or on Euclidean
// distances between the 2-D embedded points.
enum class ClusterSpace { dtw, embedding };

std::string_view to_string(ClusterSpace s);
ClusterSpace cluster_space_from_string(std::string_view s);

struct ClusterOptions {
  std::size_t k_min = 2;
  std::size_t k_max = 8;
  std::vector<Linkage> linkages{Linkage::average};
  ClusterSpace space = ClusterSpace::dtw;
  alignment::BarycenterOptions barycenter;
  std::size_t workers = 0;
};

struct ClusterModel {
  std::vector<std::string> ids;
  std::vector<std::size_t> labels;
  std::size_t k = 0;
  Linkage linkage = Linkage::average;
  ClusterSpace space = ClusterSpace::dtw;
  double silhouette = 0.0;
  std::vector<GridEntry> grid;
  Dendrogram dendrogram;
  std::vector<alignment::Barycenter> archetypes;
  Embedding embedding;
};

// Full pipeline: pairwise DTW, 2-D embedding, silhouette-driven selection and
// per-cluster DBA archetypes. k_max is clamped to n - 1.
ClusterModel fit(const std::vector<jumpflow::EventFlow>& flows, const ClusterOptions& opts);
ClusterModel fit(const std::vector<std::vector<double>>& series, std::vector<std::string> ids,
                 const ClusterOptions& opts);
// Same, reusing a DTW matrix already computed over `series` (ids taken from it).
ClusterModel fit(const std::vector<std::vector<double>>& series, const DistanceMatrix& dtw_dm,
                 const ClusterOptions& opts);

}  // namespace eventflow::clustering
