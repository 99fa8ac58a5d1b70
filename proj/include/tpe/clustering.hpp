#pragma once

#include "tpe/types.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace tpe {

/// One agglomeration step. Clusters are named by their smallest record index,
/// so `a < b` and the merged cluster keeps the name `a`.
struct Merge {
  Index a = 0;
  Index b = 0;
  double distance = 0.0; ///< average cosine distance between the two clusters
  std::size_t size = 0;  ///< size of the merged cluster
};

/// Ordered merge history of average-linkage clustering.
struct Dendrogram {
  std::size_t num_items = 0;
  std::vector<Merge> merges;
};

struct ClusterAssignment {
  /// Cluster per record, numbered 0.. in order of first appearance.
  std::vector<int> cluster;
  std::size_t num_clusters = 0;
  /// Merge history the assignment was cut from; empty for k-means.
  std::vector<Merge> history;
};

/// Average-linkage (UPGMA) agglomeration on cosine distance 1 - cos.
///
/// Starting from singletons, repeatedly merges the pair of clusters with the
/// smallest average pairwise distance while that distance is below
/// `stop_below`. Ties go to the lexicographically smallest (a, b) pair.
/// Rows need not be normalized but must be nonzero.
Dendrogram build_dendrogram(const RowMatrixXd& features,
                            double stop_below = std::numeric_limits<double>::infinity());

/// Replays merges in order up to the first one whose distance is >= cutoff.
ClusterAssignment cut(const Dendrogram& tree, double cutoff);

/// Clusters at `cutoff` in [0, 2] and keeps the full merge history, so other
/// cutoffs can be replayed with `cut` without re-clustering.
ClusterAssignment agglomerate(const RowMatrixXd& features, double cutoff);

struct PairwiseScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_defined = true; ///< false when no pair shares a cluster
  bool recall_defined = true;    ///< false when no pair shares a class
};

/// Pairwise precision: same-class share of same-cluster pairs. Pairwise
/// recall: same-cluster share of same-class pairs. F1 = 2PR / (P + R), or 0.
PairwiseScores pairwise_metrics(const std::vector<int>& cluster, const std::vector<int>& labels);
PairwiseScores pairwise_metrics(const ClusterAssignment& assignment, const std::vector<int>& labels);

/// Cutoffs 0.00, 0.01, ..., 1.00.
std::vector<double> default_cutoff_grid();

struct PrPoint {
  double cutoff = 0.0;
  PairwiseScores scores;
  std::size_t num_clusters = 0;
};

std::vector<PrPoint> pr_curve(const Dendrogram& tree, const std::vector<int>& labels, const std::vector<double>& grid);
std::vector<PrPoint> pr_curve(const RowMatrixXd& features, const std::vector<int>& labels,
                              const std::vector<double>& grid);

/// Grid cutoff with the highest pairwise F1; ties go to the smallest cutoff.
double learn_cutoff(const Dendrogram& tree, const std::vector<int>& labels, const std::vector<double>& grid);
double learn_cutoff(const RowMatrixXd& features, const std::vector<int>& labels, const std::vector<double>& grid);

struct PruneResult {
  std::size_t raw_count = 0;
  std::size_t pruned_count = 0;  ///< clusters with at least min_size members
  std::vector<bool> retained;    ///< per record: belongs to a counted cluster
  ClusterAssignment assignment;
};

PruneResult prune(const ClusterAssignment& assignment, std::size_t min_size = 3);

struct KMeansResult {
  ClusterAssignment assignment;
  double cost = 0.0; ///< sum of squared chord distances to assigned centroids
};

/// Spherical k-means: rows are unit-normalized, points join the centroid of
/// highest cosine, centroids are re-normalized means. The restart with the
/// lowest cost wins, ties going to the earliest.
KMeansResult kmeans(const RowMatrixXd& features, std::size_t k, std::size_t restarts, std::uint64_t seed,
                    std::size_t max_iter = 100);

} // namespace tpe
