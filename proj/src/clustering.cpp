#include "tpe/clustering.hpp"

#include "tpe/dataset.hpp"
#include "tpe/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_map>

namespace tpe {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr Index kNone = -1;

RowMatrixXd normalized_rows(const RowMatrixXd& features) {
  RowMatrixXd out(features.rows(), features.cols());
  for (Index i = 0; i < features.rows(); ++i) out.row(i) = normalize(features.row(i));
  return out;
}

/// Upper triangle of a symmetric matrix, row by row.
class CondensedMatrix {
public:
  explicit CondensedMatrix(Index n) : n_(n), data_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2) {}

  double& operator()(Index i, Index j) { return data_[offset(i, j)]; }
  double operator()(Index i, Index j) const { return data_[offset(i, j)]; }

private:
  std::size_t offset(Index i, Index j) const {
    if (i > j) std::swap(i, j);
    const auto ui = static_cast<std::size_t>(i);
    return ui * static_cast<std::size_t>(n_) - ui * (ui + 1) / 2 + static_cast<std::size_t>(j - i - 1);
  }

  Index n_;
  std::vector<double> data_;
};

CondensedMatrix cosine_distances(const RowMatrixXd& unit) {
  const Index n = unit.rows();
  CondensedMatrix d(n);
  constexpr Index kBlock = 256;
  for (Index r0 = 0; r0 < n; r0 += kBlock) {
    const Index rows = std::min(kBlock, n - r0);
    const MatrixXd gram = unit.middleRows(r0, rows) * unit.bottomRows(n - r0).transpose();
    for (Index r = 0; r < rows; ++r) {
      const Index i = r0 + r;
      for (Index j = i + 1; j < n; ++j) d(i, j) = 1.0 - std::clamp(gram(r, j - r0), -1.0, 1.0);
    }
  }
  return d;
}

struct UnionFind {
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::size_t> parent;
};

/// Relabels arbitrary cluster keys 0.. in order of first appearance.
template <class Key>
std::vector<int> contiguous(const std::vector<Key>& keys, std::size_t& count) {
  std::unordered_map<Key, int> ids;
  std::vector<int> out(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) out[i] = ids.try_emplace(keys[i], static_cast<int>(ids.size())).first->second;
  count = ids.size();
  return out;
}

std::uint64_t pairs(std::uint64_t n) { return n * (n - (n > 0 ? 1 : 0)) / 2; }

} // namespace

Dendrogram build_dendrogram(const RowMatrixXd& features, double stop_below) {
  const Index n = features.rows();
  if (n < 1) throw InvalidArgument("clustering needs at least one feature");
  Dendrogram tree{static_cast<std::size_t>(n), {}};
  if (n == 1) return tree;

  CondensedMatrix dist = cosine_distances(normalized_rows(features));
  std::vector<std::size_t> size(static_cast<std::size_t>(n), 1);
  // Doubly linked list over active cluster names, ascending.
  std::vector<Index> next(static_cast<std::size_t>(n)), prev(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    next[i] = i + 1 < n ? i + 1 : kNone;
    prev[i] = i - 1;
  }
  Index head = 0;
  // Nearest neighbor among active clusters with a larger name, ties to the smallest name.
  std::vector<Index> nn(static_cast<std::size_t>(n), kNone);
  std::vector<double> nn_dist(static_cast<std::size_t>(n), kInf);
  auto rescan = [&](Index i) {
    nn[i] = kNone;
    nn_dist[i] = kInf;
    for (Index j = next[i]; j != kNone; j = next[j]) {
      const double d = dist(i, j);
      if (d < nn_dist[i]) {
        nn_dist[i] = d;
        nn[i] = j;
      }
    }
  };
  for (Index i = 0; i < n; ++i) rescan(i);

  tree.merges.reserve(static_cast<std::size_t>(n - 1));
  for (Index step = 0; step + 1 < n; ++step) {
    Index a = kNone;
    for (Index i = head; i != kNone; i = next[i])
      if (nn[i] != kNone && (a == kNone || nn_dist[i] < nn_dist[a])) a = i;
    const Index b = nn[a];
    const double d_ab = nn_dist[a];
    if (!(d_ab < stop_below)) break;

    const double sa = static_cast<double>(size[a]);
    const double sb = static_cast<double>(size[b]);
    for (Index k = head; k != kNone; k = next[k]) {
      if (k == a || k == b) continue;
      dist(a, k) = (sa * dist(a, k) + sb * dist(b, k)) / (sa + sb);
    }
    size[a] += size[b];
    tree.merges.push_back({a, b, d_ab, size[a]});

    // Unlink b.
    if (prev[b] != kNone) next[prev[b]] = next[b];
    if (next[b] != kNone) prev[next[b]] = prev[b];
    if (b == head) head = next[b];

    for (Index k = head; k != kNone && k < b; k = next[k]) {
      if (k == a) continue;
      if (nn[k] == a || nn[k] == b) {
        rescan(k);
      } else if (k < a) {
        const double d = dist(k, a);
        if (d < nn_dist[k] || (d == nn_dist[k] && a < nn[k])) {
          nn_dist[k] = d;
          nn[k] = a;
        }
      }
    }
    rescan(a);
  }
  return tree;
}

ClusterAssignment cut(const Dendrogram& tree, double cutoff) {
  UnionFind uf(tree.num_items);
  for (const auto& m : tree.merges) {
    if (!(m.distance < cutoff)) break;
    uf.unite(static_cast<std::size_t>(m.a), static_cast<std::size_t>(m.b));
  }
  std::vector<std::size_t> roots(tree.num_items);
  for (std::size_t i = 0; i < tree.num_items; ++i) roots[i] = uf.find(i);
  ClusterAssignment out;
  out.cluster = contiguous(roots, out.num_clusters);
  out.history = tree.merges;
  return out;
}

ClusterAssignment agglomerate(const RowMatrixXd& features, double cutoff) {
  if (!(cutoff >= 0.0 && cutoff <= 2.0)) throw InvalidArgument("cosine cutoff must lie in [0, 2]");
  return cut(build_dendrogram(features), cutoff);
}

PairwiseScores pairwise_metrics(const std::vector<int>& cluster, const std::vector<int>& labels) {
  if (cluster.size() != labels.size())
    throw DimensionError("assignment has " + std::to_string(cluster.size()) + " records but " +
                         std::to_string(labels.size()) + " labels were given");
  std::unordered_map<int, std::uint64_t> by_cluster, by_label;
  std::unordered_map<std::uint64_t, std::uint64_t> by_both;
  for (std::size_t i = 0; i < cluster.size(); ++i) {
    ++by_cluster[cluster[i]];
    ++by_label[labels[i]];
    ++by_both[(std::uint64_t(std::uint32_t(cluster[i])) << 32) | std::uint32_t(labels[i])];
  }
  std::uint64_t same_cluster = 0, same_label = 0, same_both = 0;
  for (const auto& [c, n] : by_cluster) same_cluster += pairs(n);
  for (const auto& [c, n] : by_label) same_label += pairs(n);
  for (const auto& [c, n] : by_both) same_both += pairs(n);

  PairwiseScores s;
  s.precision_defined = same_cluster > 0;
  s.recall_defined = same_label > 0;
  s.precision = s.precision_defined ? static_cast<double>(same_both) / static_cast<double>(same_cluster) : 0.0;
  s.recall = s.recall_defined ? static_cast<double>(same_both) / static_cast<double>(same_label) : 0.0;
  s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

PairwiseScores pairwise_metrics(const ClusterAssignment& assignment, const std::vector<int>& labels) {
  return pairwise_metrics(assignment.cluster, labels);
}

std::vector<double> default_cutoff_grid() {
  std::vector<double> grid;
  for (int k = 0; k <= 100; ++k) grid.push_back(k / 100.0);
  return grid;
}

std::vector<PrPoint> pr_curve(const Dendrogram& tree, const std::vector<int>& labels, const std::vector<double>& grid) {
  if (labels.size() != tree.num_items) throw DimensionError("label count does not match clustered records");
  std::vector<PrPoint> out;
  for (double c : grid) {
    if (!(c >= 0.0 && c <= 2.0)) throw InvalidArgument("cosine cutoff must lie in [0, 2]");
    const ClusterAssignment a = cut(tree, c);
    out.push_back({c, pairwise_metrics(a.cluster, labels), a.num_clusters});
  }
  return out;
}

std::vector<PrPoint> pr_curve(const RowMatrixXd& features, const std::vector<int>& labels,
                              const std::vector<double>& grid) {
  return pr_curve(build_dendrogram(features), labels, grid);
}

double learn_cutoff(const Dendrogram& tree, const std::vector<int>& labels, const std::vector<double>& grid) {
  if (grid.empty()) throw InvalidArgument("empty cutoff grid");
  const auto curve = pr_curve(tree, labels, grid);
  const PrPoint* best = &curve.front();
  for (const auto& p : curve)
    if (p.scores.f1 > best->scores.f1 || (p.scores.f1 == best->scores.f1 && p.cutoff < best->cutoff)) best = &p;
  return best->cutoff;
}

double learn_cutoff(const RowMatrixXd& features, const std::vector<int>& labels, const std::vector<double>& grid) {
  return learn_cutoff(build_dendrogram(features), labels, grid);
}

PruneResult prune(const ClusterAssignment& assignment, std::size_t min_size) {
  PruneResult r;
  r.assignment = assignment;
  r.raw_count = assignment.num_clusters;
  std::vector<std::size_t> sizes(assignment.num_clusters, 0);
  for (int c : assignment.cluster) ++sizes.at(static_cast<std::size_t>(c));
  for (std::size_t s : sizes) r.pruned_count += s >= min_size;
  r.retained.reserve(assignment.cluster.size());
  for (int c : assignment.cluster) r.retained.push_back(sizes[static_cast<std::size_t>(c)] >= min_size);
  return r;
}

KMeansResult kmeans(const RowMatrixXd& features, std::size_t k, std::size_t restarts, std::uint64_t seed,
                    std::size_t max_iter) {
  const auto n = static_cast<std::size_t>(features.rows());
  if (k < 1 || k > n) throw InvalidArgument("k must lie in [1, " + std::to_string(n) + "]");
  if (restarts < 1) throw InvalidArgument("restarts must be >= 1");
  const RowMatrixXd unit = normalized_rows(features);
  std::mt19937_64 rng(seed);

  KMeansResult best;
  best.cost = kInf;
  std::vector<int> best_labels;
  for (std::size_t r = 0; r < restarts; ++r) {
    // k distinct seeds by partial Fisher-Yates.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = std::uniform_int_distribution<std::size_t>(i, n - 1)(rng);
      std::swap(order[i], order[j]);
    }
    RowMatrixXd centroids(static_cast<Index>(k), unit.cols());
    for (std::size_t c = 0; c < k; ++c) centroids.row(static_cast<Index>(c)) = unit.row(static_cast<Index>(order[c]));

    std::vector<int> label(n, -1);
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
      const MatrixXd sims = unit * centroids.transpose();
      bool changed = false;
      for (std::size_t i = 0; i < n; ++i) {
        Index arg = 0;
        sims.row(static_cast<Index>(i)).maxCoeff(&arg);
        if (label[i] != static_cast<int>(arg)) {
          label[i] = static_cast<int>(arg);
          changed = true;
        }
      }
      if (!changed) break;
      RowMatrixXd sums = RowMatrixXd::Zero(static_cast<Index>(k), unit.cols());
      for (std::size_t i = 0; i < n; ++i) sums.row(label[i]) += unit.row(static_cast<Index>(i));
      for (Index c = 0; c < static_cast<Index>(k); ++c)
        if (sums.row(c).norm() > 0.0) centroids.row(c) = sums.row(c).normalized();
    }

    double cost = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      cost += (unit.row(static_cast<Index>(i)) - centroids.row(label[i])).squaredNorm();
    if (cost < best.cost) {
      best.cost = cost;
      best_labels = label;
    }
  }
  best.assignment.cluster = contiguous(best_labels, best.assignment.num_clusters);
  return best;
}

} // namespace tpe
