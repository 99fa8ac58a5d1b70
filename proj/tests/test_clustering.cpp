#include "oracles.hpp"

#include "tpe/clustering.hpp"
#include "tpe/error.hpp"

#include <doctest.h>

using namespace tpe;

namespace {

std::set<std::set<std::size_t>> as_sets(const std::vector<int>& ids) {
  std::map<int, std::set<std::size_t>> groups;
  for (std::size_t i = 0; i < ids.size(); ++i) groups[ids[i]].insert(i);
  std::set<std::set<std::size_t>> out;
  for (auto& [id, members] : groups) out.insert(members);
  return out;
}

ClusterAssignment with_ids(std::vector<int> ids) {
  ClusterAssignment a;
  a.num_clusters = std::set<int>(ids.begin(), ids.end()).size();
  a.cluster = std::move(ids);
  return a;
}

} // namespace

TEST_CASE("agglomerate: cutoff extremes") {
  std::mt19937_64 rng(1);
  const RowMatrixXd x = oracle::gaussian_rows(25, 5, rng);
  const auto none = agglomerate(x, 0.0);
  CHECK(none.num_clusters == 25);
  CHECK(none.cluster == oracle::canonical(none.cluster));
  const auto all = agglomerate(x, 2.0);
  CHECK(all.num_clusters == 1);
  CHECK(all.history.size() == 24);
  for (std::size_t k = 1; k < all.history.size(); ++k)
    CHECK(all.history[k].distance >= all.history[k - 1].distance - 1e-12);
  CHECK(all.history.back().size == 25);

  CHECK_THROWS_AS(agglomerate(x, -0.1), InvalidArgument);
  CHECK_THROWS_AS(agglomerate(x, 2.5), InvalidArgument);
  CHECK_THROWS_AS(agglomerate(RowMatrixXd(0, 3), 0.5), InvalidArgument);
  CHECK(agglomerate(RowMatrixXd::Ones(1, 3), 1.0).num_clusters == 1);
}

TEST_CASE("agglomerate: three cones") {
  std::mt19937_64 rng(12);
  std::vector<int> labels;
  const RowMatrixXd x = oracle::cones(3, 10, 16, 0.05, rng, labels);
  double within = 0, between = 2;
  for (Index i = 0; i < 30; ++i)
    for (Index j = i + 1; j < 30; ++j) {
      const double d = 1.0 - x.row(i).dot(x.row(j));
      if (labels[std::size_t(i)] == labels[std::size_t(j)])
        within = std::max(within, d);
      else
        between = std::min(between, d);
    }
  REQUIRE(within < between);
  const auto a = agglomerate(x, (within + between) / 2.0);
  CHECK(a.num_clusters == 3);
  CHECK(oracle::canonical(a.cluster) == oracle::canonical(labels));
  const auto s = pairwise_metrics(a, labels);
  CHECK(s.precision == 1.0);
  CHECK(s.recall == 1.0);
  CHECK(s.f1 == 1.0);

  const auto km = kmeans(x, 3, 5, 9);
  CHECK(oracle::canonical(km.assignment.cluster) == oracle::canonical(labels));
}

TEST_CASE("agglomerate matches textbook UPGMA") {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<Index> n_dist(2, 40);
  std::uniform_real_distribution<double> cut_dist(0.0, 1.6);
  for (int rep = 0; rep < 20; ++rep) {
    const Index n = n_dist(rng);
    const RowMatrixXd x = oracle::gaussian_rows(n, 6, rng);
    const double cutoff = cut_dist(rng);
    CHECK(oracle::canonical(agglomerate(x, cutoff).cluster) == oracle::upgma(x, cutoff));
  }
}

TEST_CASE("dendrogram replay and permutation invariance") {
  std::mt19937_64 rng(31);
  const auto grid = default_cutoff_grid();
  CHECK(grid.size() == 101);
  CHECK(grid.front() == 0.0);
  CHECK(grid.back() == 1.0);
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<int> labels;
    const RowMatrixXd x = oracle::cones(6, 8, 10, 0.4, rng, labels);
    const Dendrogram tree = build_dendrogram(x);

    std::vector<Index> perm(x.rows());
    std::iota(perm.begin(), perm.end(), Index(0));
    std::shuffle(perm.begin(), perm.end(), rng);
    RowMatrixXd shuffled(x.rows(), x.cols());
    for (Index i = 0; i < x.rows(); ++i) shuffled.row(i) = x.row(perm[std::size_t(i)]);
    const Dendrogram shuffled_tree = build_dendrogram(shuffled);

    std::size_t prev = x.rows() + 1;
    for (std::size_t g = 0; g < grid.size(); g += 5) {
      const auto replay = cut(tree, grid[g]);
      CHECK(replay.cluster == agglomerate(x, grid[g]).cluster);
      CHECK(replay.num_clusters <= prev);
      prev = replay.num_clusters;

      const auto other = cut(shuffled_tree, grid[g]);
      std::vector<int> back(other.cluster.size());
      for (std::size_t i = 0; i < back.size(); ++i) back[std::size_t(perm[i])] = other.cluster[i];
      CHECK(as_sets(back) == as_sets(replay.cluster));
    }
  }
}

TEST_CASE("pairwise metrics") {
  const std::vector<int> labels{0, 0, 1, 1, 1, 2};
  auto s = pairwise_metrics(labels, labels);
  CHECK(s.precision == 1.0);
  CHECK(s.recall == 1.0);
  CHECK(s.f1 == 1.0);

  s = pairwise_metrics(std::vector<int>{0, 1, 2, 3, 4, 5}, labels);
  CHECK(s.recall == 0.0);
  CHECK(s.f1 == 0.0);
  CHECK_FALSE(s.precision_defined);
  CHECK(s.recall_defined);

  // clusters {0,1,2} {3,4,5}: same-cluster pairs 6, same-class pairs 4, both 2
  s = pairwise_metrics(std::vector<int>{0, 0, 0, 1, 1, 1}, labels);
  CHECK(s.precision == doctest::Approx(2.0 / 6.0));
  CHECK(s.recall == doctest::Approx(2.0 / 4.0));
  CHECK(s.f1 == doctest::Approx(2.0 * (1.0 / 3.0) * 0.5 / (1.0 / 3.0 + 0.5)));

  CHECK_THROWS_AS(pairwise_metrics(std::vector<int>{0, 1}, labels), DimensionError);

  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> c(0, 5), l(0, 7);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<int> cl(40), lab(40);
    for (auto& v : cl) v = c(rng);
    for (auto& v : lab) v = l(rng);
    const auto ref = oracle::count_pairs(cl, lab);
    const auto got = pairwise_metrics(cl, lab);
    CHECK(got.precision == double(ref.both) / double(ref.same_cluster));
    CHECK(got.recall == double(ref.both) / double(ref.same_class));
  }
}

TEST_CASE("learn_cutoff and pr_curve") {
  std::mt19937_64 rng(51);
  std::vector<int> labels;
  const RowMatrixXd x = oracle::cones(4, 6, 12, 0.05, rng, labels);
  const auto grid = default_cutoff_grid();

  // separable: F1 = 1 on a whole interval of cutoffs; the smallest wins
  const double best = learn_cutoff(x, labels, grid);
  CHECK(pairwise_metrics(agglomerate(x, best), labels).f1 == 1.0);
  const auto it = std::find(grid.begin(), grid.end(), best);
  REQUIRE(it != grid.end());
  if (it != grid.begin()) CHECK(pairwise_metrics(agglomerate(x, *(it - 1)), labels).f1 < 1.0);
  CHECK(learn_cutoff(x, labels, {0.37}) == 0.37);

  const auto pr = pr_curve(x, labels, {0.0, 0.5, 2.0});
  CHECK(pr[0].scores.recall == 0.0);
  CHECK(pr[2].scores.recall == 1.0);

  for (int rep = 0; rep < 3; ++rep) {
    const RowMatrixXd y = oracle::cones(20, 4, 12, 0.35, rng, labels);
    const Dendrogram tree = build_dendrogram(y);
    const auto curve = pr_curve(tree, labels, grid);
    double best_f1 = -1, best_cut = 0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const auto fresh = pairwise_metrics(oracle::upgma(y, grid[g]), labels);
      CHECK(curve[g].scores.precision == fresh.precision);
      CHECK(curve[g].scores.recall == fresh.recall);
      if (g > 0) CHECK(curve[g].scores.recall >= curve[g - 1].scores.recall);
      if (fresh.f1 > best_f1) {
        best_f1 = fresh.f1;
        best_cut = grid[g];
      }
    }
    CHECK(learn_cutoff(tree, labels, grid) == best_cut);
  }
}

TEST_CASE("prune") {
  const auto sized = [](std::initializer_list<int> sizes) {
    std::vector<int> ids;
    int c = 0;
    for (int s : sizes) {
      for (int k = 0; k < s; ++k) ids.push_back(c);
      ++c;
    }
    return with_ids(ids);
  };
  auto r = prune(sized({5, 2, 1, 3}));
  CHECK(r.raw_count == 4);
  CHECK(r.pruned_count == 2);
  CHECK(r.retained.size() == 11);
  CHECK(r.retained[5] == false);
  CHECK(r.retained[10] == true);
  CHECK(prune(sized({3, 4, 5})).pruned_count == 3);
  CHECK(prune(sized({1, 1, 1})).pruned_count == 0);
  CHECK(prune(sized({1, 1, 1}), 1).pruned_count == 3);
}

TEST_CASE("kmeans") {
  std::mt19937_64 rng(61);
  const RowMatrixXd x = oracle::gaussian_rows(12, 4, rng);
  const auto each = kmeans(x, 12, 2, 3);
  CHECK(each.assignment.num_clusters == 12);
  CHECK(each.cost == doctest::Approx(0.0));
  const auto one = kmeans(x, 1, 2, 3);
  CHECK(one.assignment.num_clusters == 1);
  CHECK(kmeans(x, 4, 3, 5).assignment.cluster == kmeans(x, 4, 3, 5).assignment.cluster);
  CHECK(kmeans(x, 4, 6, 5).cost <= kmeans(x, 4, 1, 5).cost + 1e-12);
  CHECK_THROWS_AS(kmeans(x, 0, 1, 1), InvalidArgument);
  CHECK_THROWS_AS(kmeans(x, 13, 1, 1), InvalidArgument);
}
