#include "oracles.hpp"

#include "tpe/identify.hpp"
#include "tpe/verify.hpp"

#include <doctest.h>

using namespace tpe;

namespace {

ScoreSet random_scores(std::mt19937_64& rng, std::size_t max_total, bool coarse) {
  std::uniform_int_distribution<std::size_t> count(1, max_total / 2);
  std::normal_distribution<double> g;
  ScoreSet s;
  const std::size_t ng = count(rng), ni = count(rng);
  // coarse scores force plenty of exact ties
  auto draw = [&](double shift) { return coarse ? std::round((g(rng) + shift) * 4.0) / 4.0 : g(rng) + shift; };
  for (std::size_t i = 0; i < ng; ++i) s.genuine.push_back(draw(1.0));
  for (std::size_t i = 0; i < ni; ++i) s.impostor.push_back(draw(0.0));
  return s;
}

} // namespace

TEST_CASE("cosine") {
  const VectorXd a = (VectorXd(3) << 1, 2, 3).finished();
  const VectorXd b = (VectorXd(3) << -2, 1, 0).finished();
  CHECK(cosine(a, a) == doctest::Approx(1.0));
  CHECK(cosine(a, b) == 0.0);
  CHECK(cosine(a, VectorXd(-a)) == doctest::Approx(-1.0));
  CHECK(cosine(a, VectorXd(3.5 * a)) <= 1.0);
  const VectorXd c = (VectorXd(3) << 0.3, -1, 2).finished();
  CHECK(cosine(a, c) == doctest::Approx(cosine(c, a)).epsilon(1e-15));
  CHECK(cosine(VectorXd(7.0 * a), c) == doctest::Approx(cosine(a, c)).epsilon(1e-14));
  CHECK_THROWS_AS(cosine(a, VectorXd::Zero(3)), InvalidArgument);
  CHECK_THROWS_AS(cosine(a, VectorXd::Ones(2)), DimensionError);
}

TEST_CASE("roc: small cases") {
  ScoreSet sep{{0.9, 0.8}, {0.1, 0.2}};
  const RocCurve c = roc(sep);
  bool perfect = false;
  for (const auto& p : c.points) perfect |= p.fmr == 0.0 && p.fnmr == 0.0;
  CHECK(perfect);
  CHECK(eer(c) == 0.0);
  CHECK(auc(c) == 1.0);
  CHECK(fnmr_at_fmr(c, 0.01).value == 0.0);
  CHECK(c.points.front().fmr == 1.0);
  CHECK(c.points.back().fmr == 0.0);

  ScoreSet same{{0.1, 0.5, 0.7}, {0.7, 0.1, 0.5}};
  CHECK(eer(roc(same)) == doctest::Approx(0.5));
  CHECK(auc(roc(same)) == doctest::Approx(0.5));

  CHECK_THROWS_AS(roc(ScoreSet{{0.1}, {}}), InvalidArgument);
  CHECK_THROWS_AS(roc(ScoreSet{{std::nan("")}, {0.2}}), InvalidArgument);
  CHECK_THROWS_AS(fnmr_at_fmr(c, 0.0), InvalidArgument);
  CHECK_THROWS_AS(fnmr_at_fmr(c, 1.5), InvalidArgument);
}

TEST_CASE("roc/eer/auc/fnmr against brute force") {
  std::mt19937_64 rng(101);
  for (int rep = 0; rep < 60; ++rep) {
    const ScoreSet s = random_scores(rng, 400, rep % 2 == 0);
    const RocCurve c = roc(s);
    const auto ref = oracle::roc(s.genuine, s.impostor);
    REQUIRE(c.points.size() == ref.size());
    for (std::size_t k = 0; k < ref.size(); ++k) {
      CHECK(c.points[k].threshold == ref[k].t);
      CHECK(c.points[k].fmr == doctest::Approx(ref[k].fmr).epsilon(1e-12));
      CHECK(c.points[k].fnmr == doctest::Approx(ref[k].fnmr).epsilon(1e-12));
      if (k > 0) {
        CHECK(c.points[k].fmr <= c.points[k - 1].fmr);
        CHECK(c.points[k].fnmr >= c.points[k - 1].fnmr);
      }
    }
    CHECK(std::abs(eer(c) - oracle::eer(ref)) <= 1e-9);
    CHECK(std::abs(auc(c) - oracle::mann_whitney(s.genuine, s.impostor)) <= 1e-9);
    double prev = 2.0;
    for (double f : {0.001, 0.01, 0.05, 0.1, 0.3, 1.0}) {
      const RateAt r = fnmr_at_fmr(c, f);
      CHECK(std::abs(r.value - oracle::fnmr_at(ref, f)) <= 1e-9);
      CHECK(r.achieved_rate <= f);
      CHECK(r.value <= prev + 1e-15);
      prev = r.value;
    }
  }
}

TEST_CASE("monotone transforms leave verification metrics alone") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 30; ++rep) {
    const ScoreSet s = random_scores(rng, 300, rep % 3 == 0);
    ScoreSet t = s;
    for (auto* v : {&t.genuine, &t.impostor})
      for (double& x : *v) x = std::exp(0.5 * x) * 3.0 - 1.0;
    const RocCurve a = roc(s), b = roc(t);
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t k = 0; k < a.points.size(); ++k) {
      CHECK(a.points[k].fmr == b.points[k].fmr);
      CHECK(a.points[k].fnmr == b.points[k].fnmr);
    }
    CHECK(eer(a) == eer(b));
    CHECK(auc(a) == auc(b));
  }
}

TEST_CASE("accuracy threshold") {
  CHECK(learn_accuracy_threshold(ScoreSet{{0.9}, {0.1}}) == doctest::Approx(0.5));
  const ScoreSet train{{0.9, 0.8, 0.85}, {0.1, 0.2, 0.3}};
  const double th = learn_accuracy_threshold(train);
  CHECK(accuracy(ScoreSet{{0.95, 0.81}, {0.15, 0.25}}, th) == 1.0);
  // all genuine below all impostors: accepting everything ties with rejecting everything
  CHECK(learn_accuracy_threshold(ScoreSet{{0.1}, {0.9}}) == -oracle::kInf);

  std::mt19937_64 rng(55);
  for (int rep = 0; rep < 40; ++rep) {
    const ScoreSet s = random_scores(rng, 500, rep % 2 == 1);
    CHECK(learn_accuracy_threshold(s) == oracle::best_accuracy_threshold(s.genuine, s.impostor));
  }
}

TEST_CASE("score_all_pairs") {
  RowMatrixXd x(3, 2);
  x << 1, 0, 2, 0, 0, 3;
  const ScoreSet s = score_all_pairs(x, {0, 0, 1});
  CHECK(s.genuine == std::vector<double>{1.0});
  CHECK(s.impostor == std::vector<double>{0.0, 0.0});
}

TEST_CASE("cmc") {
  IdentProtocol p;
  p.gallery_subjects = {"a", "b", "c"};
  p.gallery = (RowMatrixXd(3, 2) << 1, 0, 0, 1, -1, 0).finished();
  p.probes = (RowMatrixXd(2, 2) << 0, 1, 1, 0.1).finished();
  p.probe_subjects = {std::string("b"), std::string("c")};
  const auto r = cmc(p, {1, 2, 3});
  CHECK(r == std::vector<double>{0.5, 0.5, 1.0});

  IdentProtocol one;
  one.gallery_subjects = {"x"};
  one.gallery = RowMatrixXd::Ones(1, 2);
  one.probes = (RowMatrixXd(2, 2) << 1, -1, 0.3, 0.2).finished();
  one.probe_subjects = {std::string("x"), std::string("x")};
  CHECK(cmc(one, {1, 5}) == std::vector<double>{1.0, 1.0});

  p.probe_subjects[1].reset();
  CHECK_THROWS_AS(cmc(p, {1}), InvalidArgument);
  p.gallery_subjects = {"a", "a", "c"};
  CHECK_THROWS_AS(cmc(p, {1}), InvalidArgument);

  // ties go to the earlier gallery entry
  IdentScores tie;
  tie.scores = (MatrixXd(1, 3) << 0.5, 0.5, 0.5).finished();
  tie.mate = {Index(1)};
  CHECK(mate_rank(tie, 0) == 2);
}

TEST_CASE("cmc and tpir against brute force") {
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<Index> gsize(2, 20), psize(2, 50);
  for (int rep = 0; rep < 40; ++rep) {
    const Index g = gsize(rng), n = psize(rng);
    IdentScores s;
    s.scores = oracle::gaussian_rows(n, g, rng);
    if (rep % 2 == 0) s.scores = (s.scores * 2.0).array().round() / 2.0;
    std::uniform_int_distribution<Index> pick(0, g - 1);
    std::vector<Index> mates;
    for (Index p = 0; p < n; ++p) {
      mates.push_back(pick(rng));
      s.scores(p, mates.back()) += 0.8;
      s.mate.push_back(mates.back());
    }
    const std::vector<std::size_t> ranks{1, 2, 5, 10};
    const auto got = cmc(s, ranks);
    const auto want = oracle::cmc(s.scores, mates, ranks);
    for (std::size_t k = 0; k < ranks.size(); ++k) CHECK(std::abs(got[k] - want[k]) <= 1e-12);

    // open set: knock out some mates
    IdentScores open = s;
    for (Index p = 0; p < n; p += 3) open.mate[std::size_t(p)].reset();
    const std::vector<double> targets{0.01, 0.05, 0.1, 0.2, 0.5, 1.0};
    const auto pts = tpir_at_fpir(open, targets);
    for (std::size_t k = 0; k < targets.size(); ++k) {
      CHECK(std::abs(pts[k].tpir - oracle::tpir_at(open.scores, open.mate, targets[k])) <= 1e-9);
      CHECK(pts[k].achieved_fpir <= targets[k]);
    }

    // strictly increasing transform
    IdentScores moved = s;
    moved.scores = s.scores.array().exp() * 2.0;
    CHECK(cmc(moved, ranks) == got);
  }
}

TEST_CASE("tpir edge cases") {
  IdentScores s;
  s.scores = (MatrixXd(3, 2) << 0.9, 0.1, 0.2, 0.4, 0.3, 0.1).finished();
  s.mate = {Index(0), std::nullopt, std::nullopt};
  // unmated tops 0.4 and 0.3 both sit below the correct mated probe at 0.9
  const auto pts = tpir_at_fpir(s, {0.01, 0.5});
  CHECK(pts[0].tpir == 1.0);
  CHECK(pts[0].achieved_fpir == 0.0);
  CHECK(pts[1].tpir == 1.0);

  IdentScores all_unmated = s;
  all_unmated.mate = {std::nullopt, std::nullopt, std::nullopt};
  CHECK_THROWS_AS(tpir_at_fpir(all_unmated, {0.1}), InvalidArgument);
  IdentScores all_mated = s;
  all_mated.mate = {Index(0), Index(1), Index(0)};
  CHECK_THROWS_AS(tpir_at_fpir(all_mated, {0.1}), InvalidArgument);
  CHECK_THROWS_AS(tpir_at_fpir(s, {0.0}), InvalidArgument);
}
