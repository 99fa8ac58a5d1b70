#pragma once

// Slow, obviously-correct reference implementations. Nothing in here calls
// into the library except for plain data types.

#include "tpe/types.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <unistd.h>
#include <vector>

namespace oracle {

using tpe::Index;
using tpe::MatrixXd;
using tpe::RowMatrixXd;
using tpe::VectorXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Point {
  double t, fmr, fnmr;
};

inline std::vector<Point> roc(const std::vector<double>& gen, const std::vector<double>& imp) {
  std::set<double> uniq(gen.begin(), gen.end());
  uniq.insert(imp.begin(), imp.end());
  std::vector<double> ts(uniq.begin(), uniq.end());
  ts.push_back(kInf);
  std::vector<Point> pts;
  for (double t : ts) {
    std::size_t fm = 0, fnm = 0;
    for (double s : imp) fm += s >= t;
    for (double s : gen) fnm += s < t;
    pts.push_back({t, double(fm) / double(imp.size()), double(fnm) / double(gen.size())});
  }
  return pts;
}

// Crossing of FMR(t) and FNMR(t), linear between the bracketing points.
inline double eer(const std::vector<Point>& pts) {
  std::size_t k = 0;
  while (k < pts.size() && pts[k].fmr > pts[k].fnmr) ++k;
  if (k == pts.size()) return pts.back().fmr;
  if (k == 0 || pts[k].fmr == pts[k].fnmr) return pts[k].fmr;
  const Point& a = pts[k - 1];
  const Point& b = pts[k];
  const double s = (a.fmr - a.fnmr) / ((a.fmr - a.fnmr) - (b.fmr - b.fnmr));
  return a.fmr + s * (b.fmr - a.fmr);
}

inline double mann_whitney(const std::vector<double>& gen, const std::vector<double>& imp) {
  double wins = 0.0;
  for (double g : gen)
    for (double i : imp) wins += g > i ? 1.0 : (g == i ? 0.5 : 0.0);
  return wins / (double(gen.size()) * double(imp.size()));
}

// Value of `y` where `x` (nonincreasing along the list) first drops to `target`.
inline double at_rate(const std::vector<double>& x, const std::vector<double>& y, double target) {
  std::size_t k = 0;
  while (x[k] > target) ++k;
  if (k == 0 || x[k] == target) return y[k];
  const double s = (x[k - 1] - target) / (x[k - 1] - x[k]);
  return y[k - 1] + s * (y[k] - y[k - 1]);
}

inline double fnmr_at(const std::vector<Point>& pts, double fmr) {
  std::vector<double> x, y;
  for (const auto& p : pts) {
    x.push_back(p.fmr);
    y.push_back(p.fnmr);
  }
  return at_rate(x, y, fmr);
}

inline double best_accuracy_threshold(const std::vector<double>& gen, const std::vector<double>& imp) {
  std::set<double> uniq(gen.begin(), gen.end());
  uniq.insert(imp.begin(), imp.end());
  std::vector<double> s(uniq.begin(), uniq.end());
  std::vector<double> cand{-kInf};
  for (std::size_t i = 0; i + 1 < s.size(); ++i) cand.push_back(s[i] + (s[i + 1] - s[i]) / 2.0);
  cand.push_back(kInf);
  std::sort(cand.begin(), cand.end());
  double best = cand.front();
  std::size_t best_ok = 0;
  for (double t : cand) {
    std::size_t ok = 0;
    for (double g : gen) ok += g >= t;
    for (double i : imp) ok += i < t;
    if (ok > best_ok) {
      best_ok = ok;
      best = t;
    }
  }
  return best;
}

// Position of the mate after a full stable sort by descending score.
inline std::size_t rank_by_sort(const MatrixXd& scores, Index probe, Index mate) {
  std::vector<Index> order(static_cast<std::size_t>(scores.cols()));
  std::iota(order.begin(), order.end(), Index(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return scores(probe, a) > scores(probe, b); });
  return static_cast<std::size_t>(std::find(order.begin(), order.end(), mate) - order.begin()) + 1;
}

inline std::vector<double> cmc(const MatrixXd& scores, const std::vector<Index>& mates,
                               const std::vector<std::size_t>& ranks) {
  std::vector<double> out;
  for (std::size_t r : ranks) {
    std::size_t hit = 0;
    for (Index p = 0; p < scores.rows(); ++p) hit += rank_by_sort(scores, p, mates[std::size_t(p)]) <= r;
    out.push_back(double(hit) / double(scores.rows()));
  }
  return out;
}

inline double tpir_at(const MatrixXd& scores, const std::vector<std::optional<Index>>& mates, double fpir) {
  std::vector<double> top_unmated, top_hit;
  std::size_t mated = 0;
  for (Index p = 0; p < scores.rows(); ++p) {
    const double top = scores.row(p).maxCoeff();
    if (!mates[std::size_t(p)]) {
      top_unmated.push_back(top);
      continue;
    }
    ++mated;
    if (rank_by_sort(scores, p, *mates[std::size_t(p)]) == 1) top_hit.push_back(top);
  }
  std::set<double> ts(top_unmated.begin(), top_unmated.end());
  ts.insert(top_hit.begin(), top_hit.end());
  ts.insert(kInf);
  std::vector<double> x, y;
  for (double t : ts) {
    std::size_t u = 0, h = 0;
    for (double s : top_unmated) u += s >= t;
    for (double s : top_hit) h += s >= t;
    x.push_back(double(u) / double(top_unmated.size()));
    y.push_back(double(h) / double(mated));
  }
  return at_rate(x, y, fpir);
}

struct Pairs {
  std::size_t both = 0, same_cluster = 0, same_class = 0;
};

inline Pairs count_pairs(const std::vector<int>& cluster, const std::vector<int>& label) {
  Pairs c;
  for (std::size_t i = 0; i < cluster.size(); ++i)
    for (std::size_t j = i + 1; j < cluster.size(); ++j) {
      const bool sc = cluster[i] == cluster[j];
      const bool sl = label[i] == label[j];
      c.same_cluster += sc;
      c.same_class += sl;
      c.both += sc && sl;
    }
  return c;
}

// Relabels ids in order of first appearance so partitions compare with ==.
inline std::vector<int> canonical(const std::vector<int>& ids) {
  std::map<int, int> remap;
  std::vector<int> out;
  for (int id : ids) out.push_back(remap.emplace(id, int(remap.size())).first->second);
  return out;
}

// Textbook UPGMA: recompute every linkage from the original points each round.
inline std::vector<int> upgma(const RowMatrixXd& x, double cutoff) {
  const std::size_t n = static_cast<std::size_t>(x.rows());
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double c = x.row(Index(i)).dot(x.row(Index(j))) / (x.row(Index(i)).norm() * x.row(Index(j)).norm());
      d[i][j] = 1.0 - std::clamp(c, -1.0, 1.0);
    }
  std::vector<std::vector<std::size_t>> clusters;
  for (std::size_t i = 0; i < n; ++i) clusters.push_back({i});
  while (clusters.size() > 1) {
    double best = kInf;
    std::size_t ba = 0, bb = 0;
    for (std::size_t a = 0; a < clusters.size(); ++a)
      for (std::size_t b = a + 1; b < clusters.size(); ++b) {
        double sum = 0.0;
        for (std::size_t i : clusters[a])
          for (std::size_t j : clusters[b]) sum += d[i][j];
        const double avg = sum / double(clusters[a].size() * clusters[b].size());
        if (avg < best) {
          best = avg;
          ba = a;
          bb = b;
        }
      }
    if (!(best < cutoff)) break;
    clusters[ba].insert(clusters[ba].end(), clusters[bb].begin(), clusters[bb].end());
    clusters.erase(clusters.begin() + long(bb));
  }
  std::vector<int> out(n);
  for (std::size_t c = 0; c < clusters.size(); ++c)
    for (std::size_t i : clusters[c]) out[i] = int(c);
  return canonical(out);
}

inline RowMatrixXd gaussian_rows(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  RowMatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = g(rng);
  return m;
}

// Points around `k` random directions with angular spread `spread`.
inline RowMatrixXd cones(std::size_t k, std::size_t per, Index dim, double spread, std::mt19937_64& rng,
                         std::vector<int>& labels) {
  const RowMatrixXd centers = gaussian_rows(Index(k), dim, rng);
  std::normal_distribution<double> g;
  RowMatrixXd x(Index(k * per), dim);
  labels.clear();
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t r = 0; r < per; ++r) {
      const Index i = Index(c * per + r);
      x.row(i) = centers.row(Index(c)).normalized();
      for (Index j = 0; j < dim; ++j) x(i, j) += spread * g(rng);
      x.row(i).normalize();
      labels.push_back(int(c));
    }
  return x;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() / ("tpe_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

} // namespace oracle
