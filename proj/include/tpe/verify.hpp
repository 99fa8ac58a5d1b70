#pragma once

#include "tpe/error.hpp"
#include "tpe/types.hpp"

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

namespace tpe {

/// a.b / (|a| |b|), clamped to [-1, 1]. Throws InvalidArgument for a zero vector.
template <class DA, class DB>
typename DA::Scalar cosine(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  using Scalar = typename DA::Scalar;
  if (a.size() != b.size()) throw DimensionError("cosine of vectors with different dimensions");
  const Scalar na = a.norm();
  const Scalar nb = b.norm();
  if (!(na > Scalar(0)) || !(nb > Scalar(0))) throw InvalidArgument("cosine of a zero vector");
  const Scalar c = a.dot(b) / (na * nb);
  return std::clamp(c, Scalar(-1), Scalar(1));
}

/// Similarity scores split by ground truth.
struct ScoreSet {
  std::vector<double> genuine;
  std::vector<double> impostor;

  void add(double score, bool is_genuine) { (is_genuine ? genuine : impostor).push_back(score); }
  std::size_t size() const noexcept { return genuine.size() + impostor.size(); }
  /// Throws InvalidArgument unless both classes are present and every score is finite.
  void validate() const;
};

/// Cosine scores of every unordered pair of rows; a pair is genuine when
/// the labels match.
ScoreSet score_all_pairs(const RowMatrixXd& features, const std::vector<int>& labels);

/// A decision threshold: scores >= threshold are accepted as matches.
struct OperatingPoint {
  double threshold = 0.0;
  double fmr = 0.0;  ///< impostor scores >= threshold, as a fraction
  double fnmr = 0.0; ///< genuine scores < threshold, as a fraction
  double tar() const noexcept { return 1.0 - fnmr; }
};

/// Operating points in ascending threshold order: one per distinct score,
/// followed by a +inf point (FMR 0, FNMR 1). The first point has FMR 1 and FNMR 0.
struct RocCurve {
  std::vector<OperatingPoint> points;
};

RocCurve roc(const ScoreSet& scores);

/// Rate where FMR and FNMR cross, linearly interpolated between the two
/// bracketing operating points.
double eer(const RocCurve& curve);

/// Trapezoidal area under TAR against FMR.
double auc(const RocCurve& curve);

struct RateAt {
  double value = 0.0;         ///< interpolated rate at the requested target
  double achieved_rate = 0.0; ///< target-axis rate of the nearest operating point not above the target
  double threshold = 0.0;     ///< threshold of that operating point
};

/// FNMR at the requested FMR in (0, 1], interpolated along the curve.
RateAt fnmr_at_fmr(const RocCurve& curve, double fmr);

/// Threshold maximizing accuracy on `train` among -inf, the midpoints of
/// adjacent distinct scores, and +inf. Ties go to the lowest threshold.
double learn_accuracy_threshold(const ScoreSet& train);

/// Fraction of scores classified correctly by (score >= threshold) <=> genuine.
double accuracy(const ScoreSet& test, double threshold);

namespace detail {

/// Shared interpolation rule for error-tradeoff curves. `rates` is
/// nonincreasing along the curve. Returns the first index k with
/// rates[k] <= target and the value of `values` at the target: values[k] on an
/// exact hit, otherwise the linear interpolation between k-1 and k.
std::pair<std::size_t, double> interpolate_at(const std::vector<double>& rates, const std::vector<double>& values,
                                              double target);

} // namespace detail

} // namespace tpe
