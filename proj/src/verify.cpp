#include "tpe/verify.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace tpe {

void ScoreSet::validate() const {
  if (genuine.empty() || impostor.empty())
    throw InvalidArgument("score set needs at least one genuine and one impostor score");
  for (double s : genuine)
    if (!std::isfinite(s)) throw InvalidArgument("non-finite genuine score");
  for (double s : impostor)
    if (!std::isfinite(s)) throw InvalidArgument("non-finite impostor score");
}

ScoreSet score_all_pairs(const RowMatrixXd& features, const std::vector<int>& labels) {
  if (static_cast<Index>(labels.size()) != features.rows()) throw DimensionError("label count does not match rows");
  VectorXd norms = features.rowwise().norm();
  for (Index i = 0; i < norms.size(); ++i)
    if (!(norms[i] > 0.0)) throw InvalidArgument("cosine of a zero vector");
  const RowMatrixXd unit = norms.cwiseInverse().asDiagonal() * features;
  const MatrixXd gram = unit * unit.transpose();
  ScoreSet s;
  for (Index i = 0; i < gram.rows(); ++i)
    for (Index j = i + 1; j < gram.cols(); ++j)
      s.add(std::clamp(gram(i, j), -1.0, 1.0), labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)]);
  return s;
}

RocCurve roc(const ScoreSet& scores) {
  scores.validate();
  std::vector<double> gen = scores.genuine;
  std::vector<double> imp = scores.impostor;
  std::sort(gen.begin(), gen.end());
  std::sort(imp.begin(), imp.end());
  const double g = static_cast<double>(gen.size());
  const double n = static_cast<double>(imp.size());

  RocCurve curve;
  std::size_t gi = 0; // genuine scores < threshold
  std::size_t ii = 0; // impostor scores < threshold
  while (gi < gen.size() || ii < imp.size()) {
    double t = std::numeric_limits<double>::infinity();
    if (gi < gen.size()) t = gen[gi];
    if (ii < imp.size()) t = std::min(t, imp[ii]);
    curve.points.push_back({t, (n - static_cast<double>(ii)) / n, static_cast<double>(gi) / g});
    while (gi < gen.size() && gen[gi] == t) ++gi;
    while (ii < imp.size() && imp[ii] == t) ++ii;
  }
  curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 1.0});
  return curve;
}

double eer(const RocCurve& curve) {
  const auto& pts = curve.points;
  if (pts.empty()) throw InvalidArgument("empty ROC curve");
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double d = pts[k].fmr - pts[k].fnmr;
    if (d > 0.0) continue;
    if (d == 0.0 || k == 0) return pts[k].fmr;
    const double d_prev = pts[k - 1].fmr - pts[k - 1].fnmr;
    const double s = d_prev / (d_prev - d);
    return pts[k - 1].fmr + s * (pts[k].fmr - pts[k - 1].fmr);
  }
  return pts.back().fmr;
}

double auc(const RocCurve& curve) {
  const auto& pts = curve.points;
  double area = 0.0;
  for (std::size_t k = 1; k < pts.size(); ++k)
    area += (pts[k - 1].fmr - pts[k].fmr) * (pts[k - 1].tar() + pts[k].tar()) / 2.0;
  return area;
}

namespace detail {

std::pair<std::size_t, double> interpolate_at(const std::vector<double>& rates, const std::vector<double>& values,
                                              double target) {
  for (std::size_t k = 0; k < rates.size(); ++k) {
    if (rates[k] > target) continue;
    if (rates[k] == target || k == 0) return {k, values[k]};
    const double s = (rates[k - 1] - target) / (rates[k - 1] - rates[k]);
    return {k, values[k - 1] + s * (values[k] - values[k - 1])};
  }
  throw InvalidArgument("target rate below every operating point");
}

} // namespace detail

RateAt fnmr_at_fmr(const RocCurve& curve, double fmr) {
  if (!(fmr > 0.0 && fmr <= 1.0)) throw InvalidArgument("FMR target must lie in (0, 1], got " + std::to_string(fmr));
  std::vector<double> fmrs, fnmrs;
  fmrs.reserve(curve.points.size());
  fnmrs.reserve(curve.points.size());
  for (const auto& p : curve.points) {
    fmrs.push_back(p.fmr);
    fnmrs.push_back(p.fnmr);
  }
  const auto [k, value] = detail::interpolate_at(fmrs, fnmrs, fmr);
  return {value, curve.points[k].fmr, curve.points[k].threshold};
}

double learn_accuracy_threshold(const ScoreSet& train) {
  train.validate();
  std::vector<std::pair<double, bool>> all;
  all.reserve(train.size());
  for (double s : train.genuine) all.emplace_back(s, true);
  for (double s : train.impostor) all.emplace_back(s, false);
  std::sort(all.begin(), all.end());

  // Sweep thresholds upward; `correct` counts genuine >= theta plus impostor < theta.
  std::size_t correct = train.genuine.size();
  std::size_t best_correct = correct;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < all.size();) {
    const double v = all[k].first;
    for (; k < all.size() && all[k].first == v; ++k) {
      if (all[k].second)
        --correct;
      else
        ++correct;
    }
    const double theta = k < all.size() ? v + (all[k].first - v) / 2.0 : std::numeric_limits<double>::infinity();
    if (correct > best_correct) {
      best_correct = correct;
      best = theta;
    }
  }
  return best;
}

double accuracy(const ScoreSet& test, double threshold) {
  if (test.size() == 0) throw InvalidArgument("accuracy of an empty score set");
  std::size_t correct = 0;
  for (double s : test.genuine) correct += s >= threshold;
  for (double s : test.impostor) correct += s < threshold;
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

} // namespace tpe
