#include "tpe/identify.hpp"

#include "tpe/error.hpp"
#include "tpe/verify.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <unordered_map>

namespace tpe {

void IdentProtocol::validate() const {
  if (static_cast<Index>(gallery_subjects.size()) != gallery.rows())
    throw DimensionError("gallery subject count does not match gallery rows");
  if (static_cast<Index>(probe_subjects.size()) != probes.rows())
    throw DimensionError("probe subject count does not match probe rows");
  if (gallery.rows() == 0) throw InvalidArgument("empty gallery");
  if (probes.rows() > 0 && probes.cols() != gallery.cols())
    throw DimensionError("probe and gallery dimensions differ");
  std::set<std::string_view> seen;
  for (const auto& s : gallery_subjects)
    if (!seen.insert(s).second) throw InvalidArgument("gallery subject '" + s + "' appears twice");
}

void IdentScores::validate() const {
  if (static_cast<Index>(mate.size()) != scores.rows()) throw DimensionError("mate list does not match probe count");
  for (const auto& m : mate)
    if (m && (*m < 0 || *m >= scores.cols())) throw InvalidArgument("mate index out of range");
  if (!scores.allFinite()) throw InvalidArgument("non-finite identification score");
}

IdentScores score_protocol(const IdentProtocol& protocol) {
  protocol.validate();
  IdentScores out;
  out.scores.resize(protocol.probes.rows(), protocol.gallery.rows());
  for (Index p = 0; p < protocol.probes.rows(); ++p)
    for (Index g = 0; g < protocol.gallery.rows(); ++g)
      out.scores(p, g) = cosine(protocol.probes.row(p), protocol.gallery.row(g));
  std::unordered_map<std::string_view, Index> column;
  for (std::size_t g = 0; g < protocol.gallery_subjects.size(); ++g)
    column.emplace(protocol.gallery_subjects[g], static_cast<Index>(g));
  for (const auto& subject : protocol.probe_subjects) {
    std::optional<Index> m;
    if (subject) {
      auto it = column.find(*subject);
      if (it != column.end()) m = it->second;
    }
    out.mate.push_back(m);
  }
  return out;
}

std::size_t mate_rank(const IdentScores& s, Index probe) {
  const auto& m = s.mate.at(static_cast<std::size_t>(probe));
  if (!m) throw InvalidArgument("probe " + std::to_string(probe) + " has no mate in the gallery");
  const double mine = s.scores(probe, *m);
  std::size_t rank = 1;
  for (Index g = 0; g < s.scores.cols(); ++g) {
    const double v = s.scores(probe, g);
    if (v > mine || (v == mine && g < *m)) ++rank;
  }
  return rank;
}

std::vector<double> cmc(const IdentScores& s, const std::vector<std::size_t>& ranks) {
  s.validate();
  if (s.scores.rows() == 0) throw InvalidArgument("CMC needs at least one probe");
  for (const auto& m : s.mate)
    if (!m) throw InvalidArgument("closed-set CMC received an unmated probe");
  for (std::size_t r : ranks)
    if (r < 1) throw InvalidArgument("CMC ranks are 1-based");
  std::vector<std::size_t> hits(ranks.size(), 0);
  for (Index p = 0; p < s.scores.rows(); ++p) {
    const std::size_t r = mate_rank(s, p);
    for (std::size_t k = 0; k < ranks.size(); ++k) hits[k] += r <= ranks[k];
  }
  std::vector<double> out;
  for (std::size_t h : hits) out.push_back(static_cast<double>(h) / static_cast<double>(s.scores.rows()));
  return out;
}

std::vector<double> cmc(const IdentProtocol& protocol, const std::vector<std::size_t>& ranks) {
  return cmc(score_protocol(protocol), ranks);
}

std::vector<TpirPoint> tpir_at_fpir(const IdentScores& s, const std::vector<double>& fpir_targets) {
  s.validate();
  if (s.scores.cols() == 0) throw InvalidArgument("empty gallery");
  std::vector<double> unmated;  // top score per unmated probe
  std::vector<double> correct;  // top score per mated probe identified at rank 1
  std::size_t mated = 0;
  for (Index p = 0; p < s.scores.rows(); ++p) {
    const double top = s.scores.row(p).maxCoeff();
    const auto& m = s.mate[static_cast<std::size_t>(p)];
    if (!m) {
      unmated.push_back(top);
      continue;
    }
    ++mated;
    if (mate_rank(s, p) == 1) correct.push_back(top);
  }
  if (unmated.empty()) throw InvalidArgument("open-set evaluation needs unmated probes");
  if (mated == 0) throw InvalidArgument("open-set evaluation needs mated probes");

  std::sort(unmated.begin(), unmated.end());
  std::sort(correct.begin(), correct.end());
  std::vector<double> thresholds(unmated);
  thresholds.insert(thresholds.end(), correct.begin(), correct.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  thresholds.push_back(std::numeric_limits<double>::infinity());

  std::vector<double> fpir, tpir;
  for (double t : thresholds) {
    const auto u_above = unmated.end() - std::lower_bound(unmated.begin(), unmated.end(), t);
    const auto c_above = correct.end() - std::lower_bound(correct.begin(), correct.end(), t);
    fpir.push_back(static_cast<double>(u_above) / static_cast<double>(unmated.size()));
    tpir.push_back(static_cast<double>(c_above) / static_cast<double>(mated));
  }

  std::vector<TpirPoint> out;
  for (double target : fpir_targets) {
    if (!(target > 0.0 && target <= 1.0))
      throw InvalidArgument("FPIR target must lie in (0, 1], got " + std::to_string(target));
    const auto [k, value] = detail::interpolate_at(fpir, tpir, target);
    out.push_back({target, value, fpir[k], thresholds[k]});
  }
  return out;
}

std::vector<TpirPoint> tpir_at_fpir(const IdentProtocol& protocol, const std::vector<double>& fpir_targets) {
  return tpir_at_fpir(score_protocol(protocol), fpir_targets);
}

} // namespace tpe
