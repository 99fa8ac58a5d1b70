#pragma once

#include "tpe/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tpe {

/// Gallery with one representation per subject, and probes that may or may
/// not have a mate in the gallery.
struct IdentProtocol {
  std::vector<std::string> gallery_subjects;
  RowMatrixXd gallery;
  RowMatrixXd probes;
  /// Ground-truth subject per probe; nullopt or a subject missing from the
  /// gallery marks an unmated probe.
  std::vector<std::optional<std::string>> probe_subjects;

  void validate() const;
};

/// Probe x gallery similarity matrix with each probe's mate (gallery column).
struct IdentScores {
  MatrixXd scores;
  std::vector<std::optional<Index>> mate;

  void validate() const;
};

/// Cosine scores for every (probe, gallery) pair.
IdentScores score_protocol(const IdentProtocol& protocol);

/// Fraction of probes whose mate ranks within the top r, for each r in `ranks`.
/// Gallery entries tying with the mate count ahead of it when they come first
/// in gallery order. Throws InvalidArgument if any probe is unmated.
std::vector<double> cmc(const IdentScores& s, const std::vector<std::size_t>& ranks);
std::vector<double> cmc(const IdentProtocol& protocol, const std::vector<std::size_t>& ranks);

/// 1-based rank of the mate for a mated probe.
std::size_t mate_rank(const IdentScores& s, Index probe);

struct TpirPoint {
  double fpir = 0.0;          ///< requested FPIR
  double tpir = 0.0;          ///< interpolated TPIR at that FPIR
  double achieved_fpir = 0.0; ///< FPIR of the nearest operating point not above the target
  double threshold = 0.0;     ///< threshold of that operating point
};

/// Open-set identification. FPIR(t) is the fraction of unmated probes whose
/// top score is >= t; TPIR(t) the fraction of mated probes whose mate is at
/// rank 1 with top score >= t. Throws InvalidArgument without unmated or
/// mated probes, or for targets outside (0, 1].
std::vector<TpirPoint> tpir_at_fpir(const IdentScores& s, const std::vector<double>& fpir_targets);
std::vector<TpirPoint> tpir_at_fpir(const IdentProtocol& protocol, const std::vector<double>& fpir_targets);

} // namespace tpe
