#pragma once

#include "tpe/error.hpp"
#include "tpe/types.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tpe {

/// Returns v / ||v||_2. Throws NormalizationError for a zero or non-finite v.
template <class Derived>
Vector<typename Derived::Scalar> normalize(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  if (!v.allFinite()) throw NormalizationError("vector has non-finite entries");
  const Scalar norm = v.stableNorm();
  if (!(norm > Scalar(0))) throw NormalizationError("cannot normalize a zero vector");
  return v / norm;
}

enum class Split { Train, Test };

std::string_view to_string(Split s) noexcept;
std::optional<Split> parse_split(std::string_view s);

struct FeatureRecord {
  std::string record_id;
  std::string subject;
  std::string media_id;
  std::optional<std::string> template_id;
  std::optional<Split> split;
  VectorXd values;
};

/// Record labels without the feature payload.
struct RecordMeta {
  std::string record_id;
  std::string subject;
  std::string media_id;
  std::optional<std::string> template_id;
  std::optional<Split> split;
};

/// An immutable, dimension-checked collection of labeled feature vectors.
///
/// Features live in a row-major (count x dim) table. Subjects are assigned
/// dense integer labels in order of first appearance, so label 0 is the
/// subject of record 0.
class Dataset {
public:
  Dataset() = default;

  /// Throws DimensionError on ragged input, InvalidArgument on duplicate
  /// record ids or non-finite values, NormalizationError when `normalize`
  /// is set and a record is zero.
  explicit Dataset(std::vector<FeatureRecord> records, bool normalize = false);

  Dataset(std::vector<RecordMeta> meta, RowMatrixXd features, bool normalize = false);

  std::size_t size() const noexcept { return meta_.size(); }
  Index dim() const noexcept { return features_.cols(); }
  bool empty() const noexcept { return meta_.empty(); }

  const RowMatrixXd& features() const noexcept { return features_; }
  auto feature(std::size_t i) const { return features_.row(static_cast<Index>(i)).transpose(); }
  const RecordMeta& meta(std::size_t i) const { return meta_.at(i); }
  const std::vector<RecordMeta>& metas() const noexcept { return meta_; }

  int subject_label(std::size_t i) const { return subject_label_.at(i); }
  const std::vector<int>& subject_labels() const noexcept { return subject_label_; }
  std::size_t num_subjects() const noexcept { return subject_names_.size(); }
  const std::string& subject_name(int label) const { return subject_names_.at(static_cast<std::size_t>(label)); }
  /// Record indices of one subject, ascending.
  const std::vector<std::size_t>& subject_members(int label) const {
    return subject_members_.at(static_cast<std::size_t>(label));
  }

  /// template_id -> record indices (ascending). Records without a template are absent.
  const std::map<std::string, std::vector<std::size_t>>& templates() const noexcept { return templates_; }

  std::optional<std::size_t> find(std::string_view record_id) const;

  /// Records whose split tag equals `s`, preserving order.
  Dataset filter_split(Split s) const;
  /// Records at the given indices, in the given order.
  Dataset subset(const std::vector<std::size_t>& indices) const;

  FeatureRecord record(std::size_t i) const;

private:
  void build_indices();

  std::vector<RecordMeta> meta_;
  RowMatrixXd features_;
  std::vector<int> subject_label_;
  std::vector<std::string> subject_names_;
  std::vector<std::vector<std::size_t>> subject_members_;
  std::map<std::string, std::vector<std::size_t>> templates_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
};

} // namespace tpe
