#include "tpe/dataset.hpp"

#include <unordered_map>

namespace tpe {

std::string_view to_string(Split s) noexcept { return s == Split::Train ? "train" : "test"; }

std::optional<Split> parse_split(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "test") return Split::Test;
  return std::nullopt;
}

Dataset::Dataset(std::vector<FeatureRecord> records, bool normalize) {
  const Index dim = records.empty() ? 0 : records.front().values.size();
  features_.resize(static_cast<Index>(records.size()), dim);
  meta_.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& r = records[i];
    if (r.values.size() != dim)
      throw DimensionError("record '" + r.record_id + "' has dimension " + std::to_string(r.values.size()) +
                           ", expected " + std::to_string(dim));
    features_.row(static_cast<Index>(i)) = r.values.transpose();
    meta_.push_back({std::move(r.record_id), std::move(r.subject), std::move(r.media_id), std::move(r.template_id),
                     r.split});
  }
  if (normalize)
    for (Index i = 0; i < features_.rows(); ++i) features_.row(i) = tpe::normalize(features_.row(i));
  build_indices();
}

Dataset::Dataset(std::vector<RecordMeta> meta, RowMatrixXd features, bool normalize)
    : meta_(std::move(meta)), features_(std::move(features)) {
  if (static_cast<Index>(meta_.size()) != features_.rows())
    throw DimensionError("label count " + std::to_string(meta_.size()) + " does not match feature rows " +
                         std::to_string(features_.rows()));
  if (normalize)
    for (Index i = 0; i < features_.rows(); ++i) features_.row(i) = tpe::normalize(features_.row(i));
  build_indices();
}

void Dataset::build_indices() {
  if (!features_.allFinite()) throw InvalidArgument("dataset contains non-finite feature values");
  std::unordered_map<std::string, int> label_of;
  subject_label_.resize(meta_.size());
  for (std::size_t i = 0; i < meta_.size(); ++i) {
    const auto& m = meta_[i];
    if (!by_id_.emplace(m.record_id, i).second) throw InvalidArgument("duplicate record_id '" + m.record_id + "'");
    auto [it, inserted] = label_of.emplace(m.subject, static_cast<int>(subject_names_.size()));
    if (inserted) {
      subject_names_.push_back(m.subject);
      subject_members_.emplace_back();
    }
    subject_label_[i] = it->second;
    subject_members_[static_cast<std::size_t>(it->second)].push_back(i);
    if (m.template_id) templates_[*m.template_id].push_back(i);
  }
}

std::optional<std::size_t> Dataset::find(std::string_view record_id) const {
  auto it = by_id_.find(record_id);
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

Dataset Dataset::filter_split(Split s) const {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < meta_.size(); ++i)
    if (meta_[i].split == s) keep.push_back(i);
  return subset(keep);
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  std::vector<RecordMeta> meta;
  meta.reserve(indices.size());
  RowMatrixXd feats(static_cast<Index>(indices.size()), dim());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    meta.push_back(meta_.at(indices[k]));
    feats.row(static_cast<Index>(k)) = features_.row(static_cast<Index>(indices[k]));
  }
  return Dataset(std::move(meta), std::move(feats));
}

FeatureRecord Dataset::record(std::size_t i) const {
  const auto& m = meta_.at(i);
  return {m.record_id, m.subject, m.media_id, m.template_id, m.split, feature(i)};
}

} // namespace tpe
