#pragma once

#include "tpe/dataset.hpp"

#include <string>
#include <vector>

namespace fixture {

inline tpe::Dataset make_dataset(const tpe::RowMatrixXd& x, const std::vector<int>& labels, bool normalize = true) {
  std::vector<tpe::RecordMeta> meta;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    tpe::RecordMeta m;
    m.record_id = "r" + std::to_string(i);
    m.subject = "s" + std::to_string(labels[i]);
    m.media_id = m.record_id;
    meta.push_back(m);
  }
  return tpe::Dataset(meta, x, normalize);
}

} // namespace fixture
