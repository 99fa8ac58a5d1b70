#pragma once

#include "tpe/dataset.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tpe {

struct TemplateItem {
  std::string record_id;
  std::string media_id;
  VectorXd feature;
};

/// A set of items of one subject that is compared as a unit.
struct Template {
  std::string template_id;
  std::optional<std::string> subject;
  std::vector<TemplateItem> items;
};

/// Componentwise mean of the items, re-normalized to unit length.
VectorXd pool_average(const Template& t);

/// Mean within each media id, then the mean of the media means, re-normalized.
/// Every media contributes equally regardless of how many items it holds.
VectorXd pool_media(const Template& t);

enum class PoolMode { Average, Media };

std::string_view to_string(PoolMode m) noexcept;
PoolMode parse_pool_mode(std::string_view s);

VectorXd pool(const Template& t, PoolMode mode);

/// Groups records by template id (ascending id order). Records without a
/// template id are skipped. The subject is kept when all items agree.
std::vector<Template> group_templates(const Dataset& ds);

/// One record per template: record_id and template_id are the template id,
/// subject is carried over when consistent, media_id is empty.
Dataset pool_dataset(const Dataset& ds, PoolMode mode);

} // namespace tpe
