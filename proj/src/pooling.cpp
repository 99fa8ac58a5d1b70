#include "tpe/pooling.hpp"

#include <map>

namespace tpe {

namespace {

void check_template(const Template& t) {
  if (t.items.empty()) throw InvalidArgument("template '" + t.template_id + "' is empty");
  const Index dim = t.items.front().feature.size();
  for (const auto& item : t.items)
    if (item.feature.size() != dim)
      throw DimensionError("template '" + t.template_id + "' mixes feature dimensions");
}

} // namespace

VectorXd pool_average(const Template& t) {
  check_template(t);
  VectorXd sum = VectorXd::Zero(t.items.front().feature.size());
  for (const auto& item : t.items) sum += item.feature;
  return normalize(sum / static_cast<double>(t.items.size()));
}

VectorXd pool_media(const Template& t) {
  check_template(t);
  const Index dim = t.items.front().feature.size();
  std::map<std::string_view, std::pair<VectorXd, std::size_t>> per_media;
  for (const auto& item : t.items) {
    if (item.media_id.empty())
      throw InvalidArgument("item '" + item.record_id + "' of template '" + t.template_id + "' has no media id");
    auto [it, inserted] = per_media.try_emplace(item.media_id, VectorXd::Zero(dim), 0);
    it->second.first += item.feature;
    ++it->second.second;
  }
  VectorXd sum = VectorXd::Zero(dim);
  for (const auto& [media, acc] : per_media) sum += acc.first / static_cast<double>(acc.second);
  return normalize(sum / static_cast<double>(per_media.size()));
}

std::string_view to_string(PoolMode m) noexcept { return m == PoolMode::Average ? "average" : "media"; }

PoolMode parse_pool_mode(std::string_view s) {
  if (s == "average") return PoolMode::Average;
  if (s == "media") return PoolMode::Media;
  throw InvalidArgument("unknown pooling mode '" + std::string(s) + "' (expected average or media)");
}

VectorXd pool(const Template& t, PoolMode mode) { return mode == PoolMode::Average ? pool_average(t) : pool_media(t); }

std::vector<Template> group_templates(const Dataset& ds) {
  std::vector<Template> out;
  for (const auto& [id, members] : ds.templates()) {
    Template t{id, ds.meta(members.front()).subject, {}};
    for (std::size_t i : members) {
      const auto& m = ds.meta(i);
      if (t.subject && *t.subject != m.subject) t.subject.reset();
      t.items.push_back({m.record_id, m.media_id, ds.feature(i)});
    }
    out.push_back(std::move(t));
  }
  return out;
}

Dataset pool_dataset(const Dataset& ds, PoolMode mode) {
  for (const auto& m : ds.metas())
    if (!m.template_id) throw InvalidArgument("record '" + m.record_id + "' has no template id");
  if (ds.empty()) throw InvalidArgument("nothing to pool");
  std::vector<FeatureRecord> records;
  for (const Template& t : group_templates(ds)) {
    const auto& members = ds.templates().at(t.template_id);
    std::optional<Split> split = ds.meta(members.front()).split;
    for (std::size_t i : members)
      if (split != ds.meta(i).split) split.reset();
    records.push_back({t.template_id, t.subject.value_or(""), "", t.template_id, split, pool(t, mode)});
  }
  return Dataset(std::move(records));
}

} // namespace tpe
