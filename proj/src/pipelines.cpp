#include "tpe/pipelines.hpp"

#include <cmath>

namespace tpe {

Dataset split_by_subject(const Dataset& ds, double train_fraction) {
  if (!(train_fraction >= 0.0 && train_fraction <= 1.0)) throw InvalidArgument("train fraction must lie in [0, 1]");
  const auto cut = static_cast<int>(std::floor(train_fraction * static_cast<double>(ds.num_subjects())));
  std::vector<RecordMeta> meta = ds.metas();
  for (std::size_t i = 0; i < meta.size(); ++i) meta[i].split = ds.subject_label(i) < cut ? Split::Train : Split::Test;
  return Dataset(std::move(meta), ds.features());
}

namespace {

VerifyReproRow verify_row(std::string method, const RowMatrixXd& feats, const std::vector<int>& labels,
                          const std::vector<double>& fmrs) {
  VerifyReproRow row;
  row.method = std::move(method);
  row.curve = roc(score_all_pairs(feats, labels));
  row.eer = eer(row.curve);
  row.auc = auc(row.curve);
  for (double f : fmrs) row.fnmr_at.push_back(fnmr_at_fmr(row.curve, f));
  return row;
}

std::pair<Dataset, Dataset> train_test(const Dataset& ds, double train_fraction) {
  const Dataset tagged = split_by_subject(ds, train_fraction);
  Dataset train = tagged.filter_split(Split::Train);
  Dataset test = tagged.filter_split(Split::Test);
  if (train.empty() || test.empty()) throw InsufficientDataError("train/test split left one side empty");
  return {std::move(train), std::move(test)};
}

} // namespace

VerifyReproConfig default_verify_repro(std::uint64_t seed) {
  VerifyReproConfig cfg;
  cfg.data.num_subjects = 50;
  cfg.data.records_per_subject = 20;
  cfg.data.dim = 64;
  cfg.data.within_class_noise = 0.15;
  cfg.data.identity_rank = 16;
  cfg.data.nuisance_rank = 16;
  cfg.data.nuisance_noise = 0.5;
  cfg.data.seed = seed;
  cfg.train.target_dim = 16;
  cfg.train.iterations = 20000;
  cfg.train.learning_rate = 0.1;
  cfg.train.seed = seed;
  return cfg;
}

const VerifyReproRow& VerifyReproReport::row(std::string_view method) const {
  for (const auto& r : rows)
    if (r.method == method) return r;
  throw InvalidArgument("no report row for '" + std::string(method) + "'");
}

VerifyReproReport repro_verify(const VerifyReproConfig& cfg) {
  const auto [train, test] = train_test(generate_synthetic(cfg.data), cfg.train_fraction);
  const EmbeddingMatrix w_tde = train_tde(train, cfg.train).w;
  const EmbeddingMatrix w_tpe = train_tpe(train, cfg.train).w;

  VerifyReproReport report;
  const auto& labels = test.subject_labels();
  report.rows.push_back(verify_row("raw", test.features(), labels, cfg.fmr_targets));
  report.rows.push_back(verify_row("tde", project_rows(w_tde, test.features()), labels, cfg.fmr_targets));
  report.rows.push_back(verify_row("tpe", project_rows(w_tpe, test.features()), labels, cfg.fmr_targets));
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t j = i + 1; j < labels.size(); ++j) ++(labels[i] == labels[j] ? report.genuine_pairs : report.impostor_pairs);
  return report;
}

ClusterReproConfig default_cluster_repro(std::uint64_t seed) {
  ClusterReproConfig cfg;
  cfg.data.num_subjects = 80;
  cfg.data.templates_per_subject = 10;
  cfg.data.media_per_template = 4;
  cfg.data.dominant_frames = 8;
  cfg.data.other_frames = 1;
  cfg.data.dim = 64;
  cfg.data.within_class_noise = 0.1;
  cfg.data.media_offset = 0.2;
  cfg.data.identity_rank = 16;
  cfg.data.nuisance_rank = 16;
  cfg.data.nuisance_noise = 0.4;
  cfg.data.seed = seed;
  cfg.train.target_dim = 16;
  cfg.train.iterations = 20000;
  cfg.train.learning_rate = 0.1;
  cfg.train.seed = seed;
  return cfg;
}

const ClusterReproRow& ClusterReproReport::row(std::string_view features, PoolMode pooling) const {
  for (const auto& r : rows)
    if (r.features == features && r.pooling == pooling) return r;
  throw InvalidArgument("no report row for '" + std::string(features) + "'");
}

ClusterReproReport repro_cluster(const ClusterReproConfig& cfg) {
  const auto [train, test] = train_test(generate_templates(cfg.data), cfg.train_fraction);
  const EmbeddingMatrix w = train_tpe(train, cfg.train).w;

  ClusterReproReport report;
  for (PoolMode mode : {PoolMode::Average, PoolMode::Media}) {
    const Dataset pooled_train = pool_dataset(train, mode);
    const Dataset pooled_test = pool_dataset(test, mode);
    report.test_subjects = pooled_test.num_subjects();
    report.test_templates = pooled_test.size();
    for (const char* kind : {"raw", "tpe"}) {
      const bool projected = std::string_view(kind) == "tpe";
      const RowMatrixXd train_feats = projected ? project_rows(w, pooled_train.features()) : pooled_train.features();
      const RowMatrixXd test_feats = projected ? project_rows(w, pooled_test.features()) : pooled_test.features();

      ClusterReproRow row;
      row.features = kind;
      row.pooling = mode;
      row.cutoff = learn_cutoff(train_feats, pooled_train.subject_labels(), cfg.grid);
      const Dendrogram tree = build_dendrogram(test_feats);
      const ClusterAssignment assignment = cut(tree, row.cutoff);
      row.test = pairwise_metrics(assignment, pooled_test.subject_labels());
      row.clusters = assignment.num_clusters;
      row.pruned_clusters = prune(assignment, cfg.min_size).pruned_count;
      row.pr = pr_curve(tree, pooled_test.subject_labels(), cfg.grid);
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

} // namespace tpe
