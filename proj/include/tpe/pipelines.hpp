#pragma once

#include "tpe/clustering.hpp"
#include "tpe/embedding.hpp"
#include "tpe/pooling.hpp"
#include "tpe/synthetic.hpp"
#include "tpe/verify.hpp"

#include <string>
#include <vector>

namespace tpe {

/// Tags the first floor(fraction * subjects) subjects (in label order) as
/// train and the rest as test.
Dataset split_by_subject(const Dataset& ds, double train_fraction);

// Raw vs TDE vs TPE verification on held-out subjects.

struct VerifyReproConfig {
  SynthConfig data;
  TrainConfig train;
  double train_fraction = 0.5;
  std::vector<double> fmr_targets{0.001, 0.01, 0.1};
};

/// 50 subjects x 20 records in 64 dimensions with a rank-16 identity subspace
/// and rank-16 nuisance variation; n = 16, 20k SGD steps at rate 0.1.
VerifyReproConfig default_verify_repro(std::uint64_t seed = 7);

struct VerifyReproRow {
  std::string method; ///< raw, tde or tpe
  double eer = 0.0;
  double auc = 0.0;
  std::vector<RateAt> fnmr_at;
  RocCurve curve;
};

struct VerifyReproReport {
  std::vector<VerifyReproRow> rows;
  std::size_t genuine_pairs = 0;
  std::size_t impostor_pairs = 0;
  const VerifyReproRow& row(std::string_view method) const;
};

VerifyReproReport repro_verify(const VerifyReproConfig& cfg);

// Raw vs TPE clustering of pooled templates.

struct ClusterReproConfig {
  TemplateSynthConfig data;
  TrainConfig train;
  double train_fraction = 0.5;
  std::vector<double> grid = default_cutoff_grid();
  std::size_t min_size = 3;
};

/// 80 subjects x 10 templates of 4 media (one 8-frame video, three stills).
ClusterReproConfig default_cluster_repro(std::uint64_t seed = 7);

struct ClusterReproRow {
  std::string features; ///< raw or tpe
  PoolMode pooling = PoolMode::Media;
  double cutoff = 0.0;  ///< learned on the training templates
  PairwiseScores test;
  std::size_t clusters = 0;
  std::size_t pruned_clusters = 0;
  std::vector<PrPoint> pr; ///< test-set sweep over the grid
};

struct ClusterReproReport {
  std::vector<ClusterReproRow> rows;
  std::size_t test_subjects = 0;
  std::size_t test_templates = 0;
  const ClusterReproRow& row(std::string_view features, PoolMode pooling) const;
};

ClusterReproReport repro_cluster(const ClusterReproConfig& cfg);

} // namespace tpe
