#include "tpe/synthetic.hpp"

#include <Eigen/QR>

#include <cmath>
#include <cstdio>
#include <random>
#include <string>

namespace tpe {

namespace {

std::string tag(char prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%03zu", prefix, i);
  return buf;
}

VectorXd gaussian(Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd v(dim);
  for (Index d = 0; d < dim; ++d) v[d] = normal(rng);
  return v;
}

VectorXd sphere_point(Index dim, std::mt19937_64& rng) {
  while (true) {
    VectorXd v = gaussian(dim, rng);
    if (v.norm() > 1e-12) return v.normalized();
  }
}

/// Identity and nuisance subspaces drawn from one random rotation.
struct Subspaces {
  MatrixXd identity; // dim x identity_rank, empty for the full space
  MatrixXd nuisance; // dim x nuisance_rank

  Subspaces(Index dim, std::size_t identity_rank, std::size_t nuisance_rank, std::mt19937_64& rng) {
    if (identity_rank == 0 && nuisance_rank == 0) return;
    MatrixXd g(dim, dim);
    for (Index c = 0; c < dim; ++c) g.col(c) = gaussian(dim, rng);
    const MatrixXd q = Eigen::HouseholderQR<MatrixXd>(g).householderQ();
    const auto ir = static_cast<Index>(identity_rank);
    identity = q.leftCols(ir);
    nuisance = q.middleCols(ir, static_cast<Index>(nuisance_rank));
  }

  VectorXd mean(Index dim, std::mt19937_64& rng) const {
    if (identity.cols() == 0) return sphere_point(dim, rng);
    return identity * sphere_point(identity.cols(), rng);
  }

  void add_nuisance(VectorXd& v, double scale, std::mt19937_64& rng) const {
    if (nuisance.cols() == 0 || scale == 0.0) return;
    v += scale * (nuisance * gaussian(nuisance.cols(), rng));
  }
};

void check_structure(Index dim, std::size_t identity_rank, std::size_t nuisance_rank, double nuisance_noise) {
  if (static_cast<Index>(identity_rank + nuisance_rank) > dim)
    throw InvalidArgument("identity_rank + nuisance_rank must not exceed dim");
  if (identity_rank == 1) throw InvalidArgument("identity_rank must be 0 (full space) or >= 2");
  if (!(nuisance_noise >= 0.0) || !std::isfinite(nuisance_noise))
    throw InvalidArgument("nuisance_noise must be a finite non-negative number");
}

void check_noise(double sigma, const char* what) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidArgument(std::string(what) + " must be a finite non-negative number");
}

} // namespace

void SynthConfig::validate() const {
  if (num_subjects < 1 || records_per_subject < 1 || media_per_subject < 1 || dim < 1)
    throw InvalidArgument("synthetic counts and dimension must be >= 1");
  check_noise(within_class_noise, "within_class_noise");
  check_noise(media_offset, "media_offset");
  check_structure(dim, identity_rank, nuisance_rank, nuisance_noise);
}

Dataset generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  const Subspaces space(cfg.dim, cfg.identity_rank, cfg.nuisance_rank, rng);
  std::vector<FeatureRecord> records;
  records.reserve(cfg.num_subjects * cfg.records_per_subject);
  for (std::size_t s = 0; s < cfg.num_subjects; ++s) {
    const VectorXd mean = space.mean(cfg.dim, rng);
    std::vector<VectorXd> offsets;
    for (std::size_t m = 0; m < cfg.media_per_subject; ++m) offsets.push_back(cfg.media_offset * gaussian(cfg.dim, rng));
    const std::string subject = tag('s', s);
    for (std::size_t r = 0; r < cfg.records_per_subject; ++r) {
      const std::size_t m = r % cfg.media_per_subject;
      VectorXd v = mean + offsets[m];
      if (cfg.within_class_noise > 0.0) v += cfg.within_class_noise * gaussian(cfg.dim, rng);
      space.add_nuisance(v, cfg.nuisance_noise, rng);
      records.push_back({subject + "_" + tag('r', r), subject, subject + "_" + tag('m', m), std::nullopt, std::nullopt,
                         normalize(v)});
    }
  }
  return Dataset(std::move(records));
}

void TemplateSynthConfig::validate() const {
  if (num_subjects < 1 || templates_per_subject < 1 || media_per_template < 1 || dominant_frames < 1 || dim < 1)
    throw InvalidArgument("template synthetic counts and dimension must be >= 1");
  if (media_per_template > 1 && other_frames < 1) throw InvalidArgument("other_frames must be >= 1");
  check_noise(within_class_noise, "within_class_noise");
  check_noise(media_offset, "media_offset");
  check_structure(dim, identity_rank, nuisance_rank, nuisance_noise);
}

Dataset generate_templates(const TemplateSynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  const Subspaces space(cfg.dim, cfg.identity_rank, cfg.nuisance_rank, rng);
  std::vector<FeatureRecord> records;
  for (std::size_t s = 0; s < cfg.num_subjects; ++s) {
    const VectorXd mean = space.mean(cfg.dim, rng);
    const std::string subject = tag('s', s);
    for (std::size_t t = 0; t < cfg.templates_per_subject; ++t) {
      const std::string tmpl = subject + "_" + tag('t', t);
      for (std::size_t m = 0; m < cfg.media_per_template; ++m) {
        const std::string media = tmpl + "_" + tag('m', m);
        VectorXd offset = cfg.media_offset * gaussian(cfg.dim, rng);
        space.add_nuisance(offset, cfg.nuisance_noise, rng);
        const std::size_t frames = m == 0 ? cfg.dominant_frames : cfg.other_frames;
        for (std::size_t f = 0; f < frames; ++f) {
          VectorXd v = mean + offset;
          if (cfg.within_class_noise > 0.0) v += cfg.within_class_noise * gaussian(cfg.dim, rng);
          records.push_back({media + "_" + tag('f', f), subject, media, tmpl, std::nullopt, normalize(v)});
        }
      }
    }
  }
  return Dataset(std::move(records));
}

} // namespace tpe
