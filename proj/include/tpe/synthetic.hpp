#pragma once

#include "tpe/dataset.hpp"

#include <cstdint>

namespace tpe {

/// Seeded stand-in for a deep feature extractor.
///
/// Each subject gets a mean drawn uniformly on the unit sphere. Record r of a
/// subject belongs to media `r % media_per_subject` and is
///
///     normalize(mean + within_class_noise * g + media_offset * h_media)
///
/// where g is a fresh standard Gaussian vector per record and h_media a
/// standard Gaussian vector shared by every record of the same media.
///
/// Optional structure, both off by default: with `identity_rank` > 0 the
/// subject means lie on the unit sphere of a random identity subspace of that
/// rank, and with `nuisance_rank` > 0 every record additionally receives
/// `nuisance_noise * U z`, U an orthonormal basis of a random subspace
/// orthogonal to the identity subspace and shared by all subjects.
struct SynthConfig {
  std::size_t num_subjects = 50;
  std::size_t records_per_subject = 20;
  Index dim = 64;
  double within_class_noise = 0.3;
  std::size_t media_per_subject = 1;
  double media_offset = 0.0;
  std::uint64_t seed = 7;
  std::size_t identity_rank = 0;
  std::size_t nuisance_rank = 0;
  double nuisance_noise = 0.0;

  void validate() const;
};

Dataset generate_synthetic(const SynthConfig& cfg);

/// Template-structured variant: every subject owns `templates_per_subject`
/// templates, each with its own media. The first media of a template holds
/// `dominant_frames` items (a video) and the remaining media hold
/// `other_frames` items each (stills), so the items are unevenly spread
/// across media. Nuisance variation, when enabled, is drawn once per media
/// (pose or lighting shared by the frames of one capture) and added to the
/// media offset.
struct TemplateSynthConfig {
  std::size_t num_subjects = 40;
  std::size_t templates_per_subject = 10;
  std::size_t media_per_template = 4;
  std::size_t dominant_frames = 8;
  std::size_t other_frames = 1;
  Index dim = 64;
  double within_class_noise = 0.15;
  double media_offset = 0.3;
  std::uint64_t seed = 7;
  std::size_t identity_rank = 0;
  std::size_t nuisance_rank = 0;
  double nuisance_noise = 0.0;

  void validate() const;
};

/// Records carry template ids `<subject>_t<k>` and media ids `<template>_m<j>`.
Dataset generate_templates(const TemplateSynthConfig& cfg);

} // namespace tpe
