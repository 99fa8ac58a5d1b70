#pragma once

#include "tpe/dataset.hpp"
#include "tpe/types.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace tpe {

/// Linear projection W (n x N) from raw features into the embedding space.
using EmbeddingMatrix = MatrixXd;

/// Record indices into a Dataset. Anchor and positive share a subject; the
/// negative does not.
struct Triplet {
  std::size_t anchor = 0;
  std::size_t positive = 0;
  std::size_t negative = 0;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

/// Throws InvalidArgument unless the triplet satisfies the labeling invariants.
void check_triplet(const Dataset& ds, const Triplet& t);

namespace detail {

template <class DW, class DV>
void check_dims(const Eigen::MatrixBase<DW>& w, const Eigen::MatrixBase<DV>& v) {
  if (w.cols() != v.rows() || v.cols() != 1)
    throw DimensionError("matrix has " + std::to_string(w.cols()) + " columns but vector has dimension " +
                         std::to_string(v.rows()));
}

} // namespace detail

/// W v, no re-normalization.
template <class DW, class DV>
Vector<typename DW::Scalar> project(const Eigen::MatrixBase<DW>& w, const Eigen::MatrixBase<DV>& v) {
  detail::check_dims(w, v);
  return w * v;
}

/// S_W(a, b) = (W a)^T (W b).
template <class DW, class DA, class DB>
typename DW::Scalar similarity(const Eigen::MatrixBase<DW>& w, const Eigen::MatrixBase<DA>& a,
                               const Eigen::MatrixBase<DB>& b) {
  detail::check_dims(w, a);
  detail::check_dims(w, b);
  return (w * a).dot(w * b);
}

/// Logistic function evaluated without overflow on either tail.
template <class Scalar>
Scalar sigmoid(Scalar x) {
  if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-x));
  const Scalar e = std::exp(x);
  return e / (Scalar(1) + e);
}

/// log(1 + e^x) without overflow.
template <class Scalar>
Scalar softplus(Scalar x) {
  if (x > Scalar(0)) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

/// e^{s_pos} / (e^{s_pos} + e^{s_neg}) = sigmoid(s_pos - s_neg), kept strictly
/// inside (0, 1) when the tails round to 0 or 1.
template <class Scalar>
Scalar probability_from_scores(Scalar s_pos, Scalar s_neg) {
  const Scalar p = sigmoid(s_pos - s_neg);
  constexpr Scalar lo = std::numeric_limits<Scalar>::denorm_min();
  const Scalar hi = Scalar(1) - std::numeric_limits<Scalar>::epsilon() / Scalar(2);
  return p < lo ? lo : (p > hi ? hi : p);
}

/// Probability that the anchor is more similar to the positive than to the negative.
template <class DW, class DI, class DJ, class DK>
typename DW::Scalar triplet_probability(const Eigen::MatrixBase<DW>& w, const Eigen::MatrixBase<DI>& vi,
                                        const Eigen::MatrixBase<DJ>& vj, const Eigen::MatrixBase<DK>& vk) {
  detail::check_dims(w, vi);
  detail::check_dims(w, vj);
  detail::check_dims(w, vk);
  const auto a = (w * vi).eval();
  return probability_from_scores(a.dot(w * vj), a.dot(w * vk));
}

/// -log p for one triplet, evaluated as softplus(S_ik - S_ij).
template <class DW, class DI, class DJ, class DK>
typename DW::Scalar triplet_nll(const Eigen::MatrixBase<DW>& w, const Eigen::MatrixBase<DI>& vi,
                                const Eigen::MatrixBase<DJ>& vj, const Eigen::MatrixBase<DK>& vk) {
  detail::check_dims(w, vi);
  detail::check_dims(w, vj);
  detail::check_dims(w, vk);
  const auto a = (w * vi).eval();
  return softplus(a.dot(w * vk) - a.dot(w * vj));
}

/// Gradient of -log p with respect to W:
///
///     G = -(1 - p) W (v_i (v_j - v_k)^T + (v_j - v_k) v_i^T)
///
/// The descent step is W - eta * G.
template <class DW, class DI, class DJ, class DK>
Matrix<typename DW::Scalar> tpe_gradient(const Eigen::MatrixBase<DW>& w, const Eigen::MatrixBase<DI>& vi,
                                         const Eigen::MatrixBase<DJ>& vj, const Eigen::MatrixBase<DK>& vk) {
  using Scalar = typename DW::Scalar;
  detail::check_dims(w, vi);
  detail::check_dims(w, vj);
  detail::check_dims(w, vk);
  const Vector<Scalar> delta = vj - vk;
  const Vector<Scalar> wi = w * vi;
  const Vector<Scalar> wd = w * delta;
  // 1 - p = sigmoid(S_ik - S_ij), accurate even when p rounds to 1.
  const Scalar miss = sigmoid(wi.dot(w * vk) - wi.dot(w * vj));
  return -miss * (wi * delta.transpose() + wd * vi.transpose());
}

/// d_W(a, b) = (a - b)^T W^T W (a - b).
template <class DW, class DA, class DB>
typename DW::Scalar embedded_sq_distance(const Eigen::MatrixBase<DW>& w, const Eigen::MatrixBase<DA>& a,
                                         const Eigen::MatrixBase<DB>& b) {
  detail::check_dims(w, a);
  detail::check_dims(w, b);
  return (w * (a - b)).squaredNorm();
}

/// Hinge loss max(0, alpha + d_W(v_i, v_j) - d_W(v_i, v_k)).
template <class DW, class DI, class DJ, class DK>
typename DW::Scalar tde_loss(const Eigen::MatrixBase<DW>& w, const Eigen::MatrixBase<DI>& vi,
                             const Eigen::MatrixBase<DJ>& vj, const Eigen::MatrixBase<DK>& vk,
                             typename DW::Scalar alpha) {
  using Scalar = typename DW::Scalar;
  const Scalar slack = alpha + embedded_sq_distance(w, vi, vj) - embedded_sq_distance(w, vi, vk);
  return slack > Scalar(0) ? slack : Scalar(0);
}

/// Subgradient of tde_loss; zero when the hinge is inactive or exactly at the kink.
template <class DW, class DI, class DJ, class DK>
Matrix<typename DW::Scalar> tde_gradient(const Eigen::MatrixBase<DW>& w, const Eigen::MatrixBase<DI>& vi,
                                         const Eigen::MatrixBase<DJ>& vj, const Eigen::MatrixBase<DK>& vk,
                                         typename DW::Scalar alpha) {
  using Scalar = typename DW::Scalar;
  detail::check_dims(w, vi);
  detail::check_dims(w, vj);
  detail::check_dims(w, vk);
  const Vector<Scalar> pos = vi - vj;
  const Vector<Scalar> neg = vi - vk;
  const Vector<Scalar> wp = w * pos;
  const Vector<Scalar> wn = w * neg;
  if (!(alpha + wp.squaredNorm() - wn.squaredNorm() > Scalar(0)))
    return Matrix<Scalar>::Zero(w.rows(), w.cols());
  return Scalar(2) * (wp * pos.transpose() - wn * neg.transpose());
}

// Dataset-indexed conveniences.

double triplet_probability(const EmbeddingMatrix& w, const Triplet& t, const Dataset& ds);
MatrixXd tpe_gradient(const EmbeddingMatrix& w, const Triplet& t, const Dataset& ds);
double tde_loss(const EmbeddingMatrix& w, const Triplet& t, double alpha, const Dataset& ds);
MatrixXd tde_gradient(const EmbeddingMatrix& w, const Triplet& t, double alpha, const Dataset& ds);

/// Sum (not mean) of -log p over the triplets. Throws InvalidArgument when empty.
double nll_loss(const EmbeddingMatrix& w, const std::vector<Triplet>& triplets, const Dataset& ds);

/// Projects every row of a feature table: returns features * W^T.
RowMatrixXd project_rows(const EmbeddingMatrix& w, const RowMatrixXd& features);
/// Dataset with every feature replaced by W v, labels unchanged.
Dataset project_dataset(const EmbeddingMatrix& w, const Dataset& ds);

/// Top-n principal directions of the mean-centered rows, one per row of the
/// result, in descending eigenvalue order. Each row's largest-magnitude entry
/// is positive. Throws DegenerateDataError if n exceeds the covariance rank.
EmbeddingMatrix pca_init(const RowMatrixXd& features, Index n);
EmbeddingMatrix pca_init(const Dataset& ds, Index n);

enum class Method { TPE, TDE };

std::string_view to_string(Method m) noexcept;
Method parse_method(std::string_view s);

struct TrainConfig {
  Index target_dim = 128;
  double learning_rate = 0.01;
  std::size_t iterations = 20000;
  std::size_t negative_pool = 2000;
  std::uint64_t seed = 7;
  Method method = Method::TPE;
  /// Hinge margin, TDE only.
  double margin = 0.2;
  /// Step decay: learning_rate * lr_decay^(iter / decay_every). Disabled when decay_every == 0.
  double lr_decay = 1.0;
  std::size_t decay_every = 0;
  /// Triplets averaged per update.
  std::size_t batch_size = 1;
  /// Emit a log row every `log_every` iterations (and on the last one).
  std::size_t log_every = 100;

  void validate(Index input_dim) const;
};

/// Online triplet sampling with hard negative mining.
///
/// The anchor is uniform over records whose subject has at least two records
/// and the positive is uniform over the other records of that subject. The
/// negative pool holds `pool_size` draws (with replacement) from records of
/// other subjects; the returned negative is the pool member with the least
/// triplet probability (TPE) or the largest distance violation (TDE), ties
/// going to the lowest record index.
class TripletSampler {
public:
  explicit TripletSampler(const Dataset& ds);

  Triplet sample(const EmbeddingMatrix& w, std::size_t pool_size, std::mt19937_64& rng,
                 Method method = Method::TPE) const;

private:
  std::size_t draw_negative(int subject, std::mt19937_64& rng) const;

  const Dataset* ds_;
  std::vector<std::size_t> anchors_;
};

Triplet sample_triplet(const Dataset& ds, const EmbeddingMatrix& w, std::size_t pool_size, std::mt19937_64& rng,
                       Method method = Method::TPE);

struct TrainLogEntry {
  std::size_t iter = 0;
  /// Triplet probability of the triplet sampled at `iter`, before the update.
  double p = 0.0;
  /// Mean per-triplet loss since the previous log row.
  double loss = 0.0;
};

struct TrainResult {
  EmbeddingMatrix w;
  std::vector<TrainLogEntry> log;
};

/// SGD from the PCA initialization, one sampled triplet (or batch) per step.
/// Throws DivergenceError if W becomes non-finite.
TrainResult train_tpe(const Dataset& ds, TrainConfig cfg);
TrainResult train_tde(const Dataset& ds, TrainConfig cfg);
/// Dispatches on cfg.method.
TrainResult train(const Dataset& ds, const TrainConfig& cfg);

/// `iter,p,loss` CSV.
std::string format_train_log(const std::vector<TrainLogEntry>& log);

} // namespace tpe
