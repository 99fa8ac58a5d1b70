#include "tpe/embedding.hpp"
#include "tpe/io.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <sstream>

namespace tpe {

void check_triplet(const Dataset& ds, const Triplet& t) {
  const std::size_t n = ds.size();
  if (t.anchor >= n || t.positive >= n || t.negative >= n) throw InvalidArgument("triplet index out of range");
  if (t.anchor == t.positive) throw InvalidArgument("anchor and positive must differ");
  if (ds.subject_label(t.anchor) != ds.subject_label(t.positive))
    throw InvalidArgument("anchor and positive must share a subject");
  if (ds.subject_label(t.anchor) == ds.subject_label(t.negative))
    throw InvalidArgument("negative must belong to another subject");
}

double triplet_probability(const EmbeddingMatrix& w, const Triplet& t, const Dataset& ds) {
  check_triplet(ds, t);
  return triplet_probability(w, ds.feature(t.anchor), ds.feature(t.positive), ds.feature(t.negative));
}

MatrixXd tpe_gradient(const EmbeddingMatrix& w, const Triplet& t, const Dataset& ds) {
  check_triplet(ds, t);
  return tpe_gradient(w, ds.feature(t.anchor), ds.feature(t.positive), ds.feature(t.negative));
}

double tde_loss(const EmbeddingMatrix& w, const Triplet& t, double alpha, const Dataset& ds) {
  check_triplet(ds, t);
  return tde_loss(w, ds.feature(t.anchor), ds.feature(t.positive), ds.feature(t.negative), alpha);
}

MatrixXd tde_gradient(const EmbeddingMatrix& w, const Triplet& t, double alpha, const Dataset& ds) {
  check_triplet(ds, t);
  return tde_gradient(w, ds.feature(t.anchor), ds.feature(t.positive), ds.feature(t.negative), alpha);
}

double nll_loss(const EmbeddingMatrix& w, const std::vector<Triplet>& triplets, const Dataset& ds) {
  if (triplets.empty()) throw InvalidArgument("nll_loss needs at least one triplet");
  double total = 0.0;
  for (const auto& t : triplets) {
    check_triplet(ds, t);
    total += triplet_nll(w, ds.feature(t.anchor), ds.feature(t.positive), ds.feature(t.negative));
  }
  return total;
}

RowMatrixXd project_rows(const EmbeddingMatrix& w, const RowMatrixXd& features) {
  if (w.cols() != features.cols())
    throw DimensionError("matrix has " + std::to_string(w.cols()) + " columns but features have dimension " +
                         std::to_string(features.cols()));
  return features * w.transpose();
}

Dataset project_dataset(const EmbeddingMatrix& w, const Dataset& ds) {
  return Dataset(ds.metas(), project_rows(w, ds.features()));
}

EmbeddingMatrix pca_init(const RowMatrixXd& features, Index n) {
  const Index dim = features.cols();
  if (n < 1 || n > dim)
    throw InvalidArgument("target dimension " + std::to_string(n) + " must lie in [1, " + std::to_string(dim) + "]");
  if (features.rows() < 2) throw DegenerateDataError("PCA needs at least two records");

  const Eigen::RowVectorXd mean_row = features.colwise().mean();
  const MatrixXd centered = features.rowwise() - mean_row;
  const MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(features.rows() - 1);

  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw DegenerateDataError("covariance eigendecomposition failed");
  const VectorXd& values = eig.eigenvalues(); // ascending
  const double top = values[dim - 1];
  const double tol = std::max(top, 0.0) * 1e-10;
  if (!(top > 0.0) || !(values[dim - n] > tol))
    throw DegenerateDataError("target dimension " + std::to_string(n) + " exceeds the rank of the data covariance");

  EmbeddingMatrix w(n, dim);
  for (Index r = 0; r < n; ++r) {
    VectorXd v = eig.eigenvectors().col(dim - 1 - r);
    Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0) v = -v;
    w.row(r) = v.transpose();
  }
  return w;
}

EmbeddingMatrix pca_init(const Dataset& ds, Index n) { return pca_init(ds.features(), n); }

std::string_view to_string(Method m) noexcept { return m == Method::TPE ? "tpe" : "tde"; }

Method parse_method(std::string_view s) {
  if (s == "tpe") return Method::TPE;
  if (s == "tde") return Method::TDE;
  throw InvalidArgument("unknown method '" + std::string(s) + "' (expected tpe or tde)");
}

void TrainConfig::validate(Index input_dim) const {
  if (target_dim < 1 || target_dim > input_dim)
    throw InvalidArgument("target_dim must lie in [1, " + std::to_string(input_dim) + "]");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw InvalidArgument("learning_rate must be positive");
  if (negative_pool < 1) throw InvalidArgument("negative_pool must be >= 1");
  if (!(margin >= 0.0) || !std::isfinite(margin)) throw InvalidArgument("margin must be non-negative");
  if (!(lr_decay > 0.0) || !std::isfinite(lr_decay)) throw InvalidArgument("lr_decay must be positive");
  if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
}

TripletSampler::TripletSampler(const Dataset& ds) : ds_(&ds) {
  if (ds.num_subjects() < 2) throw InsufficientDataError("triplet sampling needs at least two subjects");
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (ds.subject_members(ds.subject_label(i)).size() >= 2) anchors_.push_back(i);
  if (anchors_.empty()) throw InsufficientDataError("no subject has two or more records");
}

std::size_t TripletSampler::draw_negative(int subject, std::mt19937_64& rng) const {
  const auto& own = ds_->subject_members(subject);
  std::uniform_int_distribution<std::size_t> pick(0, ds_->size() - own.size() - 1);
  // Map the k-th non-member onto its record index; `own` is ascending.
  std::size_t k = pick(rng);
  for (std::size_t m : own) {
    if (m <= k)
      ++k;
    else
      break;
  }
  return k;
}

Triplet TripletSampler::sample(const EmbeddingMatrix& w, std::size_t pool_size, std::mt19937_64& rng,
                               Method method) const {
  if (pool_size < 1) throw InvalidArgument("negative pool size must be >= 1");
  if (w.cols() != ds_->dim()) throw DimensionError("embedding input dimension does not match the dataset");
  const auto& feats = ds_->features();

  Triplet t;
  t.anchor = anchors_[std::uniform_int_distribution<std::size_t>(0, anchors_.size() - 1)(rng)];
  const int subject = ds_->subject_label(t.anchor);
  const auto& own = ds_->subject_members(subject);
  const auto anchor_pos = static_cast<std::size_t>(std::lower_bound(own.begin(), own.end(), t.anchor) - own.begin());
  std::size_t pos = std::uniform_int_distribution<std::size_t>(0, own.size() - 2)(rng);
  if (pos >= anchor_pos) ++pos;
  t.positive = own[pos];

  std::vector<std::size_t> pool(pool_size);
  for (auto& k : pool) k = draw_negative(subject, rng);

  const VectorXd wi = w * feats.row(static_cast<Index>(t.anchor)).transpose();
  auto pick_hardest = [&pool](auto&& key) {
    std::size_t best = pool.front();
    double best_key = key(best);
    for (std::size_t k : pool) {
      const double s = key(k);
      if (s > best_key || (s == best_key && k < best)) {
        best = k;
        best_key = s;
      }
    }
    return best;
  };
  if (method == Method::TPE) {
    // p is decreasing in S_ik, so the least likely triplet has the largest S_ik.
    // Ranking on S_ik keeps candidates distinct even where p saturates.
    const VectorXd u = w.transpose() * wi;
    t.negative = pick_hardest([&](std::size_t k) { return u.dot(feats.row(static_cast<Index>(k)).transpose()); });
  } else if (pool_size * 2 >= ds_->size()) {
    // Violation is decreasing in d_W(v_i, v_k); project all records once when
    // the pool is comparable in size to the dataset.
    const RowMatrixXd projected = feats * w.transpose();
    t.negative = pick_hardest([&](std::size_t k) {
      return -(projected.row(static_cast<Index>(k)) - wi.transpose()).squaredNorm();
    });
  } else {
    t.negative = pick_hardest([&](std::size_t k) {
      return -(wi - w * feats.row(static_cast<Index>(k)).transpose()).squaredNorm();
    });
  }
  return t;
}

Triplet sample_triplet(const Dataset& ds, const EmbeddingMatrix& w, std::size_t pool_size, std::mt19937_64& rng,
                       Method method) {
  return TripletSampler(ds).sample(w, pool_size, rng, method);
}

namespace {

TrainResult run_sgd(const Dataset& ds, const TrainConfig& cfg) {
  cfg.validate(ds.dim());
  TripletSampler sampler(ds);
  TrainResult result{pca_init(ds, cfg.target_dim), {}};
  EmbeddingMatrix& w = result.w;
  std::mt19937_64 rng(cfg.seed);
  const auto& feats = ds.features();

  MatrixXd grad(w.rows(), w.cols());
  double loss_acc = 0.0;
  std::size_t loss_count = 0;
  double rate = cfg.learning_rate;
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    if (cfg.decay_every > 0 && it > 0 && it % cfg.decay_every == 0) rate *= cfg.lr_decay;
    grad.setZero();
    double first_p = 0.0;
    for (std::size_t b = 0; b < cfg.batch_size; ++b) {
      const Triplet t = sampler.sample(w, cfg.negative_pool, rng, cfg.method);
      const auto vi = feats.row(static_cast<Index>(t.anchor)).transpose();
      const auto vj = feats.row(static_cast<Index>(t.positive)).transpose();
      const auto vk = feats.row(static_cast<Index>(t.negative)).transpose();
      if (b == 0) first_p = triplet_probability(w, vi, vj, vk);
      if (cfg.method == Method::TPE) {
        grad += tpe_gradient(w, vi, vj, vk);
        loss_acc += triplet_nll(w, vi, vj, vk);
      } else {
        grad += tde_gradient(w, vi, vj, vk, cfg.margin);
        loss_acc += tde_loss(w, vi, vj, vk, cfg.margin);
      }
      ++loss_count;
    }
    if (cfg.batch_size > 1) grad /= static_cast<double>(cfg.batch_size);
    w.noalias() -= rate * grad;
    if (!w.allFinite()) throw DivergenceError(it);

    if ((cfg.log_every > 0 && (it + 1) % cfg.log_every == 0) || it + 1 == cfg.iterations) {
      result.log.push_back({it, first_p, loss_acc / static_cast<double>(loss_count)});
      loss_acc = 0.0;
      loss_count = 0;
    }
  }
  return result;
}

} // namespace

TrainResult train_tpe(const Dataset& ds, TrainConfig cfg) {
  cfg.method = Method::TPE;
  return run_sgd(ds, cfg);
}

TrainResult train_tde(const Dataset& ds, TrainConfig cfg) {
  cfg.method = Method::TDE;
  return run_sgd(ds, cfg);
}

TrainResult train(const Dataset& ds, const TrainConfig& cfg) { return run_sgd(ds, cfg); }

std::string format_train_log(const std::vector<TrainLogEntry>& log) {
  std::ostringstream os;
  os << "iter,p,loss\n";
  for (const auto& e : log) os << e.iter << ',' << format_double(e.p) << ',' << format_double(e.loss) << '\n';
  return os.str();
}

} // namespace tpe
