// Seeded document-class alignment: PCA followed by centroid-initialized
// clustering (mini-batch k-means, Lloyd k-means or a diagonal GMM).
//
// Data matrices hold one point per row. Centroid rows follow class order and
// every argmin/argmax resolves ties to the lowest class index.

#ifndef AXABSA_NUMERICS_HPP_
#define AXABSA_NUMERICS_HPP_

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <tuple>
#include <string>
#include <string_view>
#include <vector>

#include "axabsa/common.hpp"
#include "axabsa/parallel.hpp"
#include "axabsa/rng.hpp"

namespace axabsa {

inline constexpr Index kDefaultPcaDim = 64;
inline constexpr std::size_t kDefaultBatchSize = 400;
inline constexpr double kCovarianceFloor = 1e-6;

// ---------------------------------------------------------------------------
// PCA

struct PcaModel {
  Vector mean;
  Matrix components;  // rows are orthonormal principal directions
  Vector explained_variance;
  Index requested_dim = 0;

  // True when fewer components than requested were kept because the data
  // has lower rank (or fewer rows) than the requested dimension.
  bool truncated() const { return components.rows() < requested_dim; }

  Matrix transform(const Matrix& x) const {
    return (x.rowwise() - mean.transpose()) * components.transpose();
  }

  Matrix inverse_transform(const Matrix& y) const {
    return (y * components).rowwise() + mean.transpose();
  }
};

struct PcaResult {
  PcaModel model;
  Matrix data;
  Matrix class_vectors;
};

// Fits on `data` only; `class_vectors` are projected with the fitted model.
// Components whose variance is numerically zero are dropped, so fewer than
// `target_dim` may be returned (see PcaModel::truncated).
inline PcaResult pca_fit_transform(const Matrix& data, const Matrix& class_vectors,
                                   Index target_dim) {
  if (data.rows() == 0) throw ValidationError("pca: empty data");
  if (target_dim < 1) throw std::invalid_argument("pca: target_dim must be >= 1");
  if (class_vectors.size() > 0 && class_vectors.cols() != data.cols())
    throw std::invalid_argument("pca: class vectors have wrong dimension");

  PcaModel model;
  model.requested_dim = target_dim;
  model.mean = data.colwise().mean().transpose();
  const Matrix centered = data.rowwise() - model.mean.transpose();
  const double denom = static_cast<double>(std::max<Index>(data.rows() - 1, 1));
  const Matrix cov = (centered.transpose() * centered) / denom;

  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
  if (solver.info() != Eigen::Success) throw std::runtime_error("pca: eigensolver failed");
  const Vector& evals = solver.eigenvalues();  // ascending
  const Matrix& evecs = solver.eigenvectors();

  const Index d = data.cols();
  const double top = std::max(evals(d - 1), 0.0);
  const double cutoff = top * 1e-12 * static_cast<double>(d);
  Index keep = 0;
  while (keep < std::min(target_dim, d) && evals(d - 1 - keep) > cutoff && top > 0.0) ++keep;

  model.components.resize(keep, d);
  model.explained_variance.resize(keep);
  for (Index k = 0; k < keep; ++k) {
    Vector dir = evecs.col(d - 1 - k);
    Index arg;
    dir.cwiseAbs().maxCoeff(&arg);
    if (dir(arg) < 0) dir = -dir;  // sign convention: largest-magnitude entry positive
    model.components.row(k) = dir.transpose();
    model.explained_variance(k) = evals(d - 1 - k);
  }

  PcaResult out;
  out.data = centered * model.components.transpose();
  if (class_vectors.size() > 0) out.class_vectors = model.transform(class_vectors);
  out.model = std::move(model);
  return out;
}

// ---------------------------------------------------------------------------
// Clustering

enum class ClusterKind { kMiniBatchKMeans, kKMeans, kGmm };

inline std::string_view to_string(ClusterKind kind) {
  switch (kind) {
    case ClusterKind::kMiniBatchKMeans: return "mkmeans";
    case ClusterKind::kKMeans: return "kmeans";
    case ClusterKind::kGmm: return "gmm";
  }
  return "unknown";
}

inline ClusterKind parse_cluster_kind(std::string_view name) {
  if (name == "mkmeans" || name == "minibatch-kmeans") return ClusterKind::kMiniBatchKMeans;
  if (name == "kmeans") return ClusterKind::kKMeans;
  if (name == "gmm") return ClusterKind::kGmm;
  throw ValidationError("unknown clustering algorithm '" + std::string(name) + "'");
}

struct ClusterModel {
  ClusterKind kind = ClusterKind::kMiniBatchKMeans;
  Matrix centers;      // one row per class
  Matrix variances;    // gmm only: diagonal covariance per class
  Vector weights;      // gmm only: mixing priors
  std::uint64_t rng_seed = kDefaultSeed;
  int iterations = 0;
  std::vector<double> history;  // gmm: log-likelihood; kmeans: objective per step
};

// Per-point class index plus the score vector the index was taken from:
// squared distances (k-means, argmin) or posteriors (gmm, argmax).
struct Assignment {
  std::vector<Index> labels;
  Matrix scores;
};

namespace detail {

inline void check_cluster_inputs(const Matrix& data, const Matrix& init, const char* who) {
  if (data.rows() == 0) throw ValidationError(std::string(who) + ": empty data");
  if (init.rows() == 0) throw ValidationError(std::string(who) + ": no initial centroids");
  if (init.cols() != data.cols())
    throw std::invalid_argument(std::string(who) + ": centroid dimension mismatch");
}

inline Index argmin_row(const Matrix& m, Index row) {
  Index best = 0;
  for (Index j = 1; j < m.cols(); ++j)
    if (m(row, j) < m(row, best)) best = j;
  return best;
}

inline Index argmax_row(const Matrix& m, Index row) {
  Index best = 0;
  for (Index j = 1; j < m.cols(); ++j)
    if (m(row, j) > m(row, best)) best = j;
  return best;
}

inline Index nearest(const Matrix& centers, const Eigen::Ref<const Vector>& x) {
  Index best = 0;
  double best_d = (centers.row(0).transpose() - x).squaredNorm();
  for (Index j = 1; j < centers.rows(); ++j) {
    const double d = (centers.row(j).transpose() - x).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

}  // namespace detail

// Squared distance of every point to every center, and the nearest center.
inline Assignment nearest_centroid(const Matrix& data, const Matrix& centers,
                                   unsigned threads = 1) {
  Assignment a;
  a.scores.resize(data.rows(), centers.rows());
  a.labels.resize(static_cast<std::size_t>(data.rows()));
  parallel_for(static_cast<std::size_t>(data.rows()), threads, [&](std::size_t i) {
    const auto r = static_cast<Index>(i);
    for (Index j = 0; j < centers.rows(); ++j)
      a.scores(r, j) = (data.row(r) - centers.row(j)).squaredNorm();
    a.labels[i] = detail::argmin_row(a.scores, r);
  });
  return a;
}

inline double kmeans_objective(const Matrix& data, const Matrix& centers) {
  double total = 0.0;
  for (Index i = 0; i < data.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < centers.rows(); ++j)
      best = std::min(best, (data.row(i) - centers.row(j)).squaredNorm());
    total += best;
  }
  return total;
}

// Web-scale mini-batch k-means: each step draws a batch (without replacement
// within an epoch), caches nearest centers, then moves each center toward its
// points with per-center learning rate 1 / (points assigned so far).
inline std::pair<ClusterModel, Assignment> minibatch_kmeans(
    const Matrix& data, const Matrix& init_centroids,
    std::size_t batch_size = kDefaultBatchSize, std::uint64_t seed = kDefaultSeed,
    int max_iters = 100, unsigned threads = 1) {
  detail::check_cluster_inputs(data, init_centroids, "minibatch_kmeans");
  const auto n = static_cast<std::size_t>(data.rows());
  batch_size = std::clamp<std::size_t>(batch_size, 1, n);

  ClusterModel model;
  model.kind = ClusterKind::kMiniBatchKMeans;
  model.centers = init_centroids;
  model.rng_seed = seed;

  Rng rng(seed);
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  rng.shuffle(std::span<Index>(order));
  std::size_t cursor = 0;
  std::vector<double> counts(static_cast<std::size_t>(init_centroids.rows()), 0.0);
  std::vector<Index> batch(batch_size);
  std::vector<Index> cached(batch_size);

  for (int it = 0; it < max_iters; ++it) {
    for (std::size_t b = 0; b < batch_size; ++b) {
      if (cursor == n) {
        rng.shuffle(std::span<Index>(order));
        cursor = 0;
      }
      batch[b] = order[cursor++];
    }
    parallel_for(batch_size, threads, [&](std::size_t b) {
      cached[b] = detail::nearest(model.centers, data.row(batch[b]).transpose());
    });
    for (std::size_t b = 0; b < batch_size; ++b) {
      const Index c = cached[b];
      counts[static_cast<std::size_t>(c)] += 1.0;
      const double eta = 1.0 / counts[static_cast<std::size_t>(c)];
      model.centers.row(c) += eta * (data.row(batch[b]) - model.centers.row(c));
    }
    model.history.push_back(kmeans_objective(data, model.centers));
    model.iterations = it + 1;
  }
  Assignment a = nearest_centroid(data, model.centers, threads);
  return {std::move(model), std::move(a)};
}

// Lloyd's full-batch k-means. A center with no points keeps its position.
// history[0] is the objective at the initial centers.
inline std::pair<ClusterModel, Assignment> kmeans(const Matrix& data,
                                                  const Matrix& init_centroids,
                                                  int max_iters = 100, unsigned threads = 1) {
  detail::check_cluster_inputs(data, init_centroids, "kmeans");
  ClusterModel model;
  model.kind = ClusterKind::kKMeans;
  model.centers = init_centroids;
  Assignment a = nearest_centroid(data, model.centers, threads);
  model.history.push_back(kmeans_objective(data, model.centers));
  for (int it = 0; it < max_iters; ++it) {
    Matrix sums = Matrix::Zero(model.centers.rows(), model.centers.cols());
    Vector counts = Vector::Zero(model.centers.rows());
    for (Index i = 0; i < data.rows(); ++i) {
      sums.row(a.labels[static_cast<std::size_t>(i)]) += data.row(i);
      counts(a.labels[static_cast<std::size_t>(i)]) += 1.0;
    }
    for (Index j = 0; j < model.centers.rows(); ++j)
      if (counts(j) > 0) model.centers.row(j) = sums.row(j) / counts(j);
    Assignment next = nearest_centroid(data, model.centers, threads);
    model.history.push_back(kmeans_objective(data, model.centers));
    model.iterations = it + 1;
    const bool stable = next.labels == a.labels;
    a = std::move(next);
    if (stable) break;
  }
  return {std::move(model), std::move(a)};
}

namespace detail {

// Per-point log of (prior * density) for each component.
inline Matrix gmm_log_joint(const Matrix& data, const ClusterModel& m, unsigned threads) {
  constexpr double kLog2Pi = 1.8378770664093453;
  const Index k = m.centers.rows();
  Vector log_norm(k);
  for (Index j = 0; j < k; ++j)
    log_norm(j) = std::log(m.weights(j)) -
                  0.5 * (static_cast<double>(data.cols()) * kLog2Pi +
                         m.variances.row(j).array().log().sum());
  Matrix out(data.rows(), k);
  parallel_for(static_cast<std::size_t>(data.rows()), threads, [&](std::size_t i) {
    const auto r = static_cast<Index>(i);
    for (Index j = 0; j < k; ++j) {
      const double maha =
          ((data.row(r) - m.centers.row(j)).array().square() / m.variances.row(j).array()).sum();
      out(r, j) = log_norm(j) - 0.5 * maha;
    }
  });
  return out;
}

// Turns log-joint rows into posteriors in place; returns the total
// log-likelihood (summed in row order).
inline double normalize_posteriors(Matrix& logp) {
  double total = 0.0;
  for (Index i = 0; i < logp.rows(); ++i) {
    const double mx = logp.row(i).maxCoeff();
    const double lse = mx + std::log((logp.row(i).array() - mx).exp().sum());
    logp.row(i) = (logp.row(i).array() - lse).exp();
    total += lse;
  }
  return total;
}

}  // namespace detail

// Diagonal-covariance Gaussian mixture fitted by EM. Means start at the class
// vectors, variances at the per-dimension data variance, priors uniform.
// Variances are bounded below by kCovarianceFloor, which is the exact
// constrained maximizer of the M-step, so the log-likelihood never decreases.
// Stops when the relative log-likelihood gain drops below `tol`.
inline std::pair<ClusterModel, Assignment> gmm_fit(const Matrix& data, const Matrix& init_means,
                                                   std::uint64_t seed = kDefaultSeed,
                                                   int max_iters = 200, double tol = 1e-8,
                                                   unsigned threads = 1) {
  detail::check_cluster_inputs(data, init_means, "gmm_fit");
  const Index n = data.rows();
  const Index k = init_means.rows();

  ClusterModel model;
  model.kind = ClusterKind::kGmm;
  model.rng_seed = seed;
  model.centers = init_means;
  const Vector mu = data.colwise().mean().transpose();
  const Vector var =
      ((data.rowwise() - mu.transpose()).array().square().colwise().sum() /
       static_cast<double>(n))
          .transpose()
          .cwiseMax(kCovarianceFloor);
  model.variances = var.transpose().replicate(k, 1);
  model.weights = Vector::Constant(k, 1.0 / static_cast<double>(k));

  Matrix post = detail::gmm_log_joint(data, model, threads);
  double ll = detail::normalize_posteriors(post);
  model.history.push_back(ll);

  for (int it = 0; it < max_iters; ++it) {
    const Vector nk = post.colwise().sum().transpose();
    for (Index j = 0; j < k; ++j) {
      // A component with no responsibility keeps its parameters; its prior
      // collapses toward zero.
      if (nk(j) <= std::numeric_limits<double>::min() * 1e6) continue;
      Vector mean = (post.col(j).transpose() * data).transpose() / nk(j);
      Vector v = Vector::Zero(data.cols());
      for (Index i = 0; i < n; ++i)
        v += post(i, j) * (data.row(i).transpose() - mean).array().square().matrix();
      v /= nk(j);
      model.centers.row(j) = mean.transpose();
      model.variances.row(j) = v.cwiseMax(kCovarianceFloor).transpose();
    }
    model.weights = nk / nk.sum();

    post = detail::gmm_log_joint(data, model, threads);
    const double next = detail::normalize_posteriors(post);
    model.history.push_back(next);
    model.iterations = it + 1;
    const double gain = (next - ll) / std::max(std::abs(ll), 1e-300);
    ll = next;
    if (gain < tol) break;
  }

  Assignment a;
  a.scores = std::move(post);
  a.labels.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) a.labels[static_cast<std::size_t>(i)] = detail::argmax_row(a.scores, i);
  return {std::move(model), std::move(a)};
}

// ---------------------------------------------------------------------------
// Alignment

enum class Task { kAcd, kSentiment };

struct AlignConfig {
  ClusterKind algorithm = ClusterKind::kMiniBatchKMeans;
  Index pca_dim = kDefaultPcaDim;
  std::size_t batch_size = kDefaultBatchSize;
  std::uint64_t seed = kDefaultSeed;
  int max_iters = 100;
  double tol = 1e-8;
  unsigned threads = 1;

  // ACD aligns with mini-batch k-means; sentiment with a GMM.
  static AlignConfig defaults_for(Task task) {
    AlignConfig c;
    if (task == Task::kSentiment) {
      c.algorithm = ClusterKind::kGmm;
      c.max_iters = 200;
    }
    return c;
  }
};

struct AlignResult {
  PcaModel pca;
  ClusterModel model;
  Assignment assignment;
};

// Reduces documents (and class vectors with the same projection) to at most
// `pca_dim` dimensions, then clusters with centers seeded by the class vectors.
inline AlignResult align(const Matrix& docs, const Matrix& classes, const AlignConfig& config) {
  if (docs.rows() == 0) throw ValidationError("align: no documents");
  if (classes.rows() == 0) throw ValidationError("align: no classes");
  const Index target = std::max<Index>(1, std::min({config.pca_dim, docs.rows(), docs.cols()}));
  PcaResult reduced = pca_fit_transform(docs, classes, target);

  AlignResult out;
  if (reduced.model.components.rows() == 0) {
    // All documents identical: nothing to separate, every point goes to the
    // class whose vector is nearest the common point.
    const Vector center = reduced.model.mean;
    Index best = detail::nearest(classes, center);
    out.assignment.labels.assign(static_cast<std::size_t>(docs.rows()), best);
    out.assignment.scores = Matrix::Zero(docs.rows(), classes.rows());
    out.model.kind = config.algorithm;
    out.model.centers = classes;
    out.pca = std::move(reduced.model);
    return out;
  }

  const Matrix& x = reduced.data;
  const Matrix& c = reduced.class_vectors;
  switch (config.algorithm) {
    case ClusterKind::kMiniBatchKMeans:
      std::tie(out.model, out.assignment) =
          minibatch_kmeans(x, c, config.batch_size, config.seed, config.max_iters, config.threads);
      break;
    case ClusterKind::kKMeans:
      std::tie(out.model, out.assignment) = kmeans(x, c, config.max_iters, config.threads);
      break;
    case ClusterKind::kGmm:
      std::tie(out.model, out.assignment) =
          gmm_fit(x, c, config.seed, config.max_iters, config.tol, config.threads);
      break;
  }
  out.pca = std::move(reduced.model);
  return out;
}

}  // namespace axabsa

#endif  // AXABSA_NUMERICS_HPP_
