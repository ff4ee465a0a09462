#ifndef ADSG_SYNTHETIC_HPP
#define ADSG_SYNTHETIC_HPP

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "problem.hpp"

namespace adsg {

struct SyntheticSpec {
  std::size_t n = 200;
  std::size_t d = 50;
  LossFamily loss{LossKind::squared, 0.0};
  double kappa = 100.0;  // target (L + L_B) / lambda2
  std::size_t blocks = 1;
  double noise = 0.1;
  /// Smallest squared singular value of A / sqrt(n); the spectrum decays
  /// geometrically from 1 to this value so lambda2 controls conditioning.
  double spectrum_floor = 1e-6;
  std::uint64_t seed = 0;
};

struct SyntheticInstance {
  std::shared_ptr<const Dataset> data;
  Regularizer reg;  // l2 chosen to hit the target condition number
  Eigen::VectorXd x_star;
  std::optional<double> f_star;

  ErmProblem problem(LossFamily loss) const { return ErmProblem(data, loss, reg); }
};

/// Largest eigenvalue of A^T A / n by power iteration.
inline double gram_spectral_norm(const Dataset &ds, int iters = 200) {
  Eigen::VectorXd v = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(ds.d()));
  v.normalize();
  double lam = 0.0;
  for (int it = 0; it < iters; ++it) {
    const Eigen::VectorXd av = ds.margins(v);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(v.size());
    for (std::size_t i = 0; i < ds.n(); ++i) {
      auto row = ds.row(i);
      for (std::size_t k = 0; k < row.nnz(); ++k) w[row.indices[k]] += av[i] * row.values[k];
    }
    w /= static_cast<double>(ds.n());
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    lam = norm;
    v = w / norm;
  }
  return lam;
}

/// Deterministic accelerated proximal gradient with adaptive restart, for
/// high-accuracy optima of smooth-loss problems. Stops when the prox-gradient
/// step length falls below `tol` or after `max_iter` iterations.
inline Eigen::VectorXd reference_solve(const ErmProblem &p, double tol = 1e-13,
                                       std::size_t max_iter = 100000,
                                       Eigen::VectorXd x0 = Eigen::VectorXd()) {
  if (!p.loss().differentiable())
    throw std::invalid_argument("reference_solve: loss must be differentiable");
  const double L = p.loss().curvature() * gram_spectral_norm(p.data()) * 1.01;
  if (!(L > 0.0)) return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.d()));
  const double eta = 1.0 / L;
  Eigen::VectorXd x = x0.size() ? x0 : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.d()));
  Eigen::VectorXd y = x, x_prev = x, g, step;
  double t = 1.0;
  for (std::size_t it = 0; it < max_iter; ++it) {
    g = full_gradient(p, y);
    x_prev = x;
    for (Eigen::Index j = 0; j < x.size(); ++j)
      x[j] = p.reg().prox_coordinate(y[j] - eta * g[j], eta, static_cast<std::size_t>(j));
    step = x - x_prev;
    if ((x - y).norm() < tol && it > 0) break;
    // Restart momentum when it points uphill.
    if ((y - x).dot(step) > 0.0) {
      t = 1.0;
      y = x;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = x + ((t - 1.0) / t_next) * step;
    t = t_next;
  }
  return x;
}

/// Dense Gaussian design with a shaped spectrum and l2 weight chosen so that
/// (L + L_B) / lambda2 equals the target kappa. Ridge instances get x* from a
/// direct linear solve; other differentiable losses from `reference_solve`.
inline SyntheticInstance gen_synthetic(const SyntheticSpec &spec) {
  if (!(spec.kappa >= 1.0)) throw std::invalid_argument("gen_synthetic: kappa must be >= 1");
  if (spec.n == 0 || spec.d == 0) throw std::invalid_argument("gen_synthetic: n, d >= 1");
  if (spec.n * spec.d > 1000000)
    throw std::invalid_argument("gen_synthetic: n*d too large for a direct solve");
  if (spec.blocks == 0 || spec.blocks > spec.d)
    throw std::invalid_argument("gen_synthetic: need 1 <= blocks <= d");

  const auto n = static_cast<Eigen::Index>(spec.n), d = static_cast<Eigen::Index>(spec.d);
  std::mt19937_64 gen(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto gaussian = [&](Eigen::Index r, Eigen::Index c) {
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
      for (Eigen::Index i = 0; i < r; ++i) m(i, j) = normal(gen);
    return m;
  };

  // A = sqrt(n) Q diag(s) V^T, Q with orthonormal columns.
  const Eigen::Index k = std::min(n, d);
  Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(gaussian(n, k)).householderQ() *
                      Eigen::MatrixXd::Identity(n, k);
  Eigen::MatrixXd vmat = Eigen::HouseholderQR<Eigen::MatrixXd>(gaussian(d, d)).householderQ() *
                         Eigen::MatrixXd::Identity(d, d);
  Eigen::VectorXd s(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double frac = k > 1 ? static_cast<double>(j) / static_cast<double>(k - 1) : 0.0;
    s[j] = std::sqrt(std::pow(spec.spectrum_floor, frac));
  }
  Eigen::MatrixXd a = std::sqrt(static_cast<double>(n)) * q * s.asDiagonal() *
                      vmat.leftCols(k).transpose();

  Eigen::VectorXd x_true(d);
  for (Eigen::Index j = 0; j < d; ++j) x_true[j] = normal(gen);
  Eigen::VectorXd signal = a * x_true;
  Eigen::VectorXd labels(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double noisy = signal[i] + spec.noise * normal(gen);
    labels[i] = spec.loss.binary_labels() ? (noisy >= 0.0 ? 1.0 : -1.0) : noisy;
  }

  SyntheticInstance inst;
  inst.data = std::make_shared<const Dataset>(from_dense(a, labels, true));
  const BlockPartition part(spec.d, spec.blocks);
  const ProblemConstants c = estimate_constants(*inst.data, part, spec.loss, Regularizer{});
  inst.reg.l2 = (c.L + c.L_block) / spec.kappa;

  if (spec.loss.kind == LossKind::squared) {
    Eigen::MatrixXd h = a.transpose() * a / static_cast<double>(n);
    h.diagonal().array() += inst.reg.l2;
    inst.x_star = h.ldlt().solve(a.transpose() * labels / static_cast<double>(n));
    inst.f_star = full_objective(inst.problem(spec.loss), inst.x_star);
  } else if (spec.loss.differentiable()) {
    inst.x_star = reference_solve(inst.problem(spec.loss));
    inst.f_star = full_objective(inst.problem(spec.loss), inst.x_star);
  }
  return inst;
}

/// Random sparse design: every row has round(density d) nonzeros (at least
/// one) at uniformly chosen positions, Gaussian values, labels from a random
/// linear model (+-1 for classification losses).
inline Dataset gen_sparse(std::size_t n, std::size_t d, double density, const LossFamily &loss,
                          std::uint64_t seed) {
  if (n == 0 || d == 0 || !(density > 0.0) || density > 1.0)
    throw std::invalid_argument("gen_sparse: need n, d >= 1 and density in (0, 1]");
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto per_row = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(density * static_cast<double>(d))));
  std::vector<double> w(d);
  for (auto &v : w) v = normal(gen);
  std::vector<index_t> pool(d);
  for (std::size_t j = 0; j < d; ++j) pool[j] = static_cast<index_t>(j);
  DatasetBuilder b;
  std::vector<index_t> idx(per_row);
  std::vector<double> val(per_row);
  for (std::size_t i = 0; i < n; ++i) {
    // Partial Fisher-Yates for a uniform subset.
    for (std::size_t t = 0; t < per_row; ++t) {
      std::uniform_int_distribution<std::size_t> pick(t, d - 1);
      std::swap(pool[t], pool[pick(gen)]);
    }
    std::copy_n(pool.begin(), per_row, idx.begin());
    std::sort(idx.begin(), idx.end());
    double score = 0.0;
    for (std::size_t t = 0; t < per_row; ++t) {
      val[t] = normal(gen);
      score += val[t] * w[idx[t]];
    }
    const double label = loss.binary_labels() ? (score >= 0.0 ? 1.0 : -1.0) : score;
    b.add_row(label, idx, val);
  }
  return std::move(b).build(d);
}

}  // namespace adsg

#endif
