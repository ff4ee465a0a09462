#ifndef ADSG_BASELINES_HPP
#define ADSG_BASELINES_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "estimator.hpp"
#include "solver_common.hpp"

namespace adsg {

namespace detail {

inline double smoothness_for_step(const ErmProblem &p, const BlockPartition &part,
                                  const SolverConfig &cfg) {
  const double L = resolve_constants(p, part, cfg).L;
  if (!(L > 0.0) || !std::isfinite(L))
    throw std::invalid_argument("smoothness constant must be positive and finite");
  return L;
}

inline double batch_correction(const ErmProblem &p, std::size_t i, double margin,
                               const Eigen::VectorXd &snap_margins) {
  return p.sample_loss(i, margin).derivative -
         p.sample_loss(i, snap_margins[static_cast<Eigen::Index>(i)]).derivative;
}

}  // namespace detail

/// Proximal SVRG: full-vector prox steps with the variance-reduced gradient;
/// the next snapshot is the last inner iterate. Inner count defaults to 2n,
/// step to 1/L.
inline SolveResult run_svrg(const ErmProblem &p, const SolverConfig &cfg) {
  detail::validate_config(p, cfg);
  const BlockPartition part(p.d(), 1);
  const std::size_t n = p.n(), m = cfg.inner_iterations.value_or(2 * n);
  const double eta = cfg.step_multiplier / detail::smoothness_for_step(p, part, cfg);
  RngStreams rng(cfg.seed);
  const IterationObserver *obs = cfg.observer;

  Eigen::VectorXd x = detail::starting_point(p, cfg), snap = x, v, snap_margins;
  std::vector<std::size_t> batch;
  detail::EpochReporter rep(p, cfg, "svrg", x);
  const double inv_b = 1.0 / static_cast<double>(cfg.batch);

  for (std::size_t s = 0; s < cfg.epochs; ++s) {
    const Eigen::VectorXd grad = full_gradient(p, snap, &snap_margins);
    rep.epg().full_pass(n);
    for (std::size_t j = 1; j <= m; ++j) {
      detail::draw_batch_and_block(rng, n, cfg.batch, 1, batch);
      v = grad;
      std::size_t sampled = 0;
      for (std::size_t i : batch) {
        auto row = p.data().row(i);
        const double c = detail::batch_correction(p, i, row.dot(x), snap_margins);
        for (std::size_t k = 0; k < row.nnz(); ++k) v[row.indices[k]] += c * inv_b * row.values[k];
        sampled += row.nnz();
      }
      rep.epg().components(2 * cfg.batch);
      for (Eigen::Index t = 0; t < x.size(); ++t)
        x[t] = p.reg().prox_coordinate(x[t] - eta * v[t], eta, static_cast<std::size_t>(t));
      const std::uint64_t touched = 2 * sampled + 2 * p.d();
      rep.add_touched(touched);
      if (obs && obs->on_cost) obs->on_cost(s * m + j, touched, sampled);
      if (obs && obs->on_iterate) obs->on_iterate(s * m + j, x, x, x);
    }
    snap = x;
    if (rep.end_epoch(s + 1, snap)) break;
  }
  return rep.finish(snap);
}

/// MRBCD: SVRG-style variance reduction with a prox step on one random block
/// per inner iteration. Inner count defaults to B n, step to 1/L.
inline SolveResult run_mrbcd(const ErmProblem &p, const SolverConfig &cfg) {
  detail::validate_config(p, cfg);
  const BlockPartition part(p.d(), cfg.blocks);
  const std::size_t n = p.n(), nb = part.blocks();
  const std::size_t m = cfg.inner_iterations.value_or(nb * n);
  const double eta = cfg.step_multiplier / detail::smoothness_for_step(p, part, cfg);
  RngStreams rng(cfg.seed);
  const IterationObserver *obs = cfg.observer;

  Eigen::VectorXd x = detail::starting_point(p, cfg), snap = x, v, snap_margins;
  std::vector<std::size_t> batch;
  detail::EpochReporter rep(p, cfg, "mrbcd", x);
  const double inv_b = 1.0 / static_cast<double>(cfg.batch);

  for (std::size_t s = 0; s < cfg.epochs; ++s) {
    const Eigen::VectorXd grad = full_gradient(p, snap, &snap_margins);
    rep.epg().full_pass(n);
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t l = detail::draw_batch_and_block(rng, n, cfg.batch, nb, batch);
      const auto lo = part.begin(l), hi = part.end(l);
      const auto slo = static_cast<Eigen::Index>(lo), w = static_cast<Eigen::Index>(hi - lo);
      v = grad.segment(slo, w);
      std::size_t sampled = 0, visited = 0;
      for (std::size_t i : batch) {
        auto row = p.data().row(i);
        const double c = detail::batch_correction(p, i, row.dot(x), snap_margins);
        if (c != 0.0) visited += add_row_segment(row, c * inv_b, lo, hi, v);
        sampled += row.nnz();
      }
      rep.epg().components(2 * cfg.batch);
      for (Eigen::Index t = 0; t < w; ++t)
        x[slo + t] = p.reg().prox_coordinate(x[slo + t] - eta * v[t], eta,
                                             static_cast<std::size_t>(slo + t));
      const std::uint64_t touched = sampled + visited + static_cast<std::size_t>(w);
      rep.add_touched(touched);
      if (obs && obs->on_cost) obs->on_cost(s * m + j, touched, sampled);
      if (obs && obs->on_iterate) obs->on_iterate(s * m + j, x, x, x);
    }
    snap = x;
    if (rep.end_epoch(s + 1, snap)) break;
  }
  return rep.finish(snap);
}

/// Katyusha with negative momentum weight tau2 = 1/2 and the proximal
/// y-step. With mu > 0: tau1 = min(sqrt(n mu / 3L), 1/2), step 1/(3 tau1 L),
/// snapshot = (1 + step mu)^j weighted average of the y iterates. With
/// mu = 0: tau1 = 2/(s + 4) per epoch and a uniform average.
inline SolveResult run_katyusha(const ErmProblem &p, const SolverConfig &cfg) {
  detail::validate_config(p, cfg);
  const BlockPartition part(p.d(), 1);
  const ProblemConstants c = detail::resolve_constants(p, part, cfg);
  const double L = detail::smoothness_for_step(p, part, cfg);
  const std::size_t n = p.n(), m = cfg.inner_iterations.value_or(2 * n);
  const double mu = c.mu;
  const bool strongly_convex = mu > 0.0;
  constexpr double tau2 = 0.5;
  RngStreams rng(cfg.seed);
  const IterationObserver *obs = cfg.observer;
  const auto d = static_cast<Eigen::Index>(p.d());

  Eigen::VectorXd x0 = detail::starting_point(p, cfg);
  Eigen::VectorXd snap = x0, y = x0, z = x0, x(d), v, snap_margins, acc(d);
  std::vector<std::size_t> batch;
  detail::EpochReporter rep(p, cfg, "katyusha", x0);
  const double inv_b = 1.0 / static_cast<double>(cfg.batch);
  const double y_step = 1.0 / (3.0 * L);

  for (std::size_t s = 0; s < cfg.epochs; ++s) {
    const double tau1 = strongly_convex
                            ? std::min(std::sqrt(static_cast<double>(n) * mu / (3.0 * L)), 0.5)
                            : 2.0 / (static_cast<double>(s) + 4.0);
    const double alpha = cfg.step_multiplier / (3.0 * tau1 * L);
    // Weights (1 + alpha mu)^j, j = 0..m-1, normalized by the largest.
    const double log_ratio = strongly_convex ? std::log1p(alpha * mu) : 0.0;
    double weight_sum = 0.0;

    const Eigen::VectorXd grad = full_gradient(p, snap, &snap_margins);
    rep.epg().full_pass(n);
    acc.setZero();
    for (std::size_t j = 0; j < m; ++j) {
      x = tau1 * z + tau2 * snap + (1.0 - tau1 - tau2) * y;
      detail::draw_batch_and_block(rng, n, cfg.batch, 1, batch);
      v = grad;
      std::size_t sampled = 0;
      for (std::size_t i : batch) {
        auto row = p.data().row(i);
        const double cc = detail::batch_correction(p, i, row.dot(x), snap_margins);
        for (std::size_t k = 0; k < row.nnz(); ++k)
          v[row.indices[k]] += cc * inv_b * row.values[k];
        sampled += row.nnz();
      }
      rep.epg().components(2 * cfg.batch);
      for (Eigen::Index t = 0; t < d; ++t) {
        const auto tj = static_cast<std::size_t>(t);
        z[t] = p.reg().prox_coordinate(z[t] - alpha * v[t], alpha, tj);
        y[t] = p.reg().prox_coordinate(x[t] - y_step * v[t], y_step, tj);
      }
      const double wj = std::exp((static_cast<double>(j) - static_cast<double>(m - 1)) * log_ratio);
      acc += wj * y;
      weight_sum += wj;
      const std::uint64_t touched = 2 * sampled + 6 * p.d();
      rep.add_touched(touched);
      if (obs && obs->on_cost) obs->on_cost(s * m + j + 1, touched, sampled);
      if (obs && obs->on_iterate) obs->on_iterate(s * m + j + 1, y, x, z);
    }
    if (m > 0) snap = acc / weight_sum;
    if (rep.end_epoch(s + 1, snap)) break;
  }
  return rep.finish(snap);
}

}  // namespace adsg

#endif
