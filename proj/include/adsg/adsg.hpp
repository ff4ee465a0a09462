#ifndef ADSG_ADSG_HPP
#define ADSG_ADSG_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "estimator.hpp"
#include "lazy_momentum.hpp"
#include "solver_common.hpp"

namespace adsg {

enum class AdsgVariant { reference, efficient, stable };

inline AdsgVariant parse_variant(std::string_view name) {
  if (name == "ref" || name == "reference") return AdsgVariant::reference;
  if (name == "efficient") return AdsgVariant::efficient;
  if (name == "stable") return AdsgVariant::stable;
  throw std::invalid_argument("unknown variant: " + std::string(name));
}

namespace detail {

/// Common epoch setup shared by the three forms.
struct AdsgSetup {
  BlockPartition part;
  Schedule schedule;
  std::size_t inner;  // m = B n

  AdsgSetup(const ErmProblem &p, const SolverConfig &cfg)
      : part((validate_config(p, cfg), p.d()), cfg.blocks),
        schedule(cfg.schedule, p.n(), cfg.blocks, resolve_constants(p, part, cfg)),
        inner(cfg.blocks * p.n()) {}
};

/// Variance-reduced block gradient from precomputed margins at y and at the
/// snapshot. Returns the number of row entries visited.
inline std::size_t block_gradient_from_margins(const ErmProblem &p,
                                               std::span<const std::size_t> batch,
                                               std::span<const double> y_margins,
                                               const Eigen::VectorXd &snap_margins,
                                               const Eigen::VectorXd &snap_grad, std::size_t lo,
                                               std::size_t hi, Eigen::VectorXd &v) {
  v = snap_grad.segment(static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(hi - lo));
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  std::size_t visited = 0;
  for (std::size_t t = 0; t < batch.size(); ++t) {
    const auto i = batch[t];
    const double c = p.sample_loss(i, y_margins[t]).derivative -
                     p.sample_loss(i, snap_margins[static_cast<Eigen::Index>(i)]).derivative;
    if (c != 0.0) visited += add_row_segment(p.data().row(i), c * inv_b, lo, hi, v);
  }
  return visited;
}

}  // namespace detail

/// Reference form: dense coupling steps, O(d) per inner iteration.
inline SolveResult run_adsg_reference(const ErmProblem &p, const SolverConfig &cfg) {
  detail::AdsgSetup setup(p, cfg);
  const auto &part = setup.part;
  const std::size_t n = p.n(), m = setup.inner, nb = part.blocks();
  const double bd = static_cast<double>(nb);
  RngStreams rng(cfg.seed);
  const IterationObserver *obs = cfg.observer;

  Eigen::VectorXd x = detail::starting_point(p, cfg);
  Eigen::VectorXd z = x, snap = x, next_snap = x, y(x.size()), v, z_old;
  Eigen::VectorXd snap_margins;
  std::vector<std::size_t> batch;
  std::vector<double> y_margins(cfg.batch);
  detail::EpochReporter rep(p, cfg, "adsg", x);

  for (std::size_t s = 0; s < cfg.epochs; ++s) {
    const EpochCoefficients e = setup.schedule.at(s);
    const auto [a1, a2, a3] = e.alphas;
    if (obs && obs->on_epoch) obs->on_epoch(s, snap, e);
    const Eigen::VectorXd grad = full_gradient(p, snap, &snap_margins);
    rep.epg().full_pass(n);
    const std::size_t sigma = snapshot_draw(e.theta, m, rng);

    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t k = s * m + j;
      y = a1 * x + a2 * z + a3 * snap;
      const std::size_t l = detail::draw_batch_and_block(rng, n, cfg.batch, nb, batch);
      const auto lo = part.begin(l), hi = part.end(l);
      const auto slo = static_cast<Eigen::Index>(lo), w = static_cast<Eigen::Index>(hi - lo);
      std::size_t sampled = 0;
      for (std::size_t t = 0; t < batch.size(); ++t) {
        auto row = p.data().row(batch[t]);
        y_margins[t] = row.dot(y);
        sampled += row.nnz();
      }
      std::size_t visited = detail::block_gradient_from_margins(p, batch, y_margins, snap_margins,
                                                                grad, lo, hi, v);
      rep.epg().components(2 * cfg.batch);

      z_old = z.segment(slo, w);
      for (Eigen::Index t = 0; t < w; ++t)
        z[slo + t] = p.reg().prox_coordinate(z_old[t] - e.eta * v[t], e.eta,
                                             static_cast<std::size_t>(slo + t));
      x = y;
      x.segment(slo, w) += a2 * bd * (z.segment(slo, w) - z_old);

      const std::uint64_t touched = 4 * p.d() + sampled + visited + 2 * static_cast<std::size_t>(w);
      rep.add_touched(touched);
      if (obs && obs->on_cost) obs->on_cost(k, touched, sampled);
      if (obs && obs->on_iterate) obs->on_iterate(k, x, y, z);
      if (j == sigma) next_snap = x;
    }
    snap = next_snap;
    if (rep.end_epoch(s + 1, snap)) break;
  }
  return rep.finish(snap);
}

/// Efficient form: iterates tracked through (u, z_hat, beta); O(Omega + nnz)
/// per inner iteration. beta decays geometrically inside an epoch and u grows
/// as 1/beta, so this form breaks down once beta underflows; the stable form
/// has no such limit.
inline SolveResult run_adsg_efficient(const ErmProblem &p, const SolverConfig &cfg) {
  detail::AdsgSetup setup(p, cfg);
  const auto &part = setup.part;
  const std::size_t n = p.n(), m = setup.inner, nb = part.blocks();
  const double bd = static_cast<double>(nb);
  RngStreams rng(cfg.seed);
  const IterationObserver *obs = cfg.observer;

  const Eigen::VectorXd x0 = detail::starting_point(p, cfg);
  Eigen::VectorXd snap = x0;   // x-dot
  Eigen::VectorXd boundary = x0;  // x at the epoch boundary
  Eigen::VectorXd zhat = Eigen::VectorXd::Zero(x0.size());
  Eigen::VectorXd u, next_snap = x0, v, snap_margins, xbar, ybar, zbar;
  std::vector<std::size_t> batch;
  std::vector<double> y_margins(cfg.batch);
  detail::EpochReporter rep(p, cfg, "adsg", x0);

  for (std::size_t s = 0; s < cfg.epochs; ++s) {
    const EpochCoefficients e = setup.schedule.at(s);
    const auto [a1, a2, a3] = e.alphas;
    const double gamma = e.gamma;
    const double push = a2 * bd - gamma;
    if (obs && obs->on_epoch) obs->on_epoch(s, snap, e);
    const Eigen::VectorXd grad = full_gradient(p, snap, &snap_margins);
    rep.epg().full_pass(n);
    const std::size_t sigma = snapshot_draw(e.theta, m, rng);

    u = boundary - gamma * zhat - snap;
    double beta = a1;  // beta_{j-1} for j = 1
    for (std::size_t j = 1; j <= m; ++j) {
      if (!(beta > 0.0) || !std::isfinite(beta))
        throw std::domain_error("efficient ADSG: beta underflow at epoch " + std::to_string(s) +
                                "; use the stable variant");
      const std::size_t k = s * m + j;
      if (obs && obs->on_iterate) ybar = beta * u + gamma * zhat + snap;
      const std::size_t l = detail::draw_batch_and_block(rng, n, cfg.batch, nb, batch);
      const auto lo = part.begin(l), hi = part.end(l);
      const auto slo = static_cast<Eigen::Index>(lo), w = static_cast<Eigen::Index>(hi - lo);
      std::size_t sampled = 0;
      for (std::size_t t = 0; t < batch.size(); ++t) {
        const auto i = batch[t];
        auto row = p.data().row(i);
        y_margins[t] = beta * row.dot(u) + gamma * row.dot(zhat) +
                       snap_margins[static_cast<Eigen::Index>(i)];
        sampled += row.nnz();
      }
      std::size_t visited = detail::block_gradient_from_margins(p, batch, y_margins, snap_margins,
                                                                grad, lo, hi, v);
      rep.epg().components(2 * cfg.batch);

      const double coef = push / beta;
      for (Eigen::Index t = 0; t < w; ++t) {
        const Eigen::Index c = slo + t;
        const double z_cur = zhat[c] + snap[c];
        const double z_new =
            p.reg().prox_coordinate(z_cur - e.eta * v[t], e.eta, static_cast<std::size_t>(c)) -
            snap[c];
        u[c] += coef * (z_new - zhat[c]);
        zhat[c] = z_new;
      }

      const std::uint64_t touched = 2 * sampled + visited + 2 * static_cast<std::size_t>(w);
      rep.add_touched(touched);
      if (obs && obs->on_cost) obs->on_cost(k, touched, sampled);
      if (obs && obs->on_iterate) {
        xbar = beta * u + gamma * zhat + snap;
        zbar = zhat + snap;
        obs->on_iterate(k, xbar, ybar, zbar);
      }
      if (j == sigma) next_snap = beta * u + gamma * zhat + snap;
      if (j == m) boundary = beta * u + gamma * zhat + snap;
      beta *= a1;
    }
    zbar = zhat + snap;
    snap = next_snap;
    zhat = zbar - snap;
    if (rep.end_epoch(s + 1, snap)) break;
  }
  return rep.finish(snap);
}

/// Stable form: the product beta u is kept as Xi, stored lazily per block
/// through (xi, omega). Per inner iteration cost O(nnz(rows) + Omega) plus one
/// power per block touched by the sampled rows.
inline SolveResult run_adsg_stable(const ErmProblem &p, const SolverConfig &cfg) {
  detail::AdsgSetup setup(p, cfg);
  const auto &part = setup.part;
  const std::size_t n = p.n(), m = setup.inner, nb = part.blocks();
  const double bd = static_cast<double>(nb);
  RngStreams rng(cfg.seed);
  const IterationObserver *obs = cfg.observer;

  const Eigen::VectorXd x0 = detail::starting_point(p, cfg);
  Eigen::VectorXd snap = x0, boundary = x0, next_snap = x0;
  Eigen::VectorXd zhat = Eigen::VectorXd::Zero(x0.size());
  Eigen::VectorXd v, snap_margins, increment, xbar, ybar, zbar;
  LazyMomentum lazy(part);
  std::vector<std::size_t> batch;
  std::vector<double> y_margins(cfg.batch);
  detail::EpochReporter rep(p, cfg, "adsg", x0);

  for (std::size_t s = 0; s < cfg.epochs; ++s) {
    const EpochCoefficients e = setup.schedule.at(s);
    const auto [a1, a2, a3] = e.alphas;
    const double gamma = e.gamma;
    const double push = a2 * bd - gamma;
    if (obs && obs->on_epoch) obs->on_epoch(s, snap, e);
    const Eigen::VectorXd grad = full_gradient(p, snap, &snap_margins);
    rep.epg().full_pass(n);
    const std::size_t sigma = snapshot_draw(e.theta, m, rng);

    lazy.reset(boundary - gamma * zhat - snap, a1);
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t k = s * m + j;
      if (obs && obs->on_iterate) ybar = a1 * lazy.materialize() + gamma * zhat + snap;
      const std::size_t l = detail::draw_batch_and_block(rng, n, cfg.batch, nb, batch);
      const auto lo = part.begin(l), hi = part.end(l);
      const auto slo = static_cast<Eigen::Index>(lo), w = static_cast<Eigen::Index>(hi - lo);
      std::size_t sampled = 0, runs_total = 0;
      for (std::size_t t = 0; t < batch.size(); ++t) {
        const auto i = batch[t];
        auto row = p.data().row(i);
        std::size_t runs = 0;
        y_margins[t] = a1 * lazy.row_dot(row, &runs) + gamma * row.dot(zhat) +
                       snap_margins[static_cast<Eigen::Index>(i)];
        sampled += row.nnz();
        runs_total += runs;
      }
      std::size_t visited = detail::block_gradient_from_margins(p, batch, y_margins, snap_margins,
                                                                grad, lo, hi, v);
      rep.epg().components(2 * cfg.batch);

      increment.resize(w);
      for (Eigen::Index t = 0; t < w; ++t) {
        const Eigen::Index c = slo + t;
        const double z_cur = zhat[c] + snap[c];
        const double z_new =
            p.reg().prox_coordinate(z_cur - e.eta * v[t], e.eta, static_cast<std::size_t>(c)) -
            snap[c];
        increment[t] = push * (z_new - zhat[c]);
        zhat[c] = z_new;
      }
      lazy.step(l, increment);

      const std::uint64_t touched =
          2 * sampled + runs_total + visited + 2 * static_cast<std::size_t>(w);
      rep.add_touched(touched);
      if (obs && obs->on_cost) obs->on_cost(k, touched, sampled);
      if (obs && obs->on_iterate) {
        xbar = lazy.materialize() + gamma * zhat + snap;
        zbar = zhat + snap;
        obs->on_iterate(k, xbar, ybar, zbar);
      }
      if (j == sigma) next_snap = lazy.materialize() + gamma * zhat + snap;
    }
    // Flush the lazy state once per epoch.
    boundary = lazy.materialize() + gamma * zhat + snap;
    zbar = zhat + snap;
    snap = next_snap;
    zhat = zbar - snap;
    if (rep.end_epoch(s + 1, snap)) break;
  }
  return rep.finish(snap);
}

inline SolveResult run_adsg(const ErmProblem &p, const SolverConfig &cfg,
                            AdsgVariant variant = AdsgVariant::stable) {
  switch (variant) {
    case AdsgVariant::reference: return run_adsg_reference(p, cfg);
    case AdsgVariant::efficient: return run_adsg_efficient(p, cfg);
    case AdsgVariant::stable: return run_adsg_stable(p, cfg);
  }
  throw std::invalid_argument("unknown ADSG variant");
}

}  // namespace adsg

#endif
