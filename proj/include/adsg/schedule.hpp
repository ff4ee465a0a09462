#ifndef ADSG_SCHEDULE_HPP
#define ADSG_SCHEDULE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "problem.hpp"
#include "rng.hpp"

namespace adsg {

/// Convex-combination weights of the two coupling steps.
struct Alphas {
  double a1 = 0.0;  // previous x
  double a2 = 0.0;  // z (historical momentum)
  double a3 = 0.0;  // snapshot (negative momentum)
};

inline Alphas schedule_strongly_convex(std::size_t n, std::size_t blocks, double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa))
    throw std::invalid_argument("schedule_strongly_convex: kappa must be positive and finite");
  if (n == 0 || blocks == 0) throw std::invalid_argument("schedule_strongly_convex: n, B >= 1");
  const double b = static_cast<double>(blocks);
  Alphas a;
  a.a2 = std::min(1.0, std::sqrt(static_cast<double>(n) / kappa)) / (2.0 * b);
  a.a3 = 1.0 / (2.0 * b);
  a.a1 = 1.0 - a.a2 - a.a3;
  return a;
}

inline Alphas schedule_general_convex(std::size_t epoch, std::size_t blocks) {
  if (blocks == 0) throw std::invalid_argument("schedule_general_convex: B >= 1");
  const double b = static_cast<double>(blocks);
  Alphas a;
  a.a2 = 2.0 / (static_cast<double>(epoch) + 4.0 * b);
  a.a3 = 1.0 / (2.0 * b);
  a.a1 = 1.0 - a.a2 - a.a3;
  return a;
}

/// Everything one epoch needs: alphas, the effective smoothness, step and
/// snapshot weighting.
struct EpochCoefficients {
  Alphas alphas;
  double lbar = 0.0;   // L / (B a3) + L_B
  double eta = 0.0;    // 1 / (lbar a2 B)
  double theta = 1.0;  // snapshot geometric ratio
  double gamma = 0.0;  // a2 / (a2 + a3)
  double mu = 0.0;

  /// alpha2^2 B^2 lbar + (B - 1) mu alpha2, the per-epoch contraction scale.
  double contraction_rho(std::size_t blocks) const noexcept {
    const double b = static_cast<double>(blocks);
    return alphas.a2 * alphas.a2 * b * b * lbar + (b - 1.0) * mu * alphas.a2;
  }
};

inline EpochCoefficients epoch_coefficients(const Alphas &a, const ProblemConstants &c,
                                            std::size_t blocks, double mu) {
  const double b = static_cast<double>(blocks);
  EpochCoefficients e;
  e.alphas = a;
  e.mu = mu;
  e.lbar = c.L / (b * a.a3) + c.L_block;
  e.eta = 1.0 / (e.lbar * a.a2 * b);
  e.theta = 1.0 + mu / (e.lbar * b * b * a.a2 + (b - 1.0) * mu);
  e.gamma = a.a2 / (a.a2 + a.a3);
  return e;
}

enum class ScheduleKind { automatic, strongly_convex, general_convex };

/// Per-epoch coefficient generator. `automatic` picks the strongly convex
/// schedule when mu > 0.
class Schedule {
 public:
  Schedule(ScheduleKind kind, std::size_t n, std::size_t blocks, ProblemConstants constants)
      : n_(n), blocks_(blocks), c_(constants) {
    if (!(c_.L > 0.0) || !std::isfinite(c_.L) || !(c_.L_block > 0.0))
      throw std::invalid_argument(
          "schedule: smoothness constants must be positive and finite (degenerate data?)");
    if (kind == ScheduleKind::automatic)
      kind = c_.mu > 0.0 ? ScheduleKind::strongly_convex : ScheduleKind::general_convex;
    if (kind == ScheduleKind::strongly_convex && !(c_.mu > 0.0))
      throw std::invalid_argument("strongly convex schedule requires mu > 0");
    kind_ = kind;
  }

  ScheduleKind kind() const noexcept { return kind_; }
  std::size_t blocks() const noexcept { return blocks_; }
  const ProblemConstants &constants() const noexcept { return c_; }

  Alphas alphas(std::size_t epoch) const {
    return kind_ == ScheduleKind::strongly_convex
               ? schedule_strongly_convex(n_, blocks_, c_.kappa)
               : schedule_general_convex(epoch, blocks_);
  }

  EpochCoefficients at(std::size_t epoch) const {
    const double mu = kind_ == ScheduleKind::strongly_convex ? c_.mu : 0.0;
    return epoch_coefficients(alphas(epoch), c_, blocks_, mu);
  }

 private:
  ScheduleKind kind_{};
  std::size_t n_;
  std::size_t blocks_;
  ProblemConstants c_;
};

/// Draw sigma in {1..m} with P(sigma = j) proportional to theta^(j-1) by
/// inverting the closed-form geometric CDF.
inline std::size_t snapshot_draw_from_uniform(double theta, std::size_t m, double u) {
  if (!(theta >= 1.0)) throw std::invalid_argument("snapshot_draw: theta must be >= 1");
  if (m == 0) throw std::invalid_argument("snapshot_draw: m must be >= 1");
  if (m == 1) return 1;
  const double md = static_cast<double>(m);
  double pos;  // continuous position in [0, m)
  const double log_theta = std::log(theta);
  const double t = md * log_theta;
  if (theta == 1.0 || t < 1e-12) {
    pos = u * md;
  } else if (t < 30.0) {
    pos = std::log1p(u * std::expm1(t)) / log_theta;
  } else {
    // log(1 + u (e^t - 1)) = t + log(u + (1 - u) e^-t)
    pos = (t + std::log(u + (1.0 - u) * std::exp(-t))) / log_theta;
  }
  auto sigma = static_cast<std::size_t>(std::floor(pos)) + 1;
  return std::clamp<std::size_t>(sigma, 1, m);
}

inline std::size_t snapshot_draw(double theta, std::size_t m, RngStreams &rng) {
  return snapshot_draw_from_uniform(theta, m, rng.snapshot_uniform());
}

/// Coefficients expressing x_k as a combination of past snapshots and all z_l.
struct CombinationWeights {
  std::vector<double> snapshot;  // weight of snapshot i = 0..s (last entry is beta)
  std::vector<double> z;         // weight of z_l, l = 0..k

  double sum() const {
    double acc = 0.0;
    for (double w : snapshot) acc += w;
    for (double w : z) acc += w;
    return acc;
  }
  double min() const {
    double lo = 1.0;
    for (double w : snapshot) lo = std::min(lo, w);
    for (double w : z) lo = std::min(lo, w);
    return lo;
  }
};

/// Run the coupling recursion of the reference solver for k iterations with
/// m inner iterations per epoch. `alphas_per_epoch[s]` supplies epoch s.
inline CombinationWeights lemma1_weights(const std::vector<Alphas> &alphas_per_epoch,
                                         std::size_t blocks, std::size_t m, std::size_t k) {
  if (m == 0 || blocks == 0) throw std::invalid_argument("lemma1_weights: m, B >= 1");
  const double b = static_cast<double>(blocks);
  CombinationWeights w;
  w.snapshot = {0.0};  // beta for snapshot 0; x_0 = z_0
  w.z = {1.0};
  for (std::size_t it = 0; it < k; ++it) {
    const std::size_t s = it / m;
    if (s >= alphas_per_epoch.size())
      throw std::invalid_argument("lemma1_weights: not enough epochs of alphas");
    if (it > 0 && it % m == 0) w.snapshot.push_back(0.0);  // snapshot s enters
    const Alphas &a = alphas_per_epoch[s];
    for (double &lam : w.snapshot) lam *= a.a1;
    w.snapshot.back() += a.a3;
    const double last = w.z.back();
    for (double &g : w.z) g *= a.a1;
    w.z.back() = a.a1 * last + a.a2 * (1.0 - b);
    w.z.push_back(a.a2 * b);
  }
  return w;
}

}  // namespace adsg

#endif
