#ifndef ADSG_LOSS_HPP
#define ADSG_LOSS_HPP

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace adsg {

enum class LossKind { logistic, squared, absolute_deviation, hinge };

/// Scalar loss phi(z; y) of a linear predictor z = <a_i, x>.
///
/// `smoothing` is the Moreau parameter lambda for the Lipschitz families
/// (absolute deviation, hinge); 0 means the raw non-differentiable loss. It is
/// ignored for logistic and squared.
struct LossFamily {
  LossKind kind = LossKind::logistic;
  double smoothing = 0.0;

  /// G-Lipschitz families that need smoothing before a gradient method applies.
  bool lipschitz_family() const noexcept {
    return kind == LossKind::absolute_deviation || kind == LossKind::hinge;
  }
  bool differentiable() const noexcept { return !lipschitz_family() || smoothing > 0.0; }
  bool binary_labels() const noexcept {
    return kind == LossKind::logistic || kind == LossKind::hinge;
  }

  /// Smoothness of phi in z: 1/4, 1, 1/lambda, or +inf when non-smooth.
  double curvature() const noexcept {
    switch (kind) {
      case LossKind::logistic: return 0.25;
      case LossKind::squared: return 1.0;
      default:
        return smoothing > 0.0 ? 1.0 / smoothing : std::numeric_limits<double>::infinity();
    }
  }

  LossFamily with_smoothing(double lambda) const { return {kind, lambda}; }
};

struct LossEval {
  double value;
  double derivative;
};

namespace detail {

// log(1 + exp(t)) without overflow.
inline double softplus(double t) {
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

// 1 / (1 + exp(-t))
inline double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace detail

/// phi(z) and phi'(z). At the kinks of the unsmoothed Lipschitz losses the
/// returned derivative is the limit from the flat/quadratic side (0).
inline LossEval loss_value_grad(const LossFamily &f, double y, double z) {
  switch (f.kind) {
    case LossKind::logistic: {
      const double t = -y * z;
      return {detail::softplus(t), -y * detail::sigmoid(t)};
    }
    case LossKind::squared: {
      const double r = z - y;
      return {0.5 * r * r, r};
    }
    case LossKind::absolute_deviation: {
      const double r = z - y;
      const double lam = f.smoothing;
      if (lam <= 0.0) return {std::abs(r), r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0)};
      if (r > lam) return {r - 0.5 * lam, 1.0};
      if (r < -lam) return {-r - 0.5 * lam, -1.0};
      return {r * r / (2.0 * lam), r / lam};
    }
    case LossKind::hinge: {
      const double m = y * z;
      const double lam = f.smoothing;
      if (lam <= 0.0) return {m < 1.0 ? 1.0 - m : 0.0, m < 1.0 ? -y : 0.0};
      if (m > 1.0) return {0.0, 0.0};
      if (m < 1.0 - lam) return {1.0 - m - 0.5 * lam, -y};
      // y in {-1, +1}, so y (y z - 1) / lambda == (z - y) / lambda.
      return {(m - 1.0) * (m - 1.0) / (2.0 * lam), (z - y) / lam};
    }
  }
  return {0.0, 0.0};
}

/// Upper bound lambda G^2 / 2 on phi - phi^(lambda); G = 1 for both Lipschitz families.
inline double smooth_gap_bound(const LossFamily &f, double lambda) {
  if (!f.lipschitz_family())
    throw std::invalid_argument("smooth_gap_bound: loss is already smooth");
  if (lambda < 0.0) throw std::invalid_argument("smooth_gap_bound: lambda must be >= 0");
  constexpr double lipschitz = 1.0;
  return 0.5 * lambda * lipschitz * lipschitz;
}

inline LossKind parse_loss_kind(std::string_view name) {
  if (name == "logistic") return LossKind::logistic;
  if (name == "squared") return LossKind::squared;
  if (name == "lad") return LossKind::absolute_deviation;
  if (name == "hinge") return LossKind::hinge;
  throw std::invalid_argument("unknown loss: " + std::string(name));
}

inline const char *to_string(LossKind k) {
  switch (k) {
    case LossKind::logistic: return "logistic";
    case LossKind::squared: return "squared";
    case LossKind::absolute_deviation: return "lad";
    case LossKind::hinge: return "hinge";
  }
  return "?";
}

}  // namespace adsg

#endif
