#ifndef ADSG_REGULARIZER_HPP
#define ADSG_REGULARIZER_HPP

#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>

#include <Eigen/Dense>

namespace adsg {

/// P(x) = l1 |x|_1 + (l2 / 2) |x|^2 + (anchor_weight / 2) |x - anchor|^2.
///
/// The anchored quadratic is the strong-convexity term that AdaptReg adds; it
/// is zero (and `anchor` unset) for ordinary problems. Every term is
/// coordinate separable, so the prox of any block is the block of the prox.
struct Regularizer {
  double l1 = 0.0;
  double l2 = 0.0;
  double anchor_weight = 0.0;
  std::shared_ptr<const Eigen::VectorXd> anchor;

  double strong_convexity() const noexcept { return l2 + anchor_weight; }

  double center(std::size_t j) const noexcept {
    return anchor_weight > 0.0 && anchor ? (*anchor)[static_cast<Eigen::Index>(j)] : 0.0;
  }

  double value(const Eigen::VectorXd &x) const {
    double v = l1 * x.lpNorm<1>() + 0.5 * l2 * x.squaredNorm();
    if (anchor_weight > 0.0 && anchor) v += 0.5 * anchor_weight * (x - *anchor).squaredNorm();
    return v;
  }

  /// prox of eta P at coordinate j evaluated at v.
  double prox_coordinate(double v, double eta, std::size_t j) const noexcept {
    const double shifted = v + eta * anchor_weight * center(j);
    const double mag = std::abs(shifted) - eta * l1;
    if (mag <= 0.0) return 0.0;
    return std::copysign(mag, shifted) / (1.0 + eta * (l2 + anchor_weight));
  }

  Regularizer with_anchor(double weight, std::shared_ptr<const Eigen::VectorXd> at) const {
    Regularizer r = *this;
    r.anchor_weight = weight;
    r.anchor = weight > 0.0 ? std::move(at) : nullptr;
    return r;
  }
};

/// Coordinatewise prox of eta P over the contiguous range starting at `offset`.
inline Eigen::VectorXd prox_block(const Regularizer &reg, const Eigen::VectorXd &y, double eta,
                                  std::size_t offset = 0) {
  if (!(eta > 0.0)) throw std::invalid_argument("prox_block: eta must be positive");
  Eigen::VectorXd out(y.size());
  for (Eigen::Index k = 0; k < y.size(); ++k)
    out[k] = reg.prox_coordinate(y[k], eta, offset + static_cast<std::size_t>(k));
  return out;
}

}  // namespace adsg

#endif
