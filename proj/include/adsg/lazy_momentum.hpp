#ifndef ADSG_LAZY_MOMENTUM_HPP
#define ADSG_LAZY_MOMENTUM_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "dataset.hpp"

namespace adsg {

/// Vector Xi that decays by `decay` on every step, except on the one block
/// written by that step, stored lazily.
///
/// Holds xi and one staleness counter omega_l per block with
///   [Xi]_l = decay^omega_l [xi]_l.
/// A step on block l folds the pending decay into [xi]_l and resets omega_l;
/// the other blocks are not touched. omega_l is kept as (clock - stamp_l).
class LazyMomentum {
 public:
  explicit LazyMomentum(const BlockPartition &part) : part_(&part), stamp_(part.blocks(), 0) {}

  void reset(Eigen::VectorXd xi, double decay) {
    xi_ = std::move(xi);
    decay_ = decay;
    clock_ = 0;
    std::fill(stamp_.begin(), stamp_.end(), 0);
  }

  std::size_t staleness(std::size_t l) const noexcept { return clock_ - stamp_[l]; }
  double scale(std::size_t l) const { return std::pow(decay_, static_cast<double>(staleness(l))); }
  const Eigen::VectorXd &raw() const noexcept { return xi_; }

  /// One step on block l:
  ///   [xi]_l <- decay^(omega_l + 1) [xi]_l + increment,  omega_l <- 0,
  ///   omega_m <- omega_m + 1 for m != l.
  template <typename Increment>
  void step(std::size_t l, const Increment &increment) {
    const auto lo = static_cast<Eigen::Index>(part_->begin(l));
    const auto w = static_cast<Eigen::Index>(part_->size(l));
    const double f = std::pow(decay_, static_cast<double>(staleness(l) + 1));
    xi_.segment(lo, w) = f * xi_.segment(lo, w) + increment;
    ++clock_;
    stamp_[l] = clock_;
  }

  /// <a_i, Xi> over the stored entries of the row; one power per block run.
  /// `runs`, when given, receives the number of distinct blocks visited.
  double row_dot(const SparseRow &row, std::size_t *runs = nullptr) const {
    double total = 0.0, partial = 0.0;
    std::size_t current = part_->blocks(), count = 0;
    for (std::size_t k = 0; k < row.nnz(); ++k) {
      const auto j = row.indices[k];
      const auto l = part_->block_of(j);
      if (l != current) {
        if (count > 0) total += scale(current) * partial;
        partial = 0.0;
        current = l;
        ++count;
      }
      partial += row.values[k] * xi_[j];
    }
    if (count > 0) total += scale(current) * partial;
    if (runs) *runs = count;
    return total;
  }

  /// Explicit Xi; O(d).
  Eigen::VectorXd materialize() const {
    Eigen::VectorXd out(xi_.size());
    for (std::size_t l = 0; l < part_->blocks(); ++l) {
      const auto lo = static_cast<Eigen::Index>(part_->begin(l));
      const auto w = static_cast<Eigen::Index>(part_->size(l));
      out.segment(lo, w) = scale(l) * xi_.segment(lo, w);
    }
    return out;
  }

 private:
  const BlockPartition *part_;
  Eigen::VectorXd xi_;
  double decay_ = 1.0;
  std::size_t clock_ = 0;
  std::vector<std::size_t> stamp_;
};

}  // namespace adsg

#endif
