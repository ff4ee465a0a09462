#ifndef ADSG_ESTIMATOR_HPP
#define ADSG_ESTIMATOR_HPP

#include <span>
#include <stdexcept>

#include "problem.hpp"

namespace adsg {

/// Adds c [a_i]_{[lo, hi)} into `out` (indexed from lo). Returns entries visited.
inline std::size_t add_row_segment(const SparseRow &row, double c, std::size_t lo, std::size_t hi,
                                   Eigen::Ref<Eigen::VectorXd> out) {
  auto [b, e] = row.range(lo, hi);
  for (auto k = b; k < e; ++k) out[static_cast<Eigen::Index>(row.indices[k] - lo)] += c * row.values[k];
  return e - b;
}

/// Variance-reduced block gradient
///   [v]_l = [g_snap]_l + (1/b) sum_{i in I} ([grad f_i(y)]_l - [grad f_i(snap)]_l)
/// returned as a dense vector over block l.
inline Eigen::VectorXd stochastic_block_gradient(const ErmProblem &p, const Eigen::VectorXd &y,
                                                 const Eigen::VectorXd &snapshot,
                                                 const Eigen::VectorXd &snapshot_grad,
                                                 std::span<const std::size_t> batch,
                                                 const BlockPartition &part, std::size_t l) {
  if (batch.empty()) throw std::invalid_argument("stochastic_block_gradient: empty batch");
  if (l >= part.blocks()) throw std::invalid_argument("stochastic_block_gradient: bad block");
  check_dimension(p, y);
  check_dimension(p, snapshot);
  const auto lo = part.begin(l), hi = part.end(l);
  Eigen::VectorXd v = snapshot_grad.segment(static_cast<Eigen::Index>(lo),
                                            static_cast<Eigen::Index>(hi - lo));
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  for (std::size_t i : batch) {
    if (i >= p.n()) throw std::invalid_argument("stochastic_block_gradient: sample out of range");
    auto row = p.data().row(i);
    const double c = p.sample_loss(i, row.dot(y)).derivative -
                     p.sample_loss(i, row.dot(snapshot)).derivative;
    if (c != 0.0) add_row_segment(row, c * inv_b, lo, hi, v);
  }
  return v;
}

}  // namespace adsg

#endif
