#ifndef ADSG_PROBLEM_HPP
#define ADSG_PROBLEM_HPP

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>

#include "dataset.hpp"
#include "loss.hpp"
#include "regularizer.hpp"

namespace adsg {

/// Smoothness and strong-convexity constants consumed by the schedules.
struct ProblemConstants {
  double L = 0.0;        // smoothness of every f_i
  double L_block = 0.0;  // block smoothness
  double mu = 0.0;       // strong convexity used by the solver
  double kappa = std::numeric_limits<double>::infinity();  // (L + L_block) / mu
};

/// F^P(x) = (1/n) sum_i phi(a_i^T x; y_i) + P(x).
class ErmProblem {
 public:
  ErmProblem(std::shared_ptr<const Dataset> data, LossFamily loss, Regularizer reg,
             std::optional<double> mu_override = std::nullopt)
      : data_(std::move(data)), loss_(loss), reg_(std::move(reg)), mu_override_(mu_override) {
    if (!data_) throw std::invalid_argument("ErmProblem: null dataset");
    if (loss_.smoothing < 0.0) throw std::invalid_argument("ErmProblem: smoothing must be >= 0");
    if (reg_.l1 < 0.0 || reg_.l2 < 0.0 || reg_.anchor_weight < 0.0)
      throw std::invalid_argument("ErmProblem: regularization weights must be >= 0");
    if (reg_.anchor_weight > 0.0 &&
        (!reg_.anchor || static_cast<std::size_t>(reg_.anchor->size()) != data_->d()))
      throw std::invalid_argument("ErmProblem: anchor dimension mismatch");
    if (mu_override_ && *mu_override_ < 0.0)
      throw std::invalid_argument("ErmProblem: mu override must be >= 0");
    if (loss_.binary_labels()) {
      for (double y : data_->labels())
        if (y != 1.0 && y != -1.0)
          throw std::invalid_argument(std::string(to_string(loss_.kind)) +
                                      " loss requires labels in {-1, +1}");
    }
  }

  const Dataset &data() const noexcept { return *data_; }
  const std::shared_ptr<const Dataset> &data_ptr() const noexcept { return data_; }
  const LossFamily &loss() const noexcept { return loss_; }
  const Regularizer &reg() const noexcept { return reg_; }
  std::optional<double> mu_override() const noexcept { return mu_override_; }
  std::size_t n() const noexcept { return data_->n(); }
  std::size_t d() const noexcept { return data_->d(); }

  /// Strong convexity handed to the solver: the override, else that of P.
  double mu() const noexcept { return mu_override_.value_or(reg_.strong_convexity()); }

  LossEval sample_loss(std::size_t i, double margin) const {
    return loss_value_grad(loss_, data_->label(i), margin);
  }

  ErmProblem with_loss(LossFamily loss) const { return {data_, loss, reg_, mu_override_}; }
  ErmProblem with_regularizer(Regularizer reg) const {
    return {data_, loss_, std::move(reg), mu_override_};
  }
  ErmProblem with_mu(std::optional<double> mu) const { return {data_, loss_, reg_, mu}; }

 private:
  std::shared_ptr<const Dataset> data_;
  LossFamily loss_;
  Regularizer reg_;
  std::optional<double> mu_override_;
};

inline void check_dimension(const ErmProblem &p, const Eigen::VectorXd &x) {
  if (static_cast<std::size_t>(x.size()) != p.d())
    throw std::invalid_argument("dimension mismatch: expected " + std::to_string(p.d()) +
                                ", got " + std::to_string(x.size()));
}

/// (1/n) sum_i phi_i(a_i^T x), given precomputed margins.
inline double smooth_part_from_margins(const ErmProblem &p, const Eigen::VectorXd &margins) {
  double acc = 0.0;
  for (std::size_t i = 0; i < p.n(); ++i) acc += p.sample_loss(i, margins[i]).value;
  return acc / static_cast<double>(p.n());
}

inline double full_objective(const ErmProblem &p, const Eigen::VectorXd &x) {
  check_dimension(p, x);
  return smooth_part_from_margins(p, p.data().margins(x)) + p.reg().value(x);
}

/// Gradient of the data term only; P is handled through its prox.
/// `margins_out`, when given, receives A x.
inline Eigen::VectorXd full_gradient(const ErmProblem &p, const Eigen::VectorXd &x,
                                     Eigen::VectorXd *margins_out = nullptr) {
  check_dimension(p, x);
  if (!p.loss().differentiable())
    throw std::invalid_argument("full_gradient: loss is not differentiable (set smoothing > 0)");
  const Dataset &ds = p.data();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.d()));
  if (margins_out) margins_out->resize(static_cast<Eigen::Index>(p.n()));
  for (std::size_t i = 0; i < ds.n(); ++i) {
    auto row = ds.row(i);
    const double z = row.dot(x);
    if (margins_out) (*margins_out)[static_cast<Eigen::Index>(i)] = z;
    const double c = p.sample_loss(i, z).derivative;
    for (std::size_t k = 0; k < row.nnz(); ++k) g[row.indices[k]] += c * row.values[k];
  }
  return g / static_cast<double>(ds.n());
}

/// L = c max_i |a_i|^2 and L_B = c max_i max_l |[a_i]_l|^2 with c the loss
/// curvature; mu is the override or the strong convexity of P.
inline ProblemConstants estimate_constants(const Dataset &ds, const BlockPartition &part,
                                           const LossFamily &loss, const Regularizer &reg,
                                           std::optional<double> mu_override = std::nullopt) {
  if (part.dim() != ds.d()) throw std::invalid_argument("estimate_constants: partition dimension");
  double max_row = 0.0, max_block = 0.0;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    auto row = ds.row(i);
    max_row = std::max(max_row, row.squared_norm());
    double acc = 0.0;
    std::size_t current = part.blocks();
    for (std::size_t k = 0; k < row.nnz(); ++k) {
      const auto l = part.block_of(row.indices[k]);
      if (l != current) {
        max_block = std::max(max_block, acc);
        acc = 0.0;
        current = l;
      }
      acc += row.values[k] * row.values[k];
    }
    max_block = std::max(max_block, acc);
  }
  ProblemConstants c;
  const double curv = loss.curvature();
  c.L = max_row == 0.0 ? 0.0 : curv * max_row;
  c.L_block = max_block == 0.0 ? 0.0 : curv * max_block;
  c.mu = mu_override.value_or(reg.strong_convexity());
  c.kappa = c.mu > 0.0 ? (c.L + c.L_block) / c.mu : std::numeric_limits<double>::infinity();
  return c;
}

inline ProblemConstants estimate_constants(const ErmProblem &p, const BlockPartition &part) {
  return estimate_constants(p.data(), part, p.loss(), p.reg(), p.mu_override());
}

}  // namespace adsg

#endif
