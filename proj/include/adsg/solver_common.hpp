#ifndef ADSG_SOLVER_COMMON_HPP
#define ADSG_SOLVER_COMMON_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "problem.hpp"
#include "schedule.hpp"

namespace adsg {

class divergence_error : public std::runtime_error {
 public:
  divergence_error(std::size_t epoch, double value)
      : std::runtime_error("divergence at epoch " + std::to_string(epoch) +
                           ": objective = " + std::to_string(value)),
        epoch_(epoch) {}
  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

/// One CSV row: `algo,epoch,epg,seconds,objective`.
struct TraceRecord {
  std::string algo;
  std::size_t epoch = 0;
  std::uint64_t epg = 0;
  double seconds = 0.0;
  double objective = 0.0;
};

/// Optional per-iteration hooks, for tests and diagnostics. Materializing the
/// iterates for `on_iterate` costs O(d) per call and is not counted as work.
struct IterationObserver {
  std::function<void(std::size_t epoch, const Eigen::VectorXd &snapshot,
                     const EpochCoefficients &coeffs)>
      on_epoch;
  std::function<void(std::size_t k, const Eigen::VectorXd &x, const Eigen::VectorXd &y,
                     const Eigen::VectorXd &z)>
      on_iterate;
  /// Coordinates touched by inner iteration k, and the nnz of its sampled rows.
  std::function<void(std::size_t k, std::uint64_t touched, std::size_t sampled_nnz)> on_cost;
};

struct SolverConfig {
  std::size_t blocks = 1;
  std::size_t batch = 1;
  std::size_t epochs = 10;
  std::uint64_t seed = 0;
  ScheduleKind schedule = ScheduleKind::automatic;
  /// Constants override; estimated from the data when unset.
  std::optional<ProblemConstants> constants;
  /// Starting point; zero when empty.
  Eigen::VectorXd x0;
  /// Baselines only: step multiplier and inner-loop count override.
  double step_multiplier = 1.0;
  std::optional<std::size_t> inner_iterations;
  /// Abort when the objective exceeds this multiple of its initial value.
  double divergence_factor = 1e6;
  /// Stop after the first epoch whose objective is <= this value.
  std::optional<double> stop_below;
  std::function<void(const TraceRecord &)> on_trace;
  const IterationObserver *observer = nullptr;
};

struct SolveResult {
  Eigen::VectorXd x;  // final snapshot
  std::vector<TraceRecord> trace;
  double initial_objective = 0.0;
  std::uint64_t epg = 0;
  std::size_t epochs_run = 0;
  std::uint64_t touched_total = 0;  // inner-loop coordinate touches
};

/// Closed-form EPG of `epochs` epochs: one full pass (n) plus 2b component
/// gradients (at y and at the snapshot) per inner iteration.
constexpr std::uint64_t epg_count(std::uint64_t n, std::uint64_t inner, std::uint64_t batch,
                                  std::uint64_t epochs) {
  return epochs * (n + 2 * batch * inner);
}

/// Counts evaluated component gradients as they happen.
class EpgCounter {
 public:
  void full_pass(std::size_t n) noexcept { count_ += n; }
  void components(std::size_t k) noexcept { count_ += k; }
  std::uint64_t value() const noexcept { return count_; }

 private:
  std::uint64_t count_ = 0;
};

/// Wall clock that can be paused while the objective is measured.
class Stopwatch {
 public:
  void start() { since_ = clock::now(); running_ = true; }
  void stop() {
    if (running_) elapsed_ += std::chrono::duration<double>(clock::now() - since_).count();
    running_ = false;
  }
  double seconds() const {
    return elapsed_ +
           (running_ ? std::chrono::duration<double>(clock::now() - since_).count() : 0.0);
  }

 private:
  using clock = std::chrono::steady_clock;
  clock::time_point since_{};
  double elapsed_ = 0.0;
  bool running_ = false;
};

namespace detail {

inline Eigen::VectorXd starting_point(const ErmProblem &p, const SolverConfig &cfg) {
  if (cfg.x0.size() == 0) return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.d()));
  check_dimension(p, cfg.x0);
  return cfg.x0;
}

inline void validate_config(const ErmProblem &p, const SolverConfig &cfg) {
  if (cfg.batch == 0) throw std::invalid_argument("batch size must be >= 1");
  if (cfg.epochs == 0) throw std::invalid_argument("epochs must be >= 1");
  if (cfg.blocks == 0 || cfg.blocks > p.d())
    throw std::invalid_argument("blocks must satisfy 1 <= B <= d");
  if (!p.loss().differentiable())
    throw std::invalid_argument("solver requires a differentiable loss (set smoothing > 0)");
  if (!(cfg.step_multiplier > 0.0)) throw std::invalid_argument("step multiplier must be > 0");
}

/// Shared per-epoch bookkeeping: objective, divergence guard, trace emission.
class EpochReporter {
 public:
  EpochReporter(const ErmProblem &p, const SolverConfig &cfg, std::string algo,
                const Eigen::VectorXd &x0)
      : p_(p), cfg_(cfg), algo_(std::move(algo)) {
    result_.initial_objective = full_objective(p_, x0);
    if (!std::isfinite(result_.initial_objective)) throw divergence_error(0, result_.initial_objective);
    watch_.start();
  }

  EpgCounter &epg() noexcept { return epg_; }
  Stopwatch &watch() noexcept { return watch_; }
  void add_touched(std::uint64_t t) noexcept { result_.touched_total += t; }

  /// Record the end of `epoch` (1-based) at snapshot x. Returns true when the
  /// stop threshold is reached.
  bool end_epoch(std::size_t epoch, const Eigen::VectorXd &x) {
    watch_.stop();
    const double f = full_objective(p_, x);
    const double f0 = result_.initial_objective;
    if (!std::isfinite(f) || (f0 != 0.0 && f > cfg_.divergence_factor * std::abs(f0)))
      throw divergence_error(epoch, f);
    TraceRecord rec{algo_, epoch, epg_.value(), watch_.seconds(), f};
    if (cfg_.on_trace) cfg_.on_trace(rec);
    result_.trace.push_back(std::move(rec));
    result_.epochs_run = epoch;
    const bool stop = cfg_.stop_below && f <= *cfg_.stop_below;
    watch_.start();
    return stop;
  }

  SolveResult finish(Eigen::VectorXd x) {
    watch_.stop();
    result_.x = std::move(x);
    result_.epg = epg_.value();
    return std::move(result_);
  }

 private:
  const ErmProblem &p_;
  const SolverConfig &cfg_;
  std::string algo_;
  EpgCounter epg_;
  Stopwatch watch_;
  SolveResult result_;
};

/// Draw one mini-batch (sample stream) and one block (block stream).
inline std::size_t draw_batch_and_block(RngStreams &rng, std::size_t n, std::size_t batch,
                                        std::size_t blocks, std::vector<std::size_t> &out) {
  out.resize(batch);
  for (auto &i : out) i = rng.sample(n);
  return rng.block(blocks);
}

inline ProblemConstants resolve_constants(const ErmProblem &p, const BlockPartition &part,
                                          const SolverConfig &cfg) {
  return cfg.constants ? *cfg.constants : estimate_constants(p, part);
}

}  // namespace detail

}  // namespace adsg

#endif
