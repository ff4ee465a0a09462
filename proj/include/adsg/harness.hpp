#ifndef ADSG_HARNESS_HPP
#define ADSG_HARNESS_HPP

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "adsg.hpp"
#include "baselines.hpp"
#include "reductions.hpp"
#include "synthetic.hpp"

namespace adsg {

/// Invalid configuration, detected before any compute (exit code 2).
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Algorithm { adsg, svrg, mrbcd, katyusha };

inline Algorithm parse_algorithm(std::string_view name) {
  if (name == "adsg") return Algorithm::adsg;
  if (name == "svrg") return Algorithm::svrg;
  if (name == "mrbcd") return Algorithm::mrbcd;
  if (name == "katyusha") return Algorithm::katyusha;
  throw config_error("unknown algorithm: " + std::string(name));
}

inline const char *to_string(Algorithm a) {
  switch (a) {
    case Algorithm::adsg: return "adsg";
    case Algorithm::svrg: return "svrg";
    case Algorithm::mrbcd: return "mrbcd";
    case Algorithm::katyusha: return "katyusha";
  }
  return "?";
}

inline const char *to_string(ReductionMode r) {
  switch (r) {
    case ReductionMode::none: return "none";
    case ReductionMode::reg: return "reg";
    case ReductionMode::smooth: return "smooth";
    case ReductionMode::joint: return "joint";
  }
  return "?";
}

struct SynthSource {
  std::size_t n = 0;
  std::size_t d = 0;
  double kappa = 0.0;
};

/// Parse "n,d,kappa".
inline SynthSource parse_synth(std::string_view text) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : text) {
    if (ch == ',') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  parts.push_back(cur);
  if (parts.size() != 3) throw config_error("--synth expects n,d,kappa");
  SynthSource s;
  try {
    std::size_t used = 0;
    const long long n = std::stoll(parts[0], &used);
    if (used != parts[0].size() || n <= 0) throw std::invalid_argument("n");
    const long long d = std::stoll(parts[1], &used);
    if (used != parts[1].size() || d <= 0) throw std::invalid_argument("d");
    s.kappa = std::stod(parts[2], &used);
    if (used != parts[2].size()) throw std::invalid_argument("kappa");
    s.n = static_cast<std::size_t>(n);
    s.d = static_cast<std::size_t>(d);
  } catch (const std::exception &) {
    throw config_error("--synth expects positive integers n,d and a number kappa");
  }
  if (!(s.kappa >= 1.0)) throw config_error("--synth kappa must be >= 1");
  return s;
}

struct ExperimentConfig {
  std::optional<std::string> data_path;
  std::optional<SynthSource> synth;
  LossKind loss = LossKind::logistic;
  double smoothing = 0.0;
  double l1 = 0.0;
  std::optional<double> l2;  // synthetic sources pick their own when unset
  std::optional<double> mu;
  Algorithm algo = Algorithm::adsg;
  AdsgVariant variant = AdsgVariant::stable;
  std::size_t blocks = 1;
  std::size_t batch = 1;
  std::size_t epochs = 10;
  double step_multiplier = 1.0;
  ReductionMode reduce = ReductionMode::none;
  double epsilon = 1e-4;
  std::optional<double> mu0;
  std::optional<double> lambda0;
  std::uint64_t seed = 0;
  std::string out;
};

inline void validate(const ExperimentConfig &c) {
  if (c.data_path.has_value() == c.synth.has_value())
    throw config_error("exactly one of --data and --synth is required");
  if (c.blocks == 0 || c.batch == 0 || c.epochs == 0)
    throw config_error("blocks, batch and epochs must be >= 1");
  if (c.smoothing < 0.0 || c.l1 < 0.0 || (c.l2 && *c.l2 < 0.0) || (c.mu && *c.mu < 0.0))
    throw config_error("weights and smoothing must be >= 0");
  if (!(c.step_multiplier > 0.0)) throw config_error("--step-mult must be > 0");
  if (!(c.epsilon > 0.0)) throw config_error("--epsilon must be > 0");
  if (c.reduce != ReductionMode::none && c.algo != Algorithm::adsg)
    throw config_error("reductions wrap adsg only");
  const LossFamily f{c.loss, c.smoothing};
  if (c.reduce == ReductionMode::none && !f.differentiable())
    throw config_error("non-smooth loss needs --smooth > 0 or --reduce smooth|joint");
  if (c.reduce == ReductionMode::smooth && !f.lipschitz_family())
    throw config_error("--reduce smooth needs a lad or hinge loss");
  if (c.reduce == ReductionMode::reg && !f.differentiable())
    throw config_error("--reduce reg needs a smooth loss");
  if (c.out.empty()) throw config_error("--out is required");
}

/// Shortest decimal that round-trips the double.
inline std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline constexpr const char *kCsvHeader = "algo,epoch,epg,seconds,objective";

inline void write_csv(std::ostream &os, const std::vector<TraceRecord> &rows) {
  os << kCsvHeader << '\n';
  for (const auto &r : rows)
    os << r.algo << ',' << r.epoch << ',' << r.epg << ',' << format_double(r.seconds) << ','
       << format_double(r.objective) << '\n';
}

/// Build the problem; all failures here are configuration errors.
inline ErmProblem build_problem(const ExperimentConfig &c) {
  const LossFamily loss{c.loss, c.smoothing};
  Regularizer reg;
  reg.l1 = c.l1;
  std::shared_ptr<const Dataset> data;
  try {
    if (c.data_path) {
      data = std::make_shared<const Dataset>(load_libsvm(*c.data_path));
      reg.l2 = c.l2.value_or(0.0);
    } else {
      SyntheticSpec spec;
      spec.n = c.synth->n;
      spec.d = c.synth->d;
      spec.kappa = c.synth->kappa;
      spec.loss = loss.differentiable() ? loss : loss.with_smoothing(1.0);
      spec.blocks = std::min(c.blocks, c.synth->d);
      spec.seed = c.seed;
      SyntheticInstance inst = gen_synthetic(spec);
      data = inst.data;
      reg.l2 = c.l2.value_or(inst.reg.l2);
    }
    if (c.blocks > data->d()) throw config_error("--blocks exceeds the dimension");
    return ErmProblem(data, loss, reg, c.mu);
  } catch (const config_error &) {
    throw;
  } catch (const std::exception &e) {
    throw config_error(e.what());
  }
}

inline SolveResult run_solver(Algorithm a, const ErmProblem &p, const SolverConfig &cfg,
                              AdsgVariant variant) {
  switch (a) {
    case Algorithm::adsg: return run_adsg(p, cfg, variant);
    case Algorithm::svrg: return run_svrg(p, cfg);
    case Algorithm::mrbcd: return run_mrbcd(p, cfg);
    case Algorithm::katyusha: return run_katyusha(p, cfg);
  }
  throw config_error("unknown algorithm");
}

/// Run one configured experiment and return its trace. With a reduction, one
/// row is emitted per round with cumulative epochs, EPG and seconds.
inline std::vector<TraceRecord> run_trace(const ExperimentConfig &c) {
  validate(c);
  const ErmProblem p = build_problem(c);
  if (c.reduce == ReductionMode::none) {
    SolverConfig cfg;
    cfg.blocks = c.blocks;
    cfg.batch = c.batch;
    cfg.epochs = c.epochs;
    cfg.seed = c.seed;
    cfg.step_multiplier = c.step_multiplier;
    return run_solver(c.algo, p, cfg, c.variant).trace;
  }
  HoodOptions hopt;
  hopt.blocks = c.blocks;
  hopt.seed = c.seed;
  hopt.variant = c.variant;
  AdsgHood hood(hopt);
  ReductionOptions ropt;
  ropt.epsilon = c.epsilon;
  ropt.mu0 = c.mu0;
  ropt.lambda0 = c.lambda0;
  ropt.seed = c.seed;
  const std::string algo = std::string("adsg+") + to_string(c.reduce);
  std::vector<TraceRecord> rows;
  HoodSolver counted = [&](const ErmProblem &q, const Eigen::VectorXd &x0) {
    Eigen::VectorXd x = hood(q, x0);
    rows.push_back({algo, hood.epochs(), hood.epg(), hood.seconds(), full_objective(p, x)});
    return x;
  };
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.d()));
  switch (c.reduce) {
    case ReductionMode::reg: adapt_reg(counted, p, x0, ropt); break;
    case ReductionMode::smooth: adapt_smooth(counted, p, x0, ropt); break;
    default: joint_adapt(counted, p, x0, ropt); break;
  }
  return rows;
}

/// Run and write the CSV to `c.out`.
inline std::vector<TraceRecord> run_experiment(const ExperimentConfig &c) {
  validate(c);
  std::ofstream os(c.out, std::ios::binary | std::ios::trunc);
  if (!os) throw config_error("cannot open output file: " + c.out);
  std::vector<TraceRecord> rows = run_trace(c);
  write_csv(os, rows);
  if (!os) throw std::runtime_error("write failed: " + c.out);
  return rows;
}

/// Worker count: BENCH_THREADS when set to a positive integer, else the
/// hardware concurrency, never more than `jobs`.
inline std::size_t worker_count(std::size_t jobs) {
  std::size_t cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char *env = std::getenv("BENCH_THREADS")) {
    std::size_t v = 0;
    const std::string_view s(env);
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec == std::errc() && r.ptr == s.data() + s.size() && v > 0) cap = v;
  }
  return std::max<std::size_t>(1, std::min(cap, jobs));
}

struct ExperimentOutcome {
  int exit_code = 0;
  std::string message;
};

/// Exit code for a single run: 0 ok, 1 runtime failure, 2 config error.
inline ExperimentOutcome run_guarded(const ExperimentConfig &c) {
  try {
    run_experiment(c);
    return {0, {}};
  } catch (const config_error &e) {
    return {2, e.what()};
  } catch (const std::exception &e) {
    return {1, e.what()};
  }
}

/// Run independent experiments on a worker pool; each writes its own file.
inline std::vector<ExperimentOutcome> run_experiments(const std::vector<ExperimentConfig> &jobs) {
  std::vector<ExperimentOutcome> out(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) out[i] = run_guarded(jobs[i]);
  };
  std::vector<std::thread> pool;
  const std::size_t w = worker_count(jobs.size());
  for (std::size_t t = 1; t < w; ++t) pool.emplace_back(worker);
  worker();
  for (auto &t : pool) t.join();
  return out;
}

}  // namespace adsg

#endif
