#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "adsg/harness.hpp"

namespace {

adsg::ExperimentConfig to_config(const std::string &data, const std::string &synth,
                                 const std::string &loss, const std::string &algo,
                                 const std::string &variant, const std::string &reduce) {
  adsg::ExperimentConfig c;
  if (!data.empty()) c.data_path = data;
  if (!synth.empty()) c.synth = adsg::parse_synth(synth);
  c.algo = adsg::parse_algorithm(algo);
  try {
    c.loss = adsg::parse_loss_kind(loss);
    c.variant = adsg::parse_variant(variant);
    c.reduce = adsg::parse_reduction(reduce);
  } catch (const std::invalid_argument &e) {
    throw adsg::config_error(e.what());
  }
  return c;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"ADSG benchmark driver"};
  app.require_subcommand(1);
  CLI::App *run = app.add_subcommand("run", "run one experiment and write a CSV trace");

  std::string data, synth, loss = "logistic", algo, variant = "stable", reduce = "none", out;
  double smooth = 0.0, l1 = 0.0, step_mult = 1.0, epsilon = 1e-4;
  std::optional<double> l2, mu, mu0, lambda0;
  std::size_t blocks = 1, batch = 1, epochs = 10;
  std::uint64_t seed = 0;

  auto *data_opt = run->add_option("--data", data, "LIBSVM file (.gz accepted)");
  auto *synth_opt = run->add_option("--synth", synth, "synthetic instance n,d,kappa");
  data_opt->excludes(synth_opt);
  run->add_option("--loss", loss, "logistic|squared|lad|hinge");
  run->add_option("--smooth", smooth, "smoothing lambda for lad/hinge");
  run->add_option("--l1", l1, "l1 weight");
  run->add_option("--l2", l2, "l2 weight");
  run->add_option("--mu", mu, "strong convexity override");
  run->add_option("--algo", algo, "adsg|svrg|mrbcd|katyusha")->required();
  run->add_option("--variant", variant, "ref|efficient|stable");
  run->add_option("--blocks", blocks, "number of coordinate blocks");
  run->add_option("--batch", batch, "mini-batch size");
  run->add_option("--epochs", epochs, "outer epochs");
  run->add_option("--step-mult", step_mult, "baseline step multiplier");
  run->add_option("--reduce", reduce, "none|reg|smooth|joint");
  run->add_option("--epsilon", epsilon, "reduction target accuracy");
  run->add_option("--mu0", mu0, "initial added strong convexity");
  run->add_option("--lambda0", lambda0, "initial smoothing");
  run->add_option("--seed", seed, "random seed")->required();
  run->add_option("--out", out, "output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  adsg::ExperimentConfig c;
  try {
    c = to_config(data, synth, loss, algo, variant, reduce);
  } catch (const adsg::config_error &e) {
    std::cerr << "bench: " << e.what() << '\n';
    return 2;
  }
  c.smoothing = smooth;
  c.l1 = l1;
  c.l2 = l2;
  c.mu = mu;
  c.blocks = blocks;
  c.batch = batch;
  c.epochs = epochs;
  c.step_multiplier = step_mult;
  c.epsilon = epsilon;
  c.mu0 = mu0;
  c.lambda0 = lambda0;
  c.seed = seed;
  c.out = out;

  const adsg::ExperimentOutcome r = adsg::run_guarded(c);
  if (r.exit_code != 0) std::cerr << "bench: " << r.message << '\n';
  return r.exit_code;
}
