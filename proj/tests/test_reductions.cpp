#include <catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"

using namespace adsg;

namespace {

ErmProblem dense_problem(const Eigen::MatrixXd &a, const Eigen::VectorXd &y, LossFamily f,
                         Regularizer r) {
  return ErmProblem(std::make_shared<const Dataset>(from_dense(a, y, true)), f, r);
}

struct Lasso {
  Eigen::MatrixXd a;
  Eigen::VectorXd y;
  double l1 = 0.01;
  ErmProblem problem() const { return dense_problem(a, y, {LossKind::squared, 0.0}, {l1, 0.0}); }
};

Lasso make_lasso(std::uint64_t seed, Eigen::Index n = 200, Eigen::Index d = 50) {
  Lasso l;
  l.a = oracle::random_matrix(n, d, seed);
  Eigen::VectorXd truth = oracle::random_matrix(d, 1, seed + 100).col(0);
  truth.tail(d - d / 5).setZero();
  l.y = l.a * truth + 0.1 * oracle::random_matrix(n, 1, seed + 200).col(0);
  return l;
}

Eigen::VectorXd random_start(const Eigen::VectorXd &centre, std::mt19937_64 &g, double scale) {
  std::normal_distribution<double> nd;
  Eigen::VectorXd x = centre;
  for (auto &v : x) v += scale * nd(g);
  return x;
}

}  // namespace

TEST_CASE("HOOD quarters the gap of a pure quadratic") {
  const std::size_t n = 6;
  const Eigen::MatrixXd a = std::sqrt(static_cast<double>(n)) * Eigen::MatrixXd::Identity(n, n);
  Regularizer r;
  r.l2 = 0.1;
  const ErmProblem p = dense_problem(a, Eigen::VectorXd::Zero(n), {LossKind::squared, 0.0}, r);
  std::mt19937_64 g(1);
  for (int t = 0; t < 10; ++t) {
    const Eigen::VectorXd x0 = random_start(Eigen::VectorXd::Zero(n), g, 3.0);
    HoodOptions o;
    o.seed = static_cast<std::uint64_t>(t);
    const HoodRun out = hood_wrap_adsg(p, x0, o);
    CHECK(full_objective(p, out.x) <= full_objective(p, x0) / 4.0);
  }
}

TEST_CASE("HOOD quartering on ridge starts, single and chained") {
  SyntheticSpec spec;
  spec.n = 200;
  spec.d = 50;
  spec.kappa = 2000.0;
  spec.blocks = 5;
  spec.seed = 3;
  const SyntheticInstance inst = gen_synthetic(spec);
  const ErmProblem p = inst.problem(spec.loss);
  const double fs = *inst.f_star;
  std::mt19937_64 g(2);
  AdsgHood hood({5, kHoodEpochConstant, 17, AdsgVariant::stable});
  for (int t = 0; t < 20; ++t) {
    const Eigen::VectorXd x0 = random_start(inst.x_star, g, std::pow(10.0, t % 3 - 1));
    const double g0 = full_objective(p, x0) - fs;
    const Eigen::VectorXd x1 = hood(p, x0);
    const double g1 = full_objective(p, x1) - fs;
    CHECK(g1 <= g0 / 4.0);
    const double g2 = full_objective(p, hood(p, x1)) - fs;
    CHECK(g2 <= g0 / 16.0);
  }
  CHECK(hood.calls() == 40);
}

TEST_CASE("HOOD epoch constant keeps a factor-two margin on the calibration family") {
  for (double kappa : {10.0, 100.0, 1000.0, 20000.0}) {
    for (std::size_t blocks : {1, 5, 10}) {
      SyntheticSpec spec;
      spec.n = 200;
      spec.d = 50;
      spec.kappa = kappa;
      spec.blocks = blocks;
      spec.seed = 11;
      const SyntheticInstance inst = gen_synthetic(spec);
      const ErmProblem p = inst.problem(spec.loss);
      std::mt19937_64 g(5);
      for (int t = 0; t < 20; ++t) {
        const Eigen::VectorXd x0 = random_start(inst.x_star, g, std::pow(10.0, t % 4 - 1));
        HoodOptions o;
        o.blocks = blocks;
        o.seed = 1000 + static_cast<std::uint64_t>(t);
        o.epoch_constant = kHoodEpochConstant / 2.0;
        const double g0 = full_objective(p, x0) - *inst.f_star;
        const double g1 = full_objective(p, hood_wrap_adsg(p, x0, o).x) - *inst.f_star;
        INFO("kappa " << kappa << " B " << blocks << " start " << t);
        REQUIRE(g1 <= g0 / 4.0);
      }
    }
  }
}

TEST_CASE("HOOD preconditions") {
  const Lasso l = make_lasso(1, 30, 5);
  CHECK_THROWS_AS(hood_wrap_adsg(l.problem(), Eigen::VectorXd::Zero(5)), std::invalid_argument);
  const ErmProblem hinge = dense_problem(l.a, oracle::sign_labels(l.y), {LossKind::hinge, 0.0}, {0.0, 1.0});
  CHECK_THROWS_AS(hood_wrap_adsg(hinge, Eigen::VectorXd::Zero(5)), std::invalid_argument);
}

TEST_CASE("AdaptReg round schedule") {
  const Lasso l = make_lasso(2, 60, 10);
  const ErmProblem p = l.problem();
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(10);
  std::size_t calls = 0;
  std::vector<double> seen_mu;
  AdsgHood inner({2, kHoodEpochConstant, 3, AdsgVariant::stable});
  HoodSolver hood = [&](const ErmProblem &q, const Eigen::VectorXd &x) {
    ++calls;
    seen_mu.push_back(q.reg().anchor_weight);
    CHECK(q.reg().anchor);
    CHECK(*q.reg().anchor == x0);
    return inner(q, x);
  };
  ReductionOptions o;
  o.epsilon = 0.01;
  o.initial_gap = 0.08;
  o.mu0 = 0.5;
  const ReductionResult r = adapt_reg(hood, p, x0, o);
  CHECK(r.T == 3);
  CHECK(calls == 3);
  REQUIRE(r.rounds.size() == 3);
  for (std::size_t t = 0; t < 3; ++t) {
    CHECK(r.rounds[t].mu == std::ldexp(0.5, -static_cast<int>(t)));
    CHECK(seen_mu[t] == r.rounds[t].mu);
    CHECK(r.rounds[t].lambda == 0.0);
  }
  o.initial_gap = 0.001;
  CHECK(adapt_reg(hood, p, x0, o).T == 1);
  CHECK_THROWS_AS(adapt_reg(hood, p.with_loss({LossKind::hinge, 0.0}), x0, o), std::invalid_argument);
}

TEST_CASE("AdaptReg on a strongly convex P matches a direct solve") {
  SyntheticSpec spec;
  spec.n = 100;
  spec.d = 20;
  spec.kappa = 50.0;
  spec.seed = 6;
  const SyntheticInstance inst = gen_synthetic(spec);
  const ErmProblem p = inst.problem(spec.loss);
  AdsgHood hood({1, kHoodEpochConstant, 8, AdsgVariant::stable});
  ReductionOptions o;
  o.epsilon = 1e-6;
  o.mu0 = 1e-3 * inst.reg.l2;
  const ReductionResult r = adapt_reg(hood.solver(), p, Eigen::VectorXd::Zero(20), o);
  CHECK(full_objective(p, r.x) - *inst.f_star <= o.epsilon);
}

TEST_CASE("AdaptReg solves a lasso instance") {
  const Lasso l = make_lasso(4);
  const ErmProblem p = l.problem();
  const double fs = full_objective(p, oracle::lasso_cd(l.a, l.y, l.l1, 0.0));
  AdsgHood hood({5, kHoodEpochConstant, 4, AdsgVariant::stable});
  ReductionOptions o;
  o.epsilon = 1e-4;
  o.seed = 4;
  const ReductionResult r = adapt_reg(hood.solver(), p, Eigen::VectorXd::Zero(50), o);
  CHECK(full_objective(p, r.x) - fs <= 2.0 * o.epsilon);
  CHECK(hood.calls() == r.T);
  std::size_t rises = 0;
  for (std::size_t t = 1; t < r.rounds.size(); ++t)
    rises += r.rounds[t].objective > r.rounds[t - 1].objective;
  CHECK(static_cast<double>(rises) <= 0.1 * static_cast<double>(r.rounds.size()));
}

TEST_CASE("AdaptSmooth preconditions and rounds") {
  const Lasso l = make_lasso(5, 80, 8);
  const Eigen::VectorXd labels = oracle::sign_labels(l.y);
  const ErmProblem svm = dense_problem(l.a, labels, {LossKind::hinge, 0.0}, {0.0, 0.05});
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(8);
  AdsgHood inner({2, kHoodEpochConstant, 3, AdsgVariant::stable});

  CHECK_THROWS_AS(adapt_smooth(inner.solver(), svm.with_loss({LossKind::logistic, 0.0}), x0),
                  std::invalid_argument);
  CHECK_THROWS_AS(adapt_smooth(inner.solver(), svm.with_regularizer({0.0, 0.0}), x0),
                  std::invalid_argument);

  ReductionOptions big;
  big.epsilon = 10.0;
  CHECK(adapt_smooth(inner.solver(), svm, x0, big).T == 1);

  ReductionOptions o;
  o.epsilon = 1e-3;
  o.lambda0 = 0.4;
  std::vector<Eigen::VectorXd> outputs;
  HoodSolver hood = [&](const ErmProblem &q, const Eigen::VectorXd &x) {
    outputs.push_back(inner(q, x));
    return outputs.back();
  };
  const ReductionResult r = adapt_smooth(hood, svm, x0, o);
  REQUIRE(outputs.size() == r.T);
  for (std::size_t t = 0; t < r.T; ++t) {
    CHECK(r.rounds[t].lambda == std::ldexp(0.4, -static_cast<int>(t)));
    CHECK(r.rounds[t].mu == 0.0);
    const ErmProblem smoothed = svm.with_loss({LossKind::hinge, r.rounds[t].lambda});
    const double gap = full_objective(svm, outputs[t]) - full_objective(smoothed, outputs[t]);
    CHECK(gap >= 0.0);
    CHECK(gap <= smooth_gap_bound(svm.loss(), r.rounds[t].lambda) + 1e-12);
  }
}

TEST_CASE("AdaptSmooth solves an l2 SVM instance") {
  const Lasso l = make_lasso(6);
  const Eigen::VectorXd labels =
      oracle::sign_labels(l.y + 0.5 * oracle::random_matrix(200, 1, 9).col(0));
  const double l2 = 0.01;
  const ErmProblem svm = dense_problem(l.a, labels, {LossKind::hinge, 0.0}, {0.0, l2});
  const double fs = full_objective(svm, oracle::svm_dual_cd(l.a, labels, l2));
  AdsgHood hood({5, kHoodEpochConstant, 6, AdsgVariant::stable});
  ReductionOptions o;
  o.epsilon = 1e-4;
  o.seed = 6;
  const ReductionResult r = adapt_smooth(hood.solver(), svm, Eigen::VectorXd::Zero(50), o);
  CHECK(full_objective(svm, r.x) - fs <= 2.0 * o.epsilon);
}

TEST_CASE("JointAdaptRegSmooth degenerates to the single reductions") {
  const Lasso l = make_lasso(7, 60, 6);
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(6);
  ReductionOptions o;
  o.epsilon = 1e-3;
  o.initial_gap = 0.5;
  o.mu0 = 0.2;
  o.lambda0 = 0.3;

  const ErmProblem smoothed_lad = dense_problem(l.a, l.y, {LossKind::absolute_deviation, 0.1}, {0.01, 0.0});
  AdsgHood h1({1, kHoodEpochConstant, 1, AdsgVariant::stable}), h2 = h1;
  const ReductionResult joint_reg = joint_adapt(h1.solver(), smoothed_lad, x0, o);
  const ReductionResult plain_reg = adapt_reg(h2.solver(), smoothed_lad, x0, o);
  REQUIRE(joint_reg.rounds.size() == plain_reg.rounds.size());
  for (std::size_t t = 0; t < joint_reg.rounds.size(); ++t) {
    CHECK(joint_reg.rounds[t].mu == plain_reg.rounds[t].mu);
    CHECK(joint_reg.rounds[t].lambda == 0.0);
  }
  CHECK(joint_reg.x == plain_reg.x);

  const ErmProblem svm = dense_problem(l.a, oracle::sign_labels(l.y), {LossKind::hinge, 0.0}, {0.0, 0.05});
  AdsgHood h3({1, kHoodEpochConstant, 1, AdsgVariant::stable}), h4 = h3;
  const ReductionResult joint_smooth = joint_adapt(h3.solver(), svm, x0, o);
  const ReductionResult plain_smooth = adapt_smooth(h4.solver(), svm, x0, o);
  REQUIRE(joint_smooth.rounds.size() == plain_smooth.rounds.size());
  for (std::size_t t = 0; t < joint_smooth.rounds.size(); ++t) {
    CHECK(joint_smooth.rounds[t].lambda == plain_smooth.rounds[t].lambda);
    CHECK(joint_smooth.rounds[t].mu == 0.0);
  }
  CHECK(joint_smooth.x == plain_smooth.x);

  const ErmProblem raw_lad = smoothed_lad.with_loss({LossKind::absolute_deviation, 0.0});
  AdsgHood h5({1, kHoodEpochConstant, 1, AdsgVariant::stable});
  const ReductionResult both = joint_adapt(h5.solver(), raw_lad, x0, o);
  for (std::size_t t = 0; t < both.rounds.size(); ++t) {
    CHECK(both.rounds[t].mu == std::ldexp(0.2, -static_cast<int>(t)));
    CHECK(both.rounds[t].lambda == std::ldexp(0.3, -static_cast<int>(t)));
  }
}

TEST_CASE("JointAdaptRegSmooth solves an l1 LAD instance") {
  // F* of this instance (l1 = 0.01) from the linear program in
  // data/lad_reference.py, solved with HiGHS.
  constexpr double kLadOptimum = 0.4626599666859762;
  const auto data = std::make_shared<const Dataset>(load_libsvm(ADSG_TEST_DATA "/lad_l1.svm"));
  REQUIRE(data->n() == 50);
  REQUIRE(data->d() == 10);
  Regularizer r;
  r.l1 = 0.01;
  const ErmProblem p(data, {LossKind::absolute_deviation, 0.0}, r);
  AdsgHood hood({2, kHoodEpochConstant, 5, AdsgVariant::stable});
  ReductionOptions o;
  o.epsilon = 1e-3;
  o.seed = 5;
  const ReductionResult res = joint_adapt(hood.solver(), p, Eigen::VectorXd::Zero(10), o);
  const double gap = full_objective(p, res.x) - kLadOptimum;
  CHECK(gap >= -1e-9);
  CHECK(gap <= 2.0 * o.epsilon);
}
