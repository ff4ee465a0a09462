#include <catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"

using namespace adsg;

namespace {

std::shared_ptr<const Dataset> dense_data(const Eigen::MatrixXd &a, const Eigen::VectorXd &y) {
  return std::make_shared<const Dataset>(from_dense(a, y, true));
}

}  // namespace

TEST_CASE("loss values and derivatives at reference points") {
  const LossEval lg = loss_value_grad({LossKind::logistic, 0.0}, 1.0, 0.0);
  CHECK(lg.value == Catch::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(lg.derivative == -0.5);

  const LossEval h = loss_value_grad({LossKind::hinge, 0.5}, 1.0, 2.0);
  CHECK(h.value == 0.0);
  CHECK(h.derivative == 0.0);

  const LossEval centre = loss_value_grad({LossKind::absolute_deviation, 0.1}, 3.0, 3.0);
  CHECK(centre.value == 0.0);
  CHECK(centre.derivative == 0.0);

  const LossEval lad = loss_value_grad({LossKind::absolute_deviation, 0.1}, 0.0, 0.2);
  CHECK(std::abs(lad.value - 0.15) <= 1e-15);
  CHECK(lad.derivative == 1.0);
}

TEST_CASE("smoothed losses are continuous across branch boundaries") {
  for (double lam : {1.0, 0.1, 0.01}) {
    const LossFamily lad{LossKind::absolute_deviation, lam}, hinge{LossKind::hinge, lam};
    for (double y : {-1.0, 1.0}) {
      for (double edge : {y + lam, y - lam}) {
        const double below = loss_value_grad(lad, y, std::nextafter(edge, -1e9)).value;
        const double above = loss_value_grad(lad, y, std::nextafter(edge, 1e9)).value;
        CHECK(std::abs(below - above) <= 1e-12);
      }
      for (double m : {1.0, 1.0 - lam}) {
        const double z = m / y;
        const double a = loss_value_grad(hinge, y, z - 1e-12).value;
        const double b = loss_value_grad(hinge, y, z + 1e-12).value;
        CHECK(std::abs(a - b) <= 1e-11);
      }
    }
  }
}

TEST_CASE("loss derivatives match central differences") {
  std::mt19937_64 g(42);
  std::uniform_real_distribution<double> zdist(-4.0, 4.0);
  const std::vector<LossFamily> families = {{LossKind::logistic, 0.0},
                                            {LossKind::squared, 0.0},
                                            {LossKind::absolute_deviation, 0.3},
                                            {LossKind::hinge, 0.3}};
  for (const LossFamily &f : families) {
    int checked = 0;
    while (checked < 100) {
      const double y = f.binary_labels() ? (zdist(g) > 0 ? 1.0 : -1.0) : zdist(g);
      const double z = zdist(g);
      if (f.kind == LossKind::absolute_deviation &&
          std::min(std::abs(z - y - f.smoothing), std::abs(z - y + f.smoothing)) < 1e-4)
        continue;
      if (f.kind == LossKind::hinge &&
          std::min(std::abs(y * z - 1.0), std::abs(y * z - 1.0 + f.smoothing)) < 1e-4)
        continue;
      const double h = 1e-6;
      const double fd = (loss_value_grad(f, y, z + h).value - loss_value_grad(f, y, z - h).value) / (2 * h);
      REQUIRE(std::abs(fd - loss_value_grad(f, y, z).derivative) < 1e-5);
      ++checked;
    }
  }
}

TEST_CASE("smoothing sandwich: 0 <= phi - phi_lambda <= lambda / 2") {
  std::mt19937_64 g(7);
  std::uniform_real_distribution<double> zdist(-5.0, 5.0);
  for (LossKind k : {LossKind::absolute_deviation, LossKind::hinge}) {
    for (double lam : {1.0, 0.1, 0.01}) {
      const LossFamily raw{k, 0.0}, smooth{k, lam};
      const double bound = smooth_gap_bound(raw, lam);
      CHECK(bound == 0.5 * lam);
      for (int t = 0; t < 1000; ++t) {
        const double y = k == LossKind::hinge ? (t % 2 ? 1.0 : -1.0) : zdist(g);
        const double z = zdist(g);
        const double gap = loss_value_grad(raw, y, z).value - loss_value_grad(smooth, y, z).value;
        REQUIRE(gap >= 0.0);
        REQUIRE(gap <= bound + 1e-12);
      }
    }
  }
}

TEST_CASE("smooth_gap_bound") {
  CHECK(smooth_gap_bound({LossKind::absolute_deviation, 0.0}, 0.2) == Catch::Approx(0.1));
  CHECK(smooth_gap_bound({LossKind::hinge, 0.0}, 0.0) == 0.0);
  CHECK_THROWS_AS(smooth_gap_bound({LossKind::logistic, 0.0}, 0.5), std::invalid_argument);
  // The bound is attained once the residual leaves the smoothing window.
  double worst = 0.0;
  for (int t = -5000; t <= 5000; ++t) {
    const double z = t * 1e-4;
    worst = std::max(worst, loss_value_grad({LossKind::absolute_deviation, 0.0}, 0.0, z).value -
                                loss_value_grad({LossKind::absolute_deviation, 0.2}, 0.0, z).value);
  }
  CHECK(worst <= 0.1 + 1e-12);
  CHECK(worst == Catch::Approx(0.1).margin(1e-12));
}

TEST_CASE("prox_block against the golden-section oracle") {
  Regularizer lasso;
  lasso.l1 = 1.0;
  const Eigen::Vector3d out = prox_block(lasso, Eigen::Vector3d(3.0, -0.5, 0.0), 1.0);
  CHECK(out[0] == 2.0);
  CHECK(out[1] == 0.0);
  CHECK(out[2] == 0.0);

  const Eigen::Vector3d y(1.5, -2.0, 0.25);
  CHECK(prox_block(Regularizer{}, y, 0.7) == y);

  Regularizer ridge;
  ridge.l2 = 2.0;
  CHECK(prox_block(ridge, Eigen::VectorXd::Constant(1, 4.0), 0.5)[0] == 2.0);
  CHECK(std::abs(oracle::numeric_prox(4.0, 0.5, 0.0, 2.0) - 2.0) <= 1e-8);

  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0), w(0.0, 2.0), e(0.05, 3.0);
  for (int t = 0; t < 200; ++t) {
    Regularizer r;
    r.l1 = w(g);
    r.l2 = w(g);
    const double eta = e(g), v = u(g);
    const double got = r.prox_coordinate(v, eta, 0);
    const double ref = oracle::numeric_prox(v, eta, r.l1, r.l2);
    REQUIRE(std::abs(got - ref) <= 1e-8);
    auto obj = [&](double x) {
      return eta * (r.l1 * std::abs(x) + 0.5 * r.l2 * x * x) + 0.5 * (x - v) * (x - v);
    };
    REQUIRE(obj(got) <= obj(ref) + 1e-10);
  }
  CHECK_THROWS_AS(prox_block(ridge, y, 0.0), std::invalid_argument);
}

TEST_CASE("prox is block separable") {
  Regularizer r;
  r.l1 = 0.3;
  r.l2 = 0.7;
  const Eigen::VectorXd y = oracle::random_matrix(11, 1, 5).col(0);
  const Eigen::VectorXd whole = prox_block(r, y, 0.4);
  const BlockPartition part(11, 4);
  for (std::size_t l = 0; l < part.blocks(); ++l) {
    const auto lo = static_cast<Eigen::Index>(part.begin(l));
    const auto sz = static_cast<Eigen::Index>(part.size(l));
    CHECK(prox_block(r, y.segment(lo, sz), 0.4, part.begin(l)) == whole.segment(lo, sz));
  }
}

TEST_CASE("anchored prox minimizes the shifted quadratic") {
  auto at = std::make_shared<const Eigen::VectorXd>(Eigen::VectorXd::Constant(1, 1.5));
  Regularizer r;
  r.l1 = 0.2;
  r = r.with_anchor(0.8, at);
  const double v = -0.4, eta = 0.9;
  auto obj = [&](double x) {
    return eta * (0.2 * std::abs(x) + 0.4 * (x - 1.5) * (x - 1.5)) + 0.5 * (x - v) * (x - v);
  };
  const double ref = oracle::golden_min(obj, -5.0, 5.0);
  CHECK(std::abs(r.prox_coordinate(v, eta, 0) - ref) <= 1e-8);
  CHECK(r.strong_convexity() == 0.8);
}

TEST_CASE("full objective") {
  const Eigen::MatrixXd a = oracle::random_matrix(30, 6, 1);
  const Eigen::VectorXd y = oracle::sign_labels(oracle::random_matrix(30, 1, 2).col(0));
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(6);
  ErmProblem logistic(dense_data(a, y), {LossKind::logistic, 0.0}, Regularizer{});
  CHECK(std::abs(full_objective(logistic, zero) - std::log(2.0)) <= 1e-15);

  const Eigen::VectorXd t = oracle::random_matrix(30, 1, 3).col(0);
  Regularizer ridge;
  ridge.l2 = 0.5;
  ErmProblem sq(dense_data(a, t), {LossKind::squared, 0.0}, ridge);
  CHECK(std::abs(full_objective(sq, zero) - t.squaredNorm() / 60.0) <= 1e-14);

  Regularizer en;
  en.l1 = 0.1;
  en.l2 = 0.2;
  const Eigen::VectorXd x = oracle::random_matrix(6, 1, 4).col(0);
  for (const LossFamily f : {LossFamily{LossKind::logistic, 0.0}, LossFamily{LossKind::hinge, 0.0},
                             LossFamily{LossKind::hinge, 0.2}}) {
    ErmProblem p(dense_data(a, y), f, en);
    CHECK(std::abs(full_objective(p, x) - oracle::dense_objective(a, y, f, 0.1, 0.2, x)) <= 1e-12);
  }
  CHECK_THROWS_AS(full_objective(sq, Eigen::VectorXd::Zero(5)), std::invalid_argument);
}

TEST_CASE("full gradient") {
  SECTION("single sample squared loss") {
    Eigen::MatrixXd a(1, 2);
    a << 1, 0;
    ErmProblem p(dense_data(a, Eigen::VectorXd::Constant(1, 2.0)), {LossKind::squared, 0.0}, {});
    const Eigen::VectorXd g = full_gradient(p, Eigen::VectorXd::Zero(2));
    CHECK(g[0] == -2.0);
    CHECK(g[1] == 0.0);
  }
  SECTION("finite differences") {
    const Eigen::MatrixXd a = oracle::random_matrix(20, 5, 11);
    const Eigen::VectorXd y = oracle::sign_labels(oracle::random_matrix(20, 1, 12).col(0));
    const Eigen::VectorXd x = 0.3 * oracle::random_matrix(5, 1, 13).col(0);
    for (const LossFamily f : {LossFamily{LossKind::logistic, 0.0}, LossFamily{LossKind::squared, 0.0},
                               LossFamily{LossKind::hinge, 0.3},
                               LossFamily{LossKind::absolute_deviation, 0.3}}) {
      ErmProblem p(dense_data(a, y), f, {});
      const Eigen::VectorXd margins = a * x;
      bool near_kink = false;
      for (Eigen::Index i = 0; i < margins.size(); ++i) {
        const double r = f.kind == LossKind::hinge ? y[i] * margins[i] - 1.0 : margins[i] - y[i];
        if (f.lipschitz_family())
          near_kink |= std::min({std::abs(r), std::abs(r + 0.3), std::abs(r - 0.3)}) < 1e-4;
      }
      REQUIRE_FALSE(near_kink);
      const Eigen::VectorXd fd = oracle::numeric_gradient(
          [&](const Eigen::VectorXd &v) { return full_objective(p, v); }, x);
      CHECK((fd - full_gradient(p, x)).lpNorm<Eigen::Infinity>() < 1e-5);
    }
  }
  SECTION("non-smooth loss is rejected") {
    ErmProblem p(dense_data(Eigen::MatrixXd::Ones(2, 2), Eigen::VectorXd::Ones(2)),
                 {LossKind::hinge, 0.0}, {});
    CHECK_THROWS_AS(full_gradient(p, Eigen::VectorXd::Zero(2)), std::invalid_argument);
  }
}

TEST_CASE("estimate_constants") {
  SECTION("two-coordinate sample") {
    Eigen::MatrixXd a(1, 2);
    a << 1, 1;
    const Dataset ds = from_dense(a, Eigen::VectorXd::Ones(1));
    const ProblemConstants c = estimate_constants(ds, BlockPartition(2, 2), {LossKind::squared, 0.0}, {});
    CHECK(c.L == 2.0);
    CHECK(c.L_block == 1.0);
    CHECK(std::isinf(c.kappa));
  }
  SECTION("logistic scalar") {
    const Dataset ds = from_dense(Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::VectorXd::Ones(1));
    CHECK(estimate_constants(ds, BlockPartition(1, 1), {LossKind::logistic, 0.0}, {}).L == 1.0);
  }
  SECTION("all-zero matrix cannot be stepped") {
    const Dataset ds = from_dense(Eigen::MatrixXd::Zero(3, 2), Eigen::VectorXd::Ones(3), true);
    const ProblemConstants c = estimate_constants(ds, BlockPartition(2, 1), {LossKind::squared, 0.0}, {});
    CHECK(c.L == 0.0);
    CHECK(c.L_block == 0.0);
    CHECK_THROWS_AS(Schedule(ScheduleKind::automatic, 3, 1, c), std::invalid_argument);
  }
  SECTION("block constant never exceeds the full constant") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const Dataset ds = gen_sparse(30, 40, 0.2, {LossKind::squared, 0.0}, seed);
      for (std::size_t b : {1, 3, 8, 40}) {
        const ProblemConstants c = estimate_constants(ds, BlockPartition(40, b), {LossKind::logistic, 0.0}, {});
        REQUIRE(c.L_block <= c.L);
      }
    }
  }
  SECTION("kappa finite iff mu > 0") {
    const Dataset ds = gen_sparse(10, 10, 0.3, {LossKind::squared, 0.0}, 1);
    Regularizer r;
    r.l2 = 0.5;
    const ProblemConstants c = estimate_constants(ds, BlockPartition(10, 2), {LossKind::squared, 0.0}, r);
    CHECK(c.mu == 0.5);
    CHECK(c.kappa == Catch::Approx((c.L + c.L_block) / 0.5));
  }
}

TEST_CASE("problems validate labels and weights") {
  const auto data = dense_data(Eigen::MatrixXd::Ones(2, 2), Eigen::Vector2d(1.0, 2.0));
  CHECK_THROWS_AS(ErmProblem(data, {LossKind::logistic, 0.0}, {}), std::invalid_argument);
  CHECK_NOTHROW(ErmProblem(data, {LossKind::squared, 0.0}, {}));
  Regularizer bad;
  bad.l1 = -1.0;
  CHECK_THROWS_AS(ErmProblem(data, {LossKind::squared, 0.0}, bad), std::invalid_argument);
  Regularizer r;
  r.l2 = 0.25;
  CHECK(ErmProblem(data, {LossKind::squared, 0.0}, r).mu() == 0.25);
  CHECK(ErmProblem(data, {LossKind::squared, 0.0}, r, 0.1).mu() == 0.1);
}

TEST_CASE("synthetic instances") {
  SECTION("ridge optimum from the direct solve") {
    SyntheticSpec s;
    s.n = 200;
    s.d = 50;
    s.kappa = 100.0;
    s.seed = 4;
    const SyntheticInstance inst = gen_synthetic(s);
    const ErmProblem p = inst.problem(s.loss);
    REQUIRE(inst.f_star);
    CHECK(std::abs(full_objective(p, inst.x_star) - *inst.f_star) <= 1e-10);
    const Eigen::VectorXd stationarity = full_gradient(p, inst.x_star) + inst.reg.l2 * inst.x_star;
    CHECK(stationarity.lpNorm<Eigen::Infinity>() <= 1e-10);
    const ProblemConstants c = estimate_constants(p, BlockPartition(50, 1));
    CHECK(c.kappa >= 90.0);
    CHECK(c.kappa <= 110.0);
  }
  SECTION("heavy regularization sends the optimum to zero") {
    SyntheticSpec s;
    s.n = 50;
    s.d = 10;
    s.kappa = 1.0;
    const SyntheticInstance inst = gen_synthetic(s);
    Regularizer heavy = inst.reg;
    heavy.l2 = 1e8;
    const Eigen::MatrixXd a = inst.data->to_dense();
    Eigen::MatrixXd h = a.transpose() * a / 50.0;
    h.diagonal().array() += heavy.l2;
    const Eigen::VectorXd x = h.ldlt().solve(a.transpose() * Eigen::Map<const Eigen::VectorXd>(inst.data->labels().data(), 50) / 50.0);
    CHECK(x.norm() < 1e-6);
    CHECK(x.norm() < inst.x_star.norm());
  }
  SECTION("invalid targets") {
    SyntheticSpec s;
    s.kappa = 0.5;
    CHECK_THROWS_AS(gen_synthetic(s), std::invalid_argument);
  }
}
