#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "infsup/trainer.hpp"

using namespace infsup;
using Catch::Approx;

TEST_CASE("rmsprop update rule") {
  SECTION("zero gradient leaves parameters unchanged") {
    Eigen::VectorXd p = Eigen::VectorXd::LinSpaced(5, -1, 1);
    const Eigen::VectorXd before = p;
    RmsState s(5);
    rmsprop_step(p, Eigen::VectorXd::Zero(5), s, 0.01);
    REQUIRE(p == before);
  }

  SECTION("frozen single-parameter step") {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(1);
    Eigen::VectorXd g = Eigen::VectorXd::Ones(1);
    RmsState s(1);
    rmsprop_step(p, g, s, 0.001, 0.99, 1e-8);
    REQUIRE(s.mean_sq[0] == Approx(0.01).epsilon(1e-14));
    REQUIRE(p[0] == Approx(-0.0099999990000001).epsilon(1e-12));
  }

  SECTION("repeated identical gradients shrink the step") {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(1);
    Eigen::VectorXd g = Eigen::VectorXd::Ones(1);
    RmsState s(1);
    rmsprop_step(p, g, s, 0.001);
    const double step1 = -p[0];
    const double p1 = p[0];
    rmsprop_step(p, g, s, 0.001);
    const double step2 = p1 - p[0];
    REQUIRE(step2 > 0);
    REQUIRE(step2 < step1);
  }

  SECTION("shape mismatch") {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(3);
    RmsState s(2);
    REQUIRE_THROWS_AS(rmsprop_step(p, Eigen::VectorXd::Zero(3), s, 0.1),
                      DimensionError);
  }
}

TEST_CASE("learning-rate schedule") {
  TrainConfig cfg;
  cfg.lr = 0.001;
  cfg.lr_decay = 0.5;
  cfg.lr_step = 5000;
  REQUIRE(lr_at(0, cfg) == Approx(0.001));
  REQUIRE(lr_at(4999, cfg) == Approx(0.001));
  REQUIRE(lr_at(5000, cfg) == Approx(0.0005));
  cfg.lr = 0.0005;
  cfg.lr_step = 2000;
  REQUIRE(lr_at(4000, cfg) == Approx(0.000125));
  cfg.lr_decay = 1.0;
  REQUIRE(lr_at(123456, cfg) == Approx(0.0005));
}

TEST_CASE("rel_l2_error closed forms") {
  const PdeProblem p = dirichlet_poisson(2);
  SplitRng rng = SplitRng(1).split(3);
  const Eigen::MatrixXd pts = p.domain.sample_interior(500, rng);

  struct Scaled {
    ScalarField f;
    double c;
    double value_at(const Eigen::Ref<const Eigen::VectorXd>& x) const {
      return c * f(x);
    }
  };
  REQUIRE(rel_l2_error(Scaled{p.exact, 1.0}, p.exact, pts) == 0.0);
  REQUIRE(rel_l2_error(Scaled{p.exact, 1.01}, p.exact, pts) ==
          Approx(0.01).epsilon(1e-9));

  const ScalarField zero = [](const Eigen::Ref<const Eigen::VectorXd>&) {
    return 0.0;
  };
  REQUIRE_THROWS_AS(rel_l2_error(Scaled{p.exact, 1.0}, zero, pts),
                    DivisionError);
}

TEST_CASE("zero-iteration run changes nothing") {
  const PdeProblem p = dirichlet_poisson(2);
  MlpNet u = init_xavier({2, 6, 1}, 1);
  MlpNet v = init_xavier({2, 6, 1}, 2);
  const Eigen::VectorXd u0 = u.params(), v0 = v.params();
  TrainConfig cfg;
  cfg.iters = 0;
  cfg.n_interior = 16;
  cfg.n_boundary = 8;
  cfg.test_points = 10;
  const TrainResult res = train(p, u, v, cfg);
  REQUIRE(res.records.empty());
  REQUIRE(res.status == TrainStatus::kOk);
  REQUIRE(u.params() == u0);
  REQUIRE(v.params() == v0);
}

TEST_CASE("training is deterministic and thread-count invariant") {
  const PdeProblem p = dirichlet_poisson(2);
  TrainConfig cfg;
  cfg.iters = 25;
  cfg.n_interior = 150;
  cfg.n_boundary = 40;
  cfg.test_points = 64;
  cfg.seed = 9;
  cfg.chunk = 32;

  auto run = [&](int threads) {
    cfg.threads = threads;
    MlpNet u = init_xavier({2, 10, 1}, 100);
    MlpNet v = init_xavier({2, 10, 1}, 101);
    TrainResult r = train(p, u, v, cfg);
    return std::make_tuple(std::move(r), u.params(), v.params());
  };
  auto [r1, u1, v1] = run(1);
  auto [r2, u2, v2] = run(1);
  auto [r3, u3, v3] = run(2);

  REQUIRE(r1.records.size() == 25);
  for (std::size_t i = 0; i < r1.records.size(); ++i) {
    REQUIRE(r1.records[i].loss.total == r2.records[i].loss.total);
    REQUIRE(r1.records[i].duality_gap == r2.records[i].duality_gap);
    REQUIRE(r1.records[i].rel_l2 == r2.records[i].rel_l2);
    REQUIRE(r1.records[i].loss.total == r3.records[i].loss.total);
    REQUIRE(r1.records[i].duality_gap == r3.records[i].duality_gap);
    REQUIRE(r1.records[i].rel_l2 == r3.records[i].rel_l2);
  }
  REQUIRE(u1 == u2);
  REQUIRE(u1 == u3);
  REQUIRE(v1 == v3);
}

TEST_CASE("logged duality gap matches the two-point estimator") {
  // Reconstruct iteration 0 by hand: same batch, one ascent, one descent.
  const PdeProblem p = dirichlet_poisson(2);
  TrainConfig cfg;
  cfg.iters = 1;
  cfg.n_interior = 120;
  cfg.n_boundary = 30;
  cfg.test_points = 32;
  cfg.seed = 77;
  MlpNet u = init_xavier({2, 8, 1}, 300);
  MlpNet v = init_xavier({2, 8, 1}, 301);
  const MlpNet u_before = u, v_before = v;
  const TrainResult res = train(p, u, v, cfg);

  SplitRng ri = SplitRng(cfg.seed).split(1), rb = SplitRng(cfg.seed).split(2);
  const Batch batch = draw_batch(p.domain, cfg.n_interior, cfg.n_boundary, ri, rb);
  const double gap = duality_gap(u, v_before, u_before, v, batch, p);
  REQUIRE(res.records[0].duality_gap == Approx(gap).epsilon(1e-12).margin(1e-15));
}

TEST_CASE("divergent training aborts with a diagnostic record") {
  const PdeProblem p = dirichlet_poisson(2);
  MlpNet u = init_xavier({2, 8, 1}, 5);
  MlpNet v = init_xavier({2, 8, 1}, 6);
  // An absurd learning rate blows the iterates up within a few steps.
  TrainConfig cfg;
  cfg.iters = 500;
  cfg.n_interior = 50;
  cfg.n_boundary = 20;
  cfg.test_points = 16;
  cfg.lr = 1e4;
  cfg.divergence_cap = 1e6;
  const TrainResult res = train(p, u, v, cfg);
  REQUIRE(res.status == TrainStatus::kDiverged);
  REQUIRE(!res.records.empty());
  const double last = res.records.back().loss.total;
  REQUIRE((!std::isfinite(last) || std::abs(last) > cfg.divergence_cap));
  REQUIRE(res.records.size() < 500);
}

TEST_CASE("config validation") {
  TrainConfig cfg;
  cfg.n_interior = 0;
  REQUIRE_THROWS_AS(cfg.validate(), CountError);
  cfg = TrainConfig{};
  cfg.lr = -1;
  REQUIRE_THROWS_AS(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.rms_decay = 1.0;
  REQUIRE_THROWS_AS(cfg.validate(), ConfigError);
  const PdeProblem p = dirichlet_poisson(3);
  MlpNet u = init_xavier({2, 6, 1}, 1);  // wrong input dimension
  MlpNet v = init_xavier({3, 6, 1}, 2);
  REQUIRE_THROWS_AS(train(p, u, v, TrainConfig{}), DimensionError);
}

TEST_CASE("one-dimensional trial run learns the solution") {
  const PdeProblem p = dirichlet_poisson(1);
  MlpNet u = init_xavier({1, 16, 16, 1}, 11);
  MlpNet v = init_xavier({1, 16, 16, 1}, 12);
  TrainConfig cfg;
  cfg.iters = 4500;
  cfg.n_interior = 256;
  cfg.n_boundary = 8;
  cfg.test_points = 512;
  cfg.lr = 1e-3;
  cfg.lr_decay = 0.5;
  cfg.lr_step = 1500;
  cfg.seed = 4;
  const TrainResult res = train(p, u, v, cfg);
  REQUIRE(res.status == TrainStatus::kOk);
  REQUIRE(res.records.back().rel_l2 <= 0.05);
  // The loss need not decay monotonically; the error should still land low.
  REQUIRE(std::isfinite(res.records.back().loss.total));
}

TEST_CASE("gradient descent-ascent on a convex-concave quadratic") {
  // L(a, b) = a^2/2 + a b - b^2/2: saddle at the origin, closed-form gap
  //   gap(a, b) = max_b' L(a, b') - min_a' L(a', b) = (a^2 + b^2).
  // With alternating plain-gradient steps the iterates contract, so the
  // gap decays at least as fast as the O(1/n) envelope of single-step GDA.
  double a = 1.0, b = -0.8;
  const double eta = 0.05;
  auto gap = [&] { return a * a + b * b; };
  double gap10 = 0;
  std::vector<double> gaps;
  for (int n = 1; n <= 1000; ++n) {
    b += eta * (a - b);        // ascend in b
    a -= eta * (a + b);        // then descend in a
    if (n == 10) gap10 = gap();
    gaps.push_back(gap());
  }
  REQUIRE(gaps.back() <= gap10 / 10.0);
  // O(1/n) envelope: n * gap(n) stays bounded by its early values.
  const double envelope = 20.0 * gap10;
  for (std::size_t n = 10; n < gaps.size(); ++n)
    REQUIRE(static_cast<double>(n + 1) * gaps[n] <= envelope);
}
