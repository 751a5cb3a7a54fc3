// Minimal end-to-end example: train the minimax pair on the 2D Poisson
// problem and compare against the closed-form solution.

#include <cstdio>

#include "infsup/trainer.hpp"

int main() {
  using namespace infsup;

  const PdeProblem prob = dirichlet_poisson(2);
  MlpNet u = init_xavier({2, 20, 20, 1}, 1);
  MlpNet v = init_xavier({2, 20, 20, 1}, 2);

  TrainConfig cfg;
  cfg.n_interior = 1024;
  cfg.n_boundary = 128;
  cfg.iters = 4000;
  cfg.lr = 1e-3;
  cfg.lr_decay = 0.5;
  cfg.lr_step = 1200;
  cfg.test_points = 1024;
  cfg.seed = 7;

  const TrainResult res =
      train(prob, u, v, cfg, [](const TrainRecord& r, const MlpNet&, const MlpNet&) {
        if (r.iter % 500 == 0)
          std::printf("iter %5d  loss % .3e  gap % .3e  rel_l2 %.4f\n", r.iter,
                      r.loss.total, r.duality_gap, r.rel_l2);
      });

  std::printf("\nfinal rel_l2: %.4f\n", res.records.back().rel_l2);
  Eigen::Vector2d x(0.3, -0.4);
  std::printf("u(0.3,-0.4) = %.5f   exact = %.5f   multiplier = %.5f\n",
              u.eval(x), prob.exact(x), v.eval(x));
  return res.status == TrainStatus::kOk ? 0 : 1;
}
