#ifndef INFSUP_TRAINER_HPP
#define INFSUP_TRAINER_HPP

#include <Eigen/Core>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "infsup/errors.hpp"
#include "infsup/loss.hpp"
#include "infsup/network.hpp"
#include "infsup/problems.hpp"
#include "infsup/rng.hpp"

namespace infsup {

struct TrainConfig {
  int n_interior = 1000;   // interior samples per iteration
  int n_boundary = 100;    // boundary samples per iteration
  int iters = 1000;        // outer iterations
  int ascent_steps = 1;    // multiplier updates per iteration (k)
  int descent_steps = 1;   // trial updates per iteration (l)
  // Iterations between batch redraws: 1 resamples every iteration,
  // 0 trains on a single fixed sample set.
  int resample_every = 1;
  double lr = 1e-3;
  double lr_decay = 0.5;   // multiplicative; 1.0 keeps the rate constant
  int lr_step = 5000;      // iterations between decays
  double rms_decay = 0.99;
  double rms_eps = 1e-8;
  std::uint64_t seed = 1;
  int test_points = 2000;
  int chunk = 128;
  int threads = 1;
  double divergence_cap = 1e8;

  void validate() const {
    if (n_interior < 1 || n_boundary < 1)
      throw CountError("TrainConfig: sample counts must be >= 1");
    if (iters < 0) throw CountError("TrainConfig: iters must be >= 0");
    if (ascent_steps < 1 || descent_steps < 1)
      throw CountError("TrainConfig: inner step counts must be >= 1");
    if (resample_every < 0)
      throw CountError("TrainConfig: resample_every must be >= 0");
    if (!(lr > 0.0)) throw ConfigError("TrainConfig: lr must be positive");
    if (!(lr_decay > 0.0)) throw ConfigError("TrainConfig: lr_decay <= 0");
    if (!(rms_decay > 0.0 && rms_decay < 1.0))
      throw ConfigError("TrainConfig: rms_decay must lie in (0,1)");
    if (test_points < 1) throw CountError("TrainConfig: test_points >= 1");
    if (chunk < 1) throw CountError("TrainConfig: chunk >= 1");
  }
};

/// Per-parameter running mean of squared gradients.
struct RmsState {
  Eigen::ArrayXd mean_sq;
  explicit RmsState(int n) : mean_sq(Eigen::ArrayXd::Zero(n)) {}
};

/// s <- rho s + (1-rho) g^2; p <- p - lr g / (sqrt(s) + eps).
/// Ascent is realized by passing the negated gradient.
inline void rmsprop_step(Eigen::Ref<Eigen::VectorXd> params,
                         const Eigen::Ref<const Eigen::VectorXd>& grads,
                         RmsState& state, double lr, double rho = 0.99,
                         double eps = 1e-8) {
  if (params.size() != grads.size() || params.size() != state.mean_sq.size())
    throw DimensionError("rmsprop_step: shape mismatch");
  state.mean_sq = rho * state.mean_sq + (1.0 - rho) * grads.array().square();
  params.array() -= lr * grads.array() / (state.mean_sq.sqrt() + eps);
}

/// lr * decay^floor(iter / step).
inline double lr_at(int iter, const TrainConfig& cfg) {
  if (cfg.lr_decay == 1.0 || cfg.lr_step <= 0) return cfg.lr;
  return cfg.lr * std::pow(cfg.lr_decay, iter / cfg.lr_step);
}

struct TrainRecord {
  int iter = 0;
  LossBreakdown loss;         // L-hat(u, v) on the iteration's fresh batch
  double duality_gap = 0.0;   // two-point estimate on the same batch
  double rel_l2 = std::numeric_limits<double>::quiet_NaN();
  double lr = 0.0;
  double elapsed_s = 0.0;
};

enum class TrainStatus { kOk, kDiverged };

struct TrainResult {
  std::vector<TrainRecord> records;
  TrainStatus status = TrainStatus::kOk;
};

using TrainCallback =
    std::function<void(const TrainRecord&, const MlpNet& u, const MlpNet& v)>;

/// Relative L2 error of a field against a reference on a fixed point set.
template <class UField>
double rel_l2_error(const UField& u, const ScalarField& exact,
                    const Eigen::Ref<const Eigen::MatrixXd>& pts) {
  if (pts.cols() < 1) throw CountError("rel_l2_error: empty test set");
  double num = 0, den = 0;
  for (int c = 0; c < pts.cols(); ++c) {
    const double e = exact(pts.col(c));
    const double d = u.value_at(pts.col(c)) - e;
    num += d * d;
    den += e * e;
  }
  if (den == 0.0)
    throw DivisionError("rel_l2_error: reference vanishes on the test set");
  return std::sqrt(num / den);
}

/// Alternating gradient ascent/descent on the empirical Lagrangian:
/// per outer iteration, fresh interior/boundary batches, k RMSprop ascent
/// steps on the multiplier, l descent steps on the trial network, then the
/// duality gap L-hat(u_new, v_old) - L-hat(u_old, v_new) on that batch.
/// Deterministic for a fixed config (elapsed timestamps aside).
inline TrainResult train(const PdeProblem& prob, MlpNet& u, MlpNet& v,
                         const TrainConfig& cfg,
                         const TrainCallback& callback = nullptr) {
  cfg.validate();
  prob.validate();
  if (u.input_dim() != prob.dim() || v.input_dim() != prob.dim())
    throw DimensionError("train: network input dim != problem dim");

  SplitRng root(cfg.seed);
  SplitRng interior_rng = root.split(1);
  SplitRng boundary_rng = root.split(2);
  SplitRng test_rng = root.split(3);

  const Eigen::MatrixXd test_pts =
      prob.domain.sample_interior(cfg.test_points, test_rng);
  Eigen::ArrayXd exact_vals;
  double exact_norm2 = 0;
  if (prob.has_exact()) {
    exact_vals = eval_field(prob.exact, test_pts);
    exact_norm2 = exact_vals.square().sum();
    if (exact_norm2 == 0.0)
      throw DivisionError("train: exact solution vanishes on the test set");
  }

  LagrangianEvaluator eval(&prob, &u, &v, cfg.chunk, cfg.threads);
  ValueEvaluator u_values(&u, cfg.chunk);
  RmsState rms_u(u.num_params()), rms_v(v.num_params());
  Eigen::VectorXd grad_u(u.num_params()), grad_v(v.num_params());

  TrainResult result;
  result.records.reserve(cfg.iters);
  const auto t0 = std::chrono::steady_clock::now();
  auto seconds = [&t0] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  };

  Batch batch;
  for (int it = 0; it < cfg.iters; ++it) {
    const double lr = lr_at(it, cfg);
    const bool redraw =
        it == 0 || (cfg.resample_every > 0 && it % cfg.resample_every == 0);
    if (redraw)
      batch = draw_batch(prob.domain, cfg.n_interior, cfg.n_boundary,
                         interior_rng, boundary_rng);

    const UForward fwd_old = eval.forward_u(u, batch);
    const Eigen::ArrayXd v_old = eval.v_values(v, batch.interior);
    TrainRecord rec;
    rec.iter = it;
    rec.lr = lr;
    rec.loss = eval.combine(fwd_old, v_old);

    if (!std::isfinite(rec.loss.total) ||
        std::abs(rec.loss.total) > cfg.divergence_cap) {
      rec.elapsed_s = seconds();
      result.records.push_back(rec);
      if (callback) callback(rec, u, v);
      result.status = TrainStatus::kDiverged;
      return result;
    }

    for (int j = 0; j < cfg.ascent_steps; ++j) {
      grad_v.setZero();
      eval.grad_tau(v, batch, fwd_old.interior_residuals, grad_v);
      rmsprop_step(v.mutable_params(), -grad_v, rms_v, lr, cfg.rms_decay,
                   cfg.rms_eps);
    }
    const Eigen::ArrayXd v_new = eval.v_values(v, batch.interior);

    for (int j = 0; j < cfg.descent_steps; ++j) {
      grad_u.setZero();
      eval.grad_theta(u, batch, v_new, grad_u);
      rmsprop_step(u.mutable_params(), grad_u, rms_u, lr, cfg.rms_decay,
                   cfg.rms_eps);
    }

    const UForward fwd_new = eval.forward_u(u, batch);
    rec.duality_gap =
        eval.combine(fwd_new, v_old).total - eval.combine(fwd_old, v_new).total;

    if (prob.has_exact()) {
      const Eigen::ArrayXd uv = u_values(u, test_pts);
      rec.rel_l2 = std::sqrt((uv - exact_vals).square().sum() / exact_norm2);
    }
    rec.elapsed_s = seconds();
    result.records.push_back(rec);
    if (callback) callback(rec, u, v);
  }
  return result;
}

}  // namespace infsup

#endif  // INFSUP_TRAINER_HPP
