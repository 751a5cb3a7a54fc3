#ifndef INFSUP_GRADCHECK_HPP
#define INFSUP_GRADCHECK_HPP

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "infsup/loss.hpp"
#include "infsup/network.hpp"
#include "infsup/problems.hpp"
#include "infsup/tape.hpp"

namespace infsup {

// Central finite differences of the network value; the independent oracle
// for everything the jet channels and the reverse sweep produce.

inline Eigen::VectorXd fd_gradient(const MlpNet& net,
                                   const Eigen::Ref<const Eigen::VectorXd>& x,
                                   double h = 1e-4) {
  Eigen::VectorXd g(x.size()), xp = x;
  for (int i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    const double up = net.eval(xp);
    xp[i] = x[i] - h;
    const double um = net.eval(xp);
    xp[i] = x[i];
    g[i] = (up - um) / (2.0 * h);
  }
  return g;
}

inline double fd_laplacian(const MlpNet& net,
                           const Eigen::Ref<const Eigen::VectorXd>& x,
                           double h = 1e-4) {
  const double u0 = net.eval(x);
  Eigen::VectorXd xp = x;
  double lap = 0;
  for (int i = 0; i < x.size(); ++i) {
    xp[i] = x[i] + h;
    const double up = net.eval(xp);
    xp[i] = x[i] - h;
    const double um = net.eval(xp);
    xp[i] = x[i];
    lap += (up - 2.0 * u0 + um) / (h * h);
  }
  return lap;
}

/// |a-b| / max(|a|, |b|, floor). The floor turns the comparison absolute
/// for quantities below the finite-difference noise scale; without it a
/// near-zero component would be judged against pure rounding error.
inline double rel_dev(double a, double b, double floor_scale) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor_scale});
}

// Roundoff bound for a central-difference stencil: n_evals function values
// of magnitude ~scale, each good to ~16 eps, divided by the step weight.
// Dividing by the target tolerance converts the bound into a rel_dev floor
// so that quantities below it are held to the stencil's absolute noise.
inline double fd_noise_floor(int n_evals, double scale, double step_weight,
                             double tol) {
  constexpr double kEps = 2.220446049250313e-16;
  return 16.0 * kEps * n_evals * std::max(1.0, scale) / step_weight / tol;
}

struct JetCheckReport {
  double max_value_dev = 0;  // eval vs eval_jet value channel
  double max_grad_dev = 0;   // jet gradient vs central differences
  double max_lap_dev = 0;    // jet Laplacian vs central differences
};

/// Compare eval_jet against finite differences of eval at each point. The
/// deviations are relative, floored at the stencil noise for the stated
/// tolerances (1e-7 gradient, 1e-6 Laplacian).
inline JetCheckReport check_jets(const MlpNet& net,
                                 const Eigen::Ref<const Eigen::MatrixXd>& pts,
                                 double h = 1e-4) {
  JetCheckReport rep;
  const int d = net.input_dim();
  for (int c = 0; c < pts.cols(); ++c) {
    const auto x = pts.col(c);
    const Jet jet = net.eval_jet(x);
    const double u0 = net.eval(x);
    rep.max_value_dev = std::max(rep.max_value_dev, rel_dev(jet.value, u0, 1e-6));
    const double grad_floor = fd_noise_floor(2, std::abs(u0), 2.0 * h, 1e-7);
    const Eigen::VectorXd fg = fd_gradient(net, x, h);
    for (int i = 0; i < x.size(); ++i)
      rep.max_grad_dev =
          std::max(rep.max_grad_dev, rel_dev(jet.grad[i], fg[i], grad_floor));
    const double lap_floor =
        fd_noise_floor(2 * d + 2, std::abs(u0), h * h, 1e-6);
    rep.max_lap_dev = std::max(
        rep.max_lap_dev, rel_dev(jet.lap, fd_laplacian(net, x, h), lap_floor));
  }
  return rep;
}

struct AdjointCheckReport {
  double max_theta_dev = 0;  // trial-network adjoints vs FD
  double max_tau_dev = 0;    // multiplier adjoints vs FD
};

/// Parameter adjoints of the full empirical Lagrangian on one batch versus
/// per-parameter central differences of its value. corrupt_index >= 0
/// deliberately bumps one analytic entry, as a negative control that the
/// comparison itself can detect a broken adjoint.
inline AdjointCheckReport check_loss_adjoints(const PdeProblem& prob,
                                              MlpNet& u, MlpNet& v,
                                              const Batch& batch,
                                              double h = 1e-5,
                                              int corrupt_index = -1) {
  LagrangianEvaluator eval(&prob, &u, &v);
  const UForward fwd = eval.forward_u(u, batch);
  const Eigen::ArrayXd v_vals = eval.v_values(v, batch.interior);

  Eigen::VectorXd g_theta = Eigen::VectorXd::Zero(u.num_params());
  eval.grad_theta(u, batch, v_vals, g_theta);
  Eigen::VectorXd g_tau = Eigen::VectorXd::Zero(v.num_params());
  eval.grad_tau(v, batch, fwd.interior_residuals, g_tau);
  if (corrupt_index >= 0) {
    g_theta[corrupt_index % u.num_params()] += 1.0;
    g_tau[corrupt_index % v.num_params()] += 1.0;
  }

  AdjointCheckReport rep;
  auto loss_total = [&] { return eval.loss(u, v, batch).total; };
  const double floor =
      fd_noise_floor(2, std::abs(loss_total()), 2.0 * h, 1e-5);
  for (int p = 0; p < u.num_params(); ++p) {
    const double save = u.params()[p];
    u.mutable_params()[p] = save + h;
    const double lp = loss_total();
    u.mutable_params()[p] = save - h;
    const double lm = loss_total();
    u.mutable_params()[p] = save;
    rep.max_theta_dev = std::max(
        rep.max_theta_dev, rel_dev(g_theta[p], (lp - lm) / (2.0 * h), floor));
  }
  for (int p = 0; p < v.num_params(); ++p) {
    const double save = v.params()[p];
    v.mutable_params()[p] = save + h;
    const double lp = loss_total();
    v.mutable_params()[p] = save - h;
    const double lm = loss_total();
    v.mutable_params()[p] = save;
    rep.max_tau_dev = std::max(
        rep.max_tau_dev, rel_dev(g_tau[p], (lp - lm) / (2.0 * h), floor));
  }
  return rep;
}

/// Adjoint check for the pointwise loss (lap u(x))^2: reverse sweep versus
/// central differences, exercising the second-order channel end to end.
inline double check_square_lap_adjoint(MlpNet& u,
                                       const Eigen::Ref<const Eigen::VectorXd>& x,
                                       double h = 1e-5) {
  const int d = static_cast<int>(x.size());
  AdjointTape tape(&u, d, /*with_jets=*/true, 1);
  LinearJetCoeffs lc;  // must outlive backprop_params
  lc.cl = Eigen::ArrayXd::Constant(1, -1.0);
  lc.c0 = Eigen::ArrayXd::Zero(1);
  auto loss_at = [&] {
    tape.forward(x);
    tape.apply_linear_residual(lc);
    return tape.finish_square_sum(1.0);
  };
  const double l0 = loss_at();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(u.num_params());
  tape.backprop_params(grad);

  double max_dev = 0;
  const double floor = fd_noise_floor(2, std::abs(l0), 2.0 * h, 1e-5);
  for (int p = 0; p < u.num_params(); ++p) {
    const double save = u.params()[p];
    u.mutable_params()[p] = save + h;
    const double lp = loss_at();
    u.mutable_params()[p] = save - h;
    const double lm = loss_at();
    u.mutable_params()[p] = save;
    max_dev = std::max(max_dev, rel_dev(grad[p], (lp - lm) / (2.0 * h), floor));
  }
  return max_dev;
}

}  // namespace infsup

#endif  // INFSUP_GRADCHECK_HPP
