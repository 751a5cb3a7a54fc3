// Acceptance suite: exercises every published-result criterion end to end
// and prints one PASS/FAIL line per criterion. Exit code is the number of
// failed criteria.
//
// Environment:
//   INFSUP_ACCEPT_FULL=1  run the full-size high-dimensional configuration
//                         (4x100 networks) instead of the documented
//                         reduced 4x60 variant.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <string>
#include <vector>

#include "infsup/experiment.hpp"
#include "infsup/gradcheck.hpp"

using namespace infsup;

namespace {

int failures = 0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

template <class F>
void criterion(int id, const char* name, F&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  std::printf("[%s] criterion %2d: %s | %s (%.0fs)\n",
              o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

struct TrainOut {
  double final_err = std::numeric_limits<double>::quiet_NaN();
  MlpNet u, v;
  PdeProblem prob;
  RunConfig cfg;
  TrainStatus status = TrainStatus::kOk;
};

// Same network-seed derivation as the CLI runner, so any acceptance run
// can be reproduced with `infsup run`.
TrainOut run_preset(RunConfig cfg) {
  TrainOut out;
  out.prob = problem_from_config(cfg);
  const int d = out.prob.dim();
  out.cfg = cfg;
  out.u = init_xavier(cfg.u_arch(d), SplitRng(cfg.train.seed).split(4).next());
  out.v = init_xavier(cfg.v_arch(d), SplitRng(cfg.train.seed).split(5).next());
  const TrainResult res = train(out.prob, out.u, out.v, cfg.train);
  out.status = res.status;
  if (!res.records.empty()) out.final_err = res.records.back().rel_l2;
  return out;
}

double median3(double a, double b, double c) {
  return std::max(std::min(a, b), std::min(std::max(a, b), c));
}

}  // namespace

int main() {
  const bool full = std::getenv("INFSUP_ACCEPT_FULL") != nullptr;
  std::printf("acceptance suite (single thread%s)\n",
              full ? ", full-size high-d run" : "");

  // ------------------------------------------------------------------
  criterion(1, "derivative oracle suite", [] {
    double gmax = 0, lmax = 0, amax = 0;
    for (int d : {1, 3, 5})
      for (int pair = 0; pair < 50; ++pair) {
        MlpNet net = init_xavier({d, 20, 20, 1}, 9000 + 100 * d + pair);
        // Alternate plain and amplified nets (|params| <= 1.2) so both
        // small and O(1..10) derivative magnitudes are exercised.
        if (pair % 2) net.mutable_params() *= 3.0;
        SplitRng pr = SplitRng(500 + 100 * d + pair).split(9);
        const Eigen::MatrixXd pt =
            Domain::hypercube(-1, 1, d).sample_interior(1, pr);
        const JetCheckReport r = check_jets(net, pt);
        gmax = std::max(gmax, r.max_grad_dev);
        lmax = std::max(lmax, r.max_lap_dev);
        amax = std::max(amax, check_square_lap_adjoint(net, pt.col(0)));
      }
    Outcome o;
    o.pass = gmax <= 1e-7 && lmax <= 1e-6 && amax <= 1e-5;
    o.detail = fmt("150 (net,point) pairs: grad %.2e<=1e-7, lap %.2e<=1e-6, "
                   "adjoint %.2e<=1e-5",
                   gmax, lmax, amax);
    return o;
  });

  // ------------------------------------------------------------------
  criterion(8, "convex-concave GDA gap decay", [] {
    // L(a,b) = a^2/2 + a b - b^2/2; closed-form gap a^2 + b^2.
    double a = 1.0, b = -0.8;
    const double eta = 0.05;
    double gap10 = 0, gap1000 = 0;
    bool envelope_ok = true;
    const double gap0 = a * a + b * b;
    for (int n = 1; n <= 1000; ++n) {
      b += eta * (a - b);
      a -= eta * (a + b);
      const double g = a * a + b * b;
      if (n == 10) gap10 = g;
      if (n >= 10 && n * g > 20.0 * 10.0 * gap10) envelope_ok = false;
      gap1000 = g;
    }
    Outcome o;
    o.pass = gap1000 <= gap10 / 10.0 && envelope_ok && gap10 < gap0;
    o.detail = fmt("gap(10)=%.3e, gap(1000)=%.3e (need <= gap(10)/10), "
                   "O(1/n) envelope %s",
                   gap10, gap1000, envelope_ok ? "held" : "violated");
    return o;
  });

  // ------------------------------------------------------------------
  criterion(9, "Monte Carlo convergence rate", [] {
    const Domain dom = Domain::hypercube(-1, 1, 3);
    auto f = [](const Eigen::Ref<const Eigen::VectorXd>& x) {
      double v = 1;
      for (int i = 0; i < x.size(); ++i)
        v *= std::cos(0.5 * std::numbers::pi * x[i]);
      return v;
    };
    const double truth = std::pow(4.0 / std::numbers::pi, 3);
    std::vector<double> r1, r2;
    for (int seed = 0; seed < 20; ++seed) {
      double err[3];
      for (int k = 0; k < 3; ++k) {
        SplitRng rng = SplitRng(400 + seed).split(k);
        err[k] = std::abs(
            mc_integrate(dom, f, static_cast<int>(std::pow(10, 3 + k)), rng) -
            truth);
      }
      r1.push_back(err[0] / err[1]);
      r2.push_back(err[1] / err[2]);
    }
    auto median = [](std::vector<double> v) {
      std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
      return v[v.size() / 2];
    };
    const double m1 = median(r1), m2 = median(r2);
    Outcome o;
    o.pass = m1 >= 2.0 && m1 <= 5.0 && m2 >= 2.0 && m2 <= 5.0;
    o.detail = fmt("median error ratios per decade over 20 seeds: %.2f, %.2f "
                   "(need within [2,5])",
                   m1, m2);
    return o;
  });

  // ------------------------------------------------------------------
  criterion(10, "grid-reference convergence order", [] {
    PdeProblem p;
    p.name = "manufactured";
    p.domain = Domain::hypercube(0, 1, 2);
    p.op = OperatorSpec::laplace();
    p.exact = [](const Eigen::Ref<const Eigen::VectorXd>& x) {
      return std::sin(std::numbers::pi * x[0]) *
             std::sin(std::numbers::pi * x[1]);
    };
    p.f = [exact = p.exact](const Eigen::Ref<const Eigen::VectorXd>& x) {
      return 2.0 * std::numbers::pi * std::numbers::pi * exact(x);
    };
    p.bcs.push_back(BoundaryCondition::dirichlet(
        "boundary",
        [](const Eigen::Ref<const Eigen::VectorXd>&) { return 0.0; }));
    auto max_err = [&](double h) {
      const FdSolution s = solve_poisson_fd(p, h);
      double worst = 0;
      Eigen::Vector2d x;
      for (int j = 0; j <= s.intervals(); ++j)
        for (int i = 0; i <= s.intervals(); ++i) {
          x << s.x_of(i), s.y_of(j);
          worst = std::max(worst, std::abs(s.at_node(i, j) - p.exact(x)));
        }
      return worst;
    };
    const double e32 = max_err(1.0 / 32), e64 = max_err(1.0 / 64),
                 e128 = max_err(1.0 / 128);
    const double q1 = e32 / e64, q2 = e64 / e128;
    Outcome o;
    o.pass = q1 >= 3.5 && q1 <= 4.5 && q2 >= 3.5 && q2 <= 4.5;
    o.detail =
        fmt("halving h scales the error by %.2f and %.2f (need [3.5,4.5])",
            q1, q2);
    return o;
  });

  // ------------------------------------------------------------------
  TrainOut big;  // kept for criteria 3 and 7
  criterion(2, "d=3 Poisson error table", [&big] {
    big = run_preset(preset("table1_n10000"));
    const TrainOut small = run_preset(preset("table1_n2500"));
    Outcome o;
    o.pass = big.status == TrainStatus::kOk && big.final_err <= 1.0e-2 &&
             small.status == TrainStatus::kOk && small.final_err <= 3.0e-2;
    o.detail = fmt("(N=10^4,Nb=600): rel_l2 %.4e <= 1e-2 (paper 2.6667e-3); "
                   "(N=2500,Nb=300): %.4e <= 3e-2 (paper 9.1638e-3)",
                   big.final_err, small.final_err);
    return o;
  });

  // ------------------------------------------------------------------
  criterion(7, "multiplier collapse", [&big] {
    SplitRng tr = SplitRng(big.cfg.train.seed).split(3);
    const Eigen::MatrixXd pts =
        big.prob.domain.sample_interior(big.cfg.train.test_points, tr);
    ValueEvaluator vu(&big.u), vv(&big.v);
    const double rms_u = std::sqrt(vu(big.u, pts).square().mean());
    const double rms_v = std::sqrt(vv(big.v, pts).square().mean());
    Outcome o;
    o.pass = rms_v <= 0.1 * rms_u;
    o.detail = fmt("RMS(v)=%.3e, RMS(u)=%.3e, ratio %.3f (need <= 0.1)", rms_v,
                   rms_u, rms_v / std::max(rms_u, 1e-300));
    return o;
  });

  // ------------------------------------------------------------------
  criterion(3, "width/depth trend", [&big] {
    // Depth-3 medians over three seeds; reduced sampling (N=5000, 10^4
    // iterations) keeps the comparison tractable on one core.
    double e10[3], e40[3];
    for (int s = 0; s < 3; ++s) {
      for (int w : {10, 40}) {
        RunConfig cfg = preset(w == 10 ? "table2_w10_d3" : "table2_w40_d3");
        cfg.train.iters = 10000;
        cfg.train.n_interior = 5000;
        cfg.train.n_boundary = 432;
        cfg.train.seed = 1 + s;
        const TrainOut r = run_preset(cfg);
        (w == 10 ? e10 : e40)[s] = r.final_err;
      }
    }
    const double m10 = median3(e10[0], e10[1], e10[2]);
    const double m40 = median3(e40[0], e40[1], e40[2]);
    Outcome o;
    o.pass = m40 < m10 && big.final_err <= 1.0e-2;
    o.detail = fmt("depth-3 median over 3 seeds: width10 %.4e > width40 %.4e; "
                   "w40/d2 %.4e <= 1e-2 (paper 2.6667e-3)",
                   m10, m40, big.final_err);
    return o;
  });

  // ------------------------------------------------------------------
  criterion(5, "L-shaped domain", [] {
    const TrainOut r = run_preset(preset("lshape"));
    // Pointwise comparison on a 0.05-spaced grid away from the notch tip.
    double worst = 0;
    Eigen::Vector2d x;
    for (int j = 0; j <= 40; ++j)
      for (int i = 0; i <= 40; ++i) {
        x << -1.0 + 0.05 * i, -1.0 + 0.05 * j;
        if (!r.prob.domain.contains(x)) continue;
        if (x.norm() <= 0.1) continue;
        worst = std::max(worst, std::abs(r.u.eval(x) - r.prob.exact(x)));
      }
    Outcome o;
    o.pass = r.status == TrainStatus::kOk && r.final_err <= 3.0e-2 &&
             worst <= 3.0e-2;
    o.detail = fmt("rel_l2 vs grid reference %.4e <= 3e-2 (paper ~1e-2); "
                   "max pointwise error off the corner %.4e <= 3e-2",
                   r.final_err, worst);
    return o;
  });

  // ------------------------------------------------------------------
  criterion(6, "variable-coefficient and quasilinear problems", [] {
    const TrainOut vc = run_preset(preset("varcoeff_d5"));
    const TrainOut ql = run_preset(preset("quasilinear_d5"));
    Outcome o;
    o.pass = vc.status == TrainStatus::kOk && vc.final_err <= 3.0e-2 &&
             ql.status == TrainStatus::kOk && ql.final_err <= 3.0e-2;
    o.detail = fmt("varcoeff rel_l2 %.4e, quasilinear rel_l2 %.4e "
                   "(both need <= 3e-2, paper ~1e-2)",
                   vc.final_err, ql.final_err);
    return o;
  });

  // ------------------------------------------------------------------
  criterion(4, "d=5 Dirichlet Poisson", [full] {
    const RunConfig cfg = preset(full ? "poisson_d5" : "poisson_d5_small");
    const double tol = full ? 2.0e-2 : 3.0e-2;
    const TrainOut r = run_preset(cfg);
    Outcome o;
    o.pass = r.status == TrainStatus::kOk && r.final_err <= tol;
    o.detail = fmt("%s: rel_l2 %.4e <= %.0e (paper ~6e-3 at 4x100)",
                   full ? "4x100 networks" : "reduced 4x60 variant",
                   r.final_err, tol);
    return o;
  });

  std::printf("%d criterion(s) failed\n", failures);
  return failures;
}
