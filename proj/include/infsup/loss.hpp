#ifndef INFSUP_LOSS_HPP
#define INFSUP_LOSS_HPP

#include <Eigen/Core>
#include <atomic>
#include <memory>
#include <thread>
#include <vector>

#include "infsup/errors.hpp"
#include "infsup/geometry.hpp"
#include "infsup/network.hpp"
#include "infsup/problems.hpp"
#include "infsup/tape.hpp"

namespace infsup {

/// Empirical Lagrangian split into its two summands,
///   total = boundary_term + interior_term,
/// with per-segment boundary subtotals retained for mixed conditions.
struct LossBreakdown {
  double total = 0.0;
  double boundary_term = 0.0;
  double interior_term = 0.0;
  std::vector<double> segment_terms;
};

/// Boundary samples of one batch, grouped by segment so each segment's sum
/// can carry its own measure and count.
struct BoundaryBatch {
  struct Group {
    int segment = 0;
    Eigen::MatrixXd points;   // d x n_s
    Eigen::MatrixXd normals;  // d x n_s
  };
  std::vector<Group> groups;  // one entry per domain segment, in order
  int total = 0;

  static BoundaryBatch group(const Domain& dom,
                             const std::vector<BoundarySample>& samples) {
    BoundaryBatch out;
    out.total = static_cast<int>(samples.size());
    const int nseg = static_cast<int>(dom.segments().size());
    std::vector<int> counts(nseg, 0);
    for (const auto& s : samples) counts[s.segment]++;
    out.groups.resize(nseg);
    std::vector<int> fill(nseg, 0);
    for (int g = 0; g < nseg; ++g) {
      out.groups[g].segment = g;
      out.groups[g].points.resize(dom.dim(), counts[g]);
      out.groups[g].normals.resize(dom.dim(), counts[g]);
    }
    for (const auto& s : samples) {
      auto& grp = out.groups[s.segment];
      grp.points.col(fill[s.segment]) = s.point;
      grp.normals.col(fill[s.segment]) = s.normal;
      fill[s.segment]++;
    }
    return out;
  }
};

/// One training batch: interior points plus grouped boundary samples.
struct Batch {
  Eigen::MatrixXd interior;  // d x N
  BoundaryBatch boundary;
};

inline Batch draw_batch(const Domain& dom, int n_interior, int n_boundary,
                        SplitRng& interior_rng, SplitRng& boundary_rng) {
  Batch b;
  b.interior = dom.sample_interior(n_interior, interior_rng);
  b.boundary = BoundaryBatch::group(dom, dom.sample_boundary(n_boundary,
                                                             boundary_rng));
  return b;
}

/// Reference evaluation of the empirical Lagrangian, one point at a time.
/// U must expose jet_at(x), V value_at(x); any field with closed-form jets
/// can stand in for a network. The batched evaluator below must agree with
/// this to rounding.
template <class UField, class VField>
LossBreakdown empirical_lagrangian(const UField& u, const VField& v,
                                   const Eigen::Ref<const Eigen::MatrixXd>& interior,
                                   const BoundaryBatch& boundary,
                                   const PdeProblem& prob) {
  const int n = static_cast<int>(interior.cols());
  if (n < 1) throw CountError("empirical_lagrangian: empty interior batch");
  if (boundary.total < 1)
    throw CountError("empirical_lagrangian: empty boundary batch");

  LossBreakdown out;
  out.segment_terms.assign(prob.domain.segments().size(), 0.0);
  for (const auto& grp : boundary.groups) {
    const int ns = static_cast<int>(grp.points.cols());
    if (ns == 0) continue;
    const auto& bc = prob.bc_for_segment(grp.segment);
    const auto& seg = prob.domain.segments()[grp.segment];
    double sq = 0;
    BoundarySample s;
    s.segment = grp.segment;
    s.label = seg.label;
    for (int c = 0; c < ns; ++c) {
      s.point = grp.points.col(c);
      s.normal = grp.normals.col(c);
      const double r = boundary_residual(bc, u.jet_at(s.point), s,
                                         bc.g(s.point));
      sq += r * r;
    }
    out.segment_terms[grp.segment] = seg.measure / (2.0 * ns) * sq;
    out.boundary_term += out.segment_terms[grp.segment];
  }

  double acc = 0;
  for (int c = 0; c < n; ++c) {
    const auto x = interior.col(c);
    acc += interior_residual(prob.op, u.jet_at(x), x, prob.f(x)) *
           v.value_at(x);
  }
  out.interior_term = prob.domain.volume() / n * acc;
  out.total = out.boundary_term + out.interior_term;
  return out;
}

namespace detail {

// Chunk loop with optional threads. Work is handed out dynamically, so the
// callee must write only to per-chunk slots (or thread-private scratch,
// indexed by the thread argument) to stay deterministic.
template <class Fn>
inline void run_chunks(int total, int chunk, int threads, Fn&& fn) {
  const int n_chunks = (total + chunk - 1) / chunk;
  if (threads <= 1 || n_chunks <= 1) {
    for (int c = 0; c < n_chunks; ++c)
      fn(c, c * chunk, std::min(chunk, total - c * chunk), 0);
    return;
  }
  const int nt = std::min(threads, n_chunks);
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (int t = 0; t < nt; ++t)
    pool.emplace_back([&, t] {
      for (int c = next.fetch_add(1); c < n_chunks; c = next.fetch_add(1))
        fn(c, c * chunk, std::min(chunk, total - c * chunk), t);
    });
  for (auto& th : pool) th.join();
}

}  // namespace detail

/// Batched value-only forward passes for one architecture.
class ValueEvaluator {
 public:
  explicit ValueEvaluator(const MlpNet* net, int chunk = 256)
      : chunk_(chunk) {
    tape_ = std::make_unique<AdjointTape>(net, net->input_dim(),
                                          /*with_jets=*/false, chunk);
  }

  Eigen::ArrayXd operator()(const MlpNet& net,
                            const Eigen::Ref<const Eigen::MatrixXd>& pts) {
    tape_->rebind(&net);
    Eigen::ArrayXd out(pts.cols());
    const int n = static_cast<int>(pts.cols());
    for (int start = 0; start < n; start += chunk_) {
      const int count = std::min(chunk_, n - start);
      tape_->forward(pts.middleCols(start, count));
      out.segment(start, count) = tape_->out_value().transpose();
    }
    return out;
  }

 private:
  int chunk_;
  std::unique_ptr<AdjointTape> tape_;
};

/// What the loss needs from the trial network on one batch: interior
/// residuals and the assembled boundary term. Interior and boundary terms
/// can then be recombined with any multiplier values, which is how the
/// duality gap reuses forward passes.
struct UForward {
  Eigen::ArrayXd interior_residuals;
  double boundary_term = 0.0;
  std::vector<double> segment_terms;
};

/// Chunked, tape-backed evaluation of the empirical Lagrangian and its
/// parameter gradients for a fixed problem and pair of architectures.
/// Per-chunk partial gradients are reduced in chunk order, so results are
/// independent of the thread count.
class LagrangianEvaluator {
 public:
  LagrangianEvaluator(const PdeProblem* prob, const MlpNet* u, const MlpNet* v,
                      int chunk = 128, int threads = 1)
      : prob_(prob), chunk_(chunk), threads_(std::max(1, threads)) {
    prob->validate();
    for (int t = 0; t < threads_; ++t) {
      u_tapes_.push_back(std::make_unique<AdjointTape>(u, prob->dim(),
                                                       /*with_jets=*/true,
                                                       chunk_));
      v_tapes_.push_back(std::make_unique<AdjointTape>(v, prob->dim(),
                                                       /*with_jets=*/false,
                                                       chunk_));
      coeffs_.push_back(std::make_unique<LinearJetCoeffs>());
    }
  }

  const PdeProblem& problem() const { return *prob_; }

  /// Jets of u over the batch: interior residuals plus boundary sums.
  UForward forward_u(const MlpNet& u, const Batch& batch) {
    check_batch(batch);
    UForward fwd;
    fwd.interior_residuals.resize(batch.interior.cols());
    const int n = static_cast<int>(batch.interior.cols());
    const Eigen::ArrayXd f_vals = eval_field(prob_->f, batch.interior);
    detail::run_chunks(n, chunk_, threads_, [&](int, int start, int count,
                                                int t) {
      AdjointTape& tape = *u_tapes_[t];
      tape.rebind(&u);
      tape.forward(batch.interior.middleCols(start, count));
      apply_interior_residual(tape, batch.interior.middleCols(start, count),
                              f_vals.segment(start, count), t);
      fwd.interior_residuals.segment(start, count) = tape.residual().head(count);
    });

    fwd.segment_terms.assign(prob_->domain.segments().size(), 0.0);
    for (const auto& grp : batch.boundary.groups) {
      const int ns = static_cast<int>(grp.points.cols());
      if (ns == 0) continue;
      const auto& bc = prob_->bc_for_segment(grp.segment);
      const Eigen::ArrayXd g_vals = eval_field(bc.g, grp.points);
      const double coef =
          prob_->domain.segments()[grp.segment].measure / (2.0 * ns);
      double sq = 0;
      detail::run_chunks(ns, chunk_, 1, [&](int, int start, int count, int t) {
        AdjointTape& tape = *u_tapes_[t];
        tape.rebind(&u);
        tape.forward(grp.points.middleCols(start, count));
        boundary_residual_coeffs(bc, grp.normals.middleCols(start, count),
                                 g_vals.segment(start, count), *coeffs_[t]);
        tape.apply_linear_residual(*coeffs_[t]);
        sq += tape.residual().head(count).square().sum();
      });
      fwd.segment_terms[grp.segment] = coef * sq;
      fwd.boundary_term += fwd.segment_terms[grp.segment];
    }
    return fwd;
  }

  Eigen::ArrayXd v_values(const MlpNet& v,
                          const Eigen::Ref<const Eigen::MatrixXd>& pts) {
    Eigen::ArrayXd out(pts.cols());
    const int n = static_cast<int>(pts.cols());
    detail::run_chunks(n, chunk_, threads_, [&](int, int start, int count,
                                                int t) {
      AdjointTape& tape = *v_tapes_[t];
      tape.rebind(&v);
      tape.forward(pts.middleCols(start, count));
      out.segment(start, count) = tape.out_value().transpose();
    });
    return out;
  }

  /// Assemble the loss from a recorded forward pass of u and multiplier
  /// values on the same interior points.
  LossBreakdown combine(const UForward& fwd,
                        const Eigen::ArrayXd& v_vals) const {
    LossBreakdown out;
    out.boundary_term = fwd.boundary_term;
    out.segment_terms = fwd.segment_terms;
    const auto n = fwd.interior_residuals.size();
    out.interior_term = prob_->domain.volume() / static_cast<double>(n) *
                        (fwd.interior_residuals * v_vals).sum();
    out.total = out.boundary_term + out.interior_term;
    return out;
  }

  LossBreakdown loss(const MlpNet& u, const MlpNet& v, const Batch& batch) {
    return combine(forward_u(u, batch), v_values(v, batch.interior));
  }

  /// grad += d L-hat / d theta at fixed multiplier values.
  void grad_theta(const MlpNet& u, const Batch& batch,
                  const Eigen::ArrayXd& v_vals, Eigen::VectorXd& grad) {
    check_batch(batch);
    const int n = static_cast<int>(batch.interior.cols());
    const double scale = prob_->domain.volume() / n;
    const Eigen::ArrayXd f_vals = eval_field(prob_->f, batch.interior);

    const int nci = (n + chunk_ - 1) / chunk_;
    int ncb = 0;
    for (const auto& grp : batch.boundary.groups)
      ncb += (static_cast<int>(grp.points.cols()) + chunk_ - 1) / chunk_;
    prepare_partials(u.num_params(), nci + ncb);

    detail::run_chunks(n, chunk_, threads_, [&](int c, int start, int count,
                                                int t) {
      AdjointTape& tape = *u_tapes_[t];
      tape.rebind(&u);
      tape.forward(batch.interior.middleCols(start, count));
      apply_interior_residual(tape, batch.interior.middleCols(start, count),
                              f_vals.segment(start, count), t);
      tape.finish_dot_sum(scale * v_vals.segment(start, count));
      partial_col(c).setZero();
      tape.backprop_params(partial_col(c));
    });

    int cbase = nci;
    for (const auto& grp : batch.boundary.groups) {
      const int ns = static_cast<int>(grp.points.cols());
      if (ns == 0) continue;
      const auto& bc = prob_->bc_for_segment(grp.segment);
      const Eigen::ArrayXd g_vals = eval_field(bc.g, grp.points);
      const double coef =
          prob_->domain.segments()[grp.segment].measure / (2.0 * ns);
      detail::run_chunks(ns, chunk_, threads_, [&](int c, int start, int count,
                                                   int t) {
        AdjointTape& tape = *u_tapes_[t];
        tape.rebind(&u);
        tape.forward(grp.points.middleCols(start, count));
        boundary_residual_coeffs(bc, grp.normals.middleCols(start, count),
                                 g_vals.segment(start, count), *coeffs_[t]);
        tape.apply_linear_residual(*coeffs_[t]);
        tape.finish_square_sum(coef);
        partial_col(cbase + c).setZero();
        tape.backprop_params(partial_col(cbase + c));
      });
      cbase += (ns + chunk_ - 1) / chunk_;
    }
    reduce_partials(grad);
  }

  /// grad += d L-hat / d tau at fixed interior residuals of u.
  void grad_tau(const MlpNet& v, const Batch& batch,
                const Eigen::ArrayXd& interior_residuals,
                Eigen::VectorXd& grad) {
    const int n = static_cast<int>(batch.interior.cols());
    const double scale = prob_->domain.volume() / n;
    prepare_partials(v.num_params(), (n + chunk_ - 1) / chunk_);
    detail::run_chunks(n, chunk_, threads_, [&](int c, int start, int count,
                                                int t) {
      AdjointTape& tape = *v_tapes_[t];
      tape.rebind(&v);
      tape.forward(batch.interior.middleCols(start, count));
      LinearJetCoeffs& lc = *coeffs_[t];
      lc.cu = Eigen::ArrayXd::Ones(count);
      lc.cg.resize(0, 0);
      lc.cl.resize(0);
      lc.c0 = Eigen::ArrayXd::Zero(count);
      tape.apply_linear_residual(lc);
      tape.finish_dot_sum(scale * interior_residuals.segment(start, count));
      partial_col(c).setZero();
      tape.backprop_params(partial_col(c));
    });
    reduce_partials(grad);
  }

 private:
  void apply_interior_residual(AdjointTape& tape,
                               const Eigen::Ref<const Eigen::MatrixXd>& pts,
                               const Eigen::ArrayXd& f_vals, int t) {
    if (prob_->op.kind == OperatorSpec::Kind::kDivNonlinear) {
      tape.apply_quasilinear_residual(prob_->op.q, prob_->op.q_prime,
                                      prob_->op.q_second, f_vals);
    } else {
      interior_residual_coeffs(prob_->op, pts, f_vals, *coeffs_[t]);
      tape.apply_linear_residual(*coeffs_[t]);
    }
  }

  void check_batch(const Batch& batch) const {
    if (batch.interior.cols() < 1)
      throw CountError("LagrangianEvaluator: empty interior batch");
    if (batch.boundary.total < 1)
      throw CountError("LagrangianEvaluator: empty boundary batch");
    if (batch.interior.rows() != prob_->dim())
      throw DimensionError("LagrangianEvaluator: batch dimension mismatch");
  }

  void prepare_partials(int params, int n_chunks) {
    if (partials_.rows() != params || partials_.cols() < n_chunks)
      partials_.resize(params, n_chunks);
    n_partials_ = n_chunks;
  }
  Eigen::Ref<Eigen::VectorXd> partial_col(int c) { return partials_.col(c); }
  void reduce_partials(Eigen::VectorXd& grad) {
    for (int c = 0; c < n_partials_; ++c) grad += partials_.col(c);
  }

  const PdeProblem* prob_;
  int chunk_;
  int threads_;
  std::vector<std::unique_ptr<AdjointTape>> u_tapes_;
  std::vector<std::unique_ptr<AdjointTape>> v_tapes_;
  std::vector<std::unique_ptr<LinearJetCoeffs>> coeffs_;
  Eigen::MatrixXd partials_;
  int n_partials_ = 0;
};

/// Two-point duality-gap estimate on one fixed batch,
///   L-hat(u_next, v_curr) - L-hat(u_curr, v_next).
inline double duality_gap(const MlpNet& u_next, const MlpNet& v_curr,
                          const MlpNet& u_curr, const MlpNet& v_next,
                          const Batch& batch, const PdeProblem& prob) {
  LagrangianEvaluator eval(&prob, &u_next, &v_curr);
  return eval.loss(u_next, v_curr, batch).total -
         eval.loss(u_curr, v_next, batch).total;
}

}  // namespace infsup

#endif  // INFSUP_LOSS_HPP
