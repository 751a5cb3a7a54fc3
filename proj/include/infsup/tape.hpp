#ifndef INFSUP_TAPE_HPP
#define INFSUP_TAPE_HPP

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "infsup/errors.hpp"
#include "infsup/jet.hpp"
#include "infsup/network.hpp"

namespace infsup {

/// Coefficients of a pointwise linear map from an output jet to a residual,
///   r_b = cu_b * u_b + sum_j cg(j,b) * g_b[j] + cl_b * l_b + c0_b.
/// Empty members are treated as zero. Covers the Laplace and
/// divergence-form interior operators and all boundary operators.
struct LinearJetCoeffs {
  Eigen::ArrayXd cu;   // per-point value coefficient (or empty)
  Eigen::MatrixXd cg;  // d x B gradient coefficients (or empty)
  Eigen::ArrayXd cl;   // per-point Laplacian coefficient (or empty)
  Eigen::ArrayXd c0;   // per-point constant term
};

/// Records the forward evaluation of one scalar loss contribution for a
/// chunk of sample points and plays it backwards for parameter gradients.
///
/// Activations are stored as width x (C*B) matrices whose C column blocks
/// hold the jet channels [values | grad_1 .. grad_d | lap] for the B points
/// of the chunk (C = 1 when only values are propagated, as for the
/// multiplier network). Affine layers act on all channels with one matrix
/// product, which is where nearly all the arithmetic lives.
///
/// Lifecycle per chunk: forward() -> one residual op -> one scalar head
/// (dot_sum or square_sum) -> optionally backprop_params() -> reset().
class AdjointTape {
 public:
  AdjointTape(const MlpNet* net, int ambient_dim, bool with_jets,
              int chunk_capacity = 128)
      : net_(net),
        dim_(ambient_dim),
        channels_(with_jets ? ambient_dim + 2 : 1),
        capacity_(chunk_capacity) {
    if (net->input_dim() != ambient_dim)
      throw DimensionError("AdjointTape: net input dim != ambient dim");
    const int m = net->num_layers();
    const auto& sz = net->layer_sizes();
    stages_.resize(m + 1);
    bars_.resize(m + 1);
    for (int k = 0; k <= m; ++k) {
      stages_[k].resize(sz[k], channels_ * capacity_);
      if (k >= 1) bars_[k].resize(sz[k], channels_ * capacity_);
    }
    preact_.resize(m);
    t1_.resize(m);
    g2_.resize(m);
    for (int k = 1; k < m; ++k) {  // hidden layers only
      preact_[k].resize(sz[k], channels_ * capacity_);
      t1_[k].resize(sz[k], capacity_);
      if (with_jets) g2_[k].resize(sz[k], capacity_);
    }
    r_.resize(capacity_);
    w_.resize(capacity_);
  }

  const MlpNet& net() const { return *net_; }
  bool with_jets() const { return channels_ > 1; }
  int batch_size() const { return batch_; }

 private:
  // Column block c (channel) of a stage matrix for the current batch.
  auto block(Eigen::MatrixXd& mat, int c) {
    return mat.middleCols(c * batch_, batch_);
  }
  auto block(const Eigen::MatrixXd& mat, int c) const {
    return mat.middleCols(c * batch_, batch_);
  }
  auto bar_block(int k, int c) {
    return bars_[k].middleCols(c * batch_, batch_);
  }
  auto out_block(int c) const {
    return stages_[net_->num_layers()].row(0).segment(c * batch_, batch_);
  }

 public:
  /// Point the tape at another network of the identical architecture
  /// (buffers depend only on layer sizes).
  void rebind(const MlpNet* net) {
    if (net == net_) return;
    if (net->layer_sizes() != net_->layer_sizes())
      throw DimensionError("AdjointTape::rebind: architecture mismatch");
    net_ = net;
    reset();
  }

  /// Forward pass for a chunk of points (d x B, B <= capacity), recording
  /// the seed, affine and activation operations.
  void forward(const Eigen::Ref<const Eigen::MatrixXd>& pts) {
    const int B = static_cast<int>(pts.cols());
    if (pts.rows() != dim_) throw DimensionError("AdjointTape: point dim");
    if (B < 1 || B > capacity_)
      throw CountError("AdjointTape: chunk size out of range");
    reset();
    batch_ = B;

    // Seed: identity jets of the input coordinates.
    auto x0 = stages_[0].leftCols(channels_ * B);
    x0.setZero();
    block(stages_[0], 0) = pts;
    if (with_jets())
      for (int j = 0; j < dim_; ++j) block(stages_[0], 1 + j).row(j).setOnes();
    ops_.push_back({OpKind::kSeed, 0});

    const int m = net_->num_layers();
    for (int k = 0; k < m; ++k) {
      const bool hidden = (k + 1 < m);
      Eigen::MatrixXd& dst = hidden ? preact_[k + 1] : stages_[k + 1];
      dst.leftCols(channels_ * B).noalias() =
          net_->weight(k) * stages_[k].leftCols(channels_ * B);
      block(dst, 0).colwise() += net_->bias(k);
      ops_.push_back({OpKind::kAffine, k});
      if (hidden) {
        apply_tanh(k + 1);
        ops_.push_back({OpKind::kTanh, k + 1});
      }
    }
  }

  // Output-jet views (the single output neuron), each of length B.
  auto out_value() const { return out_block(0); }
  auto out_grad(int j) const { return out_block(1 + j); }
  auto out_lap() const { return out_block(1 + dim_); }

  /// r = cu*u + cg.g + cl*l + c0 applied to the output jets.
  void apply_linear_residual(const LinearJetCoeffs& c) {
    require_forwarded("apply_linear_residual");
    auto r = r_.head(batch_);
    if (c.c0.size())
      r = c.c0.head(batch_);
    else
      r.setZero();
    if (c.cu.size()) r += c.cu.head(batch_) * out_value().transpose().array();
    if (c.cl.size()) {
      require_jets("Laplacian residual coefficient");
      r += c.cl.head(batch_) * out_lap().transpose().array();
    }
    if (c.cg.size()) {
      require_jets("gradient residual coefficient");
      for (int j = 0; j < dim_; ++j)
        r += c.cg.row(j).head(batch_).transpose().array() *
             out_grad(j).transpose().array();
    }
    lin_ = &c;
    ops_.push_back({OpKind::kLinearResidual, 0});
    has_residual_ = true;
  }

  /// r = -(q'(u) |g|^2 + q(u) l) - f, the expanded divergence of a
  /// solution-dependent flux q(u) grad u.
  void apply_quasilinear_residual(const std::function<double(double)>& q,
                                  const std::function<double(double)>& dq,
                                  const std::function<double(double)>& d2q,
                                  const Eigen::ArrayXd& f_vals) {
    require_forwarded("apply_quasilinear_residual");
    require_jets("quasilinear residual");
    q_ = &q;
    dq_ = &dq;
    d2q_ = &d2q;
    for (int b = 0; b < batch_; ++b) {
      const double u = out_value()(b);
      double gg = 0;
      for (int j = 0; j < dim_; ++j) gg += out_grad(j)(b) * out_grad(j)(b);
      r_[b] = -(dq(u) * gg + q(u) * out_lap()(b)) - f_vals[b];
    }
    ops_.push_back({OpKind::kQuasilinearResidual, 0});
    has_residual_ = true;
  }

  const Eigen::ArrayXd& residual() const { return r_; }

  /// scalar = sum_b r_b * w_b
  double finish_dot_sum(const Eigen::Ref<const Eigen::ArrayXd>& w) {
    require_residual("finish_dot_sum");
    w_.head(batch_) = w.head(batch_);
    scalar_ = (r_.head(batch_) * w_.head(batch_)).sum();
    ops_.push_back({OpKind::kDotSum, 0});
    has_scalar_ = true;
    return scalar_;
  }

  /// scalar = coef * sum_b r_b^2
  double finish_square_sum(double coef) {
    require_residual("finish_square_sum");
    coef_ = coef;
    scalar_ = coef * r_.head(batch_).square().sum();
    ops_.push_back({OpKind::kSquareSum, 0});
    has_scalar_ = true;
    return scalar_;
  }

  /// Reverse sweep: accumulates d(scalar * loss_seed)/d(params) into grad.
  /// Visits every recorded operation exactly once, newest first.
  void backprop_params(Eigen::Ref<Eigen::VectorXd> grad,
                       double loss_seed = 1.0) {
    if (!has_scalar_)
      throw StateError(
          "AdjointTape::backprop_params: tape does not end in a scalar");
    if (grad.size() != net_->num_params())
      throw DimensionError("AdjointTape::backprop_params: gradient size");
    visited_ = 0;
    const int B = batch_;
    for (auto it = ops_.rbegin(); it != ops_.rend(); ++it, ++visited_) {
      switch (it->kind) {
        case OpKind::kDotSum:
          rbar_ = loss_seed * w_.head(B);
          break;
        case OpKind::kSquareSum:
          rbar_ = (2.0 * loss_seed * coef_) * r_.head(B);
          break;
        case OpKind::kLinearResidual: {
          auto bar = bars_[net_->num_layers()].leftCols(channels_ * B);
          bar.setZero();
          if (lin_->cu.size())
            bar_block(net_->num_layers(), 0).row(0).array() +=
                rbar_.transpose() * lin_->cu.head(B).transpose();
          if (lin_->cl.size())
            bar_block(net_->num_layers(), 1 + dim_).row(0).array() +=
                rbar_.transpose() * lin_->cl.head(B).transpose();
          if (lin_->cg.size())
            for (int j = 0; j < dim_; ++j)
              bar_block(net_->num_layers(), 1 + j).row(0).array() +=
                  rbar_.transpose() * lin_->cg.row(j).head(B).array();
          break;
        }
        case OpKind::kQuasilinearResidual: {
          const int m = net_->num_layers();
          bars_[m].leftCols(channels_ * B).setZero();
          for (int b = 0; b < B; ++b) {
            const double u = out_value()(b);
            const double l = out_lap()(b);
            double gg = 0;
            for (int j = 0; j < dim_; ++j)
              gg += out_grad(j)(b) * out_grad(j)(b);
            const double qv = (*q_)(u), q1 = (*dq_)(u), q2 = (*d2q_)(u);
            const double rb = rbar_[b];
            bar_block(m, 0)(0, b) = -rb * (q2 * gg + q1 * l);
            for (int j = 0; j < dim_; ++j)
              bar_block(m, 1 + j)(0, b) = -rb * 2.0 * q1 * out_grad(j)(b);
            bar_block(m, 1 + dim_)(0, b) = -rb * qv;
          }
          break;
        }
        case OpKind::kTanh:
          reverse_tanh(it->layer);
          break;
        case OpKind::kAffine:
          reverse_affine(it->layer, grad);
          break;
        case OpKind::kSeed:
          break;  // input coordinates carry no parameters
      }
    }
  }

  void reset() {
    ops_.clear();
    has_residual_ = has_scalar_ = false;
    batch_ = 0;
    lin_ = nullptr;
  }

  int ops_recorded() const { return static_cast<int>(ops_.size()); }
  int ops_visited() const { return visited_; }

 private:
  enum class OpKind {
    kSeed,
    kAffine,
    kTanh,
    kLinearResidual,
    kQuasilinearResidual,
    kDotSum,
    kSquareSum
  };
  struct OpRecord {
    OpKind kind;
    int layer;
  };

  void require_forwarded(const char* who) const {
    if (batch_ == 0 || has_residual_)
      throw StateError(std::string(who) + ": tape not in forwarded state");
  }
  void require_residual(const char* who) const {
    if (!has_residual_ || has_scalar_)
      throw StateError(std::string(who) + ": no residual recorded");
  }
  void require_jets(const char* what) const {
    if (!with_jets())
      throw StateError(std::string(what) + " requires jet channels");
  }

  // tanh over layer k: stages_[k] = tanh(preact_[k]) in all channels.
  void apply_tanh(int k) {
    const int B = batch_;
    auto aval = block(preact_[k], 0).array();
    auto s = block(stages_[k], 0).array();
    auto t1 = t1_[k].leftCols(B).array();
    {
      auto e = (-2.0 * aval.abs()).exp().eval();
      auto inv = (1.0 + e).inverse().eval();
      s = aval.sign() * (1.0 - e) * inv;
      t1 = 4.0 * e * inv * inv;
    }
    if (!with_jets()) return;
    auto g2 = g2_[k].leftCols(B).array();
    g2.setZero();
    for (int j = 0; j < dim_; ++j) {
      auto gj = block(preact_[k], 1 + j).array();
      block(stages_[k], 1 + j).array() = t1 * gj;
      g2 += gj.square();
    }
    // lap_out = s'' |g|^2 + s' lap_in, with s'' = -2 s s'.
    block(stages_[k], 1 + dim_).array() =
        (-2.0 * s * t1) * g2 + t1 * block(preact_[k], 1 + dim_).array();
  }

  // In place on bars_[k]: adjoint wrt tanh outputs -> adjoint wrt inputs.
  void reverse_tanh(int k) {
    const int B = batch_;
    auto s = block(stages_[k], 0).array();
    auto t1 = t1_[k].leftCols(B).array();
    auto vbar = bar_block(k, 0).array();
    if (!with_jets()) {
      vbar *= t1;
      return;
    }
    auto lbar = bar_block(k, 1 + dim_).array();
    const auto s2 = (-2.0 * s * t1).eval();            // tanh''
    const auto s3 = (-2.0 * (t1 * t1 + s * s2)).eval();  // tanh'''
    auto g2 = g2_[k].leftCols(B).array();
    // dot = sum_j gbar_j . g_j, needed for the value adjoint.
    Eigen::ArrayXXd dot = Eigen::ArrayXXd::Zero(s.rows(), B);
    for (int j = 0; j < dim_; ++j)
      dot += bar_block(k, 1 + j).array() * block(preact_[k], 1 + j).array();
    // Value channel first: it reads the unmodified grad/lap adjoints.
    vbar = vbar * t1 + dot * s2 +
           lbar * (s3 * g2 + s2 * block(preact_[k], 1 + dim_).array());
    for (int j = 0; j < dim_; ++j) {
      auto gbar = bar_block(k, 1 + j).array();
      gbar = gbar * t1 + 2.0 * lbar * s2 * block(preact_[k], 1 + j).array();
    }
    lbar *= t1;
  }

  // Adjoint of stage_{k+1} = W_k stage_k + b_k: accumulate parameter
  // gradients and push the adjoint to the previous stage.
  void reverse_affine(int k, Eigen::Ref<Eigen::VectorXd> grad) {
    const int cols = channels_ * batch_;
    const auto bar = bars_[k + 1].leftCols(cols);
    const int rows = net_->layer_sizes()[k + 1];
    const int prev = net_->layer_sizes()[k];
    Eigen::Map<RowMajorMatrix> gw(grad.data() + net_->weight_offset(k), rows,
                                  prev);
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + net_->bias_offset(k), rows);
    gw.noalias() += bar * stages_[k].leftCols(cols).transpose();
    gb.noalias() += bar_block(k + 1, 0).rowwise().sum();
    if (k > 0)
      bars_[k].leftCols(cols).noalias() = net_->weight(k).transpose() * bar;
  }

  const MlpNet* net_;
  int dim_;
  int channels_;
  int capacity_;
  int batch_ = 0;

  std::vector<Eigen::MatrixXd> stages_;  // post-activation values per layer
  std::vector<Eigen::MatrixXd> preact_;  // pre-activation jets (hidden layers)
  std::vector<Eigen::MatrixXd> t1_;      // tanh' at each hidden layer
  std::vector<Eigen::MatrixXd> g2_;      // |grad|^2 at each hidden layer
  std::vector<Eigen::MatrixXd> bars_;    // adjoint workspaces

  Eigen::ArrayXd r_, w_, rbar_;
  const LinearJetCoeffs* lin_ = nullptr;
  const std::function<double(double)>* q_ = nullptr;
  const std::function<double(double)>* dq_ = nullptr;
  const std::function<double(double)>* d2q_ = nullptr;
  double coef_ = 0.0;
  double scalar_ = 0.0;
  bool has_residual_ = false;
  bool has_scalar_ = false;
  int visited_ = 0;
  std::vector<OpRecord> ops_;
};

/// Full parameter gradient of the tape's scalar; entries for parameters the
/// recorded computation never touched are zero.
inline Eigen::VectorXd backprop_params(AdjointTape& tape,
                                       double loss_seed = 1.0) {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(tape.net().num_params());
  tape.backprop_params(grad, loss_seed);
  return grad;
}

}  // namespace infsup

#endif  // INFSUP_TAPE_HPP
