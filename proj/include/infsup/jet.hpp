#ifndef INFSUP_JET_HPP
#define INFSUP_JET_HPP

#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "infsup/errors.hpp"

namespace infsup {

/// Value, input gradient and input Laplacian of a scalar quantity at one
/// point. The grad/lap channels are what the interior residual operators
/// consume; propagating them through every layer avoids full Hessians.
struct Jet {
  double value = 0.0;
  Eigen::VectorXd grad;  // length = ambient dimension d
  double lap = 0.0;

  Jet() = default;
  Jet(double v, Eigen::VectorXd g, double l)
      : value(v), grad(std::move(g)), lap(l) {}

  int dim() const { return static_cast<int>(grad.size()); }

  bool finite() const {
    return std::isfinite(value) && std::isfinite(lap) && grad.allFinite();
  }
};

/// One layer's activations at one sample point; all members share dim().
using JetBatch = std::vector<Jet>;

// tanh and its first two derivatives, evaluated through the exp identity
//   tanh(x) = sign(x) * (1 - e) / (1 + e),  e = exp(-2|x|),
//   tanh'   = 4 e / (1 + e)^2,              tanh'' = -2 tanh tanh'.
// The e-based form of tanh' keeps full relative accuracy near saturation.
// Every evaluation path (scalar and batched) uses these same formulas.
struct TanhDerivs {
  double s;   // tanh(x)
  double s1;  // tanh'(x)
  double s2;  // tanh''(x)
};

inline TanhDerivs tanh_derivs(double x) {
  const double e = std::exp(-2.0 * std::abs(x));
  const double inv = 1.0 / (1.0 + e);
  TanhDerivs t;
  t.s = std::copysign((1.0 - e) * inv, x);
  t.s1 = 4.0 * e * inv * inv;
  t.s2 = -2.0 * t.s * t.s1;
  return t;
}

inline double tanh_value(double x) { return tanh_derivs(x).s; }

/// Jets of the identity map at x: Jet i carries value x_i, grad e_i, lap 0.
inline JetBatch seed_input(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const int d = static_cast<int>(x.size());
  if (d < 1) throw DimensionError("seed_input: input point must have d >= 1");
  JetBatch out(d);
  for (int i = 0; i < d; ++i) {
    out[i].value = x[i];
    out[i].grad = Eigen::VectorXd::Unit(d, i);
    out[i].lap = 0.0;
  }
  return out;
}

/// Affine map applied to a batch of Jets. Gradient and Laplacian channels
/// transform linearly, exactly like the values.
inline JetBatch affine_jet(const Eigen::Ref<const Eigen::MatrixXd>& W,
                           const Eigen::Ref<const Eigen::VectorXd>& b,
                           const JetBatch& in) {
  const int m = static_cast<int>(W.rows());
  const int n = static_cast<int>(W.cols());
  if (static_cast<int>(in.size()) != n || b.size() != m)
    throw DimensionError("affine_jet: shape mismatch");
  if (n == 0) throw DimensionError("affine_jet: empty input batch");
  const int d = in[0].dim();
  JetBatch out(m);
  for (int i = 0; i < m; ++i) {
    out[i].value = b[i];
    out[i].grad = Eigen::VectorXd::Zero(d);
    out[i].lap = 0.0;
    for (int j = 0; j < n; ++j) {
      if (in[j].dim() != d) throw DimensionError("affine_jet: ragged batch");
      const double w = W(i, j);
      out[i].value += w * in[j].value;
      out[i].grad += w * in[j].grad;
      out[i].lap += w * in[j].lap;
    }
  }
  return out;
}

/// tanh applied to one Jet. Chain rule for the Laplacian of a composition:
///   (tanh o u)'' trace = tanh''(u) |grad u|^2 + tanh'(u) lap u.
inline Jet tanh_jet(const Jet& in) {
  const TanhDerivs t = tanh_derivs(in.value);
  Jet out;
  out.value = t.s;
  out.grad = t.s1 * in.grad;
  out.lap = t.s2 * in.grad.squaredNorm() + t.s1 * in.lap;
  return out;
}

inline Jet scaled(const Jet& a, double c) { return {c * a.value, c * a.grad, c * a.lap}; }

inline Jet sum(const Jet& a, const Jet& b) {
  if (a.dim() != b.dim()) throw DimensionError("jet sum: dimension mismatch");
  return {a.value + b.value, a.grad + b.grad, a.lap + b.lap};
}

}  // namespace infsup

#endif  // INFSUP_JET_HPP
