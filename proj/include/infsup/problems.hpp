#ifndef INFSUP_PROBLEMS_HPP
#define INFSUP_PROBLEMS_HPP

#include <Eigen/Core>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "infsup/errors.hpp"
#include "infsup/geometry.hpp"
#include "infsup/jet.hpp"
#include "infsup/tape.hpp"

namespace infsup {

using ScalarField = std::function<double(const Eigen::Ref<const Eigen::VectorXd>&)>;
using VectorField =
    std::function<Eigen::VectorXd(const Eigen::Ref<const Eigen::VectorXd>&)>;

/// Elliptic interior operator in divergence form, expanded by the product
/// rule into gradient and Laplacian terms of the trial field:
///   laplace        A u = -lap u
///   div_coeff      A u = -div(a(x) grad u)  = -(grad a . grad u + a lap u)
///   div_nonlinear  A u = -div(q(u) grad u)  = -(q'(u)|grad u|^2 + q(u) lap u)
struct OperatorSpec {
  enum class Kind { kLaplace, kDivCoeff, kDivNonlinear };
  Kind kind = Kind::kLaplace;

  ScalarField a;       // div_coeff: coefficient, must be positive on Omega
  VectorField grad_a;  // div_coeff: its gradient
  // div_nonlinear: q must be positive on the solution range; the second
  // derivative enters the parameter adjoint of the residual.
  std::function<double(double)> q, q_prime, q_second;

  static OperatorSpec laplace() { return {}; }

  static OperatorSpec div_coeff(ScalarField coeff, VectorField coeff_grad) {
    OperatorSpec op;
    op.kind = Kind::kDivCoeff;
    op.a = std::move(coeff);
    op.grad_a = std::move(coeff_grad);
    return op;
  }

  static OperatorSpec div_nonlinear(std::function<double(double)> q,
                                    std::function<double(double)> q_prime,
                                    std::function<double(double)> q_second) {
    OperatorSpec op;
    op.kind = Kind::kDivNonlinear;
    op.q = std::move(q);
    op.q_prime = std::move(q_prime);
    op.q_second = std::move(q_second);
    return op;
  }
};

/// B u = alpha u + beta du/dn with data g on one labeled segment.
struct BoundaryCondition {
  enum class Kind { kDirichlet, kNeumann, kRobin };
  std::string label;
  Kind kind = Kind::kDirichlet;
  double alpha = 1.0, beta = 0.0;
  ScalarField g;

  static BoundaryCondition dirichlet(std::string label, ScalarField g) {
    return {std::move(label), Kind::kDirichlet, 1.0, 0.0, std::move(g)};
  }
  static BoundaryCondition neumann(std::string label, ScalarField g) {
    return {std::move(label), Kind::kNeumann, 0.0, 1.0, std::move(g)};
  }
  static BoundaryCondition robin(std::string label, double alpha, double beta,
                                 ScalarField g) {
    if (!(alpha > 0.0) || beta < 0.0)
      throw ConfigError("robin: requires alpha > 0 and beta >= 0");
    return {std::move(label), Kind::kRobin, alpha, beta, std::move(g)};
  }
};

/// A u = f in Omega with one boundary condition per boundary segment and an
/// optional closed-form solution for error reporting.
struct PdeProblem {
  std::string name;
  Domain domain;
  OperatorSpec op;
  std::vector<BoundaryCondition> bcs;  // aligned with domain.segments()
  ScalarField f;
  ScalarField exact;  // may be empty

  bool has_exact() const { return static_cast<bool>(exact); }
  int dim() const { return domain.dim(); }

  const BoundaryCondition& bc_for_segment(int seg) const {
    return bcs.at(static_cast<std::size_t>(seg));
  }

  void validate() const {
    if (bcs.size() != domain.segments().size())
      throw ConfigError(name + ": one boundary condition per segment required");
    for (std::size_t i = 0; i < bcs.size(); ++i)
      if (bcs[i].label != domain.segments()[i].label)
        throw ConfigError(name + ": boundary condition labels out of order");
    if (op.kind == OperatorSpec::Kind::kDivCoeff && (!op.a || !op.grad_a))
      throw ConfigError(name + ": div_coeff operator needs a and grad a");
    if (op.kind == OperatorSpec::Kind::kDivNonlinear &&
        (!op.q || !op.q_prime || !op.q_second))
      throw ConfigError(name + ": div_nonlinear operator needs q, q', q''");
    if (!f) throw ConfigError(name + ": source term missing");
  }
};

/// A u - f at one point, from the trial field's jet.
inline double interior_residual(const OperatorSpec& op, const Jet& u,
                                const Eigen::Ref<const Eigen::VectorXd>& x,
                                double f_val) {
  switch (op.kind) {
    case OperatorSpec::Kind::kLaplace:
      return -u.lap - f_val;
    case OperatorSpec::Kind::kDivCoeff:
      return -(op.grad_a(x).dot(u.grad) + op.a(x) * u.lap) - f_val;
    case OperatorSpec::Kind::kDivNonlinear: {
      const double qv = op.q(u.value), q1 = op.q_prime(u.value);
      return -(q1 * u.grad.squaredNorm() + qv * u.lap) - f_val;
    }
  }
  return 0;  // unreachable
}

/// B u - g at one boundary sample.
inline double boundary_residual(const BoundaryCondition& bc, const Jet& u,
                                const BoundarySample& sample, double g_val) {
  if (bc.label != sample.label)
    throw ConfigError("boundary_residual: sample from segment '" +
                      sample.label + "' evaluated against condition '" +
                      bc.label + "'");
  switch (bc.kind) {
    case BoundaryCondition::Kind::kDirichlet:
      return u.value - g_val;
    case BoundaryCondition::Kind::kNeumann:
      return u.grad.dot(sample.normal) - g_val;
    case BoundaryCondition::Kind::kRobin:
      return bc.alpha * u.value + bc.beta * u.grad.dot(sample.normal) - g_val;
  }
  return 0;  // unreachable
}

inline Eigen::ArrayXd eval_field(const ScalarField& fn,
                                 const Eigen::Ref<const Eigen::MatrixXd>& pts) {
  Eigen::ArrayXd out(pts.cols());
  for (int c = 0; c < pts.cols(); ++c) out[c] = fn(pts.col(c));
  return out;
}

/// Interior residual as tape coefficients for a chunk of points. Returns
/// false for the nonlinear operator, which needs the dedicated tape op.
inline bool interior_residual_coeffs(
    const OperatorSpec& op, const Eigen::Ref<const Eigen::MatrixXd>& pts,
    const Eigen::ArrayXd& f_vals, LinearJetCoeffs& out) {
  const int B = static_cast<int>(pts.cols());
  out.cu.resize(0);
  out.c0 = -f_vals.head(B);
  switch (op.kind) {
    case OperatorSpec::Kind::kLaplace:
      out.cg.resize(0, 0);
      out.cl = Eigen::ArrayXd::Constant(B, -1.0);
      return true;
    case OperatorSpec::Kind::kDivCoeff: {
      out.cg.resize(pts.rows(), B);
      out.cl.resize(B);
      for (int b = 0; b < B; ++b) {
        out.cg.col(b) = -op.grad_a(pts.col(b));
        out.cl[b] = -op.a(pts.col(b));
      }
      return true;
    }
    case OperatorSpec::Kind::kDivNonlinear:
      return false;
  }
  return false;  // unreachable
}

/// Boundary residual as tape coefficients for a chunk of samples of one
/// segment.
inline void boundary_residual_coeffs(
    const BoundaryCondition& bc, const Eigen::Ref<const Eigen::MatrixXd>& normals,
    const Eigen::ArrayXd& g_vals, LinearJetCoeffs& out) {
  const int B = static_cast<int>(normals.cols());
  out.c0 = -g_vals.head(B);
  out.cl.resize(0);
  switch (bc.kind) {
    case BoundaryCondition::Kind::kDirichlet:
      out.cu = Eigen::ArrayXd::Ones(B);
      out.cg.resize(0, 0);
      break;
    case BoundaryCondition::Kind::kNeumann:
      out.cu.resize(0);
      out.cg = normals;
      break;
    case BoundaryCondition::Kind::kRobin:
      out.cu = Eigen::ArrayXd::Constant(B, bc.alpha);
      out.cg = bc.beta * normals;
      break;
  }
}

// ---------------------------------------------------------------------------
// Builtin problems.

/// -lap u = prod_i cos(pi x_i / 2) on [-1,1]^d, u = 0 on the boundary.
/// The source is an eigenfunction of the Laplacian, so the solution is the
/// same product scaled by 4/(d pi^2).
inline PdeProblem dirichlet_poisson(int d) {
  PdeProblem p;
  p.name = "poisson";
  p.domain = Domain::hypercube(-1.0, 1.0, d);
  p.op = OperatorSpec::laplace();
  auto coscos = [](const Eigen::Ref<const Eigen::VectorXd>& x) {
    double v = 1.0;
    for (int i = 0; i < x.size(); ++i)
      v *= std::cos(0.5 * std::numbers::pi * x[i]);
    return v;
  };
  p.f = coscos;
  const double scale = 4.0 / (d * std::numbers::pi * std::numbers::pi);
  p.exact = [coscos, scale](const Eigen::Ref<const Eigen::VectorXd>& x) {
    return scale * coscos(x);
  };
  p.bcs.push_back(BoundaryCondition::dirichlet(
      "boundary", [](const Eigen::Ref<const Eigen::VectorXd>&) { return 0.0; }));
  p.validate();
  return p;
}

/// -lap u = exp(-(x+1/2)^2 - (y+1/2)^2) on the L-shaped region, u = 0 on
/// the boundary. No closed form; a grid reference stands in for the exact
/// solution when attached by the caller.
inline PdeProblem l_shape_poisson() {
  PdeProblem p;
  p.name = "lshape";
  p.domain = Domain::l_shape();
  p.op = OperatorSpec::laplace();
  p.f = [](const Eigen::Ref<const Eigen::VectorXd>& x) {
    const double dx = x[0] + 0.5, dy = x[1] + 0.5;
    return std::exp(-dx * dx - dy * dy);
  };
  p.bcs.push_back(BoundaryCondition::dirichlet(
      "boundary", [](const Eigen::Ref<const Eigen::VectorXd>&) { return 0.0; }));
  p.validate();
  return p;
}

/// Gaussian source on the unit square; u = 0 on the vertical sides,
/// du/dn = sin(5 x_1) on the horizontal sides.
inline PdeProblem mixed_bc_square() {
  PdeProblem p;
  p.name = "mixed";
  p.domain = Domain::hypercube_partitioned(
      0.0, 1.0, 2,
      {{"dirichlet", {{0, 0}, {0, 1}}}, {"neumann", {{1, 0}, {1, 1}}}});
  p.op = OperatorSpec::laplace();
  p.f = [](const Eigen::Ref<const Eigen::VectorXd>& x) {
    const double dx = x[0] - 0.5, dy = x[1] - 0.5;
    return 10.0 * std::exp(-(dx * dx + dy * dy) / 0.02);
  };
  p.bcs.push_back(BoundaryCondition::dirichlet(
      "dirichlet", [](const Eigen::Ref<const Eigen::VectorXd>&) { return 0.0; }));
  p.bcs.push_back(BoundaryCondition::neumann(
      "neumann", [](const Eigen::Ref<const Eigen::VectorXd>& x) {
        return std::sin(5.0 * x[0]);
      }));
  p.validate();
  return p;
}

/// -div((sum_i x_i) grad u) = -(2d+2) sum_i x_i on [0,1]^d, with the
/// quadratic solution u = 1 + |x|^2 imposed on the boundary. The unit cube
/// keeps the coefficient positive almost everywhere.
inline PdeProblem varcoeff_poisson(int d = 5) {
  PdeProblem p;
  p.name = "varcoeff";
  p.domain = Domain::hypercube(0.0, 1.0, d);
  p.op = OperatorSpec::div_coeff(
      [](const Eigen::Ref<const Eigen::VectorXd>& x) { return x.sum(); },
      [](const Eigen::Ref<const Eigen::VectorXd>& x) {
        return Eigen::VectorXd::Ones(x.size()).eval();
      });
  p.f = [d](const Eigen::Ref<const Eigen::VectorXd>& x) {
    return -(2.0 * d + 2.0) * x.sum();
  };
  p.exact = [](const Eigen::Ref<const Eigen::VectorXd>& x) {
    return 1.0 + x.squaredNorm();
  };
  p.bcs.push_back(BoundaryCondition::dirichlet("boundary", p.exact));
  p.validate();
  return p;
}

/// -div((1+u)^m grad u) = 0 on [0,1]^d with u = 0 at x_1 = 0, u = 1 at
/// x_1 = 1, and no flux through the remaining faces. The exact profile
/// depends on x_1 only: u = ((2^{m+1}-1) x_1 + 1)^{1/(m+1)} - 1.
inline PdeProblem quasilinear_poisson(int d = 5, int m = 2) {
  if (m < 1) throw ConfigError("quasilinear_poisson: m >= 1 required");
  PdeProblem p;
  p.name = "quasilinear";
  std::vector<Domain::FaceRef> walls;
  for (int a = 1; a < d; ++a) {
    walls.push_back({a, 0});
    walls.push_back({a, 1});
  }
  std::vector<std::pair<std::string, std::vector<Domain::FaceRef>>> part = {
      {"left", {{0, 0}}}, {"right", {{0, 1}}}};
  if (!walls.empty()) part.emplace_back("walls", walls);
  p.domain = Domain::hypercube_partitioned(0.0, 1.0, d, part);
  p.op = OperatorSpec::div_nonlinear(
      [m](double u) { return std::pow(1.0 + u, m); },
      [m](double u) { return m * std::pow(1.0 + u, m - 1); },
      [m](double u) {
        return m > 1 ? m * (m - 1) * std::pow(1.0 + u, m - 2) : 0.0;
      });
  p.f = [](const Eigen::Ref<const Eigen::VectorXd>&) { return 0.0; };
  const double c = std::pow(2.0, m + 1) - 1.0;
  p.exact = [c, m](const Eigen::Ref<const Eigen::VectorXd>& x) {
    return std::pow(c * x[0] + 1.0, 1.0 / (m + 1)) - 1.0;
  };
  p.bcs.push_back(BoundaryCondition::dirichlet(
      "left", [](const Eigen::Ref<const Eigen::VectorXd>&) { return 0.0; }));
  p.bcs.push_back(BoundaryCondition::dirichlet(
      "right", [](const Eigen::Ref<const Eigen::VectorXd>&) { return 1.0; }));
  if (!walls.empty())
    p.bcs.push_back(BoundaryCondition::neumann(
        "walls", [](const Eigen::Ref<const Eigen::VectorXd>&) { return 0.0; }));
  p.validate();
  return p;
}

inline std::vector<std::string> builtin_problem_names() {
  return {"poisson", "lshape", "mixed", "varcoeff", "quasilinear"};
}

inline PdeProblem make_builtin(const std::string& name, int d = 0, int m = 2) {
  if (name == "poisson") return dirichlet_poisson(d > 0 ? d : 5);
  if (name == "lshape") return l_shape_poisson();
  if (name == "mixed") return mixed_bc_square();
  if (name == "varcoeff") return varcoeff_poisson(d > 0 ? d : 5);
  if (name == "quasilinear") return quasilinear_poisson(d > 0 ? d : 5, m);
  throw ConfigError("unknown problem '" + name + "'");
}

/// The experiment catalog with default parameters.
inline std::vector<PdeProblem> builtin_problems() {
  return {dirichlet_poisson(5), l_shape_poisson(), mixed_bc_square(),
          varcoeff_poisson(5), quasilinear_poisson(5, 2)};
}

}  // namespace infsup

#endif  // INFSUP_PROBLEMS_HPP
