#ifndef INFSUP_FD_POISSON_HPP
#define INFSUP_FD_POISSON_HPP

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "infsup/errors.hpp"
#include "infsup/problems.hpp"

namespace infsup {

/// Second-order finite-difference solution of a 2D Poisson problem on a
/// rectilinear or L-shaped grid, with a bilinear interpolant for
/// evaluation at arbitrary points. Stands in for the exact solution where
/// none is available in closed form.
class FdSolution {
 public:
  double lo() const { return lo_; }
  double h() const { return h_; }
  int intervals() const { return n_; }

  double x_of(int i) const { return lo_ + i * h_; }
  double y_of(int j) const { return lo_ + j * h_; }
  bool node_valid(int i, int j) const { return !std::isnan(vals_(i, j)); }
  double at_node(int i, int j) const { return vals_(i, j); }

  /// Bilinear interpolation; exact at grid nodes.
  double operator()(double x, double y) const {
    const double fx = (x - lo_) / h_, fy = (y - lo_) / h_;
    int i = static_cast<int>(std::floor(fx));
    int j = static_cast<int>(std::floor(fy));
    i = std::min(std::max(i, 0), n_ - 1);
    j = std::min(std::max(j, 0), n_ - 1);
    const double tx = fx - i, ty = fy - j;
    const double v00 = vals_(i, j), v10 = vals_(i + 1, j);
    const double v01 = vals_(i, j + 1), v11 = vals_(i + 1, j + 1);
    if (std::isnan(v00) || std::isnan(v10) || std::isnan(v01) ||
        std::isnan(v11))
      throw ConfigError("FdSolution: evaluation outside the solved region");
    return (1 - tx) * (1 - ty) * v00 + tx * (1 - ty) * v10 +
           (1 - tx) * ty * v01 + tx * ty * v11;
  }

  double value_at(const Eigen::Ref<const Eigen::VectorXd>& p) const {
    return (*this)(p[0], p[1]);
  }

 private:
  friend FdSolution solve_poisson_fd(const PdeProblem&, double);
  double lo_ = 0, h_ = 0;
  int n_ = 0;
  Eigen::MatrixXd vals_;  // (n+1) x (n+1); NaN marks excluded nodes
};

/// Assemble and solve the 5-point Laplacian with Dirichlet substitution
/// and second-order ghost elimination for Neumann faces. Supported
/// problems: 2D hypercube or L-shape domains, laplace operator,
/// Dirichlet/Neumann conditions; h must divide the domain extent.
inline FdSolution solve_poisson_fd(const PdeProblem& prob, double h) {
  prob.validate();
  const Domain& dom = prob.domain;
  if (dom.dim() != 2)
    throw ConfigError("solve_poisson_fd: only 2D domains are supported");
  if (prob.op.kind != OperatorSpec::Kind::kLaplace)
    throw ConfigError("solve_poisson_fd: only the Laplace operator");
  for (const auto& bc : prob.bcs)
    if (bc.kind == BoundaryCondition::Kind::kRobin)
      throw ConfigError("solve_poisson_fd: Robin conditions unsupported");

  const double extent = dom.hi() - dom.lo();
  const double n_real = extent / h;
  const int n = static_cast<int>(std::lround(n_real));
  if (n < 2 || std::abs(n_real - n) > 1e-9 * n)
    throw ConfigError("solve_poisson_fd: h must divide the domain extent");

  const bool lshape = dom.kind() == Domain::Kind::kLShape;
  if (lshape && n % 2 != 0)
    throw ConfigError("solve_poisson_fd: L-shape grid must resolve the notch");
  const double lo = dom.lo();

  // Segment lookup per hypercube face (axis, side).
  int face_segment[2][2] = {{0, 0}, {0, 0}};
  if (!lshape)
    for (std::size_t s = 0; s < dom.segments().size(); ++s)
      for (int pidx : dom.segments()[s].panels) {
        const auto& p = dom.panels()[pidx];
        face_segment[p.axis][p.side] = static_cast<int>(s);
      }
  else
    for (const auto& bc : prob.bcs)
      if (bc.kind != BoundaryCondition::Kind::kDirichlet)
        throw ConfigError(
            "solve_poisson_fd: L-shape supports Dirichlet conditions only");

  enum class NodeKind : unsigned char { kInterior, kDirichlet, kNeumann, kExcluded };
  const int nn = n + 1;
  auto node_x = [&](int i) { return lo + i * h; };
  std::vector<NodeKind> kind(nn * nn, NodeKind::kInterior);
  std::vector<int> seg_of(nn * nn, -1);
  auto id = [&](int i, int j) { return j * nn + i; };

  for (int j = 0; j < nn; ++j)
    for (int i = 0; i < nn; ++i) {
      const double x = node_x(i), y = node_x(j);
      if (lshape && x > 0.0 && y > 0.0) {
        kind[id(i, j)] = NodeKind::kExcluded;
        continue;
      }
      bool dir = false, neu = false;
      int dir_seg = -1, neu_seg = -1;
      auto touch = [&](int axis, int side) {
        if (lshape) {
          dir = true;
          dir_seg = 0;
          return;
        }
        const int s = face_segment[axis][side];
        if (prob.bcs[s].kind == BoundaryCondition::Kind::kDirichlet) {
          dir = true;
          dir_seg = s;
        } else {
          neu = true;
          neu_seg = s;
        }
      };
      if (i == 0) touch(0, 0);
      if (i == n) touch(0, 1);
      if (j == 0) touch(1, 0);
      if (j == n) touch(1, 1);
      if (lshape && !dir) {
        // Notch edges x = 0, y in [0,1] and y = 0, x in [0,1].
        if ((x == 0.0 && y >= 0.0) || (y == 0.0 && x >= 0.0)) {
          dir = true;
          dir_seg = 0;
        }
      }
      // Corners shared by Dirichlet and Neumann faces count as Dirichlet,
      // so no normal needs to be defined there.
      if (dir) {
        kind[id(i, j)] = NodeKind::kDirichlet;
        seg_of[id(i, j)] = dir_seg;
      } else if (neu) {
        kind[id(i, j)] = NodeKind::kNeumann;
        seg_of[id(i, j)] = neu_seg;
      }
    }

  // Unknown numbering.
  std::vector<int> unknown(nn * nn, -1);
  int m = 0;
  bool any_dirichlet = false;
  for (int j = 0; j < nn; ++j)
    for (int i = 0; i < nn; ++i) {
      const NodeKind k = kind[id(i, j)];
      if (k == NodeKind::kInterior || k == NodeKind::kNeumann)
        unknown[id(i, j)] = m++;
      else if (k == NodeKind::kDirichlet)
        any_dirichlet = true;
    }
  if (!any_dirichlet)
    throw ConfigError("solve_poisson_fd: all-Neumann system is singular");

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(5 * static_cast<std::size_t>(m));
  const double inv_h2 = 1.0 / (h * h);

  Eigen::Vector2d pt;
  auto gval = [&](int i, int j) {
    const int s = seg_of[id(i, j)];
    if (s < 0)
      throw ConfigError("solve_poisson_fd: boundary data requested off-face");
    pt << node_x(i), node_x(j);
    return prob.bcs[s].g(pt);
  };

  for (int j = 0; j < nn; ++j)
    for (int i = 0; i < nn; ++i) {
      const int row = unknown[id(i, j)];
      if (row < 0) continue;
      pt << node_x(i), node_x(j);
      rhs[row] += prob.f(pt);
      trip.emplace_back(row, row, 4.0 * inv_h2);

      // Neighbor stencil with ghost reflection at Neumann faces:
      // u_ghost = u_mirror + 2 h g, from the second-order one-sided
      // normal derivative.
      struct Nb {
        int di, dj;
      };
      for (const Nb nb : {Nb{-1, 0}, Nb{1, 0}, Nb{0, -1}, Nb{0, 1}}) {
        int ii = i + nb.di, jj = j + nb.dj;
        double extra = 0.0;
        if (ii < 0 || ii > n || jj < 0 || jj > n ||
            kind[id(ii, jj)] == NodeKind::kExcluded) {
          // Ghost across a Neumann face (the node itself must be Neumann).
          ii = i - nb.di;
          jj = j - nb.dj;
          extra = 2.0 * h * gval(i, j);
        }
        const int cid = id(ii, jj);
        if (kind[cid] == NodeKind::kDirichlet)
          rhs[row] += inv_h2 * (gval(ii, jj) + extra);
        else {
          trip.emplace_back(row, unknown[cid], -inv_h2);
          rhs[row] += inv_h2 * extra;
        }
      }
    }

  Eigen::SparseMatrix<double> A(m, m);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success)
    throw ConfigError("solve_poisson_fd: factorization failed");
  const Eigen::VectorXd sol = lu.solve(rhs);
  const double resid = (A * sol - rhs).lpNorm<Eigen::Infinity>();
  if (!(resid <= 1e-10 * (1.0 + rhs.lpNorm<Eigen::Infinity>())))
    throw ConfigError("solve_poisson_fd: solver residual too large");

  FdSolution out;
  out.lo_ = lo;
  out.h_ = h;
  out.n_ = n;
  out.vals_.setConstant(nn, nn, std::numeric_limits<double>::quiet_NaN());
  for (int j = 0; j < nn; ++j)
    for (int i = 0; i < nn; ++i) {
      const int cid = id(i, j);
      if (kind[cid] == NodeKind::kDirichlet)
        out.vals_(i, j) = gval(i, j);
      else if (unknown[cid] >= 0)
        out.vals_(i, j) = sol[unknown[cid]];
    }
  return out;
}

/// Solve once and wrap the interpolant as a scalar field, e.g. to attach a
/// reference solution to a problem without a closed form.
inline ScalarField fd_reference_field(const PdeProblem& prob, double h) {
  auto sol = std::make_shared<FdSolution>(solve_poisson_fd(prob, h));
  return [sol](const Eigen::Ref<const Eigen::VectorXd>& x) {
    return (*sol)(x[0], x[1]);
  };
}

}  // namespace infsup

#endif  // INFSUP_FD_POISSON_HPP
