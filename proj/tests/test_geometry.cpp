#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "infsup/geometry.hpp"

using namespace infsup;
using Catch::Approx;

TEST_CASE("exact measures") {
  auto [v5, b5] = measures(Domain::hypercube(-1, 1, 5));
  REQUIRE(v5 == Approx(32.0));
  REQUIRE(b5 == Approx(160.0));

  auto [v2, b2] = measures(Domain::hypercube(0, 1, 2));
  REQUIRE(v2 == Approx(1.0));
  REQUIRE(b2 == Approx(4.0));

  auto [vl, bl] = measures(Domain::l_shape());
  REQUIRE(vl == Approx(3.0));
  REQUIRE(bl == Approx(8.0));
}

TEST_CASE("segment measures sum to the boundary measure") {
  const Domain mixed = Domain::hypercube_partitioned(
      0, 1, 2, {{"dirichlet", {{0, 0}, {0, 1}}}, {"neumann", {{1, 0}, {1, 1}}}});
  REQUIRE(mixed.segments().size() == 2);
  REQUIRE(mixed.segments()[0].measure == Approx(2.0));
  REQUIRE(mixed.segments()[1].measure == Approx(2.0));
  double total = 0;
  for (const auto& s : mixed.segments()) total += s.measure;
  REQUIRE(total == Approx(mixed.boundary_measure()));

  const Domain l = Domain::l_shape();
  double lt = 0;
  for (const auto& s : l.segments()) lt += s.measure;
  REQUIRE(lt == Approx(8.0));

  REQUIRE_THROWS_AS(
      Domain::hypercube_partitioned(0, 1, 2, {{"a", {{0, 0}}}}), ConfigError);
}

TEST_CASE("interior sampling statistics on [-1,1]^3") {
  const Domain dom = Domain::hypercube(-1, 1, 3);
  const int n = 10000;
  const Eigen::MatrixXd pts = sample_interior(dom, n, 2024);
  // CLT bound: 3 sigma of the mean of U(-1,1), sigma = 2/sqrt(12).
  const double bound = 3.0 * (2.0 / std::sqrt(12.0)) / std::sqrt(double(n));
  for (int i = 0; i < 3; ++i) REQUIRE(std::abs(pts.row(i).mean()) <= bound);
  for (int c = 0; c < n; ++c) REQUIRE(dom.contains(pts.col(c)));
}

TEST_CASE("interior sampling is deterministic per seed") {
  const Domain dom = Domain::hypercube(-1, 1, 2);
  REQUIRE(sample_interior(dom, 64, 7) == sample_interior(dom, 64, 7));
  REQUIRE(sample_interior(dom, 64, 7) != sample_interior(dom, 64, 8));
  REQUIRE_THROWS_AS(sample_interior(dom, 0, 1), CountError);
}

TEST_CASE("L-shape sampler avoids the removed quadrant") {
  const Domain dom = Domain::l_shape();
  const Eigen::MatrixXd pts = sample_interior(dom, 20000, 5);
  for (int c = 0; c < pts.cols(); ++c) {
    REQUIRE(!(pts(0, c) > 0.0 && pts(1, c) > 0.0));
    REQUIRE(dom.contains(pts.col(c)));
  }
  REQUIRE(!dom.contains(Eigen::Vector2d(0.5, 0.5)));
  REQUIRE(dom.contains(Eigen::Vector2d(-0.5, 0.5)));
  REQUIRE(dom.contains(Eigen::Vector2d(0.5, -0.5)));
}

TEST_CASE("boundary sampling: face balance on the unit square") {
  const Domain dom = Domain::hypercube(0, 1, 2);
  const int n = 4000;
  const auto samples = sample_boundary(dom, n, 99);
  REQUIRE(static_cast<int>(samples.size()) == n);
  std::array<int, 4> counts{0, 0, 0, 0};
  for (const auto& s : samples) {
    int face = -1;
    if (s.point[0] == 0.0)
      face = 0;
    else if (s.point[0] == 1.0)
      face = 1;
    else if (s.point[1] == 0.0)
      face = 2;
    else if (s.point[1] == 1.0)
      face = 3;
    REQUIRE(face >= 0);
    counts[face]++;
  }
  // Binomial with p = 1/4 per face; allow three standard deviations.
  const double dev = 3.0 * std::sqrt(n * 0.25 * 0.75);
  for (int f = 0; f < 4; ++f) REQUIRE(std::abs(counts[f] - n / 4.0) <= dev);
}

TEST_CASE("boundary samples lie on the boundary with outward unit normals") {
  for (const Domain& dom :
       {Domain::hypercube(-1, 1, 3), Domain::hypercube(0, 1, 2),
        Domain::l_shape(), Domain::hypercube(-1, 1, 1)}) {
    const auto samples = sample_boundary(dom, 500, 3);
    const double eps = 1e-6;
    for (const auto& s : samples) {
      REQUIRE(s.normal.norm() == Approx(1.0).margin(1e-12));
      REQUIRE(dom.contains(s.point));  // closure includes the boundary
      REQUIRE(!dom.contains(s.point + eps * s.normal));
      double dist = 1e300;
      if (dom.kind() == Domain::Kind::kHypercube) {
        for (int i = 0; i < dom.dim(); ++i)
          dist = std::min({dist, std::abs(s.point[i] - dom.lo()),
                           std::abs(s.point[i] - dom.hi())});
      } else {
        for (const auto& p : dom.panels()) {
          const Eigen::Vector2d d = p.b - p.a;
          const double t = std::clamp(
              d.dot(s.point.head<2>() - p.a) / d.squaredNorm(), 0.0, 1.0);
          dist = std::min(dist, (s.point.head<2>() - (p.a + t * d)).norm());
        }
      }
      REQUIRE(dist <= 1e-12);
    }
  }
}

TEST_CASE("normal on the face x1 = 1 of [-1,1]^d is e1") {
  const Domain dom = Domain::hypercube(-1, 1, 4);
  const auto samples = sample_boundary(dom, 400, 17);
  bool seen = false;
  for (const auto& s : samples)
    if (s.point[0] == 1.0) {
      seen = true;
      REQUIRE(s.normal[0] == 1.0);
      REQUIRE(s.normal.tail(3).isZero());
    }
  REQUIRE(seen);
  REQUIRE_THROWS_AS(sample_boundary(dom, 0, 1), CountError);
}

TEST_CASE("labels follow segments") {
  const Domain mixed = Domain::hypercube_partitioned(
      0, 1, 2, {{"dirichlet", {{0, 0}, {0, 1}}}, {"neumann", {{1, 0}, {1, 1}}}});
  const auto samples = sample_boundary(mixed, 300, 21);
  for (const auto& s : samples) {
    if (s.label == "dirichlet")
      REQUIRE((s.point[0] == 0.0 || s.point[0] == 1.0));
    else {
      REQUIRE(s.label == "neumann");
      REQUIRE((s.point[1] == 0.0 || s.point[1] == 1.0));
    }
  }
}

TEST_CASE("Monte Carlo integration converges at the n^{-1/2} rate") {
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
      const int n = static_cast<int>(std::pow(10, 3 + k));
      err[k] = std::abs(mc_integrate(dom, f, n, rng) - truth);
    }
    r1.push_back(err[0] / err[1]);
    r2.push_back(err[1] / err[2]);
  }
  auto median = [](std::vector<double> v) {
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
  };
  for (double m : {median(r1), median(r2)}) {
    REQUIRE(m >= 2.0);
    REQUIRE(m <= 5.0);
  }
}

TEST_CASE("split streams are unaffected by other streams' consumption") {
  SplitRng root(42);
  SplitRng a1 = root.split(1);
  for (int i = 0; i < 1000; ++i) a1.next();
  SplitRng b_after = root.split(2);
  SplitRng b_fresh = SplitRng(42).split(2);
  for (int i = 0; i < 16; ++i) REQUIRE(b_after.next() == b_fresh.next());
}
