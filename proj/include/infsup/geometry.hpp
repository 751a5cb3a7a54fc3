#ifndef INFSUP_GEOMETRY_HPP
#define INFSUP_GEOMETRY_HPP

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

#include "infsup/errors.hpp"
#include "infsup/rng.hpp"

namespace infsup {

/// A point on the boundary with its outward unit normal and the index of
/// the labeled segment it was drawn from.
struct BoundarySample {
  Eigen::VectorXd point;
  Eigen::VectorXd normal;
  int segment = 0;
  std::string label;
};

/// Geometric region with exact measures, a uniform interior sampler and a
/// labeled boundary sampler. Supported shapes: axis-aligned hypercubes
/// [lo,hi]^d with an optional face partition, and the planar L-shaped
/// region [-1,1]^2 minus the quadrant [0,1]^2.
class Domain {
 public:
  enum class Kind { kHypercube, kLShape };

  struct FaceRef {
    int axis;
    int side;  // 0 -> x_axis = lo, 1 -> x_axis = hi
  };

  // One flat boundary piece: a hypercube face, or an edge for the L-shape.
  struct Panel {
    int axis = -1;
    int side = 0;
    Eigen::Vector2d a{0, 0}, b{0, 0};  // edge endpoints (L-shape only)
    Eigen::VectorXd normal;
    double measure = 0;
  };

  struct Segment {
    std::string label;
    std::vector<int> panels;
    double measure = 0;
  };

  static Domain hypercube(double lo, double hi, int d) {
    std::vector<std::pair<std::string, std::vector<FaceRef>>> part(1);
    part[0].first = "boundary";
    for (int a = 0; a < d; ++a)
      for (int s = 0; s < 2; ++s) part[0].second.push_back({a, s});
    return hypercube_partitioned(lo, hi, d, part);
  }

  static Domain hypercube_partitioned(
      double lo, double hi, int d,
      const std::vector<std::pair<std::string, std::vector<FaceRef>>>&
          partition) {
    if (d < 1) throw DimensionError("Domain: dimension must be >= 1");
    if (hi <= lo) throw ConfigError("Domain: hi must exceed lo");
    Domain dom;
    dom.kind_ = Kind::kHypercube;
    dom.dim_ = d;
    dom.lo_ = lo;
    dom.hi_ = hi;
    const double edge = hi - lo;
    dom.volume_ = std::pow(edge, d);
    const double face_measure = std::pow(edge, d - 1);
    std::vector<int> covered(2 * d, 0);
    for (const auto& [label, faces] : partition) {
      Segment seg;
      seg.label = label;
      for (const FaceRef& f : faces) {
        if (f.axis < 0 || f.axis >= d || f.side < 0 || f.side > 1)
          throw ConfigError("Domain: bad face reference");
        covered[2 * f.axis + f.side]++;
        Panel p;
        p.axis = f.axis;
        p.side = f.side;
        p.normal = Eigen::VectorXd::Zero(d);
        p.normal[f.axis] = f.side ? 1.0 : -1.0;
        p.measure = face_measure;
        seg.panels.push_back(static_cast<int>(dom.panels_.size()));
        dom.panels_.push_back(std::move(p));
        seg.measure += face_measure;
      }
      dom.segments_.push_back(std::move(seg));
    }
    for (int c : covered)
      if (c != 1)
        throw ConfigError("Domain: partition must cover each face once");
    dom.boundary_measure_ = 2.0 * d * face_measure;
    return dom;
  }

  /// [-1,1]^2 with the quadrant [0,1]^2 removed; area 3, perimeter 8.
  static Domain l_shape() {
    Domain dom;
    dom.kind_ = Kind::kLShape;
    dom.dim_ = 2;
    dom.lo_ = -1.0;
    dom.hi_ = 1.0;
    dom.volume_ = 3.0;
    dom.boundary_measure_ = 8.0;
    auto edge = [&](double ax, double ay, double bx, double by, double nx,
                    double ny) {
      Panel p;
      p.a = {ax, ay};
      p.b = {bx, by};
      p.normal = Eigen::Vector2d(nx, ny);
      p.measure = (p.b - p.a).norm();
      dom.panels_.push_back(std::move(p));
    };
    edge(-1, -1, 1, -1, 0, -1);  // bottom
    edge(1, -1, 1, 0, 1, 0);     // right (lower half)
    edge(1, 0, 0, 0, 0, 1);      // notch, horizontal
    edge(0, 0, 0, 1, 1, 0);      // notch, vertical
    edge(0, 1, -1, 1, 0, 1);     // top (left half)
    edge(-1, 1, -1, -1, -1, 0);  // left
    Segment seg;
    seg.label = "boundary";
    seg.measure = 8.0;
    for (int i = 0; i < 6; ++i) seg.panels.push_back(i);
    dom.segments_.push_back(std::move(seg));
    return dom;
  }

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double volume() const { return volume_; }
  double boundary_measure() const { return boundary_measure_; }
  const std::vector<Segment>& segments() const { return segments_; }
  const std::vector<Panel>& panels() const { return panels_; }

  int segment_index(const std::string& label) const {
    for (std::size_t i = 0; i < segments_.size(); ++i)
      if (segments_[i].label == label) return static_cast<int>(i);
    throw ConfigError("Domain: no boundary segment labeled '" + label + "'");
  }

  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (x.size() != dim_) return false;
    for (int i = 0; i < dim_; ++i)
      if (x[i] < lo_ || x[i] > hi_) return false;
    if (kind_ == Kind::kLShape && x[0] > 0.0 && x[1] > 0.0) return false;
    return true;
  }

  /// n i.i.d. uniform interior points, one per column. The L-shape uses
  /// rejection from its bounding square (acceptance ratio 3/4).
  Eigen::MatrixXd sample_interior(int n, SplitRng& rng) const {
    if (n < 1) throw CountError("sample_interior: need n >= 1");
    Eigen::MatrixXd pts(dim_, n);
    for (int c = 0; c < n; ++c) {
      for (;;) {
        for (int i = 0; i < dim_; ++i) pts(i, c) = rng.uniform(lo_, hi_);
        if (kind_ == Kind::kHypercube || !(pts(0, c) > 0.0 && pts(1, c) > 0.0))
          break;
      }
    }
    return pts;
  }

  /// n boundary samples: segment chosen proportionally to its measure,
  /// then uniformly within the segment, with the panel's outward normal.
  std::vector<BoundarySample> sample_boundary(int n, SplitRng& rng) const {
    if (n < 1) throw CountError("sample_boundary: need n >= 1");
    std::vector<BoundarySample> out(n);
    for (int c = 0; c < n; ++c) {
      const int seg = pick_weighted(
          rng, segments_.size(),
          [&](std::size_t i) { return segments_[i].measure; },
          boundary_measure_);
      const auto& segment = segments_[seg];
      const int pidx = segment.panels[pick_weighted(
          rng, segment.panels.size(),
          [&](std::size_t i) { return panels_[segment.panels[i]].measure; },
          segment.measure)];
      const Panel& p = panels_[pidx];
      BoundarySample& s = out[c];
      s.segment = seg;
      s.label = segment.label;
      s.normal = p.normal;
      s.point.resize(dim_);
      if (kind_ == Kind::kHypercube) {
        for (int i = 0; i < dim_; ++i) s.point[i] = rng.uniform(lo_, hi_);
        s.point[p.axis] = p.side ? hi_ : lo_;
      } else {
        const double t = rng.uniform01();
        s.point = p.a + t * (p.b - p.a);
      }
    }
    return out;
  }

 private:
  template <class W>
  static int pick_weighted(SplitRng& rng, std::size_t count, W&& weight,
                           double total) {
    const double u = rng.uniform01() * total;
    double acc = 0;
    for (std::size_t i = 0; i + 1 < count; ++i) {
      acc += weight(i);
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(count - 1);
  }

  Kind kind_ = Kind::kHypercube;
  int dim_ = 0;
  double lo_ = 0, hi_ = 1;
  double volume_ = 0, boundary_measure_ = 0;
  std::vector<Panel> panels_;
  std::vector<Segment> segments_;
};

// Seeded conveniences; interior/boundary use unrelated streams by default.
inline Eigen::MatrixXd sample_interior(const Domain& dom, int n,
                                       std::uint64_t seed) {
  SplitRng rng = SplitRng(seed).split(1);
  return dom.sample_interior(n, rng);
}

inline std::vector<BoundarySample> sample_boundary(const Domain& dom, int n,
                                                   std::uint64_t seed) {
  SplitRng rng = SplitRng(seed).split(2);
  return dom.sample_boundary(n, rng);
}

/// Exact (|Omega|, |dOmega|).
inline std::pair<double, double> measures(const Domain& dom) {
  return {dom.volume(), dom.boundary_measure()};
}

/// Monte Carlo estimate of the integral of f over the domain.
template <class F>
double mc_integrate(const Domain& dom, F&& f, int n, SplitRng& rng) {
  const Eigen::MatrixXd pts = dom.sample_interior(n, rng);
  double acc = 0;
  for (int c = 0; c < pts.cols(); ++c) acc += f(pts.col(c));
  return dom.volume() * acc / n;
}

}  // namespace infsup

#endif  // INFSUP_GEOMETRY_HPP
