#ifndef INFSUP_IO_HPP
#define INFSUP_IO_HPP

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "infsup/errors.hpp"
#include "infsup/fd_poisson.hpp"
#include "infsup/loss.hpp"
#include "infsup/network.hpp"
#include "infsup/problems.hpp"
#include "infsup/trainer.hpp"

namespace infsup {

/// 17 significant digits: enough to reproduce any double bit-exactly.
inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Streams training records to CSV. Raw columns come first; EMA-smoothed
/// companions (coefficient 0.95, seeded with the first value) are appended
/// for the two curves that are usually plotted.
class TrainLogWriter {
 public:
  static constexpr const char* kHeader =
      "iter,loss_total,loss_boundary,loss_interior,duality_gap,rel_l2_error,"
      "lr,elapsed_s,ema_loss_total,ema_rel_l2_error";

  explicit TrainLogWriter(const std::string& path) : out_(path) {
    if (!out_) throw ConfigError("TrainLogWriter: cannot open " + path);
    out_ << kHeader << "\n";
  }

  void write(const TrainRecord& rec) {
    if (first_) {
      ema_loss_ = rec.loss.total;
      ema_err_ = rec.rel_l2;
      first_ = false;
    } else {
      ema_loss_ = kEma * ema_loss_ + (1.0 - kEma) * rec.loss.total;
      ema_err_ = kEma * ema_err_ + (1.0 - kEma) * rec.rel_l2;
    }
    out_ << rec.iter << ',' << format_g17(rec.loss.total) << ','
         << format_g17(rec.loss.boundary_term) << ','
         << format_g17(rec.loss.interior_term) << ','
         << format_g17(rec.duality_gap) << ',' << format_g17(rec.rel_l2) << ','
         << format_g17(rec.lr) << ',' << format_g17(rec.elapsed_s) << ','
         << format_g17(ema_loss_) << ',' << format_g17(ema_err_) << "\n";
    out_.flush();
  }

 private:
  static constexpr double kEma = 0.95;
  std::ofstream out_;
  bool first_ = true;
  double ema_loss_ = 0, ema_err_ = 0;
};

/// u and v (and the reference, when known) on a planar slice grid through
/// the domain: both slice axes sweep [lo,hi], all other coordinates sit at
/// a fixed value.
inline void write_solution_dump(const std::string& path,
                                const PdeProblem& prob, const MlpNet& u,
                                const MlpNet& v, int axis1, int axis2,
                                int steps, double fixed_value) {
  const int d = prob.dim();
  if (axis1 < 0 || axis1 >= d || axis2 < 0 || axis2 >= d || axis1 == axis2)
    throw ConfigError("write_solution_dump: bad slice axes");
  if (steps < 2) throw CountError("write_solution_dump: need >= 2 grid steps");
  std::ofstream out(path);
  if (!out) throw ConfigError("write_solution_dump: cannot open " + path);
  out << "x" << axis1 << ",x" << axis2 << ",u,v";
  if (prob.has_exact()) out << ",exact";
  out << "\n";
  const double lo = prob.domain.lo(), hi = prob.domain.hi();
  Eigen::VectorXd x = Eigen::VectorXd::Constant(d, fixed_value);
  for (int j = 0; j < steps; ++j)
    for (int i = 0; i < steps; ++i) {
      x[axis1] = lo + (hi - lo) * i / (steps - 1);
      x[axis2] = lo + (hi - lo) * j / (steps - 1);
      if (!prob.domain.contains(x)) continue;
      out << format_g17(x[axis1]) << ',' << format_g17(x[axis2]) << ','
          << format_g17(u.eval(x)) << ',' << format_g17(v.eval(x));
      if (prob.has_exact()) out << ',' << format_g17(prob.exact(x));
      out << "\n";
    }
}

/// Reference grid solution as x,y,u rows, one per solved node.
inline void write_reference_csv(const std::string& path, const FdSolution& s) {
  std::ofstream out(path);
  if (!out) throw ConfigError("write_reference_csv: cannot open " + path);
  out << "x,y,u\n";
  for (int j = 0; j <= s.intervals(); ++j)
    for (int i = 0; i <= s.intervals(); ++i)
      if (s.node_valid(i, j))
        out << format_g17(s.x_of(i)) << ',' << format_g17(s.y_of(j)) << ','
            << format_g17(s.at_node(i, j)) << "\n";
}

}  // namespace infsup

#endif  // INFSUP_IO_HPP
