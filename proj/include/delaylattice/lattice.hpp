// Enumeration of the nonnegative delay lattice {sum_l n_l tau_l}, the only
// offsets at which the fundamental solution can jump.
#pragma once

#include <span>
#include <vector>

#include "delaylattice/common.hpp"

namespace dlat {

/// One lattice value together with every multi-index (n_1,...,n_N) realizing
/// it (more than one at commensurate delays, merged within tolerance).
struct LatticePoint {
  double value = 0.0;
  std::vector<std::vector<int>> indices;
};

class Lattice {
 public:
  const std::vector<LatticePoint>& points() const { return points_; }
  double horizon() const { return horizon_; }
  double merge_tol() const { return merge_tol_; }
  std::size_t size() const { return points_.size(); }
  const LatticePoint& point(std::size_t i) const { return points_.at(i); }

  /// Smallest gap between consecutive lattice values (infinity for a single
  /// point).
  double min_gap() const;

  /// Index of the last point with value <= x (tolerance merge_tol), or -1.
  std::ptrdiff_t index_at_or_below(double x) const;

 private:
  friend Lattice enumerate_lattice(std::span<const double>, double, double);

  double horizon_ = 0.0;
  double merge_tol_ = 0.0;
  std::vector<LatticePoint> points_;
};

/// Canonical value of a multi-index: left-to-right sum of n_l * tau_l. All
/// lattice arithmetic funnels through this so that enumeration strategies
/// agree bit for bit.
double tuple_value(std::span<const int> tuple, std::span<const double> delays);

/// Best-first enumeration of every lattice value <= horizon, merging values
/// within merge_tol of the first member of a point (default merge_tol:
/// 1e-12 * max(1, horizon)).
Lattice enumerate_lattice(std::span<const double> delays, double horizon, double merge_tol = -1.0);

/// Lattice points f with t_minus_s - f in [lo, hi), i.e. the candidate atom
/// locations alpha = t - f of the slice X(t, .) inside the window, expressed
/// in alpha - s coordinates.
std::vector<LatticePoint> jump_offsets_in_window(const Lattice& lat, double t_minus_s, double lo,
                                                 double hi);

}  // namespace dlat
