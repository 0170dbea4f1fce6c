// Direct solution of the difference-delay recursion by memoized descent;
// the ground-truth oracle for the integral machinery.
#pragma once

#include <vector>

#include "delaylattice/lattice.hpp"
#include "delaylattice/model.hpp"

namespace dlat {

struct LatticeJumpReport {
  double offset = 0.0;     // f, measured from the start time
  double magnitude = 0.0;  // ||y(s+f+eps) - y(s+f-eps)||
};

struct Trajectory {
  double start = 0.0;
  std::vector<double> times;
  std::vector<Vec> values;
  std::vector<LatticeJumpReport> lattice_jumps;
};

/// y(t): phi(t-s) for t <= s, else sum_j D_j(t) y(t-tau_j). Memoized on the
/// integer multi-index of the offset reached, never on raw floats.
Vec eval_solution(const InitialProblem& p, double t);

/// ||y((s+offset)+) - y((s+offset)-)||, the exact one-sided limits obtained
/// by resolving boundary nodes of the recursion toward the history or toward
/// the recursion.
double solution_jump(const InitialProblem& p, double offset);

/// Uniform grid samples plus every lattice-shifted time s+f <= t_end. At the
/// lattice times both one-sided values are computed; for compatible initial
/// data they must agree (asserted), and the measured jumps are reported
/// either way.
Trajectory sample_trajectory(const InitialProblem& p, double t_end, double step,
                             double compat_tol = 1e-9);

}  // namespace dlat
