// Pointwise fundamental solution X(t,s) and its slice alpha -> X(t,alpha) on
// the last delay window, materialized as a purely atomic BV function whose
// atom values are the jump coefficients of the lattice expansion.
#pragma once

#include "delaylattice/bvcalculus.hpp"
#include "delaylattice/lattice.hpp"
#include "delaylattice/model.hpp"

namespace dlat {

/// X(t,s): zero for t < s, identity-forced recursion otherwise. Memoized on
/// lattice multi-indices.
Mat eval_fundamental(const DelaySystem& sys, double t, double s);

struct SliceAtom {
  double alpha = 0.0;       // atom location t - f
  LatticePoint point;       // the lattice offset f responsible
  Mat jump;                 // X(t, alpha+) - X(t, alpha)
};

/// alpha -> X(t, alpha) on [s, s + tau_N]: piecewise constant, left
/// continuous, atoms at the lattice-shifted locations.
struct FundamentalSlice {
  double t = 0.0;
  double start = 0.0;
  IntervalSpec window;
  std::vector<SliceAtom> atoms;  // sorted by alpha ascending
  std::vector<Mat> plateaus;     // plateaus[k] = value between atoms k-1 and k

  BVFunction as_bv() const;
  double total_variation() const;  // sum of atom jump norms
};

/// Requires lat.horizon() >= t - s. Jumps are measured by evaluating the
/// recursion on both sides of each candidate location, offset by a quarter
/// of the smallest lattice gap so no other lattice point can interfere.
FundamentalSlice build_slice(const DelaySystem& sys, double t, double s, const Lattice& lat);

/// W over [s, s+tau_N] of X(t, .); builds its own lattice when none given.
double slice_total_variation(const DelaySystem& sys, double t, double s,
                             const Lattice* lat = nullptr);

/// Largest atom-by-atom mismatch of d_a X(t,a) against
/// sum_j D_j(t) d_a X(t - tau_j, a) over [s, min(t, s + tau_N)).
double measure_identity_max_mismatch(const DelaySystem& sys, double t, double s,
                                     const Lattice& lat);

}  // namespace dlat
