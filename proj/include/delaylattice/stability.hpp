// Exponential-decay estimation from the total variation of the fundamental
// solution slice over the last delay window (a sufficient criterion; the fit
// is diagnostic, never a proof).
#pragma once

#include <span>
#include <string>
#include <vector>

#include "delaylattice/model.hpp"

namespace dlat {

struct VariationSample {
  double t_minus_s = 0.0;
  double variation = 0.0;
};

enum class DecayVerdict {
  DecayCertifiedEmpirical,   // fitted rate alpha > 0
  NoDecayDetected,           // fitted rate alpha <= 0
  FiniteTimeExtinction,      // fewer than 3 positive samples
};

std::string to_string(DecayVerdict v);

struct DecayEstimate {
  std::vector<VariationSample> samples;
  double c = 0.0;
  double alpha = 0.0;
  double fit_residual = 0.0;  // rms residual of log V against the fit
  DecayVerdict verdict = DecayVerdict::NoDecayDetected;
  // Secondary fit through the upper envelope, for oscillating profiles.
  double envelope_c = 0.0;
  double envelope_alpha = 0.0;
};

/// slice_total_variation at n_points times in [s + tau_N, t_max], each
/// shifted to the midpoint of its lattice gap so the slice structure is
/// stable where it is sampled.
std::vector<VariationSample> variation_profile(const DelaySystem& sys, double s, double t_max,
                                               int n_points);

/// Log-linear least squares of V against t - s. All-zero (or fewer than 3
/// positive) samples yield the finite-time-extinction verdict instead of a
/// fit.
DecayEstimate fit_decay(std::span<const VariationSample> samples);

}  // namespace dlat
