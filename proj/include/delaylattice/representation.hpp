// The representation formula: the solution as Stieltjes integrals of the
// initial data against the slice measure of the fundamental solution, and
// its certification against the direct recursion.
#pragma once

#include <cstdint>

#include "delaylattice/fundamental.hpp"
#include "delaylattice/model.hpp"

namespace dlat {

/// y(t) = -sum_j integral over [s, s+tau_j) of d_a X(t,a) D_j(a) phi(a - tau_j - s),
/// evaluated through the atomic slice of X(t, .) with the measure acting on
/// the left. Requires compatible initial data.
Vec represent_solution(const InitialProblem& p, double t, const Lattice* lat = nullptr,
                       double compat_tol = 1e-8);

struct CertificationReport {
  double max_error = 0.0;
  double worst_t = 0.0;
  int n_evaluations = 0;
};

/// Max pointwise distance between the representation and the direct solver
/// over [s, horizon]: n_samples seeded-uniform times plus both sides of
/// every lattice-shifted time.
CertificationReport certify_equivalence(const InitialProblem& p, double horizon, int n_samples,
                                        std::uint64_t seed = 0x1234abcd);

}  // namespace dlat
