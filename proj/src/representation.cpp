#include "delaylattice/representation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "delaylattice/solver.hpp"

namespace dlat {

Vec represent_solution(const InitialProblem& p, double t, const Lattice* lat, double compat_tol) {
  const DelaySystem& sys = p.system();
  const double s = p.start();
  if (t < s - 1e-12 * std::max(1.0, std::abs(s))) {
    throw std::invalid_argument("represent_solution: t before the initial time");
  }
  const CompatibilityReport compat = check_compatibility(p, compat_tol);
  if (!compat.compatible) {
    throw std::invalid_argument("represent_solution: initial data not compatible");
  }

  Lattice own;
  if (lat == nullptr) {
    own = enumerate_lattice(sys.delays(), (t - s) + sys.min_delay());
    lat = &own;
  }
  const FundamentalSlice slice = build_slice(sys, t, s, *lat);
  const BVFunction x_slice = slice.as_bv();
  const double edge_tol = std::max(
      lat->merge_tol(), 1e-11 * std::max({1.0, std::abs(t), std::abs(s) + sys.max_delay()}));

  Vec y = Vec::Zero(sys.dim());
  for (std::size_t j = 0; j < sys.num_delays(); ++j) {
    const double tau_j = sys.delay(j);
    // An atom meant to sit exactly on the upper bound may land an ulp off;
    // align the (excluded) window edge with it so it stays out.
    double hi = s + tau_j;
    for (const SliceAtom& a : slice.atoms) {
      if (std::abs(a.alpha - (s + tau_j)) <= edge_tol) hi = a.alpha;
    }
    const IntervalSpec window = IntervalSpec::half_open(s, hi);
    auto integrand = [&](double alpha) {
      const double theta = std::min(std::max(alpha - tau_j - s, -sys.max_delay()), 0.0);
      return Mat(sys.coefficient_at(j, alpha) * p.phi_at(theta));
    };
    y -= as_vector(stieltjes_integrate(x_slice, integrand, window, ProductOrder::MeasureFirst));
  }
  return y;
}

CertificationReport certify_equivalence(const InitialProblem& p, double horizon, int n_samples,
                                        std::uint64_t seed) {
  const DelaySystem& sys = p.system();
  const double s = p.start();
  if (horizon < s) throw std::invalid_argument("certify_equivalence: horizon before start");

  Lattice lat = enumerate_lattice(sys.delays(), (horizon - s) + sys.min_delay());
  const double straddle = std::min(lat.min_gap(), sys.min_delay()) / 8.0;

  std::vector<double> ts{s, horizon};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(s, horizon);
  for (int i = 0; i < n_samples; ++i) ts.push_back(unif(rng));
  for (const LatticePoint& f : lat.points()) {
    const double t0 = s + f.value;
    if (t0 > horizon) break;
    ts.push_back(t0);
    if (t0 - straddle >= s) ts.push_back(t0 - straddle);
    if (t0 + straddle <= horizon) ts.push_back(t0 + straddle);
  }
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

  CertificationReport report;
  for (double t : ts) {
    const double err = (represent_solution(p, t, &lat) - eval_solution(p, t)).norm();
    ++report.n_evaluations;
    if (err > report.max_error) {
      report.max_error = err;
      report.worst_t = t;
    }
  }
  return report;
}

}  // namespace dlat
