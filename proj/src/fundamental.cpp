#include "delaylattice/fundamental.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace dlat {

namespace {

using Memo = std::unordered_map<std::vector<int>, Mat, IndexTupleHash>;

Mat fundamental_rec(const DelaySystem& sys, double t, double s, std::vector<int>& tuple,
                    Memo& memo) {
  const double u = t - tuple_value(tuple, sys.delays());
  if (u < s) return Mat::Zero(sys.dim(), sys.dim());
  auto it = memo.find(tuple);
  if (it != memo.end()) return it->second;
  Mat x = Mat::Identity(sys.dim(), sys.dim());
  for (std::size_t j = 0; j < sys.num_delays(); ++j) {
    tuple[j] += 1;
    x += sys.coefficient_at(j, u) * fundamental_rec(sys, t, s, tuple, memo);
    tuple[j] -= 1;
  }
  memo.emplace(tuple, x);
  return x;
}

}  // namespace

Mat eval_fundamental(const DelaySystem& sys, double t, double s) {
  Memo memo;
  std::vector<int> tuple(sys.num_delays(), 0);
  return fundamental_rec(sys, t, s, tuple, memo);
}

BVFunction FundamentalSlice::as_bv() const {
  std::vector<std::pair<double, Mat>> jumps;
  jumps.reserve(atoms.size());
  for (const SliceAtom& a : atoms) jumps.emplace_back(a.alpha, a.jump);
  return BVFunction::constant(window, SideConvention::LeftContinuous, plateaus.front(),
                              std::move(jumps));
}

double FundamentalSlice::total_variation() const {
  double acc = 0.0;
  for (const SliceAtom& a : atoms) acc += operator_norm(a.jump);
  return acc;
}

FundamentalSlice build_slice(const DelaySystem& sys, double t, double s, const Lattice& lat) {
  const double tau_n = sys.max_delay();
  if (t - s > lat.horizon() + lat.merge_tol()) {
    throw std::invalid_argument("build_slice: lattice horizon below t - s");
  }
  FundamentalSlice slice;
  slice.t = t;
  slice.start = s;
  slice.window = IntervalSpec::closed(s, s + tau_n);

  // All plateau probes sit min_gap/4 away from every lattice-shifted
  // location, where the recursion's branch comparisons have full margin and
  // mid-plateau evaluation is bit-stable. Evaluating exactly at a shifted
  // point is unreliable at commensurate delays: merged index tuples can
  // reproduce the offset one ulp apart.
  const double eps = lat.min_gap() / 4.0;

  // Window-edge snap tolerance: dominates the ulp drift of alpha = t - f at
  // commensurate delays while staying far below any genuine lattice gap.
  const double edge_tol =
      std::max(lat.merge_tol(), 1e-11 * std::max({1.0, std::abs(t), std::abs(s) + tau_n}));

  // Base value f(s) = X(t, s), the left limit at the window start. Probe at
  // s itself unless t - s lands on the lattice (atom at s), in which case
  // the plateau just below s carries the left limit.
  const std::ptrdiff_t at_idx = lat.index_at_or_below(t - s + edge_tol);
  const bool atom_at_start =
      at_idx >= 0 && std::abs(lat.point(at_idx).value - (t - s)) <= edge_tol;
  const Mat base = eval_fundamental(sys, t, atom_at_start ? s - eps : s);
  const double base_scale = 1.0 + operator_norm(base);

  // Candidates in ascending alpha (descending f).
  std::vector<const LatticePoint*> candidates;
  for (const LatticePoint& p : lat.points()) {
    const double alpha = t - p.value;
    if (alpha >= s - edge_tol && alpha <= s + tau_n + edge_tol) {
      candidates.push_back(&p);
    }
  }
  std::reverse(candidates.begin(), candidates.end());

  slice.plateaus.push_back(base);
  for (const LatticePoint* p : candidates) {
    double alpha = t - p->value;
    if (std::abs(alpha - s) <= edge_tol) alpha = s;
    if (std::abs(alpha - (s + tau_n)) <= edge_tol) alpha = s + tau_n;
    const Mat pre = eval_fundamental(sys, t, alpha - eps);
    const Mat post = eval_fundamental(sys, t, alpha + eps);
    const Mat jump = post - pre;
    if (operator_norm(jump) <= 1e-10 * std::max(base_scale, 1.0 + operator_norm(pre))) continue;
    SliceAtom a;
    a.alpha = alpha;
    a.point = *p;
    a.jump = jump;
    slice.atoms.push_back(std::move(a));
    slice.plateaus.push_back(slice.plateaus.back() + jump);
  }
  return slice;
}

double slice_total_variation(const DelaySystem& sys, double t, double s, const Lattice* lat) {
  if (lat != nullptr) return build_slice(sys, t, s, *lat).total_variation();
  Lattice own = enumerate_lattice(sys.delays(), std::max(0.0, t - s) + sys.min_delay());
  return build_slice(sys, t, s, own).total_variation();
}

double measure_identity_max_mismatch(const DelaySystem& sys, double t, double s,
                                     const Lattice& lat) {
  const double window_end = std::min(t, s + sys.max_delay());
  const FundamentalSlice lhs = build_slice(sys, t, s, lat);
  std::vector<FundamentalSlice> rhs;
  rhs.reserve(sys.num_delays());
  for (std::size_t j = 0; j < sys.num_delays(); ++j) {
    rhs.push_back(build_slice(sys, t - sys.delay(j), s, lat));
  }

  const double match_tol = std::min(lat.min_gap(), sys.min_delay()) / 2.0;
  std::vector<double> locations;
  for (const SliceAtom& a : lhs.atoms) {
    if (a.alpha < window_end - match_tol) locations.push_back(a.alpha);
  }
  for (const FundamentalSlice& sl : rhs) {
    for (const SliceAtom& a : sl.atoms) {
      if (a.alpha < window_end - match_tol) locations.push_back(a.alpha);
    }
  }
  std::sort(locations.begin(), locations.end());
  locations.erase(std::unique(locations.begin(), locations.end(),
                              [&](double a, double b) { return std::abs(a - b) <= match_tol; }),
                  locations.end());

  auto jump_at = [&](const FundamentalSlice& sl, double alpha) {
    for (const SliceAtom& a : sl.atoms) {
      if (std::abs(a.alpha - alpha) <= match_tol) return a.jump;
    }
    return Mat(Mat::Zero(sys.dim(), sys.dim()));
  };

  double worst = 0.0;
  for (double alpha : locations) {
    Mat expected = Mat::Zero(sys.dim(), sys.dim());
    for (std::size_t j = 0; j < sys.num_delays(); ++j) {
      expected += sys.coefficient_at(j, t) * jump_at(rhs[j], alpha);
    }
    worst = std::max(worst, operator_norm(jump_at(lhs, alpha) - expected));
  }
  return worst;
}

}  // namespace dlat
