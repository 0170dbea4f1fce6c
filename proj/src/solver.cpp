#include "delaylattice/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <unordered_map>

namespace dlat {

namespace {

using Memo = std::unordered_map<std::vector<int>, Vec, IndexTupleHash>;

// Which branch a node exactly on the start-time boundary takes. Evaluating
// the one-sided limits at a lattice-shifted time comes down to resolving
// every boundary node toward the history (left limit) or the recursion
// (right limit).
enum class BoundarySide { Value, TowardHistory, TowardRecursion };

Vec eval_rec(const InitialProblem& p, double t, BoundarySide side, std::vector<int>& tuple,
             Memo& memo) {
  const DelaySystem& sys = p.system();
  const double u = t - tuple_value(tuple, sys.delays());
  const double snap =
      side == BoundarySide::Value
          ? 0.0
          : 1e-11 * std::max({1.0, std::abs(t), std::abs(p.start())});
  const bool take_history = side == BoundarySide::TowardRecursion
                                ? u < p.start() - snap
                                : u <= p.start() + snap;
  if (take_history) {
    const double theta = std::min(std::max(u - p.start(), -sys.max_delay()), 0.0);
    return p.phi_at(theta);
  }
  auto it = memo.find(tuple);
  if (it != memo.end()) return it->second;
  Vec y = Vec::Zero(sys.dim());
  for (std::size_t j = 0; j < sys.num_delays(); ++j) {
    tuple[j] += 1;
    y += sys.coefficient_at(j, u) * eval_rec(p, t, side, tuple, memo);
    tuple[j] -= 1;
  }
  memo.emplace(tuple, y);
  return y;
}

Vec eval_with_side(const InitialProblem& p, double t, BoundarySide side) {
  Memo memo;
  std::vector<int> tuple(p.system().num_delays(), 0);
  return eval_rec(p, t, side, tuple, memo);
}

}  // namespace

Vec eval_solution(const InitialProblem& p, double t) {
  const double tau_n = p.system().max_delay();
  if (t < p.start() - tau_n - 1e-12 * std::max(1.0, tau_n)) {
    throw std::domain_error("eval_solution: t below s - tau_N");
  }
  return eval_with_side(p, t, BoundarySide::Value);
}

double solution_jump(const InitialProblem& p, double offset) {
  const double t0 = p.start() + offset;
  const Vec left = eval_with_side(p, t0, BoundarySide::TowardHistory);
  const Vec right = eval_with_side(p, t0, BoundarySide::TowardRecursion);
  return (right - left).norm();
}

Trajectory sample_trajectory(const InitialProblem& p, double t_end, double step,
                             double compat_tol) {
  if (!(step > 0.0)) throw std::invalid_argument("sample_trajectory: step must be positive");
  if (t_end < p.start()) throw std::invalid_argument("sample_trajectory: t_end before start");

  const DelaySystem& sys = p.system();
  const CompatibilityReport compat = check_compatibility(p, compat_tol);

  std::vector<double> times;
  for (double t = p.start(); t <= t_end + 1e-12 * std::max(1.0, step); t += step) {
    times.push_back(std::min(t, t_end));
  }
  Lattice lat = enumerate_lattice(sys.delays(), (t_end - p.start()) + sys.min_delay());
  for (const LatticePoint& f : lat.points()) {
    if (p.start() + f.value <= t_end) times.push_back(p.start() + f.value);
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end(),
                          [&](double a, double b) { return std::abs(a - b) <= 1e-13 * std::max(1.0, std::abs(b)); }),
              times.end());

  Trajectory traj;
  traj.start = p.start();
  traj.times = times;
  traj.values.reserve(times.size());
  double growth = 1.0;
  for (double t : times) {
    Vec y = eval_solution(p, t);
    growth = std::max(growth, y.norm());
    traj.values.push_back(std::move(y));
  }

  for (const LatticePoint& f : lat.points()) {
    const double t0 = p.start() + f.value;
    if (t0 > t_end) break;
    const double jump = solution_jump(p, f.value);
    traj.lattice_jumps.push_back(LatticeJumpReport{f.value, jump});
    if (compat.compatible) {
      const double bound = std::max(1e-9, 10.0 * std::max(compat.residual, compat_tol)) * growth;
      if (jump > bound) {
        throw std::logic_error("sample_trajectory: solution discontinuity at a lattice point "
                               "despite compatible initial data");
      }
    }
  }
  return traj;
}

}  // namespace dlat
