#include "delaylattice/lattice.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <stdexcept>
#include <unordered_set>

namespace dlat {

double tuple_value(std::span<const int> tuple, std::span<const double> delays) {
  double v = 0.0;
  for (std::size_t l = 0; l < tuple.size(); ++l) v += tuple[l] * delays[l];
  return v;
}

double Lattice::min_gap() const {
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < points_.size(); ++i) {
    gap = std::min(gap, points_[i].value - points_[i - 1].value);
  }
  return gap;
}

std::ptrdiff_t Lattice::index_at_or_below(double x) const {
  std::ptrdiff_t lo = -1;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (points_[i].value <= x + merge_tol_) lo = static_cast<std::ptrdiff_t>(i);
    else break;
  }
  return lo;
}

namespace {

struct HeapEntry {
  double value;
  std::vector<int> tuple;
  bool operator>(const HeapEntry& o) const { return value > o.value; }
};

}  // namespace

Lattice enumerate_lattice(std::span<const double> delays, double horizon, double merge_tol) {
  if (delays.empty()) throw std::invalid_argument("enumerate_lattice: no delays");
  for (double tau : delays) {
    if (!(tau > 0.0)) throw std::invalid_argument("enumerate_lattice: delays must be positive");
  }
  if (horizon < 0.0) throw std::invalid_argument("enumerate_lattice: negative horizon");
  if (merge_tol < 0.0) merge_tol = 1e-12 * std::max(1.0, horizon);

  const std::size_t n = delays.size();
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<HeapEntry>> heap;
  std::unordered_set<std::vector<int>, IndexTupleHash> visited;

  std::vector<int> zero(n, 0);
  heap.push(HeapEntry{0.0, zero});
  visited.insert(zero);

  Lattice lat;
  lat.horizon_ = horizon;
  lat.merge_tol_ = merge_tol;

  while (!heap.empty()) {
    HeapEntry top = heap.top();
    heap.pop();
    if (top.value > horizon) break;

    if (!lat.points_.empty() && top.value - lat.points_.back().value <= merge_tol) {
      lat.points_.back().indices.push_back(top.tuple);
    } else {
      lat.points_.push_back(LatticePoint{top.value, {top.tuple}});
    }

    for (std::size_t l = 0; l < n; ++l) {
      std::vector<int> succ = top.tuple;
      succ[l] += 1;
      const double v = tuple_value(succ, delays);
      if (v > horizon) continue;
      if (visited.insert(succ).second) heap.push(HeapEntry{v, std::move(succ)});
    }
  }
  return lat;
}

std::vector<LatticePoint> jump_offsets_in_window(const Lattice& lat, double t_minus_s, double lo,
                                                 double hi) {
  if (!(hi >= lo)) throw std::invalid_argument("jump_offsets_in_window: window bounds out of order");
  if (lo < -lat.merge_tol()) {
    throw std::out_of_range("jump_offsets_in_window: window below 0");
  }
  // Every f reported must satisfy f <= t-s - lo; the lattice must reach it.
  if (t_minus_s - lo > lat.horizon() + lat.merge_tol()) {
    throw std::out_of_range("jump_offsets_in_window: window exceeds lattice horizon");
  }
  const double upper = t_minus_s - lo;  // inclusive
  const double lower = t_minus_s - hi;  // exclusive
  std::vector<LatticePoint> out;
  for (const LatticePoint& p : lat.points()) {
    if (p.value > upper + lat.merge_tol()) break;
    if (p.value > lower + lat.merge_tol()) out.push_back(p);
  }
  return out;
}

}  // namespace dlat
