#include "delaylattice/bvcalculus.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dlat {

namespace {

double domain_slack(const IntervalSpec& d) { return 1e-12 * std::max(1.0, d.hi - d.lo); }

Mat ordered_product(ProductOrder order, const Mat& g, const Mat& mass) {
  return order == ProductOrder::IntegrandFirst ? Mat(g * mass) : Mat(mass * g);
}

}  // namespace

BVFunction::BVFunction(IntervalSpec domain, SideConvention side, std::vector<double> knot_times,
                       std::vector<Mat> knot_values, std::vector<std::pair<double, Mat>> jumps)
    : domain_(domain),
      side_(side),
      knot_times_(std::move(knot_times)),
      knot_values_(std::move(knot_values)) {
  if (!(domain_.hi >= domain_.lo)) throw std::invalid_argument("BVFunction: bad domain");
  if (knot_times_.empty() || knot_times_.size() != knot_values_.size()) {
    throw std::invalid_argument("BVFunction: continuous part needs matching times/values");
  }
  const double slack = domain_slack(domain_);
  if (knot_times_.front() > domain_.lo + slack || knot_times_.back() < domain_.hi - slack) {
    throw std::invalid_argument("BVFunction: continuous part must span the domain");
  }
  for (std::size_t i = 1; i < knot_times_.size(); ++i) {
    if (!(knot_times_[i] > knot_times_[i - 1])) {
      throw std::invalid_argument("BVFunction: knot times must be strictly increasing");
    }
    if (knot_values_[i].rows() != knot_values_[0].rows() ||
        knot_values_[i].cols() != knot_values_[0].cols()) {
      throw std::invalid_argument("BVFunction: inconsistent knot value shapes");
    }
  }

  std::sort(jumps.begin(), jumps.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  jump_prefix_.reserve(jumps.size() + 1);
  jump_prefix_.push_back(Mat::Zero(rows(), cols()));
  atoms_.reserve(jumps.size());
  for (std::size_t i = 0; i < jumps.size(); ++i) {
    const double loc = jumps[i].first;
    if (loc < domain_.lo - slack || loc > domain_.hi + slack) {
      throw std::invalid_argument("BVFunction: atom outside domain");
    }
    if (i > 0 && !(loc > jumps[i - 1].first)) {
      throw std::invalid_argument("BVFunction: atom locations must be strictly increasing");
    }
    if (jumps[i].second.rows() != rows() || jumps[i].second.cols() != cols()) {
      throw std::invalid_argument("BVFunction: atom value shape mismatch");
    }
    BVAtom a;
    a.location = loc;
    a.pre_value = continuous_value(loc) + jump_prefix_.back();
    a.post_value = a.pre_value + jumps[i].second;
    atoms_.push_back(std::move(a));
    jump_prefix_.push_back(jump_prefix_.back() + jumps[i].second);
  }
}

BVFunction BVFunction::constant(IntervalSpec domain, SideConvention side, Mat value,
                                std::vector<std::pair<double, Mat>> jumps) {
  if (domain.is_point()) {
    return BVFunction(domain, side, {domain.lo}, {std::move(value)}, std::move(jumps));
  }
  std::vector<double> times{domain.lo, domain.hi};
  std::vector<Mat> values{value, value};
  return BVFunction(domain, side, std::move(times), std::move(values), std::move(jumps));
}

Mat BVFunction::continuous_value(double x) const {
  if (knot_times_.size() == 1) return knot_values_[0];
  const double clamped = std::min(std::max(x, knot_times_.front()), knot_times_.back());
  auto it = std::upper_bound(knot_times_.begin(), knot_times_.end(), clamped);
  std::size_t hi = std::min<std::size_t>(knot_times_.size() - 1,
                                         static_cast<std::size_t>(it - knot_times_.begin()));
  if (hi == 0) hi = 1;
  const std::size_t lo = hi - 1;
  const double w = (clamped - knot_times_[lo]) / (knot_times_[hi] - knot_times_[lo]);
  return (1.0 - w) * knot_values_[lo] + w * knot_values_[hi];
}

Mat BVFunction::step_sum(double x, bool strict) const {
  // Number of atoms with location < x (strict) or <= x. Locations within the
  // snap tolerance of x count as equal: an evaluation point meant to hit an
  // atom exactly may arrive an ulp off.
  const double snap = 1e-11 * std::max({1.0, std::abs(domain_.lo), std::abs(domain_.hi)});
  std::size_t k = 0;
  for (const BVAtom& a : atoms_) {
    if (a.location < x - snap) ++k;
    else if (std::abs(a.location - x) <= snap) {
      if (!strict) ++k;
      break;
    } else {
      break;
    }
  }
  return jump_prefix_[k];
}

Mat BVFunction::left_limit(double x) const { return continuous_value(x) + step_sum(x, true); }

Mat BVFunction::right_limit(double x) const { return continuous_value(x) + step_sum(x, false); }

Mat BVFunction::value(double x) const {
  const double slack = domain_slack(domain_);
  if (x < domain_.lo - slack || x > domain_.hi + slack) {
    throw std::domain_error("BVFunction: evaluation outside domain");
  }
  return side_ == SideConvention::LeftContinuous ? left_limit(x) : right_limit(x);
}

double BVFunction::sup_norm(const IntervalSpec& J) const {
  require_covers(J);
  std::vector<double> candidates{J.lo, J.hi};
  for (double t : knot_times_) {
    if (t > J.lo && t < J.hi) candidates.push_back(t);
  }
  for (const BVAtom& a : atoms_) {
    if (a.location >= J.lo && a.location <= J.hi) candidates.push_back(a.location);
  }
  double sup = 0.0;
  for (double x : candidates) {
    sup = std::max(sup, operator_norm(left_limit(x)));
    sup = std::max(sup, operator_norm(right_limit(x)));
  }
  return sup;
}

std::vector<double> BVFunction::breakpoints(const IntervalSpec& J) const {
  std::vector<double> pts;
  for (double t : knot_times_) {
    if (t >= J.lo && t <= J.hi) pts.push_back(t);
  }
  for (const BVAtom& a : atoms_) {
    if (a.location >= J.lo && a.location <= J.hi) pts.push_back(a.location);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

void BVFunction::require_covers(const IntervalSpec& J) const {
  const double slack = domain_slack(domain_);
  if (J.lo < domain_.lo - slack || J.hi > domain_.hi + slack) {
    throw std::out_of_range("BVFunction: interval outside domain");
  }
  if (!(J.hi >= J.lo)) throw std::invalid_argument("BVFunction: interval bounds out of order");
}

Mat atom_mass_in(const BVFunction& f, const BVAtom& a, const IntervalSpec& J) {
  const Mat zero = Mat::Zero(f.rows(), f.cols());
  if (J.is_point()) {
    if (J.include_lo && J.include_hi && a.location == J.lo) return a.jump();
    return zero;
  }
  if (a.location < J.lo || a.location > J.hi) return zero;
  if (a.location > J.lo && a.location < J.hi) return a.jump();
  if (a.location == J.lo) {
    if (!J.include_lo) return zero;
    return f.right_limit(a.location) - f.value(a.location);
  }
  // a.location == J.hi
  if (!J.include_hi) return zero;
  return f.value(a.location) - f.left_limit(a.location);
}

double total_variation(const BVFunction& f, const IntervalSpec& J) {
  f.require_covers(J);
  double acc = 0.0;
  // Continuous part: exact on the refined knot grid.
  double prev_t = J.lo;
  Mat prev_v = f.continuous_value(J.lo);
  for (double t : f.knot_times()) {
    if (t <= J.lo || t >= J.hi) continue;
    acc += operator_norm(f.continuous_value(t) - prev_v);
    prev_t = t;
    prev_v = f.continuous_value(t);
  }
  (void)prev_t;
  acc += operator_norm(f.continuous_value(J.hi) - prev_v);
  // Atoms, counted per the restriction rules.
  for (const BVAtom& a : f.atoms()) {
    acc += operator_norm(atom_mass_in(f, a, J));
  }
  return acc;
}

Mat measure_of(const BVFunction& f, const IntervalSpec& B) {
  f.require_covers(B);
  if (B.is_point()) {
    if (!(B.include_lo && B.include_hi)) return Mat::Zero(f.rows(), f.cols());
    return f.right_limit(B.lo) - f.left_limit(B.lo);
  }
  const Mat at_hi = B.include_hi ? f.value(B.hi) : f.left_limit(B.hi);
  const Mat at_lo = B.include_lo ? f.value(B.lo) : f.right_limit(B.lo);
  return at_hi - at_lo;
}

double measure_total_variation(const BVFunction& f, const IntervalSpec& J) {
  f.require_covers(J);
  double acc = 0.0;
  for (const BVAtom& a : f.atoms()) {
    acc += operator_norm(atom_mass_in(f, a, J));
  }
  // Continuous-part cells between breakpoints; each is monotone along a line
  // segment, so the open-cell measure norm is its exact variation share.
  std::vector<double> pts{J.lo, J.hi};
  for (double t : f.knot_times()) {
    if (t > J.lo && t < J.hi) pts.push_back(t);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  for (std::size_t i = 1; i < pts.size(); ++i) {
    acc += operator_norm(f.continuous_value(pts[i]) - f.continuous_value(pts[i - 1]));
  }
  return acc;
}

Mat stieltjes_integrate(const BVFunction& f, const std::function<Mat(double)>& g,
                        const IntervalSpec& J, ProductOrder order,
                        std::span<const double> g_knots) {
  f.require_covers(J);
  const Mat g_probe = g(0.5 * (J.lo + J.hi));
  Mat acc = order == ProductOrder::IntegrandFirst ? Mat::Zero(g_probe.rows(), f.cols())
                                                  : Mat::Zero(f.rows(), g_probe.cols());
  for (const BVAtom& a : f.atoms()) {
    const Mat mass = atom_mass_in(f, a, J);
    if (mass.isZero(0.0)) continue;
    acc += ordered_product(order, g(a.location), mass);
  }
  if (J.is_point()) return acc;

  std::vector<double> pts{J.lo, J.hi};
  for (double t : f.knot_times()) {
    if (t > J.lo && t < J.hi) pts.push_back(t);
  }
  for (double t : g_knots) {
    if (t > J.lo && t < J.hi) pts.push_back(t);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double u = pts[i - 1];
    const double v = pts[i];
    const Mat dc = f.continuous_value(v) - f.continuous_value(u);
    if (dc.isZero(0.0)) continue;
    const Mat g_mid = 0.5 * (g(u) + g(v));
    acc += ordered_product(order, g_mid, dc);
  }
  return acc;
}

Mat stieltjes_integrate(const BVFunction& f, const BVFunction& g, const IntervalSpec& J,
                        ProductOrder order) {
  g.require_covers(J);  // "g not covering J" is the caller's error
  const std::vector<double> knots = g.breakpoints(J);
  return stieltjes_integrate(
      f, [&g](double x) { return g.value(x); }, J, order, knots);
}

double variation_product_bound(const BVFunction& f, const BVFunction& g, const IntervalSpec& J) {
  return total_variation(f, J) * g.sup_norm(J) + total_variation(g, J) * f.sup_norm(J);
}

}  // namespace dlat
