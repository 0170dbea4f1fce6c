// Functions of bounded variation, their associated measures, and
// Lebesgue-Stieltjes integration with endpoint-aware interval semantics.
//
// Interval bounds follow the a-/a+/b-/b+ encoding: include_lo=true is the
// "a-" lower bound (the interval contains a), include_hi=true is "b+" (the
// interval contains b). Integrals over a subinterval J always integrate
// against the measure of the *restricted* function f|J, never against the
// restriction of the global measure; the two differ at an included endpoint
// whenever f is discontinuous there from the inside.
#pragma once

#include <functional>
#include <span>
#include <vector>

#include "delaylattice/common.hpp"

namespace dlat {

struct IntervalSpec {
  double lo = 0.0;
  double hi = 0.0;
  bool include_lo = true;
  bool include_hi = true;

  static IntervalSpec closed(double a, double b) { return {a, b, true, true}; }
  static IntervalSpec half_open(double a, double b) { return {a, b, true, false}; }
  static IntervalSpec open(double a, double b) { return {a, b, false, false}; }
  static IntervalSpec point(double c) { return {c, c, true, true}; }

  bool is_point() const { return lo == hi; }
  double length() const { return hi - lo; }
};

enum class SideConvention { LeftContinuous, RightContinuous };

/// A jump of a BV function: one-sided limits on both sides of `location`.
/// The function value at the location itself equals pre_value under the
/// left-continuous convention and post_value under the right-continuous one.
struct BVAtom {
  double location = 0.0;
  Mat pre_value;
  Mat post_value;
  Mat jump() const { return post_value - pre_value; }
};

/// Bounded-variation function: a continuous piecewise-linear part plus
/// finitely many atoms, with a stored side-continuity convention.
class BVFunction {
 public:
  /// knot_times/knot_values sample the continuous part (linear in between,
  /// spanning the domain); jumps are (location, jump value) pairs with
  /// strictly increasing locations inside the domain.
  BVFunction(IntervalSpec domain, SideConvention side, std::vector<double> knot_times,
             std::vector<Mat> knot_values, std::vector<std::pair<double, Mat>> jumps = {});

  static BVFunction constant(IntervalSpec domain, SideConvention side, Mat value,
                             std::vector<std::pair<double, Mat>> jumps = {});

  const IntervalSpec& domain() const { return domain_; }
  SideConvention side() const { return side_; }
  Eigen::Index rows() const { return knot_values_[0].rows(); }
  Eigen::Index cols() const { return knot_values_[0].cols(); }
  const std::vector<BVAtom>& atoms() const { return atoms_; }
  const std::vector<double>& knot_times() const { return knot_times_; }

  /// Function value at x (per the stored side convention at atom locations).
  Mat value(double x) const;
  Mat left_limit(double x) const;
  Mat right_limit(double x) const;
  /// The continuous part alone.
  Mat continuous_value(double x) const;

  /// sup over J of the value norm, scanning knots, atoms and endpoints.
  double sup_norm(const IntervalSpec& J) const;

  /// Breakpoints (knots and atom locations) inside J; used to build exact
  /// quadrature grids for integrands of this shape.
  std::vector<double> breakpoints(const IntervalSpec& J) const;

  void require_covers(const IntervalSpec& J) const;

 private:
  Mat step_sum(double x, bool strict) const;

  IntervalSpec domain_;
  SideConvention side_;
  std::vector<double> knot_times_;
  std::vector<Mat> knot_values_;
  std::vector<BVAtom> atoms_;
  std::vector<Mat> jump_prefix_;  // jump_prefix_[k] = sum of first k jumps
};

/// Mass contributed by atom `a` of `f` to integrals over J, honoring the
/// restriction semantics: full jump strictly inside, f(lo+)-f(lo) at an
/// included lower endpoint, f(hi)-f(hi-) at an included upper endpoint,
/// nothing at excluded endpoints.
Mat atom_mass_in(const BVFunction& f, const BVAtom& a, const IntervalSpec& J);

/// Total variation W_J(f) of the restriction of f to J.
double total_variation(const BVFunction& f, const IntervalSpec& J);

/// nu_{f|B}(B): value of the measure associated with the restriction of f
/// to B. For nondegenerate B this is f(hi or hi-) - f(lo or lo+) depending
/// on endpoint inclusion; a degenerate B = {c} yields the full interior atom
/// mass f(c+) - f(c-).
Mat measure_of(const BVFunction& f, const IntervalSpec& B);

/// Total variation ||nu_{f|J}|| of the associated measure (partition-based,
/// computed cell by cell through measure_of).
double measure_total_variation(const BVFunction& f, const IntervalSpec& J);

enum class ProductOrder {
  IntegrandFirst,  // sum of g(x) df(x): integrand multiplies from the left
  MeasureFirst,    // sum of df(x) g(x): measure multiplies from the left
};

/// Lebesgue-Stieltjes integral of g against d(f|J). Atoms contribute
/// g(loc) * mass (or mass * g(loc) under MeasureFirst); the continuous part
/// is integrated by trapezoid quadrature on the merged breakpoint grid,
/// exact when g is piecewise linear on that grid.
Mat stieltjes_integrate(const BVFunction& f, const std::function<Mat(double)>& g,
                        const IntervalSpec& J, ProductOrder order = ProductOrder::IntegrandFirst,
                        std::span<const double> g_knots = {});

Mat stieltjes_integrate(const BVFunction& f, const BVFunction& g, const IntervalSpec& J,
                        ProductOrder order = ProductOrder::IntegrandFirst);

/// W_J(f) sup_J|g| + W_J(g) sup_J|f|, the product-variation bound; an upper
/// bound for W_J(fg).
double variation_product_bound(const BVFunction& f, const BVFunction& g, const IntervalSpec& J);

}  // namespace dlat
