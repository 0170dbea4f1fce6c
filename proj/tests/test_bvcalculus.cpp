#include <doctest.h>

#include <cmath>
#include <random>

#include "delaylattice/bvcalculus.hpp"
#include "testutil.hpp"

using namespace dlat;
using testutil::m1;

namespace {

// Riemann-Stieltjes oracle: sum of g(left node) * (f(x_{i+1}) - f(x_i)) on a
// refining uniform partition. Converges for continuous g.
Mat rs_sum(const BVFunction& f, const std::function<Mat(double)>& g, double lo, double hi, int n) {
  Mat acc = Mat::Zero(1, 1);
  for (int i = 0; i < n; ++i) {
    const double u = lo + (hi - lo) * static_cast<double>(i) / n;
    const double v = lo + (hi - lo) * static_cast<double>(i + 1) / n;
    acc += g(u) * (f.value(v) - f.value(u));
  }
  return acc;
}

// Partition sum of |delta f| over a uniform partition; converges to the
// total variation from below per the supremum definition.
double partition_variation(const BVFunction& f, double lo, double hi, int n) {
  double acc = 0.0;
  Mat prev = f.value(lo);
  for (int i = 1; i <= n; ++i) {
    Mat cur = f.value(lo + (hi - lo) * static_cast<double>(i) / n);
    acc += operator_norm(cur - prev);
    prev = std::move(cur);
  }
  return acc;
}

BVFunction unit_step(double at, double lo, double hi, SideConvention side) {
  return BVFunction::constant(IntervalSpec::closed(lo, hi), side, m1(0.0), {{at, m1(1.0)}});
}

}  // namespace

TEST_CASE("total variation: constants, steps, and an atomic slice") {
  BVFunction c = BVFunction::constant(IntervalSpec::closed(0, 2), SideConvention::LeftContinuous,
                                      m1(3.0));
  CHECK(total_variation(c, IntervalSpec::closed(0, 2)) == 0.0);
  CHECK(total_variation(c, IntervalSpec::half_open(0.5, 1.5)) == 0.0);

  BVFunction step = unit_step(1.0, 0.0, 2.0, SideConvention::LeftContinuous);
  CHECK(total_variation(step, IntervalSpec::closed(0, 2)) == doctest::Approx(1.0));

  // The slice of X(t, .) for the scalar half-coefficient single-delay system
  // at t - s = 2.5: one atom of size 0.25 at s + 0.5 (plateaus 1.75 / 1.5).
  BVFunction slice = BVFunction::constant(IntervalSpec::closed(0, 1),
                                          SideConvention::LeftContinuous, m1(1.75),
                                          {{0.5, m1(-0.25)}});
  CHECK(total_variation(slice, IntervalSpec::closed(0, 1)) == doctest::Approx(0.25));
}

TEST_CASE("evaluation honors the stored side convention at atoms") {
  BVFunction left = unit_step(1.0, 0.0, 2.0, SideConvention::LeftContinuous);
  CHECK(left.value(1.0)(0, 0).real() == 0.0);
  CHECK(left.right_limit(1.0)(0, 0).real() == 1.0);
  BVFunction right = unit_step(1.0, 0.0, 2.0, SideConvention::RightContinuous);
  CHECK(right.value(1.0)(0, 0).real() == 1.0);
  CHECK(right.left_limit(1.0)(0, 0).real() == 0.0);
  // atom metadata carries both one-sided values
  CHECK(left.atoms()[0].pre_value(0, 0).real() == 0.0);
  CHECK(left.atoms()[0].post_value(0, 0).real() == 1.0);
}

TEST_CASE("measure of intervals follows the endpoint rules") {
  SUBCASE("open interval away from atoms: f(b-) - f(a+)") {
    BVFunction f = BVFunction(IntervalSpec::closed(0, 1), SideConvention::LeftContinuous,
                              {0.0, 1.0}, {m1(0.0), m1(1.0)});
    const Mat v = measure_of(f, IntervalSpec::open(0.25, 0.75));
    CHECK(v(0, 0).real() == doctest::Approx(0.5).epsilon(1e-14));
  }
  SUBCASE("singleton at a left-continuous step carries the full height") {
    BVFunction f = unit_step(1.0, 0.0, 2.0, SideConvention::LeftContinuous);
    CHECK(measure_of(f, IntervalSpec::point(1.0))(0, 0).real() == doctest::Approx(1.0));
  }
  SUBCASE("singleton at the slice of X(0.5, .): atom mass -1") {
    // X(0.5, alpha) is 1 up to alpha = 0.5 and 0 after.
    BVFunction f = BVFunction::constant(IntervalSpec::closed(0, 1),
                                        SideConvention::LeftContinuous, m1(1.0),
                                        {{0.5, m1(-1.0)}});
    CHECK(measure_of(f, IntervalSpec::point(0.5))(0, 0).real() == doctest::Approx(-1.0));
  }
  SUBCASE("restriction semantics at an included endpoint") {
    // Left-continuous step at c: the measure of the restriction to [c, b]
    // puts the full jump on {c} (f is not right continuous there), while the
    // restriction to [a, c] puts nothing on {c}.
    BVFunction f = unit_step(1.0, 0.0, 2.0, SideConvention::LeftContinuous);
    CHECK(measure_of(f, IntervalSpec::closed(1.0, 2.0))(0, 0).real() == doctest::Approx(1.0));
    CHECK(measure_of(f, IntervalSpec::closed(0.0, 1.0))(0, 0).real() == doctest::Approx(0.0));
  }
}

TEST_CASE("stieltjes integration: sifting, exact linear case, refinement oracle") {
  SUBCASE("constant integrator gives zero") {
    BVFunction f = BVFunction::constant(IntervalSpec::closed(0, 1),
                                        SideConvention::LeftContinuous, m1(4.0));
    const Mat v = stieltjes_integrate(f, [](double) { return m1(1.0); },
                                      IntervalSpec::closed(0, 1));
    CHECK(operator_norm(v) == 0.0);
  }
  SUBCASE("left-continuous step sifts g at the jump") {
    BVFunction f = unit_step(0.6, 0.0, 1.0, SideConvention::LeftContinuous);
    const Mat v = stieltjes_integrate(f, [](double x) { return m1(std::sin(x)); },
                                      IntervalSpec::half_open(0.0, 1.0));
    CHECK(v(0, 0).real() == doctest::Approx(std::sin(0.6)).epsilon(1e-14));
  }
  SUBCASE("integral of x against x over [0,1]") {
    BVFunction f = BVFunction(IntervalSpec::closed(0, 1), SideConvention::LeftContinuous,
                              {0.0, 1.0}, {m1(0.0), m1(1.0)});
    auto g = [](double x) { return m1(x); };
    const Mat v = stieltjes_integrate(f, g, IntervalSpec::closed(0, 1));
    CHECK(v(0, 0).real() == doctest::Approx(0.5).epsilon(1e-6));
    // refinement oracle converges to the same value
    const Mat oracle = rs_sum(f, g, 0.0, 1.0, 20000);
    CHECK(v(0, 0).real() == doctest::Approx(oracle(0, 0).real()).epsilon(1e-4));
  }
  SUBCASE("matrix product order matters for the measure-first form") {
    Mat jump(2, 2);
    jump << Complex(0, 0), Complex(1, 0), Complex(0, 0), Complex(0, 0);
    Mat gval(2, 2);
    gval << Complex(0, 0), Complex(0, 0), Complex(1, 0), Complex(0, 0);
    BVFunction f = BVFunction::constant(IntervalSpec::closed(0, 1),
                                        SideConvention::LeftContinuous,
                                        Mat(Mat::Zero(2, 2)), {{0.5, jump}});
    auto g = [&](double) { return gval; };
    const Mat a = stieltjes_integrate(f, g, IntervalSpec::closed(0, 1),
                                      ProductOrder::IntegrandFirst);
    const Mat b = stieltjes_integrate(f, g, IntervalSpec::closed(0, 1),
                                      ProductOrder::MeasureFirst);
    CHECK(operator_norm(a - gval * jump) == 0.0);
    CHECK(operator_norm(b - jump * gval) == 0.0);
    CHECK(operator_norm(a - b) > 0.5);
  }
}

TEST_CASE("endpoint flags control atom counting exactly") {
  BVFunction f = unit_step(1.0, 0.0, 2.0, SideConvention::LeftContinuous);
  auto one = [](double) { return m1(1.0); };
  // atom at the included lower bound of [1, 2) counts in full
  CHECK(stieltjes_integrate(f, one, IntervalSpec::half_open(1.0, 2.0))(0, 0).real() ==
        doctest::Approx(1.0));
  // excluded lower bound drops it
  CHECK(stieltjes_integrate(f, one, IntervalSpec::open(1.0, 2.0))(0, 0).real() ==
        doctest::Approx(0.0));
  // included upper bound sees nothing for a left-continuous f
  CHECK(stieltjes_integrate(f, one, IntervalSpec::closed(0.0, 1.0))(0, 0).real() ==
        doctest::Approx(0.0));
  // the right-continuous twin flips both rules
  BVFunction g = unit_step(1.0, 0.0, 2.0, SideConvention::RightContinuous);
  CHECK(stieltjes_integrate(g, one, IntervalSpec::half_open(1.0, 2.0))(0, 0).real() ==
        doctest::Approx(0.0));
  CHECK(stieltjes_integrate(g, one, IntervalSpec::closed(0.0, 1.0))(0, 0).real() ==
        doctest::Approx(1.0));
}

TEST_CASE("splitting an integral at a left-continuity point is exactly additive") {
  std::mt19937_64 rng(411);
  for (int trial = 0; trial < 20; ++trial) {
    BVFunction f = testutil::random_scalar_bv(rng);
    if (f.side() != SideConvention::LeftContinuous) continue;
    BVFunction g = testutil::random_scalar_bv(rng);
    auto gc = [&](double x) { return g.continuous_value(x); };
    const std::vector<double>& knots = g.knot_times();
    const IntervalSpec whole = IntervalSpec::half_open(0.0, 2.0);
    const double c = 0.7;
    const Mat total = stieltjes_integrate(f, gc, whole, ProductOrder::IntegrandFirst, knots);
    const Mat left = stieltjes_integrate(f, gc, IntervalSpec::half_open(0.0, c),
                                         ProductOrder::IntegrandFirst, knots);
    const Mat right = stieltjes_integrate(f, gc, IntervalSpec::half_open(c, 2.0),
                                          ProductOrder::IntegrandFirst, knots);
    CHECK(operator_norm(total - left - right) <= 1e-12);
  }
}

TEST_CASE("variation product bound") {
  SUBCASE("constants give zero") {
    BVFunction f = BVFunction::constant(IntervalSpec::closed(0, 1),
                                        SideConvention::LeftContinuous, m1(2.0));
    CHECK(variation_product_bound(f, f, IntervalSpec::closed(0, 1)) == 0.0);
  }
  SUBCASE("two unit steps: bound 2, actual 1") {
    BVFunction f = unit_step(0.5, 0.0, 1.0, SideConvention::LeftContinuous);
    const double bound = variation_product_bound(f, f, IntervalSpec::closed(0, 1));
    CHECK(bound == doctest::Approx(2.0));
    // product f*f = f, actual variation 1 <= 2
    CHECK(total_variation(f, IntervalSpec::closed(0, 1)) <= bound);
  }
  SUBCASE("f = g = x on [0,1]: bound 2, actual 1") {
    BVFunction f = BVFunction(IntervalSpec::closed(0, 1), SideConvention::LeftContinuous,
                              {0.0, 1.0}, {m1(0.0), m1(1.0)});
    const double bound = variation_product_bound(f, f, IntervalSpec::closed(0, 1));
    CHECK(bound == doctest::Approx(2.0));
    // partition oracle for W(x^2) on [0,1]
    double actual = 0.0;
    double prev = 0.0;
    for (int i = 1; i <= 4096; ++i) {
      const double x = static_cast<double>(i) / 4096;
      actual += std::abs(x * x - prev);
      prev = x * x;
    }
    CHECK(actual == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(actual <= bound);
  }
}

TEST_CASE("randomized: integral bound, measure norm bound, monotone equality") {
  std::mt19937_64 rng(2718);
  for (int trial = 0; trial < 60; ++trial) {
    BVFunction f = testutil::random_scalar_bv(rng);
    BVFunction g = testutil::random_scalar_bv(rng);
    const IntervalSpec J = IntervalSpec::closed(0.0, 2.0);
    auto gc = [&](double x) { return g.continuous_value(x); };
    const Mat integral = stieltjes_integrate(f, gc, J, ProductOrder::IntegrandFirst);
    const double w = total_variation(f, J);
    double sup_g = 0.0;
    for (int i = 0; i <= 64; ++i) {
      sup_g = std::max(sup_g, operator_norm(g.continuous_value(2.0 * i / 64.0)));
    }
    CHECK(operator_norm(integral) <= 2.0 * w * sup_g + 1e-12);
    CHECK(measure_total_variation(f, J) <= 2.0 * w + 1e-12);
  }
  // monotone scalar function: ||nu_f|| equals W exactly
  BVFunction inc = BVFunction(IntervalSpec::closed(0, 1), SideConvention::LeftContinuous,
                              {0.0, 1.0}, {m1(0.0), m1(1.0)}, {{0.5, m1(0.25)}});
  CHECK(measure_total_variation(inc, IntervalSpec::closed(0, 1)) ==
        doctest::Approx(total_variation(inc, IntervalSpec::closed(0, 1))).epsilon(1e-14));
}

TEST_CASE("partition sums converge to the total variation from below") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 8; ++trial) {
    BVFunction f = testutil::random_scalar_bv(rng);
    const double w = total_variation(f, IntervalSpec::closed(0.0, 2.0));
    double prev = 0.0;
    for (int n : {64, 256, 1024, 4096, 16384}) {
      const double sum = partition_variation(f, 0.0, 2.0, n);
      CHECK(sum <= w + 1e-10);       // from below
      CHECK(sum >= prev - 1e-10);    // refinement does not lose variation
      prev = sum;
    }
    CHECK(w - prev <= 1e-2 * (1.0 + w));
  }
}

TEST_CASE("interval outside the domain is rejected") {
  BVFunction f = BVFunction::constant(IntervalSpec::closed(0, 1),
                                      SideConvention::LeftContinuous, m1(1.0));
  CHECK_THROWS_AS(total_variation(f, IntervalSpec::closed(0, 2)), std::out_of_range);
  CHECK_THROWS_AS(measure_of(f, IntervalSpec::closed(-1, 0.5)), std::out_of_range);
}
