#include <doctest.h>

#include <random>

#include "delaylattice/representation.hpp"
#include "delaylattice/solver.hpp"
#include "testutil.hpp"

using namespace dlat;
using testutil::m1;
using testutil::v1;

TEST_CASE("representation values on hand-checked fixtures") {
  SUBCASE("zero coefficients keep the zero solution") {
    DelaySystem sys(1, {1.0}, {MatrixSignal::constant(m1(0.0))});
    InitialProblem p(sys, 0.0, VectorSignal::constant(v1(0.0)));
    for (double t : {0.0, 0.4, 1.7}) CHECK(represent_solution(p, t).norm() <= 1e-14);
  }
  SUBCASE("canonical scalar at t = 0.5 gives 0.75") {
    InitialProblem p = testutil::canonical_scalar();
    CHECK(represent_solution(p, 0.5)(0).real() == doctest::Approx(0.75).epsilon(1e-14));
  }
  SUBCASE("at the start it returns phi(0)") {
    InitialProblem p = testutil::canonical_scalar();
    CHECK((represent_solution(p, 0.0) - p.phi_at(0.0)).norm() <= 1e-14);
  }
  SUBCASE("before the start or with incompatible data it refuses") {
    InitialProblem p = testutil::canonical_scalar();
    CHECK_THROWS_AS(represent_solution(p, -0.5), std::invalid_argument);
    DelaySystem sys(1, {1.0}, {MatrixSignal::constant(m1(0.5))});
    InitialProblem bad(sys, 0.0, VectorSignal::constant(v1(1.0)));
    CHECK_THROWS_AS(represent_solution(bad, 0.5), std::invalid_argument);
  }
}

TEST_CASE("certification against the direct solver") {
  SUBCASE("constant invariant solution") {
    DelaySystem sys(1, {1.0}, {MatrixSignal::constant(m1(1.0))});
    InitialProblem p(sys, 0.0, VectorSignal::constant(v1(2.0)));
    const CertificationReport r = certify_equivalence(p, 2.0, 16);
    CHECK(r.max_error <= 1e-10);
  }
  SUBCASE("random two-delay planar system with trig coefficients") {
    std::mt19937_64 rng(600);
    testutil::RandomProblemOptions opt;
    opt.max_dim = 2;
    opt.max_delays = 2;
    InitialProblem p = testutil::random_problem(rng, opt);
    const CertificationReport r =
        certify_equivalence(p, p.start() + p.system().max_delay(), 20);
    CHECK(r.max_error <= 1e-8);
    CHECK(r.n_evaluations > 20);
  }
}

TEST_CASE("representation is linear in phi") {
  std::mt19937_64 rng(77);
  InitialProblem base = testutil::random_problem(rng);
  const DelaySystem& sys = base.system();
  const auto& knots = base.phi().knots();
  std::vector<Vec> va, vb, vc;
  for (std::size_t i = 0; i < knots.size(); ++i) {
    va.push_back(testutil::random_vector(rng, sys.dim()));
    vb.push_back(testutil::random_vector(rng, sys.dim()));
  }
  // project both onto the compatibility set so the representation applies,
  // then combine: the combination stays compatible by linearity
  auto project = [&](std::vector<Vec> vals) {
    VectorSignal draft = VectorSignal::piecewise_linear(knots, vals);
    Vec phi0 = Vec::Zero(sys.dim());
    for (std::size_t j = 0; j < sys.num_delays(); ++j) {
      phi0 += sys.coefficient_at(j, base.start()) * draft(-sys.delay(j));
    }
    vals.back() = phi0;
    return vals;
  };
  va = project(va);
  vb = project(vb);
  for (std::size_t i = 0; i < knots.size(); ++i) vc.push_back(0.7 * va[i] + 1.3 * vb[i]);

  InitialProblem pa(sys, base.start(), VectorSignal::piecewise_linear(knots, va));
  InitialProblem pb(sys, base.start(), VectorSignal::piecewise_linear(knots, vb));
  InitialProblem pc(sys, base.start(), VectorSignal::piecewise_linear(knots, vc));
  for (int i = 0; i <= 6; ++i) {
    const double t = base.start() + 1.8 * sys.max_delay() * i / 6.0 + 0.011;
    const Vec lhs = represent_solution(pc, t);
    const Vec rhs = 0.7 * represent_solution(pa, t) + 1.3 * represent_solution(pb, t);
    CHECK((lhs - rhs).norm() <= 1e-11 * (1.0 + rhs.norm()));
  }
}

TEST_CASE("endpoint semantics: counting the edge atom in full breaks certification") {
  // Fixture with an atom of X(t, .) exactly at s + tau_1: two delays, t at
  // s + tau_2, so t - tau_1 - s = 1 lies on the lattice.
  DelaySystem sys(1, {1.0, 2.0},
                  {MatrixSignal::constant(m1(0.5)), MatrixSignal::constant(m1(0.25))});
  VectorSignal phi = VectorSignal::piecewise_linear(
      {-2.0, -1.0, 0.0}, {v1(1.0), v1(2.0), v1(0.5 * 2.0 + 0.25 * 1.0)});
  InitialProblem p(sys, 0.0, phi);
  REQUIRE(check_compatibility(p).residual <= 1e-15);

  const double t = 2.0;
  Lattice lat = enumerate_lattice(sys.delays(), 4.0);
  const FundamentalSlice slice = build_slice(sys, t, 0.0, lat);
  const BVFunction x_slice = slice.as_bv();

  // the slice must indeed carry an atom at s + tau_1 = 1
  bool has_edge_atom = false;
  for (const SliceAtom& a : slice.atoms) {
    if (a.alpha == doctest::Approx(1.0) && operator_norm(a.jump) > 1e-12) has_edge_atom = true;
  }
  REQUIRE(has_edge_atom);

  const Vec correct = represent_solution(p, t, &lat);
  CHECK((correct - eval_solution(p, t)).norm() <= 1e-10);

  // wrong route: trade the excluded upper bound for an included one by
  // adding the unrestricted atom mass at s + tau_1 to the first integral
  const Mat edge_mass = measure_of(x_slice, IntervalSpec::point(1.0));
  REQUIRE(operator_norm(edge_mass) > 1e-12);
  const Vec wrong =
      correct - as_vector(Mat(edge_mass * (sys.coefficient_at(0, 1.0) * p.phi_at(0.0))));
  CHECK((wrong - eval_solution(p, t)).norm() > 1e-6);
}
