#include "delaylattice/volterra.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>

namespace dlat {

namespace {

// k(t, tau) for tau <= t; the start point does not enter the value.
Mat kernel_value(const DelaySystem& sys, double t, double tau) {
  Mat v = Mat::Zero(sys.dim(), sys.dim());
  if (tau > t) return v;
  for (std::size_t j = 0; j < sys.num_delays(); ++j) {
    if (tau <= t - sys.delay(j)) v -= sys.coefficient_at(j, t);
  }
  return v;
}

using MatMemo = std::unordered_map<std::vector<int>, Mat, IndexTupleHash>;

Mat resolvent_rec(const DelaySystem& sys, double t, double beta, std::vector<int>& tuple,
                  MatMemo& memo) {
  const double u = t - tuple_value(tuple, sys.delays());
  if (u <= beta) return Mat::Zero(sys.dim(), sys.dim());
  auto it = memo.find(tuple);
  if (it != memo.end()) return it->second;
  Mat val = -kernel_value(sys, u, beta);
  for (std::size_t j = 0; j < sys.num_delays(); ++j) {
    tuple[j] += 1;
    val += sys.coefficient_at(j, u) * resolvent_rec(sys, t, beta, tuple, memo);
    tuple[j] -= 1;
  }
  memo.emplace(tuple, val);
  return val;
}

double grid_b_infinity(const std::vector<std::vector<Mat>>& values) {
  double sup = 0.0;
  for (const auto& row : values) {
    double w = operator_norm(row[0]);
    for (std::size_t k = 0; k + 1 < row.size(); ++k) {
      w += operator_norm(row[k + 1] - row[k]);
    }
    sup = std::max(sup, w);
  }
  return sup;
}

}  // namespace

AtomicKernel::AtomicKernel(DelaySystem sys, double start)
    : sys_(std::move(sys)), a_(start), b_(start + sys_.max_delay()) {}

Mat AtomicKernel::value(double t, double tau) const { return kernel_value(sys_, t, tau); }

std::vector<KernelAtom> AtomicKernel::atoms(double t) const {
  std::vector<KernelAtom> out;
  for (std::size_t j = sys_.num_delays(); j-- > 0;) {
    const double loc = t - sys_.delay(j);
    if (loc >= a_) out.push_back(KernelAtom{loc, sys_.coefficient_at(j, t)});
  }
  return out;
}

BVFunction AtomicKernel::slice(double t) const {
  std::vector<std::pair<double, Mat>> jumps;
  for (const KernelAtom& a : atoms(t)) jumps.emplace_back(a.location, a.weight);
  return BVFunction::constant(IntervalSpec::closed(a_, b_), SideConvention::LeftContinuous,
                              value(t, a_), std::move(jumps));
}

double AtomicKernel::b_infinity_norm(int n_samples) const {
  std::vector<double> ts;
  for (int i = 0; i <= n_samples; ++i) {
    ts.push_back(a_ + (b_ - a_) * static_cast<double>(i) / n_samples);
  }
  const double nudge = 1e-9 * std::max(1.0, b_ - a_);
  for (std::size_t j = 0; j < sys_.num_delays(); ++j) {
    for (double t : {a_ + sys_.delay(j) - nudge, a_ + sys_.delay(j) + nudge}) {
      if (t >= a_ && t <= b_) ts.push_back(t);
    }
  }
  double sup = 0.0;
  for (double t : ts) {
    const BVFunction sl = slice(t);
    sup = std::max(sup, total_variation(sl, sl.domain()) + operator_norm(sl.value(a_)));
  }
  return sup;
}

AtomicKernel kernel_from_system(const InitialProblem& p) {
  return AtomicKernel(p.system(), p.start());
}

Vec forcing_from_initial(const InitialProblem& p, double t) {
  const DelaySystem& sys = p.system();
  const double u = t - p.start();
  const double slack = 1e-9 * std::max(1.0, sys.max_delay());
  if (u < -slack || u > sys.max_delay() + slack) {
    throw std::domain_error("forcing_from_initial: t outside [s, s + tau_N]");
  }
  // Right-continuous in t: the l-th term drops at u = tau_l. A query meant
  // to hit that boundary may arrive an ulp below it, so snap.
  const double snap = 1e-11 * std::max({1.0, std::abs(t), std::abs(p.start())});
  Vec f = Vec::Zero(sys.dim());
  for (std::size_t l = 0; l < sys.num_delays(); ++l) {
    if (sys.delay(l) > u + snap) {
      f += sys.coefficient_at(l, t) * p.phi_at(std::max(u - sys.delay(l), -sys.max_delay()));
    }
  }
  return f;
}

BVFunction forcing_as_bv(const InitialProblem& p, int samples_per_delay) {
  const DelaySystem& sys = p.system();
  const double s = p.start();
  const double tau_n = sys.max_delay();
  const Vec phi0 = p.phi_at(0.0);

  std::vector<std::pair<double, Mat>> jumps;
  for (std::size_t l = 0; l < sys.num_delays(); ++l) {
    const double loc = s + sys.delay(l);
    jumps.emplace_back(loc, Mat(-(sys.coefficient_at(l, loc) * phi0)));
  }

  std::vector<double> times{s, s + tau_n};
  const int n = std::max(2, static_cast<int>(std::ceil(tau_n / sys.min_delay())) * samples_per_delay);
  for (int i = 1; i < n; ++i) times.push_back(s + tau_n * static_cast<double>(i) / n);
  for (const auto& [loc, jump] : jumps) times.push_back(loc);
  for (std::size_t l = 0; l < sys.num_delays(); ++l) {
    for (double theta : p.phi().knots()) {
      const double t = s + sys.delay(l) + theta;
      if (t > s && t < s + tau_n) times.push_back(t);
    }
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  std::vector<Mat> values;
  values.reserve(times.size());
  for (double t : times) {
    Vec c = forcing_from_initial(p, t);
    for (const auto& [loc, jump] : jumps) {
      if (loc <= t) c -= as_vector(jump);
    }
    values.push_back(Mat(c));
  }
  return BVFunction(IntervalSpec::closed(s, s + tau_n), SideConvention::RightContinuous,
                    std::move(times), std::move(values), std::move(jumps));
}

AtomicResolvent::AtomicResolvent(DelaySystem sys, double start)
    : sys_(std::move(sys)),
      a_(start),
      b_(start + sys_.max_delay()),
      lattice_(enumerate_lattice(sys_.delays(), sys_.max_delay())) {}

Mat AtomicResolvent::value(double t, double beta) const {
  MatMemo memo;
  std::vector<int> tuple(sys_.num_delays(), 0);
  return resolvent_rec(sys_, t, beta, tuple, memo);
}

BVFunction AtomicResolvent::slice(double t) const {
  // Probes sit min_gap/4 off every lattice-shifted location so the branch
  // comparisons inside the recursion keep full margin (merged index tuples
  // can reproduce a commensurate offset one ulp apart).
  const double eps = lattice_.min_gap() / 4.0;
  const double edge_tol = std::max(
      lattice_.merge_tol(), 1e-11 * std::max({1.0, std::abs(t), std::abs(a_) + (b_ - a_)}));
  std::vector<std::pair<double, Mat>> jumps;
  for (const LatticePoint& p : lattice_.points()) {
    if (p.value <= lattice_.merge_tol()) continue;  // no atom on the diagonal
    double alpha = t - p.value;
    if (alpha < a_ - edge_tol || alpha > b_ + edge_tol) continue;
    if (std::abs(alpha - a_) <= edge_tol) alpha = a_;
    if (std::abs(alpha - b_) <= edge_tol) alpha = b_;
    const Mat jump = value(t, alpha + eps) - value(t, alpha - eps);
    jumps.emplace_back(alpha, jump);
  }
  std::sort(jumps.begin(), jumps.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  const std::ptrdiff_t at_idx = lattice_.index_at_or_below(t - a_ + edge_tol);
  const bool atom_at_start =
      at_idx >= 0 && std::abs(lattice_.point(at_idx).value - (t - a_)) <= edge_tol;
  const Mat base = value(t, atom_at_start ? a_ - eps : a_);
  return BVFunction::constant(IntervalSpec::closed(a_, b_), SideConvention::LeftContinuous, base,
                              std::move(jumps));
}

AtomicResolvent build_resolvent(const AtomicKernel& kernel, const ResolventConfig& cfg) {
  AtomicResolvent rho(kernel.system(), kernel.lower());
  std::vector<std::pair<double, double>> samples;
  const int n = 12;
  for (int i = 0; i <= n; ++i) {
    for (int k = 0; k <= n; ++k) {
      samples.emplace_back(kernel.lower() + (kernel.upper() - kernel.lower()) * (i + 0.37) / (n + 1),
                           kernel.lower() + (kernel.upper() - kernel.lower()) * (k + 0.71) / (n + 1));
    }
  }
  rho.stats_.residual_estimate = resolvent_residual(kernel, rho, samples);
  rho.stats_.r = cfg.r;
  return rho;
}

GridKernel::GridKernel(double a, double b, int intervals, Eigen::Index dim)
    : a_(a), b_(b), n_(intervals), dim_(dim) {
  if (!(b > a)) throw std::invalid_argument("GridKernel: empty interval");
  if (intervals < 1) throw std::invalid_argument("GridKernel: need at least one interval");
  values_.assign(n_ + 1, std::vector<Mat>(n_ + 1, Mat::Zero(dim_, dim_)));
}

GridKernel GridKernel::sample(const AtomicKernel& kernel, int points_per_smallest_delay) {
  const double span = kernel.upper() - kernel.lower();
  const int n = std::max(
      2, static_cast<int>(std::ceil(span / kernel.system().min_delay() * points_per_smallest_delay)));
  return from_function([&kernel](double t, double tau) { return kernel.value(t, tau); },
                       kernel.lower(), kernel.upper(), n, kernel.dim());
}

GridKernel GridKernel::from_function(const std::function<Mat(double, double)>& kappa, double a,
                                     double b, int intervals, Eigen::Index dim) {
  GridKernel g(a, b, intervals, dim);
  for (int i = 0; i <= intervals; ++i) {
    for (int k = 0; k <= intervals; ++k) {
      if (g.node(k) >= g.node(i)) continue;  // kernel type: zero for tau >= t
      g.values_[i][k] = kappa(g.node(i), g.node(k));
    }
  }
  return g;
}

double GridKernel::b_infinity_norm() const { return grid_b_infinity(values_); }

double GridKernel::near_diagonal_eta(double eps) const {
  int best = 0;
  for (int m = 1; m <= n_; ++m) {
    double worst = 0.0;
    for (int i = 0; i <= n_; ++i) {
      double w = 0.0;
      for (int l = std::max(0, i - m); l < i; ++l) w += operator_norm(mass(i, l));
      worst = std::max(worst, w);
    }
    if (worst <= eps) best = m;
    else break;
  }
  return best > 0 ? best * step() : 0.5 * step();
}

double contraction_ratio(const GridKernel& kernel, double r, std::uint64_t seed, int trials) {
  const int n = kernel.intervals();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    std::vector<std::vector<Mat>> psi(n + 1, std::vector<Mat>(n + 1, Mat::Zero(kernel.dim(), kernel.dim())));
    for (int i = 0; i <= n; ++i) {
      for (int k = 0; k < i; ++k) {
        Mat m(kernel.dim(), kernel.dim());
        for (Eigen::Index rr = 0; rr < kernel.dim(); ++rr) {
          for (Eigen::Index cc = 0; cc < kernel.dim(); ++cc) {
            m(rr, cc) = Complex(unif(rng), unif(rng));
          }
        }
        psi[i][k] = m;
      }
    }
    std::vector<std::vector<Mat>> image(n + 1, std::vector<Mat>(n + 1, Mat::Zero(kernel.dim(), kernel.dim())));
    Mat acc(kernel.dim(), kernel.dim());
    for (int i = 0; i <= n; ++i) {
      for (int k = 0; k < i; ++k) {
        acc.setZero();
        for (int l = k; l < i; ++l) {
          acc.noalias() += std::exp(-r * (kernel.node(i) - kernel.node(l))) * kernel.mass(i, l) * psi[l][k];
        }
        image[i][k] = acc;
      }
    }
    const double denom = grid_b_infinity(psi);
    if (denom > 0.0) worst = std::max(worst, grid_b_infinity(image) / denom);
  }
  return worst;
}

GridResolvent build_resolvent(const GridKernel& kernel, const ResolventConfig& cfg,
                              std::uint64_t seed) {
  const int n = kernel.intervals();
  const double a = kernel.lower();
  const double norm = kernel.b_infinity_norm();

  // The undamping factor e^{r (t - a)} must stay representable.
  const double max_exponent = 600.0;
  double r = cfg.r;
  double lambda;
  if (r > 0.0) {
    if (r * (kernel.upper() - a) > max_exponent) {
      throw ConvergenceError("build_resolvent: supplied damping out of range");
    }
    lambda = contraction_ratio(kernel, r, seed);
    if (lambda >= 0.999) {
      throw ConvergenceError("build_resolvent: supplied damping does not contract");
    }
  } else {
    const double eta = kernel.near_diagonal_eta(0.125);
    r = (std::log(std::max(4.0 * norm, 1.0)) + 1.0) / eta;
    int doublings = 0;
    for (;;) {
      if (r * (kernel.upper() - a) > max_exponent || ++doublings > 60) {
        throw ConvergenceError(
            "build_resolvent: no contraction reached; kernel violates the B-infinity "
            "conditions numerically");
      }
      lambda = contraction_ratio(kernel, r, seed);
      if (lambda < 0.5) break;
      r *= 2.0;
    }
  }

  // Damped kernel and integration weights.
  std::vector<std::vector<Mat>> damped(n + 1, std::vector<Mat>(n + 1, Mat::Zero(kernel.dim(), kernel.dim())));
  std::vector<std::vector<Mat>> weight(n + 1, std::vector<Mat>(n + 1, Mat::Zero(kernel.dim(), kernel.dim())));
  for (int i = 0; i <= n; ++i) {
    const double damp = std::exp(-r * (kernel.node(i) - a));
    for (int k = 0; k <= n; ++k) damped[i][k] = damp * kernel.value(i, k);
    for (int l = 0; l < i; ++l) {
      weight[i][l] = std::exp(-r * (kernel.node(i) - kernel.node(l))) * kernel.mass(i, l);
    }
  }

  std::vector<std::vector<Mat>> cur(n + 1, std::vector<Mat>(n + 1, Mat::Zero(kernel.dim(), kernel.dim())));
  std::vector<std::vector<Mat>> next = cur;
  int iterations = 0;
  Mat acc(kernel.dim(), kernel.dim());
  for (;;) {
    for (int i = 0; i <= n; ++i) {
      for (int k = 0; k <= n; ++k) {
        if (k >= i) {
          next[i][k].setZero();
          continue;
        }
        acc = -damped[i][k];
        for (int l = k; l < i; ++l) acc.noalias() += weight[i][l] * cur[l][k];
        next[i][k] = acc;
      }
    }
    ++iterations;
    double dist = 0.0;
    for (int i = 0; i <= n; ++i) {
      double w = operator_norm(next[i][0] - cur[i][0]);
      for (int k = 0; k < n; ++k) {
        w += operator_norm((next[i][k + 1] - cur[i][k + 1]) - (next[i][k] - cur[i][k]));
      }
      dist = std::max(dist, w);
    }
    std::swap(cur, next);
    if (dist <= cfg.tol * (1.0 - lambda)) break;
    if (iterations >= cfg.max_iter) {
      throw ConvergenceError("build_resolvent: Picard iteration exceeded max_iter");
    }
  }

  GridResolvent rho;
  rho.a_ = a;
  rho.b_ = kernel.upper();
  rho.n_ = n;
  rho.values_.assign(n + 1, std::vector<Mat>(n + 1, Mat::Zero(kernel.dim(), kernel.dim())));
  for (int i = 0; i <= n; ++i) {
    const double undamp = std::exp(r * (kernel.node(i) - a));
    for (int k = 0; k <= n; ++k) rho.values_[i][k] = undamp * cur[i][k];
  }
  rho.stats_.r = r;
  rho.stats_.iterations = iterations;
  rho.stats_.lambda = lambda;
  rho.stats_.residual_estimate = resolvent_residual(kernel, rho);
  return rho;
}

std::vector<Vec> solve_volterra(const AtomicKernel& kernel, const AtomicResolvent& rho,
                                const std::function<Vec(double)>& g,
                                std::span<const double> times) {
  (void)kernel;
  std::vector<Vec> out;
  out.reserve(times.size());
  auto g_mat = [&g](double x) { return Mat(g(x)); };
  for (double t : times) {
    const BVFunction sl = rho.slice(t);
    const IntervalSpec J = IntervalSpec::half_open(rho.lower(), t);
    const Mat integral = stieltjes_integrate(sl, g_mat, J, ProductOrder::MeasureFirst);
    out.push_back(Vec(g(t) - as_vector(integral)));
  }
  return out;
}

std::vector<Vec> solve_volterra(const AtomicKernel& kernel, const AtomicResolvent& rho,
                                const BVFunction& g, std::span<const double> times) {
  if (g.side() != SideConvention::RightContinuous) {
    throw std::invalid_argument("solve_volterra: forcing must be right-continuous");
  }
  return solve_volterra(kernel, rho, [&g](double x) { return as_vector(g.value(x)); }, times);
}

std::vector<Vec> solve_volterra(const GridKernel& kernel, const GridResolvent& rho,
                                const BVFunction& g) {
  if (g.side() != SideConvention::RightContinuous) {
    throw std::invalid_argument("solve_volterra: forcing must be right-continuous");
  }
  g.require_covers(IntervalSpec::closed(kernel.lower(), kernel.upper()));
  const int n = kernel.intervals();
  std::vector<Vec> g_nodes;
  g_nodes.reserve(n + 1);
  for (int k = 0; k <= n; ++k) g_nodes.push_back(as_vector(g.value(kernel.node(k))));
  std::vector<Vec> out;
  out.reserve(n + 1);
  for (int i = 0; i <= n; ++i) {
    Vec y = g_nodes[i];
    for (int l = 0; l < i; ++l) {
      y -= (rho.value(i, l + 1) - rho.value(i, l)) * g_nodes[l];
    }
    out.push_back(std::move(y));
  }
  return out;
}

double resolvent_residual(const AtomicKernel& kernel, const AtomicResolvent& rho,
                          std::span<const std::pair<double, double>> samples) {
  const DelaySystem& sys = kernel.system();
  double worst = 0.0;
  for (const auto& [t, beta] : samples) {
    Mat res = rho.value(t, beta) + kernel.value(t, beta);
    for (std::size_t j = 0; j < sys.num_delays(); ++j) {
      const double mid = t - sys.delay(j);
      if (mid >= beta) res -= sys.coefficient_at(j, t) * rho.value(mid, beta);
    }
    worst = std::max(worst, operator_norm(res));
  }
  return worst;
}

double resolvent_residual(const GridKernel& kernel, const GridResolvent& rho) {
  const int n = kernel.intervals();
  double worst = 0.0;
  Mat res(kernel.dim(), kernel.dim());
  for (int i = 0; i <= n; ++i) {
    for (int k = 0; k <= n; ++k) {
      res = rho.value(i, k) + kernel.value(i, k);
      for (int l = k; l < i; ++l) res.noalias() -= kernel.mass(i, l) * rho.value(l, k);
      worst = std::max(worst, operator_norm(res));
    }
  }
  return worst;
}

BInfinityReport validate_b_infinity(const AtomicKernel& kernel, int n_samples) {
  BInfinityReport report;
  report.norm = kernel.b_infinity_norm(n_samples);
  const double a = kernel.lower();
  const double b = kernel.upper();
  const double tau1 = kernel.system().min_delay();
  for (int i = 0; i <= n_samples; ++i) {
    const double t = a + (b - a) * static_cast<double>(i) / n_samples;
    for (int k = 0; k <= n_samples; ++k) {
      const double tau = a + (b - a) * static_cast<double>(k) / n_samples;
      const double v = operator_norm(kernel.value(t, tau));
      report.sup_value = std::max(report.sup_value, v);
      if (tau >= t && v > 0.0) report.kernel_type_ok = false;
    }
    const double lo = std::max(a, t - 0.99 * tau1);
    if (t > lo) {
      const BVFunction sl = kernel.slice(t);
      report.near_diagonal_variation = std::max(
          report.near_diagonal_variation, total_variation(sl, IntervalSpec::half_open(lo, t)));
    }
  }
  return report;
}

}  // namespace dlat
