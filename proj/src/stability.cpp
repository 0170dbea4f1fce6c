#include "delaylattice/stability.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "delaylattice/fundamental.hpp"

namespace dlat {

std::string to_string(DecayVerdict v) {
  switch (v) {
    case DecayVerdict::DecayCertifiedEmpirical:
      return "decay certified (empirical)";
    case DecayVerdict::NoDecayDetected:
      return "no exponential decay detected (empirical)";
    case DecayVerdict::FiniteTimeExtinction:
    default:
      return "identically zero => finite-time extinction";
  }
}

std::vector<VariationSample> variation_profile(const DelaySystem& sys, double s, double t_max,
                                               int n_points) {
  const double tau_n = sys.max_delay();
  if (!(t_max > s + tau_n)) {
    throw std::invalid_argument("variation_profile: t_max must exceed s + tau_N");
  }
  if (n_points < 1) throw std::invalid_argument("variation_profile: need at least one point");

  // Horizon padded by one minimal delay so every target has a right gap edge.
  Lattice lat = enumerate_lattice(sys.delays(), (t_max - s) + 2.0 * sys.min_delay());

  std::vector<double> offsets;
  for (int i = 0; i < n_points; ++i) {
    const double u = tau_n + (t_max - s - tau_n) * (n_points == 1 ? 0.5 : static_cast<double>(i) / (n_points - 1));
    const std::ptrdiff_t idx = lat.index_at_or_below(u);
    if (idx < 0 || idx + 1 >= static_cast<std::ptrdiff_t>(lat.size())) continue;
    offsets.push_back(0.5 * (lat.point(idx).value + lat.point(idx + 1).value));
  }
  std::sort(offsets.begin(), offsets.end());
  offsets.erase(std::unique(offsets.begin(), offsets.end()), offsets.end());

  std::vector<VariationSample> samples;
  samples.reserve(offsets.size());
  for (double u : offsets) {
    samples.push_back(VariationSample{u, slice_total_variation(sys, s + u, s, &lat)});
  }
  return samples;
}

namespace {

// Least squares of log V against u over the given samples; returns (c, alpha, rms).
struct LogFit {
  double c = 0.0;
  double alpha = 0.0;
  double rms = 0.0;
};

LogFit log_linear_fit(std::span<const VariationSample> pts) {
  double su = 0.0, sv = 0.0, suu = 0.0, suv = 0.0;
  const double n = static_cast<double>(pts.size());
  for (const auto& p : pts) {
    const double v = std::log(p.variation);
    su += p.t_minus_s;
    sv += v;
    suu += p.t_minus_s * p.t_minus_s;
    suv += p.t_minus_s * v;
  }
  const double denom = n * suu - su * su;
  const double slope = denom != 0.0 ? (n * suv - su * sv) / denom : 0.0;
  const double intercept = (sv - slope * su) / n;
  double rss = 0.0;
  for (const auto& p : pts) {
    const double e = std::log(p.variation) - (intercept + slope * p.t_minus_s);
    rss += e * e;
  }
  return LogFit{std::exp(intercept), -slope, std::sqrt(rss / n)};
}

}  // namespace

DecayEstimate fit_decay(std::span<const VariationSample> samples) {
  DecayEstimate est;
  est.samples.assign(samples.begin(), samples.end());

  std::vector<VariationSample> positive;
  for (const auto& s : samples) {
    if (s.variation > 0.0) positive.push_back(s);
  }
  if (positive.size() < 3) {
    est.verdict = DecayVerdict::FiniteTimeExtinction;
    return est;
  }

  const LogFit fit = log_linear_fit(positive);
  est.c = fit.c;
  est.alpha = fit.alpha;
  est.fit_residual = fit.rms;
  est.verdict = est.alpha > 0.0 ? DecayVerdict::DecayCertifiedEmpirical
                                : DecayVerdict::NoDecayDetected;

  // Upper envelope: samples not exceeded by any later sample.
  std::vector<VariationSample> envelope;
  double suffix_max = 0.0;
  for (auto it = positive.rbegin(); it != positive.rend(); ++it) {
    if (it->variation >= suffix_max) {
      envelope.push_back(*it);
      suffix_max = it->variation;
    }
  }
  std::reverse(envelope.begin(), envelope.end());
  if (envelope.size() >= 2) {
    const LogFit env = log_linear_fit(envelope);
    est.envelope_c = env.c;
    est.envelope_alpha = env.alpha;
  } else {
    est.envelope_c = est.c;
    est.envelope_alpha = est.alpha;
  }
  return est;
}

}  // namespace dlat
