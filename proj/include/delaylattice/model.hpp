// Time-varying coefficient signals, difference-delay systems and initial data.
#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "delaylattice/common.hpp"

namespace dlat {

inline double value_norm(const Mat& m) { return operator_norm(m); }
inline double value_norm(const Vec& v) { return v.norm(); }

/// One term of a trigonometric polynomial: cos(w t) C + sin(w t) S.
template <class Value>
struct TrigTerm {
  double frequency = 0.0;  // angular frequency w
  Value cos_coef;
  Value sin_coef;
};

/// A continuous time-varying value. Three representations are supported:
/// a constant, a trigonometric polynomial (entire domain), and a piecewise
/// linear interpolant (bounded domain, evaluation outside is an error).
template <class Value>
class Signal {
 public:
  enum class Kind { Constant, TrigPolynomial, PiecewiseLinear };

  static Signal constant(Value value) {
    Signal s;
    s.kind_ = Kind::Constant;
    s.constant_ = std::move(value);
    return s;
  }

  static Signal trig_polynomial(std::vector<TrigTerm<Value>> terms, double period) {
    if (terms.empty()) throw std::invalid_argument("trig_polynomial: no terms");
    if (!(period > 0.0)) throw std::invalid_argument("trig_polynomial: period must be positive");
    for (const auto& term : terms) {
      if (term.cos_coef.rows() != terms.front().cos_coef.rows() ||
          term.cos_coef.cols() != terms.front().cos_coef.cols() ||
          term.sin_coef.rows() != term.cos_coef.rows() ||
          term.sin_coef.cols() != term.cos_coef.cols()) {
        throw std::invalid_argument("trig_polynomial: inconsistent coefficient shapes");
      }
    }
    Signal s;
    s.kind_ = Kind::TrigPolynomial;
    s.terms_ = std::move(terms);
    s.period_ = period;
    return s;
  }

  static Signal piecewise_linear(std::vector<double> times, std::vector<Value> values) {
    if (times.size() < 2) throw std::invalid_argument("piecewise_linear: need at least two samples");
    if (times.size() != values.size()) {
      throw std::invalid_argument("piecewise_linear: times/values size mismatch");
    }
    for (std::size_t i = 1; i < times.size(); ++i) {
      if (!(times[i] > times[i - 1])) {
        throw std::invalid_argument("piecewise_linear: sample times must be strictly increasing");
      }
      if (values[i].rows() != values[0].rows() || values[i].cols() != values[0].cols()) {
        throw std::invalid_argument("piecewise_linear: inconsistent value shapes");
      }
    }
    Signal s;
    s.kind_ = Kind::PiecewiseLinear;
    s.times_ = std::move(times);
    s.values_ = std::move(values);
    return s;
  }

  Kind kind() const { return kind_; }

  Eigen::Index rows() const { return sample().rows(); }
  Eigen::Index cols() const { return sample().cols(); }

  bool domain_bounded() const { return kind_ == Kind::PiecewiseLinear; }
  double domain_lo() const {
    return domain_bounded() ? times_.front() : -std::numeric_limits<double>::infinity();
  }
  double domain_hi() const {
    return domain_bounded() ? times_.back() : std::numeric_limits<double>::infinity();
  }

  /// Sample times of the piecewise linear representation (empty otherwise).
  const std::vector<double>& knots() const { return times_; }

  Value operator()(double t) const {
    switch (kind_) {
      case Kind::Constant:
        return constant_;
      case Kind::TrigPolynomial: {
        Value acc = Value::Zero(terms_[0].cos_coef.rows(), terms_[0].cos_coef.cols());
        for (const auto& term : terms_) {
          acc += std::cos(term.frequency * t) * term.cos_coef +
                 std::sin(term.frequency * t) * term.sin_coef;
        }
        return acc;
      }
      case Kind::PiecewiseLinear:
      default: {
        const double span = times_.back() - times_.front();
        const double slack = 1e-9 * std::max(1.0, span);
        if (t < times_.front() - slack || t > times_.back() + slack) {
          throw std::domain_error("Signal: evaluation outside piecewise-linear sample range");
        }
        const double x = std::min(std::max(t, times_.front()), times_.back());
        auto it = std::upper_bound(times_.begin(), times_.end(), x);
        std::size_t hi = std::min<std::size_t>(times_.size() - 1,
                                               static_cast<std::size_t>(it - times_.begin()));
        if (hi == 0) hi = 1;
        const std::size_t lo = hi - 1;
        const double w = (x - times_[lo]) / (times_[hi] - times_[lo]);
        return (1.0 - w) * values_[lo] + w * values_[hi];
      }
    }
  }

  /// Total variation over [a, b] in the norm of Value. Exact for Constant and
  /// PiecewiseLinear; for trigonometric polynomials a dense polygonal sum,
  /// accurate to roughly 1e-8 on moderate intervals.
  double variation(double a, double b) const {
    if (!(b >= a)) throw std::invalid_argument("variation: interval bounds out of order");
    switch (kind_) {
      case Kind::Constant:
        return 0.0;
      case Kind::PiecewiseLinear: {
        const double span = times_.back() - times_.front();
        const double slack = 1e-9 * std::max(1.0, span);
        if (a < times_.front() - slack || b > times_.back() + slack) {
          throw std::domain_error("Signal: variation interval outside sample range");
        }
        double acc = 0.0;
        double prev_t = a;
        Value prev_v = (*this)(a);
        for (std::size_t i = 0; i < times_.size(); ++i) {
          if (times_[i] <= a || times_[i] >= b) continue;
          acc += value_norm(Value((*this)(times_[i]) - prev_v));
          prev_t = times_[i];
          prev_v = (*this)(times_[i]);
        }
        (void)prev_t;
        acc += value_norm(Value((*this)(b)-prev_v));
        return acc;
      }
      case Kind::TrigPolynomial:
      default: {
        if (b == a) return 0.0;
        double second_deriv_bound = 0.0;
        for (const auto& term : terms_) {
          second_deriv_bound += term.frequency * term.frequency *
                                (value_norm(term.cos_coef) + value_norm(term.sin_coef));
        }
        // Polygonal chord sum; n chosen so the chord error ~ (b-a) h^2 M2 / 8
        // stays below 1e-8.
        double n_target = std::sqrt((b - a) * (b - a) * (b - a) * second_deriv_bound / 8e-8);
        const int n = static_cast<int>(std::min(2.0e6, std::max(1024.0, std::ceil(n_target))));
        double acc = 0.0;
        Value prev = (*this)(a);
        for (int i = 1; i <= n; ++i) {
          const double t = a + (b - a) * static_cast<double>(i) / n;
          Value cur = (*this)(t);
          acc += value_norm(Value(cur - prev));
          prev = std::move(cur);
        }
        return acc;
      }
    }
  }

 private:
  Signal() = default;
  const Value& sample() const {
    switch (kind_) {
      case Kind::Constant:
        return constant_;
      case Kind::TrigPolynomial:
        return terms_[0].cos_coef;
      case Kind::PiecewiseLinear:
      default:
        return values_[0];
    }
  }

  Kind kind_ = Kind::Constant;
  Value constant_;
  std::vector<TrigTerm<Value>> terms_;
  double period_ = 0.0;
  std::vector<double> times_;
  std::vector<Value> values_;
};

using MatrixSignal = Signal<Mat>;
using VectorSignal = Signal<Vec>;

/// y(t) = sum_j D_j(t) y(t - tau_j) with strictly increasing positive delays
/// and square matrix coefficient signals of a common dimension.
class DelaySystem {
 public:
  DelaySystem(Eigen::Index dim, std::vector<double> delays, std::vector<MatrixSignal> coefficients);

  Eigen::Index dim() const { return dim_; }
  std::size_t num_delays() const { return delays_.size(); }
  const std::vector<double>& delays() const { return delays_; }
  double delay(std::size_t j) const { return delays_.at(j); }
  double max_delay() const { return delays_.back(); }
  double min_delay() const { return delays_.front(); }
  const MatrixSignal& coefficient(std::size_t j) const { return coefficients_.at(j); }
  Mat coefficient_at(std::size_t j, double t) const { return coefficients_.at(j)(t); }

 private:
  Eigen::Index dim_;
  std::vector<double> delays_;
  std::vector<MatrixSignal> coefficients_;
};

/// A system together with an initial time s and initial data phi on
/// [-tau_N, 0] (values in C^d).
class InitialProblem {
 public:
  InitialProblem(DelaySystem system, double start, VectorSignal phi);

  const DelaySystem& system() const { return system_; }
  double start() const { return start_; }
  const VectorSignal& phi() const { return phi_; }
  Vec phi_at(double theta) const { return phi_(theta); }

 private:
  DelaySystem system_;
  double start_;
  VectorSignal phi_;
};

struct CompatibilityReport {
  bool compatible = false;
  double residual = 0.0;
};

/// Membership test for the set of initial data admitting a continuous
/// solution: phi(0) = sum_j D_j(s) phi(-tau_j), up to `tol` in Euclidean norm.
/// The residual norm is always reported.
CompatibilityReport check_compatibility(const InitialProblem& p, double tol = 1e-9);

}  // namespace dlat
