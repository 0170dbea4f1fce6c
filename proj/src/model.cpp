#include "delaylattice/model.hpp"

namespace dlat {

DelaySystem::DelaySystem(Eigen::Index dim, std::vector<double> delays,
                         std::vector<MatrixSignal> coefficients)
    : dim_(dim), delays_(std::move(delays)), coefficients_(std::move(coefficients)) {
  if (dim_ <= 0) throw std::invalid_argument("DelaySystem: dimension must be positive");
  if (delays_.empty()) throw std::invalid_argument("DelaySystem: at least one delay required");
  if (delays_.size() != coefficients_.size()) {
    throw std::invalid_argument("DelaySystem: one coefficient signal per delay required");
  }
  for (std::size_t j = 0; j < delays_.size(); ++j) {
    if (!(delays_[j] > 0.0)) throw std::invalid_argument("DelaySystem: delays must be positive");
    if (j > 0 && !(delays_[j] > delays_[j - 1])) {
      throw std::invalid_argument("DelaySystem: delays must be strictly increasing");
    }
    if (coefficients_[j].rows() != dim_ || coefficients_[j].cols() != dim_) {
      throw std::invalid_argument("DelaySystem: coefficient signals must be dim x dim");
    }
  }
}

InitialProblem::InitialProblem(DelaySystem system, double start, VectorSignal phi)
    : system_(std::move(system)), start_(start), phi_(std::move(phi)) {
  if (phi_.rows() != system_.dim()) {
    throw std::invalid_argument("InitialProblem: phi dimension mismatch");
  }
  if (phi_.domain_bounded()) {
    const double tau_n = system_.max_delay();
    const double slack = 1e-9 * std::max(1.0, tau_n);
    if (phi_.domain_lo() > -tau_n + slack || phi_.domain_hi() < -slack ||
        phi_.domain_lo() < -tau_n - slack || phi_.domain_hi() > slack) {
      throw std::invalid_argument("InitialProblem: phi domain must be exactly [-tau_N, 0]");
    }
  }
}

CompatibilityReport check_compatibility(const InitialProblem& p, double tol) {
  if (tol < 0.0) throw std::invalid_argument("check_compatibility: negative tolerance");
  const DelaySystem& sys = p.system();
  Vec expected = Vec::Zero(sys.dim());
  for (std::size_t j = 0; j < sys.num_delays(); ++j) {
    expected += sys.coefficient_at(j, p.start()) * p.phi_at(-sys.delay(j));
  }
  const double residual = (p.phi_at(0.0) - expected).norm();
  return CompatibilityReport{residual <= tol, residual};
}

}  // namespace dlat
