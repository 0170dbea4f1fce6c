// Shared scalar/matrix aliases and small numeric helpers.
#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace dlat {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

/// Spectral norm (largest singular value). A d-by-1 matrix reduces to the
/// Euclidean norm of its column, a 1-by-1 matrix to the modulus.
double operator_norm(const Mat& m);

/// Interprets a single-column matrix as a vector; throws otherwise.
Vec as_vector(const Mat& m);

/// Hash for integer multi-indices used as memo keys.
struct IndexTupleHash {
  std::size_t operator()(const std::vector<int>& v) const noexcept {
    std::size_t h = 0x9e3779b97f4a7c15ull;
    for (int x : v) {
      h ^= static_cast<std::size_t>(x) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }
};

}  // namespace dlat
