#include "delaylattice/common.hpp"

#include <stdexcept>

namespace dlat {

double operator_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
  if (m.cols() == 1) return m.col(0).norm();
  if (m.rows() == 1) return m.row(0).norm();
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

Vec as_vector(const Mat& m) {
  if (m.cols() != 1) throw std::invalid_argument("as_vector: expected a single-column matrix");
  return m.col(0);
}

}  // namespace dlat
