#include "igv/quadrature.hpp"

#include "igv/error.hpp"

namespace igv {

Vector trapezoid_mean(const Matrix& samples) {
  const Eigen::Index n = samples.rows();
  if (n < 2) fail(ErrorKind::InvalidInput, "epoch needs at least two grid points");
  Vector sum = 0.5 * (samples.row(0) + samples.row(n - 1)).transpose();
  for (Eigen::Index k = 1; k + 1 < n; ++k) sum += samples.row(k).transpose();
  return sum / static_cast<double>(n - 1);
}

Matrix state_trace(const Matrix& samples, std::size_t k0, std::size_t k1) {
  if (k1 <= k0 || k1 >= static_cast<std::size_t>(samples.rows())) {
    fail(ErrorKind::InvalidInput, "epoch indices out of range");
  }
  return samples.middleRows(static_cast<Eigen::Index>(k0),
                            static_cast<Eigen::Index>(k1 - k0 + 1));
}

Matrix held_trace(const Matrix& samples, std::size_t k0, std::size_t k1) {
  if (k1 <= k0 || k1 > static_cast<std::size_t>(samples.rows())) {
    fail(ErrorKind::InvalidInput, "epoch indices out of range");
  }
  const auto len = static_cast<Eigen::Index>(k1 - k0);
  Matrix trace(len + 1, samples.cols());
  trace.topRows(len) = samples.middleRows(static_cast<Eigen::Index>(k0), len);
  trace.row(len) = samples.row(static_cast<Eigen::Index>(k1 - 1));
  return trace;
}

}  // namespace igv
