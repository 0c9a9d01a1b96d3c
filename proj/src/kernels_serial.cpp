#include <cmath>

#include <Eigen/LU>

#include "klspec/errors.hpp"
#include "klspec/kernels.hpp"

namespace klspec::kernels::serial {

CMatrix evaluate_responses(const CMatrix& a, const CVector& b, std::span<const double> thetas) {
  const Eigen::Index n = a.rows();
  const auto count = static_cast<Eigen::Index>(thetas.size());
  CMatrix g(n, count);
  for (Eigen::Index k = 0; k < count; ++k) {
    const Complex z = std::polar(1.0, thetas[static_cast<size_t>(k)]);
    CMatrix m = -a;
    m.diagonal().array() += z;
    g.col(k) = m.partialPivLu().solve(b);
  }
  return g;
}

std::vector<double> quadratic_forms(const CMatrix& g, const CMatrix& l) {
  std::vector<double> q(static_cast<size_t>(g.cols()));
  for (Eigen::Index k = 0; k < g.cols(); ++k) {
    q[static_cast<size_t>(k)] = g.col(k).dot(l * g.col(k)).real();
  }
  return q;
}

CMatrix weighted_outer_mean(const CMatrix& g, std::span<const double> w) {
  if (static_cast<Eigen::Index>(w.size()) != g.cols()) {
    throw Error(ErrorKind::LengthMismatch, "weight count does not match grid size");
  }
  CMatrix acc = CMatrix::Zero(g.rows(), g.rows());
  for (Eigen::Index k = 0; k < g.cols(); ++k) {
    acc.noalias() += w[static_cast<size_t>(k)] * g.col(k) * g.col(k).adjoint();
  }
  return acc / static_cast<double>(g.cols());
}

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double weighted_log_mean(std::span<const double> w, std::span<const double> q) {
  if (w.size() != q.size()) {
    throw Error(ErrorKind::LengthMismatch, "weight count does not match sample count");
  }
  double s = 0.0;
  for (size_t k = 0; k < q.size(); ++k) s += w[k] * std::log(q[k]);
  return s / static_cast<double>(q.size());
}

}  // namespace klspec::kernels::serial
