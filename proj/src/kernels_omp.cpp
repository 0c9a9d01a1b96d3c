#include <cmath>

#include <Eigen/LU>

#include "klspec/errors.hpp"
#include "klspec/kernels.hpp"

namespace klspec::kernels {

namespace {

Eigen::Index block_count(Eigen::Index n) { return (n + kBlockSize - 1) / kBlockSize; }

// Fixed-shape reduction: each block is summed in index order, then the
// partials are summed in block order.
template <typename Term>
double blocked_sum(Eigen::Index count, Term term) {
  const Eigen::Index blocks = block_count(count);
  std::vector<double> partial(static_cast<size_t>(blocks), 0.0);
#pragma omp parallel for schedule(static)
  for (Eigen::Index blk = 0; blk < blocks; ++blk) {
    const Eigen::Index end = std::min(count, (blk + 1) * kBlockSize);
    double s = 0.0;
    for (Eigen::Index k = blk * kBlockSize; k < end; ++k) s += term(k);
    partial[static_cast<size_t>(blk)] = s;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace

CMatrix evaluate_responses(const CMatrix& a, const CVector& b, std::span<const double> thetas) {
  const Eigen::Index n = a.rows();
  const auto count = static_cast<Eigen::Index>(thetas.size());
  CMatrix g(n, count);
#pragma omp parallel for schedule(static)
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
#pragma omp parallel for schedule(static)
  for (Eigen::Index k = 0; k < g.cols(); ++k) {
    q[static_cast<size_t>(k)] = g.col(k).dot(l * g.col(k)).real();
  }
  return q;
}

CMatrix weighted_outer_mean(const CMatrix& g, std::span<const double> w) {
  if (static_cast<Eigen::Index>(w.size()) != g.cols()) {
    throw Error(ErrorKind::LengthMismatch, "weight count does not match grid size");
  }
  const Eigen::Index n = g.rows();
  const Eigen::Index count = g.cols();
  const Eigen::Index blocks = block_count(count);
  std::vector<CMatrix> partial(static_cast<size_t>(blocks));
#pragma omp parallel for schedule(static)
  for (Eigen::Index blk = 0; blk < blocks; ++blk) {
    CMatrix acc = CMatrix::Zero(n, n);
    const Eigen::Index end = std::min(count, (blk + 1) * kBlockSize);
    for (Eigen::Index k = blk * kBlockSize; k < end; ++k) {
      acc.noalias() += w[static_cast<size_t>(k)] * g.col(k) * g.col(k).adjoint();
    }
    partial[static_cast<size_t>(blk)] = std::move(acc);
  }
  CMatrix total = CMatrix::Zero(n, n);
  for (const CMatrix& p : partial) total += p;
  return total / static_cast<double>(count);
}

double mean(std::span<const double> v) {
  const auto count = static_cast<Eigen::Index>(v.size());
  return blocked_sum(count, [&](Eigen::Index k) { return v[static_cast<size_t>(k)]; }) /
         static_cast<double>(count);
}

double weighted_log_mean(std::span<const double> w, std::span<const double> q) {
  if (w.size() != q.size()) {
    throw Error(ErrorKind::LengthMismatch, "weight count does not match sample count");
  }
  const auto count = static_cast<Eigen::Index>(q.size());
  return blocked_sum(count,
                     [&](Eigen::Index k) {
                       const auto i = static_cast<size_t>(k);
                       return w[i] * std::log(q[i]);
                     }) /
         static_cast<double>(count);
}

}  // namespace klspec::kernels
