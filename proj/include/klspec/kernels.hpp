#pragma once

// Quadrature kernels over the unit-circle grid. The default namespace holds
// the OpenMP versions used by the library; `serial` holds the plain
// index-order loops kept as the reference for tests and benchmarks.
//
// Reductions in the OpenMP versions sum fixed blocks of kBlockSize nodes in
// index order and then add the block partials in block order, so results
// are bit-identical for any thread count.

#include <span>
#include <vector>

#include "klspec/hermitian.hpp"

namespace klspec::kernels {

inline constexpr Eigen::Index kBlockSize = 256;

/// Column k of the result is (e^{j thetas[k]} I - A)^{-1} B.
CMatrix evaluate_responses(const CMatrix& a, const CVector& b, std::span<const double> thetas);

/// q[k] = Re(G_k* L G_k) for each column G_k of g.
std::vector<double> quadratic_forms(const CMatrix& g, const CMatrix& l);

/// (1/N) sum_k w[k] G_k G_k*.
CMatrix weighted_outer_mean(const CMatrix& g, std::span<const double> w);

/// (1/N) sum_k v[k].
double mean(std::span<const double> v);

/// (1/N) sum_k w[k] log q[k]. Caller guarantees q > 0.
double weighted_log_mean(std::span<const double> w, std::span<const double> q);

namespace serial {

CMatrix evaluate_responses(const CMatrix& a, const CVector& b, std::span<const double> thetas);
std::vector<double> quadratic_forms(const CMatrix& g, const CMatrix& l);
CMatrix weighted_outer_mean(const CMatrix& g, std::span<const double> w);
double mean(std::span<const double> v);
double weighted_log_mean(std::span<const double> w, std::span<const double> q);

}  // namespace serial

}  // namespace klspec::kernels
