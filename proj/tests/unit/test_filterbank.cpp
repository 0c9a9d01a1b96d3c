#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "expect_error.hpp"
#include "instances.hpp"
#include "klspec/filterbank.hpp"
#include "oracle.hpp"

using namespace klspec;
using testing_support::diag_matrix;
using testing_support::ones;
using testing_support::Rng;

namespace {

constexpr double kPi = std::numbers::pi;

CMatrix scalar(Complex v) {
  CMatrix m(1, 1);
  m(0, 0) = v;
  return m;
}

std::vector<HermitianMatrix> outer_samples(const GridResponse& r) {
  std::vector<HermitianMatrix> out;
  for (Eigen::Index k = 0; k < r.size(); ++k) {
    out.push_back(HermitianMatrix::hermitize(r.samples().col(k) * r.samples().col(k).adjoint()));
  }
  return out;
}

// Schur-stable complex A with spectral radius at most rho.
CMatrix random_stable(Eigen::Index n, double rho, Rng& rng) {
  CMatrix m(n, n);
  for (Eigen::Index j = 0; j < n; ++j) m.col(j) = testing_support::random_vector(n, rng);
  const double r = Eigen::ComplexEigenSolver<CMatrix>(m).eigenvalues().cwiseAbs().maxCoeff();
  return m * (rho / r);
}

oracle::Mat to_oracle(const CMatrix& m) {
  oracle::Mat r(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      r(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = {m(i, j).real(), m(i, j).imag()};
  return r;
}

}  // namespace

TEST(ValidateFilterbank, Examples) {
  const FilterBank f1 = validate_filterbank(scalar(0.5), ones(1));
  EXPECT_EQ(f1.dim(), 1);
  EXPECT_DOUBLE_EQ(f1.spectral_radius(), 0.5);
  EXPECT_EQ(validate_filterbank(diag_matrix({0.5, -0.5}), ones(2)).dim(), 2);
  expect_error(ErrorKind::NotReachable, [] { validate_filterbank(diag_matrix({0.5, 0.5}), ones(2)); });
}

TEST(ValidateFilterbank, Rejections) {
  expect_error(ErrorKind::NotSchurStable, [] { validate_filterbank(scalar(1.0), ones(1)); });
  expect_error(ErrorKind::NotSchurStable, [] { validate_filterbank(scalar(Complex(0, 1.0 - 1e-10)), ones(1)); });
  expect_error(ErrorKind::DimensionMismatch, [] { validate_filterbank(diag_matrix({0.1, 0.2}), ones(3)); });
  CVector b(2);
  b << 1.0, 0.0;
  expect_error(ErrorKind::NotReachable, [&] { validate_filterbank(diag_matrix({0.1, 0.2}), b); });
}

TEST(EvalG, Examples) {
  const FilterBank zero = validate_filterbank(scalar(0.0), ones(1));
  for (double t : {-3.0, -0.4, 0.0, 1.2, 2.9}) {
    EXPECT_LE(std::abs(eval_G(zero, t)(0) - std::polar(1.0, -t)), 1e-15);
  }
  const FilterBank half = validate_filterbank(scalar(0.5), ones(1));
  EXPECT_NEAR(std::abs(eval_G(half, 0.0)(0) - 2.0), 0.0, 1e-15);

  const FilterBank pair = validate_filterbank(diag_matrix({0.5, -0.5}), ones(2));
  const CVector g = eval_G(pair, kPi / 2);
  const Complex z = std::polar(1.0, kPi / 2);
  EXPECT_LE(std::abs(g(0) - 1.0 / (z - 0.5)), 1e-15);
  EXPECT_LE(std::abs(g(1) - 1.0 / (z + 0.5)), 1e-15);
}

TEST(EvalG, ResidualIsSmall) {
  Rng rng(2);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::Index n = 1 + rep % 4;
    const FilterBank fb = validate_filterbank(random_stable(n, 0.9, rng), testing_support::random_vector(n, rng));
    const double t = std::uniform_real_distribution<double>(-kPi, kPi)(rng);
    const CVector g = eval_G(fb, t);
    CMatrix m = -fb.a();
    m.diagonal().array() += std::polar(1.0, t);
    EXPECT_LE((m * g - fb.b()).norm(), 1e-12 * fb.b().norm());
  }
}

TEST(CircleGrid, ValidatesSize) {
  for (Eigen::Index bad : {0, 32, 63, 100, 1000}) {
    expect_error(ErrorKind::InvalidGrid, [&] { CircleGrid g(bad); });
  }
  EXPECT_EQ(CircleGrid().size(), 2048);
}

TEST(CircleGrid, NodesAndWeights) {
  const CircleGrid g(64);
  EXPECT_DOUBLE_EQ(g.node(0), -kPi);
  double wsum = 0.0;
  for (Eigen::Index k = 0; k < g.size(); ++k) wsum += g.weight();
  EXPECT_DOUBLE_EQ(wsum, 1.0);
  for (Eigen::Index k = 1; k < g.size(); ++k) {
    EXPECT_GT(g.node(k), g.node(k - 1));
    EXPECT_NEAR(g.node(k) - g.node(k - 1), 2 * kPi / 64, 1e-15);
  }
  EXPECT_EQ(g.nearest_node(-kPi), 0);
  EXPECT_EQ(g.nearest_node(kPi - 1e-3), 0);  // wraps
  EXPECT_EQ(g.nearest_node(g.node(17) + 0.4 * g.spacing()), 17);
  EXPECT_EQ(g.refined().size(), 128);
  EXPECT_DOUBLE_EQ(g.refined().node(34), g.node(17));
}

TEST(IntegrateScalar, Examples) {
  const CircleGrid g(2048);
  EXPECT_DOUBLE_EQ(integrate_scalar(g, std::vector<double>(2048, 1.0)), 1.0);
  std::vector<double> c(2048), p(2048);
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    c[static_cast<size_t>(k)] = std::cos(g.node(k));
    p[static_cast<size_t>(k)] = 1.0 / std::norm(std::polar(1.0, g.node(k)) - 0.5);
  }
  EXPECT_NEAR(integrate_scalar(g, c), 0.0, 1e-15);
  EXPECT_NEAR(integrate_scalar(g, p), 4.0 / 3.0, 1e-10);
  expect_error(ErrorKind::LengthMismatch, [&] { integrate_scalar(g, std::vector<double>(10, 1.0)); });
}

TEST(IntegrateMatrix, Examples) {
  const CircleGrid g(2048);
  const std::vector<HermitianMatrix> id(2048, HermitianMatrix::identity(2));
  EXPECT_LE((integrate_matrix(g, id) - HermitianMatrix::identity(2)).frobenius_norm(), 1e-14);

  const GridResponse r1(validate_filterbank(scalar(0.5), ones(1)), g);
  EXPECT_NEAR(integrate_matrix(g, outer_samples(r1))(0, 0).real(), 4.0 / 3.0, 1e-12);

  const GridResponse r2(validate_filterbank(diag_matrix({0.5, -0.5}), ones(2)), g);
  CMatrix expected(2, 2);
  expected << 4.0 / 3.0, 0.8, 0.8, 4.0 / 3.0;
  EXPECT_LE((integrate_matrix(g, outer_samples(r2)).matrix() - expected).norm(), 1e-12);

  expect_error(ErrorKind::LengthMismatch, [&] { integrate_matrix(g, std::vector<HermitianMatrix>(5, HermitianMatrix::identity(2))); });
  std::vector<HermitianMatrix> mixed(2048, HermitianMatrix::identity(2));
  mixed[7] = HermitianMatrix::identity(3);
  expect_error(ErrorKind::DimensionMismatch, [&] { integrate_matrix(g, mixed); });
}

TEST(IntegrateMatrix, GramianMatchesLyapunovOracle) {
  Rng rng(8);
  for (int rep = 0; rep < 12; ++rep) {
    const Eigen::Index n = 1 + rep % 4;
    const CMatrix a = random_stable(n, 0.8, rng);
    const CVector b = testing_support::random_vector(n, rng);
    const FilterBank fb = validate_filterbank(a, b);
    oracle::Vec ob;
    for (Eigen::Index i = 0; i < n; ++i) ob.push_back({b(i).real(), b(i).imag()});
    const oracle::Mat p = oracle::lyapunov(to_oracle(a), ob);
    const double pnorm = static_cast<double>(oracle::frobenius(p));
    for (Eigen::Index size : {1024, 2048}) {
      const CircleGrid g(size);
      const HermitianMatrix q = integrate_matrix(g, outer_samples(GridResponse(fb, g)));
      long double err = 0;
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
          err += std::norm(oracle::cplx(q(i, j).real(), q(i, j).imag()) -
                           p(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
      EXPECT_LE(static_cast<double>(std::sqrt(err)), 1e-9 * pnorm) << "n=" << n << " N=" << size;
    }
  }
}

TEST(IntegrateMatrix, GridRefinementConverges) {
  const FilterBank fb = validate_filterbank(diag_matrix({0.6, -0.3, Complex(0.2, 0.5)}), ones(3));
  const CircleGrid g(1024);
  const HermitianMatrix coarse = integrate_matrix(g, outer_samples(GridResponse(fb, g)));
  const HermitianMatrix fine = integrate_matrix(g.refined(), outer_samples(GridResponse(fb, g.refined())));
  EXPECT_LE((coarse - fine).frobenius_norm(), 1e-10);
}

TEST(GridResponse, ConjugateSymmetryForRealData) {
  const CircleGrid g(256);
  const GridResponse r(validate_filterbank(diag_matrix({0.5, -0.5}), ones(2)), g);
  // theta_k and theta_{N-k} are mirror images for k = 1..N-1.
  for (Eigen::Index k = 1; k < g.size(); ++k) {
    EXPECT_LE((r.samples().col(k) - r.samples().col(g.size() - k).conjugate()).norm(), 1e-14);
  }
}

TEST(GridResponse, ReachabilityMeansNoVanishingDirection) {
  Rng rng(9);
  const CircleGrid g(512);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::Index n = 2 + rep % 3;
    const GridResponse r(validate_filterbank(random_stable(n, 0.7, rng), testing_support::random_vector(n, rng)), g);
    const CVector x = testing_support::random_unit_vector(n, rng);
    EXPECT_GT((x.adjoint() * r.samples()).cwiseAbs().maxCoeff(), 0.0);
  }
}
