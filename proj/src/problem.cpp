#include "klspec/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "klspec/errors.hpp"
#include "klspec/kernels.hpp"

namespace klspec {

namespace {

Complex polyval(std::span<const Complex> coeffs, Complex z) {
  Complex acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * z + *it;
  return acc;
}

void require_length(const CircleGrid& grid, size_t length, const char* what) {
  if (static_cast<Eigen::Index>(length) != grid.size()) {
    std::ostringstream os;
    os << what << ": expected " << grid.size() << " samples, got " << length;
    throw Error(ErrorKind::LengthMismatch, os.str());
  }
}

// Rows are grid nodes, columns the real coordinates of hermitian_basis(n):
// entry (k, m) = G_k* E_m G_k.
Eigen::MatrixXd moment_constraint_matrix(const GridResponse& resp) {
  const Eigen::Index n = resp.dim();
  const std::vector<HermitianMatrix> basis = hermitian_basis(n);
  const CMatrix& g = resp.samples();
  Eigen::MatrixXd m(resp.size(), n * n);
  for (size_t c = 0; c < basis.size(); ++c) {
    const std::vector<double> q = kernels::quadratic_forms(g, basis[c].matrix());
    m.col(static_cast<Eigen::Index>(c)) = Eigen::Map<const Eigen::VectorXd>(q.data(), resp.size());
  }
  return m;
}

struct Nullspace {
  Eigen::Index dimension;
  Eigen::MatrixXd vectors;  // n^2 x dimension
};

Nullspace moment_nullspace(const GridResponse& resp) {
  const Eigen::MatrixXd m = moment_constraint_matrix(resp);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cutoff = kNullspaceTolerance * sv(0);
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > cutoff) ++rank;
  const Eigen::Index dim = m.cols() - rank;
  return {dim, svd.matrixV().rightCols(dim)};
}

}  // namespace

std::vector<double> sample_constant_prior(const CircleGrid& grid, double value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw Error(ErrorKind::InvalidPrior, "constant prior must be finite and positive");
  }
  return std::vector<double>(static_cast<size_t>(grid.size()), value);
}

std::vector<double> sample_rational_prior(const CircleGrid& grid, std::span<const Complex> num,
                                          std::span<const Complex> den) {
  if (num.empty() || den.empty()) {
    throw Error(ErrorKind::InvalidPrior, "rational prior needs non-empty num and den");
  }
  const CircleGrid check(8 * grid.size());
  double den_floor = std::numeric_limits<double>::infinity();
  for (double t : check.nodes()) {
    den_floor = std::min(den_floor, std::abs(polyval(den, std::polar(1.0, t))));
  }
  if (!(den_floor > 1e-8)) {
    std::ostringstream os;
    os << "rational prior denominator vanishes on the unit circle (min |den| = " << den_floor
       << ")";
    throw Error(ErrorKind::InvalidPrior, os.str());
  }
  std::vector<double> out(static_cast<size_t>(grid.size()));
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    const Complex z = std::polar(1.0, grid.node(k));
    out[static_cast<size_t>(k)] = std::norm(polyval(num, z)) / std::norm(polyval(den, z));
  }
  return out;
}

PriorSpectrum::PriorSpectrum(const CircleGrid& grid, std::span<const double> raw) : grid_(grid) {
  require_length(grid, raw.size(), "prior");
  for (double v : raw) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorKind::InvalidPrior, "prior samples must be finite and strictly positive");
    }
  }
  scale_ = kernels::mean(raw);
  psi_.resize(raw.size());
  std::transform(raw.begin(), raw.end(), psi_.begin(), [&](double v) { return v / scale_; });
}

RawProblem::RawProblem(FilterBank fb_in, HermitianMatrix sigma_in, CircleGrid grid_in,
                       std::vector<double> psi_in)
    : fb(std::move(fb_in)), sigma(std::move(sigma_in)), grid(std::move(grid_in)), psi_raw(std::move(psi_in)) {
  if (sigma.dim() != fb.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "Sigma dimension does not match the filter bank");
  }
  require_length(grid, psi_raw.size(), "prior");
  const double lowest = min_eigenvalue(sigma);
  if (!(lowest > 1e-10)) {
    std::ostringstream os;
    os << "Sigma must be positive definite, min eigenvalue " << lowest;
    throw Error(ErrorKind::SigmaNotPositiveDefinite, os.str());
  }
}

NormalizedProblem normalize(const RawProblem& raw) {
  PriorSpectrum prior(raw.grid, raw.psi_raw);
  const double c = prior.scale();
  const HermitianMatrix sigma_c = raw.sigma * (1.0 / c);
  HermitianMatrix whitening = inverse_sqrt(sigma_c);
  HermitianMatrix coloring = principal_sqrt(sigma_c);
  const CMatrix a = whitening.matrix() * raw.fb.a() * coloring.matrix();
  const CVector b = whitening.matrix() * raw.fb.b();
  FilterBank fb = validate_filterbank(a, b);
  return NormalizedProblem{raw.fb, std::move(prior), GridResponse(std::move(fb), raw.grid),
                           Provenance{c, std::move(whitening), std::move(coloring)}};
}

NormalizedProblem as_normalized(const FilterBank& fb, const CircleGrid& grid,
                                std::span<const double> psi) {
  PriorSpectrum prior(grid, psi);
  const Eigen::Index n = fb.dim();
  return NormalizedProblem{fb, std::move(prior), GridResponse(fb, grid),
                           Provenance{1.0, HermitianMatrix::identity(n), HermitianMatrix::identity(n)}};
}

std::vector<double> denormalize_phi(const Provenance& prov, std::span<const double> phi) {
  std::vector<double> out(phi.size());
  std::transform(phi.begin(), phi.end(), out.begin(), [&](double v) { return prov.scale * v; });
  return out;
}

HermitianMatrix denormalize_covariance(const Provenance& prov, const HermitianMatrix& x) {
  const CMatrix& s = prov.coloring.matrix();
  return HermitianMatrix::hermitize(prov.scale * (s * x.matrix() * s));
}

FeasibilityReport check_feasibility(const FilterBank& fb, const HermitianMatrix& sigma,
                                    double rel_tol) {
  const Eigen::Index n = fb.dim();
  if (sigma.dim() != n) {
    throw Error(ErrorKind::DimensionMismatch, "Sigma dimension does not match the filter bank");
  }
  const CMatrix& a = fb.a();
  const CVector& b = fb.b();
  const HermitianMatrix target =
      HermitianMatrix::hermitize(sigma.matrix() - a * sigma.matrix() * a.adjoint());

  // H = u_re + j u_im; column t of the design matrix is the image of the t-th
  // real unknown under H -> B H + H* B*.
  Eigen::MatrixXd design(n * n, 2 * n);
  for (Eigen::Index t = 0; t < 2 * n; ++t) {
    Eigen::RowVectorXcd h = Eigen::RowVectorXcd::Zero(n);
    h(t % n) = t < n ? Complex(1.0, 0.0) : Complex(0.0, 1.0);
    const CMatrix img = b * h + h.adjoint() * b.adjoint();
    design.col(t) = real_coordinates(HermitianMatrix::hermitize(img));
  }
  const Eigen::VectorXd u =
      design.completeOrthogonalDecomposition().solve(real_coordinates(target));

  CVector h(n);
  for (Eigen::Index i = 0; i < n; ++i) h(i) = Complex(u(i), u(n + i));
  const Eigen::RowVectorXcd hrow = h.transpose();
  const double residual =
      (target.matrix() - b * hrow - hrow.adjoint() * b.adjoint()).norm();
  const double threshold = rel_tol * std::max(1.0, target.frobenius_norm());
  return FeasibilityReport{residual <= threshold, h, residual, threshold};
}

HermitianMatrix gamma_apply(const GridResponse& resp, std::span<const double> phi) {
  require_length(resp.grid(), phi.size(), "gamma_apply");
  return HermitianMatrix::hermitize(kernels::weighted_outer_mean(resp.samples(), phi));
}

Eigen::Index range_gamma_perp_dimension(const GridResponse& resp) {
  return moment_nullspace(resp).dimension;
}

std::vector<HermitianMatrix> range_gamma_perp_basis(const GridResponse& resp) {
  const Nullspace ns = moment_nullspace(resp);
  const GridResponse finer(resp.filterbank(), resp.grid().refined());
  const Eigen::Index finer_dim = range_gamma_perp_dimension(finer);
  if (finer_dim != ns.dimension) {
    std::ostringstream os;
    os << "(Range Gamma)^perp dimension depends on the grid: " << ns.dimension << " at N="
       << resp.size() << ", " << finer_dim << " at N=" << finer.size();
    throw Error(ErrorKind::GridDependentNullspace, os.str());
  }
  std::vector<HermitianMatrix> basis;
  basis.reserve(static_cast<size_t>(ns.dimension));
  for (Eigen::Index i = 0; i < ns.dimension; ++i) {
    basis.push_back(from_real_coordinates(resp.dim(), ns.vectors.col(i)));
  }
  return basis;
}

HermitianMatrix project_onto(const HermitianMatrix& x, std::span<const HermitianMatrix> basis) {
  HermitianMatrix acc = HermitianMatrix::zero(x.dim());
  for (const HermitianMatrix& e : basis) acc = acc + e * trace_inner(x, e);
  return acc;
}

HermitianMatrix project_off(const HermitianMatrix& x, std::span<const HermitianMatrix> basis) {
  return x - project_onto(x, basis);
}

double kl_divergence(const PriorSpectrum& prior, std::span<const double> phi) {
  const std::vector<double>& psi = prior.values();
  require_length(prior.grid(), phi.size(), "kl_divergence");
  std::vector<double> ratio(phi.size());
  for (size_t k = 0; k < phi.size(); ++k) {
    if (!(phi[k] > 0.0)) {
      std::ostringstream os;
      os << "phi must be strictly positive, phi[" << k << "] = " << phi[k];
      throw Error(ErrorKind::NonpositivePhi, os.str());
    }
    ratio[k] = psi[k] / phi[k];
  }
  return kernels::weighted_log_mean(psi, ratio);
}

}  // namespace klspec
