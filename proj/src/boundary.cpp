#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/LU>

#include "klspec/errors.hpp"
#include "klspec/kernels.hpp"
#include "klspec/pf_solver.hpp"

namespace klspec {

namespace {

// log |e^{ja} - e^{jb}|^2
double log_chord_sq(double a, double b) {
  const double s = std::sin(0.5 * (a - b));
  return std::log(4.0 * s * s);
}

// dG/dtheta = -j z (zI - A)^{-1} G(z), z = e^{j theta}.
CVector response_derivative(const FilterBank& fb, double theta, const CVector& g) {
  const Complex z = std::polar(1.0, theta);
  CMatrix m = -fb.a();
  m.diagonal().array() += z;
  return Complex(0.0, -1.0) * z * m.partialPivLu().solve(g);
}

struct LocalForm {
  double q0;  // q(theta_s)
  double q1;  // dq/dtheta
  double q2;  // d2q/dtheta2
};

// With R = (zI - A)^{-1}: G = R B, G' = -j z R^2 B, G'' = z R^2 B - 2 z^2 R^3 B.
LocalForm local_form(const FilterBank& fb, double theta, const CMatrix& l) {
  const Complex z = std::polar(1.0, theta);
  CMatrix m = -fb.a();
  m.diagonal().array() += z;
  const Eigen::PartialPivLU<CMatrix> lu = m.partialPivLu();
  const CVector r1 = lu.solve(fb.b());
  const CVector r2 = lu.solve(r1);
  const CVector r3 = lu.solve(r2);
  const CVector d1 = Complex(0.0, -1.0) * z * r2;
  const CVector d2 = z * r2 - 2.0 * z * z * r3;
  const CVector lg = l * r1;
  return {r1.dot(lg).real(), 2.0 * d1.dot(lg).real(),
          2.0 * (d1.dot(l * d1).real() + d2.dot(lg).real())};
}

// log|e^{ja} - r e^{jb}|^2 for 0 < r <= 1, written to stay accurate near r = 1.
double log_dip(double a, double b, double r) {
  const double s = std::sin(0.5 * (a - b));
  return std::log((1.0 - r) * (1.0 - r) + 4.0 * r * s * s);
}

}  // namespace

CVector construct_N0_member(const NormalizedProblem& prob, double theta_bar) {
  if (prob.dim() != 2) {
    std::ostringstream os;
    os << "boundary-set construction is only defined for n = 2, got n = " << prob.dim();
    throw Error(ErrorKind::UnsupportedDimension, os.str());
  }
  const CircleGrid& grid = prob.grid();
  const Eigen::Index k = grid.nearest_node(theta_bar);
  const double offset = std::remainder(theta_bar - grid.node(k), 2.0 * std::numbers::pi);
  if (std::abs(offset) > 1e-9) {
    std::ostringstream os;
    os << "theta_bar = " << theta_bar << " is not a grid node (nearest " << grid.node(k) << ")";
    throw Error(ErrorKind::InvalidArgument, os.str());
  }
  const CVector g = prob.response.samples().col(k);
  CVector x(2);
  x << -std::conj(g(1)), std::conj(g(0));
  return x / x.norm();
}

BoundaryCost cost_J_boundary(const NormalizedProblem& prob, const StateMatrix& lambda) {
  const std::vector<double> q = grid_quadratic_form(prob, lambda.hermitian());
  const double qmax = *std::max_element(q.begin(), q.end());
  const double floor = kDenominatorGuard * qmax;
  const std::vector<double>& psi = prob.psi();
  const CircleGrid& grid = prob.grid();
  const Eigen::Index count = grid.size();

  std::vector<Eigen::Index> singular;
  for (Eigen::Index k = 0; k < count; ++k) {
    if (q[static_cast<size_t>(k)] <= floor) singular.push_back(k);
  }

  std::vector<double> naive_terms(q.size(), 0.0);
  for (size_t k = 0; k < q.size(); ++k) {
    if (q[k] > floor) naive_terms[k] = psi[k] * std::log(q[k]);
  }
  const double naive = lambda.trace() - kernels::mean(naive_terms);
  if (singular.empty()) return BoundaryCost{naive, naive, {}};

  // integral of psi log q
  //   = integral of psi (log q - sum_s L_s) + sum_s integral of (psi - psi_s) L_s,
  // with L_s = log|e^{j theta} - e^{j theta_s}|^2, whose own integral is zero.
  std::vector<double> smooth(q.size());
  for (Eigen::Index j = 0; j < count; ++j) {
    const auto uj = static_cast<size_t>(j);
    const double tj = grid.node(j);
    double v;
    if (std::binary_search(singular.begin(), singular.end(), j)) {
      const CVector g = prob.response.samples().col(j);
      const CVector dg = response_derivative(prob.fb(), tj, g);
      const double curvature = dg.dot(lambda.matrix() * dg).real();
      if (!(curvature > 0.0)) {
        std::ostringstream os;
        os << "quadratic form has a zero of order > 2 at theta = " << tj;
        throw Error(ErrorKind::LogOfNonpositive, os.str());
      }
      v = std::log(curvature);
      for (Eigen::Index s : singular) {
        if (s != j) v -= log_chord_sq(tj, grid.node(s));
      }
    } else {
      v = std::log(q[uj]);
      for (Eigen::Index s : singular) v -= log_chord_sq(tj, grid.node(s));
    }
    smooth[uj] = psi[uj] * v;
  }
  double integral = kernels::mean(smooth);
  for (Eigen::Index s : singular) {
    const double ps = psi[static_cast<size_t>(s)];
    std::vector<double> corr(q.size(), 0.0);
    for (Eigen::Index j = 0; j < count; ++j) {
      if (j != s) corr[static_cast<size_t>(j)] = (psi[static_cast<size_t>(j)] - ps) * log_chord_sq(grid.node(j), grid.node(s));
    }
    integral += kernels::mean(corr);
  }
  return BoundaryCost{lambda.trace() - integral, naive, std::move(singular)};
}

double cost_J_resolved(const NormalizedProblem& prob, const StateMatrix& lambda,
                       Eigen::Index node) {
  const CircleGrid& grid = prob.grid();
  if (node < 0 || node >= grid.size()) {
    throw Error(ErrorKind::InvalidArgument, "node index outside the grid");
  }
  const double ts = grid.node(node);
  const LocalForm f = local_form(prob.fb(), ts, lambda.matrix());
  const double kappa = 0.5 * f.q2;
  if (!(f.q0 > 0.0) || !(kappa > 0.0)) {
    std::ostringstream os;
    os << "quadratic form has no resolvable minimum at theta = " << ts << " (q = " << f.q0
       << ", q'' = " << f.q2 << ")";
    throw Error(ErrorKind::LogOfNonpositive, os.str());
  }
  // q ~ kappa ((theta - tc)^2 + a^2) near the node; the subtracted dip has the
  // same center and width and integrates to zero.
  const double shift = -f.q1 / (2.0 * kappa);
  const double a2 = std::max(f.q0 / kappa - shift * shift, 0.0);
  const double r = 1.0 + 0.5 * a2 - std::sqrt(a2) * std::sqrt(1.0 + 0.25 * a2);
  const double tc = ts + shift;

  const std::vector<double> q = grid_quadratic_form(prob, lambda.hermitian());
  const std::vector<double>& psi = prob.psi();
  const double ps = psi[static_cast<size_t>(node)];
  std::vector<double> smooth(q.size());
  std::vector<double> corr(q.size());
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    const auto uj = static_cast<size_t>(j);
    if (!(q[uj] > 0.0)) {
      std::ostringstream os;
      os << "log of a nonpositive quadratic form at theta = " << grid.node(j);
      throw Error(ErrorKind::LogOfNonpositive, os.str());
    }
    const double dip = log_dip(grid.node(j), tc, r);
    smooth[uj] = psi[uj] * (std::log(q[uj]) - dip);
    corr[uj] = (psi[uj] - ps) * dip;
  }
  return lambda.trace() - kernels::mean(smooth) - kernels::mean(corr);
}

ProbeResult instability_probe(const NormalizedProblem& prob, const CVector& x, double eps,
                              int max_iter) {
  if (!(eps >= 0.0 && eps <= 0.1)) {
    std::ostringstream os;
    os << "perturbation size must lie in [0, 0.1], got " << eps;
    throw Error(ErrorKind::InvalidArgument, os.str());
  }
  const StateMatrix p = theta_rank_one(prob, x);
  const BoundaryCost at_p = cost_J_boundary(prob, p);
  if (at_p.singular_nodes.empty()) {
    throw Error(ErrorKind::InvalidArgument,
                "x x* is not on the boundary set: its quadratic form has no zero on the grid");
  }
  ProbeResult result{eps, at_p.value, at_p.value, false, -1, at_p.naive_value - at_p.value};
  if (eps == 0.0) return result;

  const Eigen::Index n = prob.dim();
  const HermitianMatrix mix =
      p.hermitian() * (1.0 - eps) + HermitianMatrix::identity(n) * (eps / static_cast<double>(n));
  StateMatrix current{mix};
  result.J_at_perturbed = cost_J_resolved(prob, current, at_p.singular_nodes.front());

  for (int k = 0; k <= max_iter; ++k) {
    if ((current.hermitian() - p.hermitian()).frobenius_norm() > eps) {
      result.escaped = true;
      result.escape_iteration = k;
      break;
    }
    if (k == max_iter) break;
    current = theta_step(prob, current);
  }
  return result;
}

}  // namespace klspec
