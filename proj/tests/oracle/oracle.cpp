#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace oracle {

Mat Mat::identity(std::size_t dim) {
  Mat m(dim);
  for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1;
  return m;
}

Mat mul(const Mat& x, const Mat& y) {
  Mat r(x.n);
  for (std::size_t i = 0; i < x.n; ++i)
    for (std::size_t k = 0; k < x.n; ++k)
      for (std::size_t j = 0; j < x.n; ++j) r(i, j) += x(i, k) * y(k, j);
  return r;
}

Mat adjoint(const Mat& x) {
  Mat r(x.n);
  for (std::size_t i = 0; i < x.n; ++i)
    for (std::size_t j = 0; j < x.n; ++j) r(i, j) = std::conj(x(j, i));
  return r;
}

Mat add(const Mat& x, const Mat& y, real sy) {
  Mat r = x;
  for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] += sy * y.a[i];
  return r;
}

Mat scale(const Mat& x, real s) {
  Mat r = x;
  for (cplx& v : r.a) v *= s;
  return r;
}

real trace(const Mat& x) {
  real t = 0;
  for (std::size_t i = 0; i < x.n; ++i) t += x(i, i).real();
  return t;
}

real frobenius(const Mat& x) {
  real s = 0;
  for (const cplx& v : x.a) s += std::norm(v);
  return std::sqrt(s);
}

Vec solve(Mat m, Vec rhs) {
  const std::size_t n = m.n;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(m(r, c)) > std::abs(m(piv, c))) piv = r;
    if (std::abs(m(piv, c)) == 0) throw std::runtime_error("oracle: singular system");
    if (piv != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(c, j), m(piv, j));
      std::swap(rhs[c], rhs[piv]);
    }
    for (std::size_t r = c + 1; r < n; ++r) {
      const cplx f = m(r, c) / m(c, c);
      if (f == cplx(0)) continue;
      for (std::size_t j = c; j < n; ++j) m(r, j) -= f * m(c, j);
      rhs[r] -= f * rhs[c];
    }
  }
  Vec x(n);
  for (std::size_t i = n; i-- > 0;) {
    cplx s = rhs[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= m(i, j) * x[j];
    x[i] = s / m(i, i);
  }
  return x;
}

Eigen jacobi(Mat h) {
  const std::size_t n = h.n;
  Mat v = Mat::identity(n);
  const real scale_ = std::max<real>(frobenius(h), 1);
  for (int sweep = 0; sweep < 100; ++sweep) {
    real off = 0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += std::norm(h(p, q));
    if (std::sqrt(off) <= 1e-30L * scale_) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const real mag = std::abs(h(p, q));
        if (mag == 0) continue;
        // Phase the pair so h_pq is real, then apply a real rotation.
        const cplx ph = h(p, q) / mag;
        const real tau = (h(q, q).real() - h(p, p).real()) / (2 * mag);
        const real t = (tau >= 0 ? 1 : -1) / (std::abs(tau) + std::sqrt(1 + tau * tau));
        const real c = 1 / std::sqrt(1 + t * t);
        const real s = t * c;
        // J = U P with U = diag(.., 1_p, .., conj(ph)_q, ..) and P the real rotation;
        // columns p and q of J:
        //   J_pp = c, J_qp = -s conj(ph), J_pq = s, J_qq = c conj(ph).
        const cplx jpp = c, jqp = -s * std::conj(ph), jpq = s, jqq = c * std::conj(ph);
        for (std::size_t k = 0; k < n; ++k) {  // H <- H J
          const cplx hp = h(k, p), hq = h(k, q);
          h(k, p) = hp * jpp + hq * jqp;
          h(k, q) = hp * jpq + hq * jqq;
        }
        for (std::size_t k = 0; k < n; ++k) {  // H <- J* H
          const cplx hp = h(p, k), hq = h(q, k);
          h(p, k) = std::conj(jpp) * hp + std::conj(jqp) * hq;
          h(q, k) = std::conj(jpq) * hp + std::conj(jqq) * hq;
        }
        for (std::size_t k = 0; k < n; ++k) {  // V <- V J
          const cplx vp = v(k, p), vq = v(k, q);
          v(k, p) = vp * jpp + vq * jqp;
          v(k, q) = vp * jpq + vq * jqq;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return h(x, x).real() < h(y, y).real(); });
  Eigen e{std::vector<real>(n), Mat(n)};
  for (std::size_t c = 0; c < n; ++c) {
    e.values[c] = h(order[c], order[c]).real();
    for (std::size_t k = 0; k < n; ++k) e.vectors(k, c) = v(k, order[c]);
  }
  return e;
}

Mat spectral_map(const Mat& h, const std::function<real(real)>& f) {
  const Eigen e = jacobi(h);
  Mat r(h.n);
  for (std::size_t c = 0; c < h.n; ++c) {
    const real fv = f(e.values[c]);
    for (std::size_t i = 0; i < h.n; ++i)
      for (std::size_t j = 0; j < h.n; ++j)
        r(i, j) += fv * e.vectors(i, c) * std::conj(e.vectors(j, c));
  }
  return r;
}

Mat lyapunov(const Mat& a, const Vec& b) {
  const std::size_t n = a.n;
  const std::size_t m = n * n;
  // vec index i*n + j for X(i, j); (A X A*)(i, j) = sum_kl A(i,k) X(k,l) conj(A(j,l)).
  Mat k(m);
  Vec rhs(m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t row = i * n + j;
      k(row, row) += 1;
      for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = 0; q < n; ++q) k(row, p * n + q) -= a(i, p) * std::conj(a(j, q));
      rhs[row] = b[i] * std::conj(b[j]);
    }
  const Vec x = solve(k, rhs);
  Mat out(n);
  out.a = x;
  return out;
}

std::vector<Vec> Problem::responses() const {
  const std::size_t n = a.n;
  std::vector<Vec> g(nodes);
  const real pi = std::numbers::pi_v<real>;
  for (std::size_t k = 0; k < nodes; ++k) {
    const real t = -pi + 2 * pi * static_cast<real>(k) / static_cast<real>(nodes);
    Mat m = scale(a, -1);
    const cplx z(std::cos(t), std::sin(t));
    for (std::size_t i = 0; i < n; ++i) m(i, i) += z;
    g[k] = solve(m, b);
  }
  return g;
}

Problem whiten(const Mat& a, const Vec& b, const Mat& sigma, std::size_t nodes,
               std::function<real(real)> psi) {
  const Mat w = spectral_map(sigma, [](real x) { return 1 / std::sqrt(x); });
  const Mat s = spectral_map(sigma, [](real x) { return std::sqrt(x); });
  Problem p{mul(mul(w, a), s), Vec(a.n), nodes, std::move(psi)};
  for (std::size_t i = 0; i < a.n; ++i)
    for (std::size_t j = 0; j < a.n; ++j) p.b[i] += w(i, j) * b[j];
  return p;
}

namespace {

real quad_form(const Vec& g, const Mat& l) {
  cplx s = 0;
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j) s += std::conj(g[i]) * l(i, j) * g[j];
  return s.real();
}

real node(const Problem& p, std::size_t k) {
  const real pi = std::numbers::pi_v<real>;
  return -pi + 2 * pi * static_cast<real>(k) / static_cast<real>(p.nodes);
}

Mat weighted_gramian(const Problem& p, const std::vector<Vec>& g, const Mat& lambda) {
  const std::size_t n = p.a.n;
  Mat m(n);
  for (std::size_t k = 0; k < p.nodes; ++k) {
    const real w = p.psi(node(p, k)) / quad_form(g[k], lambda);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m(i, j) += w * g[k][i] * std::conj(g[k][j]);
  }
  return scale(m, 1 / static_cast<real>(p.nodes));
}

}  // namespace

Mat theta_map(const Problem& p, const Mat& lambda) {
  const std::vector<Vec> g = p.responses();
  const Mat m = weighted_gramian(p, g, lambda);
  const Mat root = spectral_map(lambda, [](real x) { return std::sqrt(std::max<real>(x, 0)); });
  return mul(mul(root, m), root);
}

real cost_J(const Problem& p, const Mat& lambda) {
  const std::vector<Vec> g = p.responses();
  real s = 0;
  for (std::size_t k = 0; k < p.nodes; ++k) s += p.psi(node(p, k)) * std::log(quad_form(g[k], lambda));
  return trace(lambda) - s / static_cast<real>(p.nodes);
}

Mat fixed_point(const Problem& p, Mat lambda, real tol, int max_iter, int* iterations) {
  const std::vector<Vec> g = p.responses();
  for (int it = 0; it < max_iter; ++it) {
    const Mat m = weighted_gramian(p, g, lambda);
    const Mat root = spectral_map(lambda, [](real x) { return std::sqrt(std::max<real>(x, 0)); });
    Mat next = mul(mul(root, m), root);
    const real step = frobenius(add(next, lambda, -1));
    lambda = next;
    if (step <= tol) {
      if (iterations) *iterations = it + 1;
      return lambda;
    }
  }
  throw std::runtime_error("oracle: fixed point iteration did not converge");
}

real moment_residual(const Problem& p, const Mat& lambda) {
  const std::vector<Vec> g = p.responses();
  return frobenius(add(weighted_gramian(p, g, lambda), Mat::identity(p.a.n), -1));
}

Mat from_rows(std::size_t n, const std::vector<cplx>& rows) {
  Mat m(n);
  m.a = rows;
  return m;
}

}  // namespace oracle
