// Reference computations that share no code path with the library: closed-form
// double-Gaussian expansions, lossy two-mode blocks, and a grid-bin Gaussian
// channel model of squeezing, filtering and mode projection.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <vector>

namespace oracle {

// Geometric spectrum of the tilted double Gaussian at theta = -pi/4.
inline double mehler_lambda(int k, double sigma_a, double sigma_b) {
  const double mu = (sigma_a - sigma_b) / (sigma_a + sigma_b);
  return std::sqrt(1.0 - mu * mu) * std::pow(mu, k);
}

// Hermite-Gauss function H_k(w/s) exp(-w^2 / (2 s^2)), unnormalized.
inline double hermite_gauss(int k, double s, double w) {
  const double x = w / s;
  double h0 = 1.0, h1 = 2.0 * x;
  if (k == 0) return std::exp(-0.5 * x * x);
  for (int j = 1; j < k; ++j) {
    const double h2 = 2.0 * x * h1 - 2.0 * j * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1 * std::exp(-0.5 * x * x);
}

// Two-mode squeezed vacuum after symmetric beam-splitter loss eta.
inline Eigen::Matrix4d lossy_epr_block(double r, double eta) {
  const double d = 0.5 * eta * std::cosh(2 * r) + 0.5 * (1 - eta);
  const double o = 0.5 * eta * std::sinh(2 * r);
  Eigen::Matrix4d m;
  m << d, 0, o, 0,
       0, d, 0, -o,
       o, 0, d, 0,
       0, -o, 0, d;
  return m;
}

// Orthonormal completion of the columns of `a` (n x m, orthonormal), keeping
// them as the first m columns.
inline Eigen::MatrixXd complete_basis(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows(), m = a.cols();
  Eigen::MatrixXd out(n, n);
  out.leftCols(m) = a;
  Eigen::Index filled = m;
  for (Eigen::Index e = 0; e < n && filled < n; ++e) {
    Eigen::VectorXd v = Eigen::VectorXd::Unit(n, e);
    for (int pass = 0; pass < 2; ++pass) v -= out.leftCols(filled) * (out.leftCols(filled).transpose() * v);
    if (v.norm() > 1e-6) out.col(filled++) = v.normalized();
  }
  return out;
}

// Grid-bin Gaussian channel. Inputs are real and in unit-norm vector form
// (grid function times sqrt(d_omega)). Quadrature order of the internal state:
// [X_s(bins), Y_s(bins), X_i(bins), Y_i(bins)].
struct BinChannel {
  Eigen::MatrixXd sigma;  // 4n x 4n after filtering
  Eigen::Index n = 0;

  BinChannel(const Eigen::MatrixXd& psi_hat, const Eigen::MatrixXd& phi_hat, const Eigen::VectorXd& r,
             const Eigen::VectorXd& t_a, const Eigen::VectorXd& t_b) {
    n = psi_hat.rows();
    const Eigen::Index m = psi_hat.cols();
    // Broadband two-mode squeezed state: modes A_k = sum psi_hat a, B_k = sum phi_hat b.
    Eigen::MatrixXd s = 0.5 * Eigen::MatrixXd::Identity(4 * n, 4 * n);
    for (Eigen::Index k = 0; k < m; ++k) {
      const double c = 0.5 * std::cosh(2 * r[k]), sh = 0.5 * std::sinh(2 * r[k]);
      s(k, k) = s(n + k, n + k) = s(2 * n + k, 2 * n + k) = s(3 * n + k, 3 * n + k) = c;
      s(k, 2 * n + k) = s(2 * n + k, k) = sh;
      s(n + k, 3 * n + k) = s(3 * n + k, n + k) = -sh;
    }
    const Eigen::MatrixXd os = complete_basis(psi_hat);
    const Eigen::MatrixXd oi = complete_basis(phi_hat);
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(4 * n, 4 * n);
    p.block(0, 0, n, n) = os;
    p.block(n, n, n, n) = os;
    p.block(2 * n, 2 * n, n, n) = oi;
    p.block(3 * n, 3 * n, n, n) = oi;
    const Eigen::MatrixXd bins = p * s * p.transpose();
    Eigen::VectorXd d(4 * n);
    d << t_a, t_a, t_b, t_b;
    sigma = d.asDiagonal() * bins * d.asDiagonal();
    sigma.diagonal() += 0.5 * (1.0 - d.array().square()).matrix();
  }

  // Covariance of measurement modes (columns of f_hat on signal, g_hat on idler)
  // in the per-mode ordering (X_a, Y_a, X_b, Y_b).
  Eigen::MatrixXd measure(const Eigen::MatrixXd& f_hat, const Eigen::MatrixXd& g_hat) const {
    const Eigen::Index N = f_hat.cols();
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(4 * N, 4 * n);
    for (Eigen::Index k = 0; k < N; ++k) {
      l.block(4 * k + 0, 0, 1, n) = f_hat.col(k).transpose();
      l.block(4 * k + 1, n, 1, n) = f_hat.col(k).transpose();
      l.block(4 * k + 2, 2 * n, 1, n) = g_hat.col(k).transpose();
      l.block(4 * k + 3, 3 * n, 1, n) = g_hat.col(k).transpose();
    }
    return l * sigma * l.transpose();
  }

  // Var(X_a -/+ X_b) for a shared unit vector f_hat is f_hat^T M f_hat.
  Eigen::MatrixXd shared_form(double sign) const {
    const auto xs = sigma.block(0, 0, n, n);
    const auto xi = sigma.block(2 * n, 2 * n, n, n);
    const auto x_si = sigma.block(0, 2 * n, n, n);
    Eigen::MatrixXd m = xs + xi + sign * (x_si + x_si.transpose());
    return 0.5 * (m + m.transpose());
  }
};

// Successive constrained optimum of the shared real basis: mode k minimizes
// min(Var_-, Var_+) over unit vectors orthogonal to modes 0..k-1.
struct RayleighOptimum {
  std::vector<double> db;
  Eigen::MatrixXd vectors;  // unit columns
};

inline RayleighOptimum successive_rayleigh(const Eigen::MatrixXd& m_minus, const Eigen::MatrixXd& m_plus, int k_max) {
  const Eigen::Index n = m_minus.rows();
  RayleighOptimum out;
  out.vectors.resize(n, k_max);
  for (int k = 0; k < k_max; ++k) {
    const Eigen::MatrixXd full = complete_basis(out.vectors.leftCols(k));
    const Eigen::MatrixXd c = full.rightCols(n - k);
    double best = 1e300;
    Eigen::VectorXd arg;
    for (const Eigen::MatrixXd* m : {&m_minus, &m_plus}) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c.transpose() * (*m) * c);
      if (eig.eigenvalues()[0] < best) {
        best = eig.eigenvalues()[0];
        arg = c * eig.eigenvectors().col(0);
      }
    }
    out.vectors.col(k) = arg.normalized();
    out.db.push_back(-10.0 * std::log10(best));
  }
  return out;
}

}  // namespace oracle
