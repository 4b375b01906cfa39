#include "pdcf/covariance.hpp"

#include "pdcf/csv.hpp"
#include "pdcf/errors.hpp"

#include <cmath>
#include <complex>
#include <sstream>

namespace pdcf {

namespace {

constexpr const char* kModule = "covariance";
using cd = std::complex<double>;
constexpr cd kI{0.0, 1.0};

// Every mode-overlap integral that enters the element formulas, tabulated for
// all (k, l) pairs. Naming: Xc means the complex conjugate of X.
struct OverlapTables {
  Eigen::MatrixXcd UaUac, RaRac, VacVa;  // int U_a^k U_a^l*, int R_a^k R_a^l*, int V_a^k* V_a^l
  Eigen::MatrixXcd UbUbc, RbRbc, VbcVb;
  Eigen::MatrixXcd UaVb;    // int U_a^k V_b^l
  Eigen::MatrixXcd VacUbc;  // int V_a^k* U_b^l*
  Eigen::MatrixXcd UbVa;    // int U_b^k V_a^l
  Eigen::MatrixXcd VbcUac;  // int V_b^k* U_a^l*

  explicit OverlapTables(const ProjectionSet& p) {
    const double dw = p.grid.d_omega;
    UaUac = p.Ua * p.Ua.adjoint() * dw;
    RaRac = p.Ra * p.Ra.adjoint() * dw;
    VacVa = p.Va.conjugate() * p.Va.transpose() * dw;
    UbUbc = p.Ub * p.Ub.adjoint() * dw;
    RbRbc = p.Rb * p.Rb.adjoint() * dw;
    VbcVb = p.Vb.conjugate() * p.Vb.transpose() * dw;
    UaVb = p.Ua * p.Vb.transpose() * dw;
    VacUbc = p.Va.conjugate() * p.Ub.adjoint() * dw;
    UbVa = p.Ub * p.Va.transpose() * dw;
    VbcUac = p.Vb.conjugate() * p.Ua.adjoint() * dw;
  }

  // Returns the 4x4 block (k, l) and the largest imaginary residue discarded.
  std::pair<Eigen::Matrix4d, double> block(int k, int l) const {
    const cd a = 0.5 * (UaUac(k, l) + RaRac(k, l) + VacVa(k, l) + UaUac(l, k) + RaRac(l, k) + VacVa(l, k));
    const cd b = 0.5 * (UbUbc(k, l) + RbRbc(k, l) + VbcVb(k, l) + UbUbc(l, k) + RbRbc(l, k) + VbcVb(l, k));
    const cd c = (-UaUac(k, l) - RaRac(k, l) + VacVa(k, l) + UaUac(l, k) + RaRac(l, k) - VacVa(l, k)) / (2.0 * kI);
    const cd d = (-UbUbc(k, l) - RbRbc(k, l) + VbcVb(k, l) + UbUbc(l, k) + RbRbc(l, k) - VbcVb(l, k)) / (2.0 * kI);
    const cd e = 0.5 * (UaVb(k, l) + VacUbc(k, l) + UbVa(l, k) + VbcUac(l, k));
    const cd f = 0.5 * (UbVa(k, l) + VbcUac(k, l) + UaVb(l, k) + VacUbc(l, k));
    const cd g = (UaVb(k, l) - VacUbc(k, l) + UbVa(l, k) - VbcUac(l, k)) / (2.0 * kI);
    const cd h = (UbVa(k, l) - VbcUac(k, l) + UaVb(l, k) - VacUbc(l, k)) / (2.0 * kI);

    double residue = 0.0;
    for (const cd& x : {a, b, c, d, e, f, g, h}) residue = std::max(residue, std::abs(x.imag()));

    Eigen::Matrix4d m;
    m << a.real(), c.real(), e.real(), g.real(),
        -c.real(), a.real(), g.real(), -e.real(),
        f.real(), h.real(), b.real(), d.real(),
        h.real(), -f.real(), -d.real(), b.real();
    return {0.5 * m, 0.5 * residue};
  }
};

void require_symmetric(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() == 0 || sigma.rows() % 2 != 0) {
    throw ContractViolation(kModule, "covariance matrix must be square with even, non-zero dimension");
  }
  const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ContractViolation(kModule, "covariance matrix is not symmetric");
  }
}

}  // namespace

Eigen::Matrix4d analytic_epr_block(double r) {
  const double c = std::cosh(2.0 * r);
  const double s = std::sinh(2.0 * r);
  Eigen::Matrix4d m;
  m << c, 0, s, 0,
       0, c, 0, -s,
       s, 0, c, 0,
       0, -s, 0, c;
  return 0.5 * m;
}

Eigen::Matrix4d covariance_block(const ProjectionSet& projections, int k, int l) {
  if (k < 0 || l < 0 || k >= projections.n_modes() || l >= projections.n_modes()) {
    throw ContractViolation(kModule, "block index out of range");
  }
  return OverlapTables(projections).block(k, l).first;
}

CovarianceMatrix assemble_covariance(const ProjectionSet& projections, int n_modes) {
  if (n_modes < 1 || n_modes > projections.n_modes()) {
    throw ContractViolation(kModule, "projection set holds fewer modes than requested");
  }
  const OverlapTables tables(projections);
  CovarianceMatrix out;
  out.n_modes = n_modes;
  out.sigma.resize(4 * n_modes, 4 * n_modes);
  for (int k = 0; k < n_modes; ++k) {
    for (int l = 0; l < n_modes; ++l) {
      const auto [block, residue] = tables.block(k, l);
      out.sigma.block<4, 4>(4 * k, 4 * l) = block;
      out.imag_residue = std::max(out.imag_residue, residue);
    }
  }
  out.asymmetry = (out.sigma - out.sigma.transpose()).cwiseAbs().maxCoeff();
  out.sigma = 0.5 * (out.sigma + out.sigma.transpose()).eval();

  const PhysicalityReport check = check_physicality(out.sigma, kPhysicalityTolerance);
  if (!check.physical) {
    std::ostringstream msg;
    msg << "non-physical covariance: minimum symplectic eigenvalue " << check.min_symplectic_eigenvalue
        << " < 1/2 (truncation or quadrature failure; tail weight " << projections.provenance.tail_weight << ")";
    throw PhysicalityError(kModule, msg.str(), check.min_symplectic_eigenvalue);
  }
  return out;
}

Eigen::MatrixXd symplectic_form(int n_bosonic) {
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * n_bosonic, 2 * n_bosonic);
  for (int j = 0; j < n_bosonic; ++j) {
    omega(2 * j, 2 * j + 1) = 1.0;
    omega(2 * j + 1, 2 * j) = -1.0;
  }
  return omega;
}

Eigen::VectorXd symplectic_eigenvalues(const Eigen::MatrixXd& sigma) {
  require_symmetric(sigma);
  const Eigen::Index dim = sigma.rows();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
  if (eig.info() != Eigen::Success) throw NumericalError(kModule, "eigendecomposition of sigma failed");
  if (!(eig.eigenvalues().minCoeff() > 0.0)) {
    throw NumericalError(kModule, "covariance matrix is not positive definite");
  }
  // i Omega sigma is similar to the Hermitian matrix i sigma^1/2 Omega sigma^1/2,
  // whose spectrum is {+nu_j, -nu_j}.
  const Eigen::MatrixXd root =
      eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().asDiagonal() * eig.eigenvectors().transpose();
  const Eigen::MatrixXd antisym = root * symplectic_form(static_cast<int>(dim / 2)) * root;
  const Eigen::MatrixXcd hermitian = cd(0.0, 1.0) * antisym.cast<cd>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> herm(hermitian, Eigen::EigenvaluesOnly);
  if (herm.info() != Eigen::Success) throw NumericalError(kModule, "symplectic spectrum computation failed");
  // Ascending spectrum; the upper half holds the positive values.
  return herm.eigenvalues().tail(dim / 2).reverse();
}

PhysicalityReport check_physicality(const Eigen::MatrixXd& sigma, double tol) {
  require_symmetric(sigma);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) return {false, 0.0};
  const double nu_min = symplectic_eigenvalues(sigma).minCoeff();
  return {nu_min >= 0.5 - tol, nu_min};
}

void write_covariance_csv(const Eigen::MatrixXd& sigma, const std::filesystem::path& path) {
  std::string text;
  for (Eigen::Index i = 0; i < sigma.rows(); ++i) {
    for (Eigen::Index j = 0; j < sigma.cols(); ++j) {
      if (j) text += ',';
      text += csv::format_double(sigma(i, j));
    }
    text += '\n';
  }
  csv::write_text_atomic(path, text);
}

Eigen::MatrixXd read_covariance_csv(const std::filesystem::path& path) {
  std::istringstream in(csv::read_text(path));
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (csv::trim(line).empty()) continue;
    std::vector<double> row;
    for (const auto& cell : csv::split(line, ',')) row.push_back(csv::parse_double(cell));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError(kModule, "ragged covariance CSV '" + path.string() + "'");
    }
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd sigma(static_cast<Eigen::Index>(rows.size()),
                        rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) sigma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return sigma;
}

}  // namespace pdcf
