// covariance.hpp: covariance matrix of the filtered state, in the quadrature
// ordering (X_a^1, Y_a^1, X_b^1, Y_b^1, ..., X_a^N, Y_a^N, X_b^N, Y_b^N).
// Vacuum has sigma = identity / 2.
#pragma once

#include "pdcf/filtering.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <string>

namespace pdcf {

struct CovarianceMatrix {
  Eigen::MatrixXd sigma;
  int n_modes = 0;          // mode pairs; sigma is 4N x 4N
  double asymmetry = 0.0;   // max |sigma - sigma^T| before symmetrization
  double imag_residue = 0.0;  // largest imaginary part discarded from the element integrals
};

inline constexpr double kAsymmetryWarning = 1e-8;
inline constexpr double kPhysicalityTolerance = 1e-6;

// Two-mode squeezed vacuum with squeezing amplitude r.
Eigen::Matrix4d analytic_epr_block(double r);

// Single 4x4 block between measurement modes k and l (0-based).
Eigen::Matrix4d covariance_block(const ProjectionSet& projections, int k, int l);

// Fills the full matrix from the per-element mode-overlap integrals, symmetrizes
// it and verifies physicality; throws PhysicalityError when the smallest
// symplectic eigenvalue falls below 1/2 - kPhysicalityTolerance.
CovarianceMatrix assemble_covariance(const ProjectionSet& projections, int n_modes);

// Standard symplectic form for n_bosonic (X, Y) pairs.
Eigen::MatrixXd symplectic_form(int n_bosonic);

// Descending; one value per bosonic mode (2N for a 4N x 4N matrix).
Eigen::VectorXd symplectic_eigenvalues(const Eigen::MatrixXd& sigma);

struct PhysicalityReport {
  bool physical = false;
  double min_symplectic_eigenvalue = 0.0;
};

PhysicalityReport check_physicality(const Eigen::MatrixXd& sigma, double tol);

// Row-major CSV with 17 significant digits.
void write_covariance_csv(const Eigen::MatrixXd& sigma, const std::filesystem::path& path);
Eigen::MatrixXd read_covariance_csv(const std::filesystem::path& path);

}  // namespace pdcf
