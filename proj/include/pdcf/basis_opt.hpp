// basis_opt.hpp: effective Schmidt basis of the filtered state (SVD of the
// filter-masked JSA) and the filter-kernel decomposition that decouples the
// special case of real identical modes with uniform squeezing.
#pragma once

#include "pdcf/filtering.hpp"
#include "pdcf/spectral.hpp"

#include <Eigen/Dense>

namespace pdcf {

struct EffectiveSchmidt {
  FrequencyGrid grid;
  Eigen::MatrixXcd signal_modes;  // n_points x n_retained
  Eigen::MatrixXcd idler_modes;
  Eigen::VectorXd singular_values;  // of T_a T_b f under the quadrature, all of them
  Eigen::VectorXd r_primes;         // gain_B * singular_values, retained only

  MeasurementBasis basis(int n_modes) const;
};

// SVD of T_a(ws) T_b(wi) f(ws, wi); r'_k = gain_B * s_k. The decomposition runs
// on the unscaled product since a positive scale leaves the modes unchanged.
EffectiveSchmidt svd_effective_basis(const JsaMatrix& jsa, double gain_B, const Filter& filter_a,
                                     const Filter& filter_b, int n_retained);

// sum_k T(w) psi_k(w) psi_k(w') = sum_k kappa_k out_k(w) in_k(w').
struct FilterKernelModes {
  FrequencyGrid grid;
  Eigen::VectorXd kappas;        // descending, n_retained of them
  Eigen::MatrixXcd out_modes;    // n_points x n_retained
  Eigen::MatrixXcd in_modes;

  MeasurementBasis basis(int n_modes) const;  // out_modes on both arms
};

// Requires real signal modes identical to the idler modes (to 1e-10) and |T| <= 1;
// throws ContractViolation otherwise.
FilterKernelModes filter_kernel_decomposition(const SchmidtData& schmidt, const Filter& filter);

}  // namespace pdcf
