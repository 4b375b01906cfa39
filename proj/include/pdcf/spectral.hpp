// spectral.hpp: frequency grid, Gaussian joint spectral amplitude, Schmidt
// decomposition and gain scaling.
//
// Grid functions are stored by value at the grid points. Integrals use the
// rectangle rule with weight d_omega, so the continuum inner product
// integral f(w) g(w) dw becomes sum_j f_j g_j d_omega.
#pragma once

#include <Eigen/Dense>

#include <numbers>
#include <optional>

namespace pdcf {

inline constexpr int kDefaultGridPoints = 100;
inline constexpr double kDefaultOmegaMin = -20.0;
inline constexpr double kDefaultOmegaMax = 20.0;
inline constexpr int kDefaultRetainedModes = 10;
// Largest analytic Gaussian mass allowed outside the grid before we refuse.
inline constexpr double kMaxOffGridMass = 1e-6;

struct FrequencyGrid {
  int n_points = 0;
  double omega_min = 0.0;
  double omega_max = 0.0;
  double d_omega = 0.0;

  double omega(Eigen::Index i) const { return omega_min + static_cast<double>(i) * d_omega; }
  double span() const { return omega_max - omega_min; }
  Eigen::VectorXd axis() const;

  bool operator==(const FrequencyGrid&) const = default;
};

FrequencyGrid build_frequency_grid(int n_points, double omega_min, double omega_max);

struct GaussianJsaParams {
  double sigma_a = 6.0;
  double sigma_b = 2.0;
  double theta = -std::numbers::pi / 4.0;
  double gain_B = 0.0;
};

// Joint spectral amplitude sampled on grid x grid; rows are signal samples,
// columns idler samples. Normalized so that sum |f|^2 d_omega^2 = 1.
struct JsaMatrix {
  Eigen::MatrixXcd values;
  FrequencyGrid grid;
};

// Upper bound on the analytic |f|^2 mass outside [omega_min, omega_max]^2.
double gaussian_off_grid_mass(const GaussianJsaParams& params, const FrequencyGrid& grid);

// Throws ConfigError on invalid widths and NumericalError("truncation") when
// the Gaussian does not fit on the grid.
JsaMatrix build_gaussian_jsa(const GaussianJsaParams& params, const FrequencyGrid& grid);

// Wraps an arbitrary complex amplitude and normalizes it under the grid quadrature.
JsaMatrix make_jsa(Eigen::MatrixXcd values, const FrequencyGrid& grid);

struct SchmidtData {
  FrequencyGrid grid;
  Eigen::MatrixXcd signal_modes;  // n_points x n_retained, column k is psi_k
  Eigen::MatrixXcd idler_modes;   // n_points x n_retained, column k is phi_k
  Eigen::VectorXd lambdas;        // every singular value, descending
  std::optional<Eigen::VectorXd> r_values;  // gain-scaled, one per retained mode
  int n_retained = 0;
  double tail_weight = 0.0;  // sum of lambda_k^2 beyond n_retained

  const Eigen::VectorXd& r() const;  // throws StateError before apply_gain
};

// f(ws, wi) = sum_k lambda_k psi_k(ws) phi_k(wi). Each signal mode is rotated so
// its largest-magnitude sample is real positive; the idler absorbs the phase.
SchmidtData schmidt_decompose(const JsaMatrix& jsa, int n_retained = kDefaultRetainedModes);

SchmidtData apply_gain(SchmidtData schmidt, double gain_B);

// 20 r log10(e), i.e. -10 log10(exp(-2r)).
double squeezing_db(double r);
double r_from_squeezing_db(double db);

// Gain B that puts `first_mode_db` of squeezing into the first Schmidt mode.
double gain_for_first_mode_db(const SchmidtData& schmidt, double first_mode_db);

// Quadrature Gram matrix A^H B d_omega between column sets.
Eigen::MatrixXcd overlap_matrix(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b, const FrequencyGrid& grid);

// max |A^H A d_omega - I|.
double orthonormality_error(const Eigen::MatrixXcd& modes, const FrequencyGrid& grid);

}  // namespace pdcf
