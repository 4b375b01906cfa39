// global_opt.hpp: genetic search for measurement modes that maximize EPR
// squeezing, one mode at a time, over a shared real basis for signal and idler.
// Genes are raw entries of a matrix A; the modes are the columns of Q in A = QR.
#pragma once

#include "pdcf/filtering.hpp"
#include "pdcf/spectral.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pdcf {

struct GaParams {
  int population = 256;
  double mutation_prob = 0.02;
  double mutation_sigma = 0.1;
  double convergence_tol = 1e-4;  // dB
  int convergence_window = 50;
  int max_generations = 10000;
  std::uint64_t rng_seed = 1;

  void validate() const;  // throws ConfigError
};

struct QrFactors {
  Eigen::MatrixXd Q;  // l x k, orthonormal columns
  Eigen::MatrixXd R;  // k x k, upper triangular, diagonal >= 0
};

// Householder QR with the sign fixed so R_ii >= 0. Empty when A is numerically
// rank deficient (some |R_ii| <= 1e-10 * ||A||).
std::optional<QrFactors> qr_orthonormalize(const Eigen::MatrixXd& A);

// Filtered state the optimizer is scored against.
struct StateContext {
  SchmidtData schmidt;  // gain applied
  Filter filter_a;
  Filter filter_b;
  UvKernels kernels;

  StateContext(SchmidtData schmidt, Filter filter_a, Filter filter_b);
};

// Squeezing (dB) of mode k_prime (0-based) when the columns of Phi (grid
// functions, orthonormal under the quadrature) are used for both arms. Runs the
// full projection and covariance-block route.
double objective_squeezing(const StateContext& ctx, const Eigen::MatrixXd& phi, int k_prime);

// For real phi with phi^T phi d_omega = 1 the two EPR variances are quadratic
// forms, Var_-(phi) = phi_hat^T M_minus phi_hat with phi_hat = sqrt(d_omega) phi.
// Used as the fitness inside the GA.
struct SharedBasisObjective {
  Eigen::MatrixXd m_minus;
  Eigen::MatrixXd m_plus;
  double d_omega = 0.0;

  explicit SharedBasisObjective(const StateContext& ctx);
  // phi_hat is a unit vector.
  double squeezing_db_hat(const Eigen::VectorXd& phi_hat) const;
  double squeezing_db(const Eigen::VectorXd& phi) const;
};

struct GaLogEntry {
  int mode = 0;  // 0-based
  int generation = 0;
  double best_db = 0.0;
  double mean_db = 0.0;
};

struct OptimizedBasis {
  FrequencyGrid grid;
  Eigen::MatrixXd modes;  // l x k_max grid functions
  std::vector<double> per_mode_squeezing_db;
  std::vector<int> generations_used;
  std::vector<bool> converged;
  Eigen::MatrixXd genes;  // the winning gene matrix A
  std::vector<GaLogEntry> log;

  MeasurementBasis basis() const;
  std::string log_csv() const;
};

OptimizedBasis ga_optimize_basis(const StateContext& ctx, int k_max, const GaParams& params, int threads = 1);

}  // namespace pdcf
