// metrics.hpp: EPR variances, squeezing in dB, Gaussian purity and the
// single-mode character of a squeezing distribution.
//
// Variances are normalized so that vacuum gives 1 for every combination.
#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pdcf {

enum class QuadratureCombination { minus, plus };

std::string to_string(QuadratureCombination combination);

struct ModeSqueezing {
  int mode_index = 0;         // 0-based
  double delta2_minus = 1.0;  // Var(X_a - X_b) = Var(Y_a + Y_b)
  double delta2_plus = 1.0;   // Var(X_a + X_b) = Var(Y_a - Y_b)
  double squeezing_db = 0.0;
  QuadratureCombination combination = QuadratureCombination::minus;
};

// (delta2_minus, delta2_plus) of mode k (0-based) read from its diagonal block.
std::pair<double, double> epr_variances(const Eigen::MatrixXd& sigma, int k);

// Takes the better of the two combinations; negative dB (no squeezing) is kept.
ModeSqueezing mode_squeezing_db(const Eigen::MatrixXd& sigma, int k);

std::vector<ModeSqueezing> squeezing_report(const Eigen::MatrixXd& sigma);

struct PurityResult {
  double value = 1.0;
  double via_determinant = 1.0;
  double via_symplectic = 1.0;
};

inline constexpr double kPurityCrossCheckTolerance = 1e-9;

// 1 / (2^M sqrt(det sigma)) for M bosonic modes, cross-checked against the
// product of 1/(2 nu_j). Throws NumericalError if det <= 0 or the routes disagree.
PurityResult purity(const Eigen::MatrixXd& sigma);

// S_1 / sum_{k>=2} max(S_k, 0); +infinity when the denominator vanishes.
double single_mode_character(std::span<const ModeSqueezing> reports);

// CSV rows: mode_index (1-based), delta2_minus, delta2_plus, squeezing_db, combination.
std::string squeezing_report_csv(std::span<const ModeSqueezing> reports);

}  // namespace pdcf
