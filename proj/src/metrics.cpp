#include "pdcf/metrics.hpp"

#include "pdcf/covariance.hpp"
#include "pdcf/csv.hpp"
#include "pdcf/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace pdcf {

namespace {
constexpr const char* kModule = "metrics";

double to_db(double variance) { return -10.0 * std::log10(variance); }
}  // namespace

std::string to_string(QuadratureCombination combination) {
  return combination == QuadratureCombination::minus ? "minus" : "plus";
}

std::pair<double, double> epr_variances(const Eigen::MatrixXd& sigma, int k) {
  if (sigma.rows() % 4 != 0 || sigma.rows() != sigma.cols()) {
    throw ContractViolation(kModule, "expected a 4N x 4N covariance matrix");
  }
  if (k < 0 || 4 * k >= sigma.rows()) throw ContractViolation(kModule, "mode index out of range");
  const int xa = 4 * k;
  const int xb = 4 * k + 2;
  const double diag = sigma(xa, xa) + sigma(xb, xb);
  const double cross = sigma(xa, xb) + sigma(xb, xa);
  return {diag - cross, diag + cross};
}

ModeSqueezing mode_squeezing_db(const Eigen::MatrixXd& sigma, int k) {
  const auto [minus, plus] = epr_variances(sigma, k);
  if (!(minus > 0.0) || !(plus > 0.0)) throw NumericalError(kModule, "non-positive EPR variance");
  ModeSqueezing m;
  m.mode_index = k;
  m.delta2_minus = minus;
  m.delta2_plus = plus;
  const double db_minus = to_db(minus);
  const double db_plus = to_db(plus);
  if (db_plus > db_minus) {
    m.squeezing_db = db_plus;
    m.combination = QuadratureCombination::plus;
  } else {
    m.squeezing_db = db_minus;
    m.combination = QuadratureCombination::minus;
  }
  return m;
}

std::vector<ModeSqueezing> squeezing_report(const Eigen::MatrixXd& sigma) {
  std::vector<ModeSqueezing> out;
  const int n = static_cast<int>(sigma.rows() / 4);
  out.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) out.push_back(mode_squeezing_db(sigma, k));
  return out;
}

PurityResult purity(const Eigen::MatrixXd& sigma) {
  const Eigen::Index bosonic = sigma.rows() / 2;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success || !(eig.eigenvalues().minCoeff() > 0.0)) {
    throw NumericalError(kModule, "covariance determinant is not positive");
  }
  const double log_det = eig.eigenvalues().array().log().sum();
  PurityResult out;
  out.via_determinant = std::exp(-static_cast<double>(bosonic) * std::numbers::ln2 - 0.5 * log_det);
  out.via_symplectic = (0.5 / symplectic_eigenvalues(sigma).array()).prod();
  if (std::abs(out.via_determinant - out.via_symplectic) > kPurityCrossCheckTolerance) {
    std::ostringstream msg;
    msg << "purity routes disagree: determinant " << out.via_determinant << " vs symplectic " << out.via_symplectic;
    throw NumericalError(kModule, msg.str());
  }
  out.value = out.via_determinant;
  return out;
}

double single_mode_character(std::span<const ModeSqueezing> reports) {
  if (reports.empty()) throw ContractViolation(kModule, "single-mode character needs at least one mode");
  double higher = 0.0;
  for (const auto& r : reports.subspan(1)) higher += std::max(r.squeezing_db, 0.0);
  if (higher == 0.0) return std::numeric_limits<double>::infinity();
  return reports.front().squeezing_db / higher;
}

std::string squeezing_report_csv(std::span<const ModeSqueezing> reports) {
  std::string text = "mode_index,delta2_minus,delta2_plus,squeezing_db,combination\n";
  for (const auto& r : reports) {
    text += std::to_string(r.mode_index + 1) + ',' + csv::format_double(r.delta2_minus) + ',' +
            csv::format_double(r.delta2_plus) + ',' + csv::format_double(r.squeezing_db) + ',' +
            to_string(r.combination) + '\n';
  }
  return text;
}

}  // namespace pdcf
