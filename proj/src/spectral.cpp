#include "pdcf/spectral.hpp"

#include "pdcf/errors.hpp"

#include <cmath>
#include <complex>
#include <sstream>

namespace pdcf {

namespace {

constexpr const char* kModule = "spectral_core";

double normal_two_sided_tail(double lo, double hi, double stddev) {
  const double s = stddev * std::numbers::sqrt2;
  return 0.5 * std::erfc(hi / s) + 0.5 * std::erfc(-lo / s);
}

void fix_phase(Eigen::Ref<Eigen::VectorXcd> signal, Eigen::Ref<Eigen::VectorXcd> idler) {
  const double peak = signal.cwiseAbs().maxCoeff();
  if (peak == 0.0) return;
  // First sample within a relative 1e-8 of the peak, so antisymmetric modes
  // with two equal extrema resolve the same way on every grid.
  Eigen::Index pivot = 0;
  for (Eigen::Index i = 0; i < signal.size(); ++i) {
    if (std::abs(signal[i]) >= (1.0 - 1e-8) * peak) {
      pivot = i;
      break;
    }
  }
  const std::complex<double> rotation = std::polar(1.0, -std::arg(signal[pivot]));
  signal *= rotation;
  idler *= std::conj(rotation);
  signal[pivot] = std::abs(signal[pivot]);
}

}  // namespace

Eigen::VectorXd FrequencyGrid::axis() const {
  Eigen::VectorXd w(n_points);
  for (Eigen::Index i = 0; i < n_points; ++i) w[i] = omega(i);
  return w;
}

FrequencyGrid build_frequency_grid(int n_points, double omega_min, double omega_max) {
  if (n_points < 2) throw ConfigError(kModule, "frequency grid needs at least 2 points");
  if (!std::isfinite(omega_min) || !std::isfinite(omega_max) || !(omega_max > omega_min)) {
    throw ConfigError(kModule, "frequency grid requires finite omega_max > omega_min");
  }
  FrequencyGrid grid;
  grid.n_points = n_points;
  grid.omega_min = omega_min;
  grid.omega_max = omega_max;
  grid.d_omega = (omega_max - omega_min) / static_cast<double>(n_points - 1);
  return grid;
}

double gaussian_off_grid_mass(const GaussianJsaParams& p, const FrequencyGrid& grid) {
  // |f|^2 is a product of independent Gaussians in the rotated coordinates
  // with variances sigma_a^2/2 and sigma_b^2/2; project onto each axis.
  const double c = std::cos(p.theta);
  const double s = std::sin(p.theta);
  const double var_a = 0.5 * p.sigma_a * p.sigma_a;
  const double var_b = 0.5 * p.sigma_b * p.sigma_b;
  const double std_signal = std::sqrt(c * c * var_a + s * s * var_b);
  const double std_idler = std::sqrt(s * s * var_a + c * c * var_b);
  return normal_two_sided_tail(grid.omega_min, grid.omega_max, std_signal) +
         normal_two_sided_tail(grid.omega_min, grid.omega_max, std_idler);
}

JsaMatrix make_jsa(Eigen::MatrixXcd values, const FrequencyGrid& grid) {
  if (values.rows() != grid.n_points || values.cols() != grid.n_points) {
    throw ConfigError(kModule, "JSA shape does not match the frequency grid");
  }
  if (!values.allFinite()) throw NumericalError(kModule, "JSA contains non-finite samples");
  const double norm = std::sqrt(values.squaredNorm()) * grid.d_omega;
  if (!(norm > 0.0)) throw NumericalError(kModule, "JSA has zero norm on the grid");
  values /= norm;
  return JsaMatrix{std::move(values), grid};
}

JsaMatrix build_gaussian_jsa(const GaussianJsaParams& p, const FrequencyGrid& grid) {
  if (!(p.sigma_a > 0.0) || !(p.sigma_b > 0.0)) {
    throw ConfigError(kModule, "Gaussian JSA widths must be strictly positive");
  }
  if (!(p.gain_B >= 0.0)) throw ConfigError(kModule, "optical gain must be non-negative");
  const double off_grid = gaussian_off_grid_mass(p, grid);
  if (off_grid > kMaxOffGridMass) {
    std::ostringstream msg;
    msg << "truncation: " << off_grid << " of the Gaussian JSA mass lies outside [" << grid.omega_min << ", "
        << grid.omega_max << "] (limit " << kMaxOffGridMass << "); widen the grid";
    throw NumericalError(kModule, msg.str());
  }
  const double c = std::cos(p.theta);
  const double s = std::sin(p.theta);
  Eigen::MatrixXcd values(grid.n_points, grid.n_points);
  for (Eigen::Index is = 0; is < grid.n_points; ++is) {
    const double ws = grid.omega(is);
    for (Eigen::Index ii = 0; ii < grid.n_points; ++ii) {
      const double wi = grid.omega(ii);
      const double u = ws * c + wi * s;
      const double v = -ws * s + wi * c;
      values(is, ii) = std::exp(-u * u / (2.0 * p.sigma_a * p.sigma_a) - v * v / (2.0 * p.sigma_b * p.sigma_b));
    }
  }
  return make_jsa(std::move(values), grid);
}

const Eigen::VectorXd& SchmidtData::r() const {
  if (!r_values) throw StateError(kModule, "r values are not populated; call apply_gain first");
  return *r_values;
}

SchmidtData schmidt_decompose(const JsaMatrix& jsa, int n_retained) {
  const FrequencyGrid& grid = jsa.grid;
  if (n_retained < 1 || n_retained > grid.n_points) {
    throw ConfigError(kModule, "n_retained must lie in [1, n_points]");
  }
  const Eigen::MatrixXcd weighted = jsa.values * grid.d_omega;
  if (!weighted.allFinite()) throw NumericalError(kModule, "decomposition input contains non-finite values");

  Eigen::BDCSVD<Eigen::MatrixXcd> svd(weighted, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (svd.info() != Eigen::Success || !sv.allFinite()) {
    std::ostringstream msg;
    msg << "Schmidt decomposition failed (largest singular value " << sv.maxCoeff() << ", smallest "
        << sv.minCoeff() << ")";
    throw NumericalError(kModule, msg.str());
  }

  const double scale = 1.0 / std::sqrt(grid.d_omega);
  SchmidtData out;
  out.grid = grid;
  out.n_retained = n_retained;
  out.lambdas = sv;
  out.signal_modes = svd.matrixU().leftCols(n_retained) * scale;
  out.idler_modes = svd.matrixV().leftCols(n_retained).conjugate() * scale;
  for (int k = 0; k < n_retained; ++k) fix_phase(out.signal_modes.col(k), out.idler_modes.col(k));
  out.tail_weight = sv.tail(sv.size() - n_retained).squaredNorm();
  return out;
}

SchmidtData apply_gain(SchmidtData schmidt, double gain_B) {
  if (!(gain_B >= 0.0) || !std::isfinite(gain_B)) {
    throw ConfigError(kModule, "optical gain must be finite and non-negative");
  }
  schmidt.r_values = gain_B * schmidt.lambdas.head(schmidt.n_retained);
  return schmidt;
}

double squeezing_db(double r) { return 20.0 * r * std::numbers::log10e; }

double r_from_squeezing_db(double db) { return db / (20.0 * std::numbers::log10e); }

double gain_for_first_mode_db(const SchmidtData& schmidt, double first_mode_db) {
  if (!(first_mode_db >= 0.0)) throw ConfigError(kModule, "target squeezing must be non-negative");
  const double lambda1 = schmidt.lambdas[0];
  if (!(lambda1 > 0.0)) throw NumericalError(kModule, "first Schmidt coefficient is zero");
  return r_from_squeezing_db(first_mode_db) / lambda1;
}

Eigen::MatrixXcd overlap_matrix(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b, const FrequencyGrid& grid) {
  return (a.adjoint() * b) * grid.d_omega;
}

double orthonormality_error(const Eigen::MatrixXcd& modes, const FrequencyGrid& grid) {
  const Eigen::MatrixXcd gram = overlap_matrix(modes, modes, grid);
  return (gram - Eigen::MatrixXcd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

}  // namespace pdcf
