#include "pdcf/basis_opt.hpp"

#include "pdcf/errors.hpp"

#include <cmath>
#include <sstream>

namespace pdcf {

namespace {

constexpr const char* kModule = "basis_opt";

// Same phase rule as the Schmidt decomposition: the first sample at the peak
// magnitude of the left mode is made real positive.
void fix_phase(Eigen::Ref<Eigen::VectorXcd> left, Eigen::Ref<Eigen::VectorXcd> right) {
  const double peak = left.cwiseAbs().maxCoeff();
  if (peak == 0.0) return;
  Eigen::Index pivot = 0;
  while (std::abs(left[pivot]) < (1.0 - 1e-8) * peak) ++pivot;
  const std::complex<double> rotation = std::polar(1.0, -std::arg(left[pivot]));
  left *= rotation;
  right *= std::conj(rotation);
  left[pivot] = std::abs(left[pivot]);
}

Eigen::BDCSVD<Eigen::MatrixXcd> decompose(const Eigen::MatrixXcd& m) {
  if (!m.allFinite()) throw NumericalError(kModule, "decomposition input contains non-finite values");
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success || !svd.singularValues().allFinite()) {
    std::ostringstream msg;
    msg << "SVD failed (input max |entry| " << m.cwiseAbs().maxCoeff() << ")";
    throw NumericalError(kModule, msg.str());
  }
  return svd;
}

void require_grid(const FrequencyGrid& a, const FrequencyGrid& b) {
  if (!(a == b)) throw ConfigError(kModule, "grid mismatch between JSA/Schmidt data and filter");
}

}  // namespace

MeasurementBasis EffectiveSchmidt::basis(int n_modes) const {
  if (n_modes < 1 || n_modes > signal_modes.cols()) throw ConfigError(kModule, "basis size out of range");
  return make_basis(signal_modes.leftCols(n_modes), idler_modes.leftCols(n_modes), grid, "svd_effective");
}

EffectiveSchmidt svd_effective_basis(const JsaMatrix& jsa, double gain_B, const Filter& filter_a,
                                     const Filter& filter_b, int n_retained) {
  require_grid(jsa.grid, filter_a.grid);
  require_grid(jsa.grid, filter_b.grid);
  if (!(gain_B >= 0.0)) throw ConfigError(kModule, "optical gain must be non-negative");
  if (n_retained < 1 || n_retained > jsa.grid.n_points) throw ConfigError(kModule, "n_retained out of range");

  const double dw = jsa.grid.d_omega;
  const Eigen::MatrixXcd masked =
      filter_a.transmission.asDiagonal() * jsa.values * filter_b.transmission.asDiagonal() * dw;
  const auto svd = decompose(masked);

  EffectiveSchmidt out;
  out.grid = jsa.grid;
  out.singular_values = svd.singularValues();
  out.r_primes = gain_B * out.singular_values.head(n_retained);
  const double scale = 1.0 / std::sqrt(dw);
  out.signal_modes = svd.matrixU().leftCols(n_retained) * scale;
  out.idler_modes = svd.matrixV().leftCols(n_retained).conjugate() * scale;
  for (int k = 0; k < n_retained; ++k) fix_phase(out.signal_modes.col(k), out.idler_modes.col(k));
  return out;
}

MeasurementBasis FilterKernelModes::basis(int n_modes) const {
  if (n_modes < 1 || n_modes > out_modes.cols()) throw ConfigError(kModule, "basis size out of range");
  return make_basis(out_modes.leftCols(n_modes), out_modes.leftCols(n_modes), grid, "filter_kernel");
}

FilterKernelModes filter_kernel_decomposition(const SchmidtData& schmidt, const Filter& filter) {
  require_grid(schmidt.grid, filter.grid);
  const Eigen::MatrixXcd& psi = schmidt.signal_modes;
  if (psi.imag().cwiseAbs().maxCoeff() > 1e-10) {
    throw ContractViolation(kModule, "filter-kernel decomposition requires real mode functions");
  }
  if ((psi - schmidt.idler_modes).cwiseAbs().maxCoeff() > 1e-10) {
    throw ContractViolation(kModule, "filter-kernel decomposition requires identical signal and idler modes");
  }
  if (filter.transmission.cwiseAbs().maxCoeff() > 1.0 + 1e-12) {
    throw ContractViolation(kModule, "filter transmission exceeds unity");
  }

  const double dw = schmidt.grid.d_omega;
  // Grid-unit kernel K(w, w') dw so that singular values are those of the integral operator.
  const Eigen::MatrixXcd kernel = filter.transmission.asDiagonal() * psi * psi.transpose() * dw;
  const auto svd = decompose(kernel);

  const int n = schmidt.n_retained;
  FilterKernelModes out;
  out.grid = schmidt.grid;
  out.kappas = svd.singularValues().head(n);
  const double scale = 1.0 / std::sqrt(dw);
  out.out_modes = svd.matrixU().leftCols(n) * scale;
  out.in_modes = svd.matrixV().leftCols(n).conjugate() * scale;
  for (int k = 0; k < n; ++k) fix_phase(out.out_modes.col(k), out.in_modes.col(k));
  return out;
}

}  // namespace pdcf
