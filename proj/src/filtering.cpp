#include "pdcf/filtering.hpp"

#include "pdcf/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace pdcf {

namespace {

constexpr const char* kModule = "filtering";

Filter make_filter(FilterKind kind, double center, double width, const FrequencyGrid& grid) {
  Filter f;
  f.kind = kind;
  f.center = center;
  f.width = width;
  f.grid = grid;
  f.transmission = Eigen::VectorXcd::Zero(grid.n_points);
  return f;
}

void require_same_grid(const FrequencyGrid& a, const FrequencyGrid& b, const char* what) {
  if (!(a == b)) throw ConfigError(kModule, std::string("grid mismatch: ") + what);
}

}  // namespace

std::string to_string(FilterKind kind) {
  switch (kind) {
    case FilterKind::rectangular: return "rectangular";
    case FilterKind::gaussian: return "gaussian";
    case FilterKind::identity: return "identity";
    case FilterKind::blocking: return "blocking";
    case FilterKind::flat: return "flat";
  }
  return "unknown";
}

FilterKind filter_kind_from_string(const std::string& name) {
  if (name == "rectangular" || name == "rect") return FilterKind::rectangular;
  if (name == "gaussian" || name == "gauss") return FilterKind::gaussian;
  if (name == "identity" || name == "none") return FilterKind::identity;
  if (name == "blocking") return FilterKind::blocking;
  if (name == "flat") return FilterKind::flat;
  throw ConfigError(kModule, "unknown filter kind '" + name + "'");
}

Eigen::VectorXd Filter::reflection() const {
  return (1.0 - transmission.cwiseAbs2().array()).max(0.0).sqrt().matrix();
}

std::string Filter::describe() const {
  std::ostringstream out;
  out << to_string(kind);
  if (kind == FilterKind::rectangular || kind == FilterKind::gaussian) {
    out << "(center=" << center << ", width=" << width << ")";
  } else if (kind == FilterKind::flat) {
    out << "(amplitude=" << width << ")";
  }
  return out.str();
}

Filter make_rect_filter(double center, double width, const FrequencyGrid& grid) {
  if (!(width >= 0.0)) throw ConfigError(kModule, "rectangular filter width must be non-negative");
  Filter f = make_filter(FilterKind::rectangular, center, width, grid);
  // Relative slack so that samples on the passband edge transmit despite round-off in omega(i).
  const double half = 0.5 * width;
  const double slack = 1e-12 * std::max(1.0, grid.span());
  for (Eigen::Index i = 0; i < grid.n_points; ++i) {
    if (std::abs(grid.omega(i) - center) <= half + slack) f.transmission[i] = 1.0;
  }
  return f;
}

Filter make_gauss_filter(double center, double fwhm, const FrequencyGrid& grid) {
  if (!(fwhm > 0.0)) throw ConfigError(kModule, "Gaussian filter FWHM must be positive");
  Filter f = make_filter(FilterKind::gaussian, center, fwhm, grid);
  for (Eigen::Index i = 0; i < grid.n_points; ++i) {
    const double x = grid.omega(i) - center;
    f.transmission[i] = std::exp(-4.0 * std::numbers::ln2 * x * x / (fwhm * fwhm));
  }
  return f;
}

Filter make_identity_filter(const FrequencyGrid& grid) {
  Filter f = make_filter(FilterKind::identity, 0.0, 0.0, grid);
  f.transmission.setOnes();
  return f;
}

Filter make_blocking_filter(const FrequencyGrid& grid) { return make_filter(FilterKind::blocking, 0.0, 0.0, grid); }

Filter make_flat_filter(double amplitude, const FrequencyGrid& grid) {
  if (!(amplitude >= 0.0 && amplitude <= 1.0)) throw ConfigError(kModule, "flat filter amplitude must lie in [0, 1]");
  Filter f = make_filter(FilterKind::flat, 0.0, amplitude, grid);
  f.transmission.setConstant(amplitude);
  return f;
}

MeasurementBasis make_basis(Eigen::MatrixXcd signal_fns, Eigen::MatrixXcd idler_fns, const FrequencyGrid& grid,
                            std::string label) {
  if (signal_fns.rows() != grid.n_points || idler_fns.rows() != grid.n_points) {
    throw ConfigError(kModule, "basis functions do not match the grid");
  }
  if (signal_fns.cols() != idler_fns.cols() || signal_fns.cols() == 0) {
    throw ConfigError(kModule, "signal and idler bases need the same non-zero mode count");
  }
  const double err_s = orthonormality_error(signal_fns, grid);
  const double err_i = orthonormality_error(idler_fns, grid);
  if (err_s > kOrthonormalityTolerance || err_i > kOrthonormalityTolerance) {
    std::ostringstream msg;
    msg << "measurement basis is not orthonormal (signal error " << err_s << ", idler error " << err_i << ")";
    throw ContractViolation(kModule, msg.str());
  }
  return MeasurementBasis{grid, std::move(signal_fns), std::move(idler_fns), std::move(label)};
}

MeasurementBasis schmidt_basis(const SchmidtData& schmidt, int n_modes) {
  if (n_modes < 1 || n_modes > schmidt.n_retained) {
    throw ConfigError(kModule, "Schmidt basis size must lie in [1, n_retained]");
  }
  return make_basis(schmidt.signal_modes.leftCols(n_modes), schmidt.idler_modes.leftCols(n_modes), schmidt.grid,
                    "schmidt");
}

UvKernels build_uv_kernels(const SchmidtData& schmidt) {
  const Eigen::VectorXd& r = schmidt.r();
  const FrequencyGrid& grid = schmidt.grid;
  const Eigen::MatrixXcd& psi = schmidt.signal_modes;
  const Eigen::MatrixXcd& phi = schmidt.idler_modes;
  const Eigen::VectorXcd cosh_m1 = (r.array().cosh() - 1.0).matrix().cast<std::complex<double>>();
  const Eigen::VectorXcd sinh = r.array().sinh().matrix().cast<std::complex<double>>();
  const Eigen::MatrixXcd delta = Eigen::MatrixXcd::Identity(grid.n_points, grid.n_points) / grid.d_omega;

  UvKernels k;
  k.grid = grid;
  k.n_retained = schmidt.n_retained;
  k.tail_weight = schmidt.tail_weight;
  k.Ua = delta + psi.conjugate() * cosh_m1.asDiagonal() * psi.transpose();
  k.Va = psi.conjugate() * sinh.asDiagonal() * phi.adjoint();
  k.Ub = delta + phi.conjugate() * cosh_m1.asDiagonal() * phi.transpose();
  k.Vb = phi.conjugate() * sinh.asDiagonal() * psi.adjoint();
  return k;
}

ProjectionSet filtered_projections(const UvKernels& kernels, const Filter& filter_a, const Filter& filter_b,
                                   const MeasurementBasis& basis) {
  require_same_grid(kernels.grid, filter_a.grid, "signal filter");
  require_same_grid(kernels.grid, filter_b.grid, "idler filter");
  require_same_grid(kernels.grid, basis.grid, "measurement basis");
  const double dw = kernels.grid.d_omega;

  // (f_k T_a)^T as rows; U_a^k(w') = sum_w f_k(w) T_a(w) U_a(w, w') dw.
  const Eigen::MatrixXcd fa = (filter_a.transmission.asDiagonal() * basis.signal_fns).transpose();
  const Eigen::MatrixXcd gb = (filter_b.transmission.asDiagonal() * basis.idler_fns).transpose();

  ProjectionSet p;
  p.grid = kernels.grid;
  p.Ua = fa * kernels.Ua * dw;
  p.Va = fa * kernels.Va * dw;
  p.Ub = gb * kernels.Ub * dw;
  p.Vb = gb * kernels.Vb * dw;
  p.Ra = basis.signal_fns.transpose() * filter_a.reflection().cast<std::complex<double>>().asDiagonal();
  p.Rb = basis.idler_fns.transpose() * filter_b.reflection().cast<std::complex<double>>().asDiagonal();
  p.provenance.filter_a = filter_a.describe();
  p.provenance.filter_b = filter_b.describe();
  p.provenance.basis = basis.label;
  p.provenance.n_retained = kernels.n_retained;
  p.provenance.tail_weight = kernels.tail_weight;
  return p;
}

ProjectionSet filtered_projections(const SchmidtData& schmidt, const Filter& filter_a, const Filter& filter_b,
                                   const MeasurementBasis& basis) {
  return filtered_projections(build_uv_kernels(schmidt), filter_a, filter_b, basis);
}

}  // namespace pdcf
