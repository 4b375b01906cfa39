// filtering.hpp: spectral filters as frequency-dependent beam splitters and
// the filtered broadband projection kernels for a chosen measurement basis.
#pragma once

#include "pdcf/spectral.hpp"

#include <Eigen/Dense>

#include <string>

namespace pdcf {

enum class FilterKind { rectangular, gaussian, identity, blocking, flat };

std::string to_string(FilterKind kind);
FilterKind filter_kind_from_string(const std::string& name);

// Transmission amplitude T(w) on the grid. The reflection amplitude is always
// derived as sqrt(1 - |T|^2), so |T|^2 + |R|^2 = 1 holds by construction.
struct Filter {
  FilterKind kind = FilterKind::identity;
  double center = 0.0;
  double width = 0.0;  // full width (rectangular), amplitude FWHM (gaussian), sqrt(eta) (flat)
  FrequencyGrid grid;
  Eigen::VectorXcd transmission;

  Eigen::VectorXd reflection() const;
  std::string describe() const;
};

// Passband |w - center| <= width/2; samples exactly on the edge transmit.
Filter make_rect_filter(double center, double width, const FrequencyGrid& grid);
// T(w) = exp(-4 ln2 (w - center)^2 / fwhm^2), so T(center +- fwhm/2) = 1/2.
Filter make_gauss_filter(double center, double fwhm, const FrequencyGrid& grid);
Filter make_identity_filter(const FrequencyGrid& grid);
Filter make_blocking_filter(const FrequencyGrid& grid);
// Frequency-independent loss: T(w) = amplitude, 0 <= amplitude <= 1.
Filter make_flat_filter(double amplitude, const FrequencyGrid& grid);

// Measurement modes f_k (signal) and g_k (idler), stored as columns.
struct MeasurementBasis {
  FrequencyGrid grid;
  Eigen::MatrixXcd signal_fns;
  Eigen::MatrixXcd idler_fns;
  std::string label;

  int n_modes() const { return static_cast<int>(signal_fns.cols()); }
};

inline constexpr double kOrthonormalityTolerance = 1e-10;

// Throws ContractViolation unless both sets are orthonormal to kOrthonormalityTolerance.
MeasurementBasis make_basis(Eigen::MatrixXcd signal_fns, Eigen::MatrixXcd idler_fns, const FrequencyGrid& grid,
                            std::string label);
MeasurementBasis schmidt_basis(const SchmidtData& schmidt, int n_modes);

// Two-frequency kernels U(w, w'), V(w, w') in grid units. Modes beyond
// n_retained are treated as unsqueezed, so U = identity + sum_k psi_k^*
// (cosh r_k - 1) psi_k and V = sum_k psi_k^* sinh r_k phi_k^*.
struct UvKernels {
  FrequencyGrid grid;
  Eigen::MatrixXcd Ua, Ub, Va, Vb;
  int n_retained = 0;
  double tail_weight = 0.0;
};

UvKernels build_uv_kernels(const SchmidtData& schmidt);

struct ProjectionProvenance {
  std::string filter_a;
  std::string filter_b;
  std::string basis;
  int n_retained = 0;
  double tail_weight = 0.0;
};

// Row k of each matrix is the grid function for measurement mode k.
struct ProjectionSet {
  FrequencyGrid grid;
  Eigen::MatrixXcd Ua, Ub, Va, Vb, Ra, Rb;
  ProjectionProvenance provenance;

  int n_modes() const { return static_cast<int>(Ua.rows()); }
};

ProjectionSet filtered_projections(const SchmidtData& schmidt, const Filter& filter_a, const Filter& filter_b,
                                   const MeasurementBasis& basis);
ProjectionSet filtered_projections(const UvKernels& kernels, const Filter& filter_a, const Filter& filter_b,
                                   const MeasurementBasis& basis);

}  // namespace pdcf
