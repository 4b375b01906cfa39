#pragma once

#include "pdcf/spectral.hpp"

#include <Eigen/Dense>

namespace fixture {

struct Reference {
  pdcf::FrequencyGrid grid;
  pdcf::JsaMatrix jsa;
  pdcf::SchmidtData schmidt;  // 6 dB in the first mode
  double gain_B = 0.0;
};

inline Reference reference(int n_points = 100, double target_db = 6.0, int n_retained = 10) {
  Reference r;
  r.grid = pdcf::build_frequency_grid(n_points, -20.0, 20.0);
  r.jsa = pdcf::build_gaussian_jsa(pdcf::GaussianJsaParams{}, r.grid);
  pdcf::SchmidtData raw = pdcf::schmidt_decompose(r.jsa, n_retained);
  r.gain_B = pdcf::gain_for_first_mode_db(raw, target_db);
  r.schmidt = pdcf::apply_gain(std::move(raw), r.gain_B);
  return r;
}

inline Eigen::MatrixXd hat(const Eigen::MatrixXcd& modes, const pdcf::FrequencyGrid& g) {
  return modes.real() * std::sqrt(g.d_omega);
}

}  // namespace fixture
