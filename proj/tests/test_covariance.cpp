#include "fixtures.hpp"
#include "oracles.hpp"
#include "pdcf/basis_opt.hpp"
#include "pdcf/covariance.hpp"
#include "pdcf/errors.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <random>

using namespace pdcf;

namespace {

Eigen::MatrixXd random_real_basis(const FrequencyGrid& g, int m, std::mt19937_64& rng, double support) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd a(g.n_points, m);
  for (int i = 0; i < g.n_points; ++i) {
    for (int k = 0; k < m; ++k) a(i, k) = std::abs(g.omega(i)) <= support ? normal(rng) : 0.0;
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  return Eigen::MatrixXd(qr.householderQ() * Eigen::MatrixXd::Identity(g.n_points, m));  // unit columns
}

double max_cross_block(const Eigen::MatrixXd& s, int k, int l) { return s.block<4, 4>(4 * k, 4 * l).cwiseAbs().maxCoeff(); }

}  // namespace

TEST(EprBlock, Values) {
  EXPECT_EQ(analytic_epr_block(0.0), 0.5 * Eigen::Matrix4d::Identity());
  const auto b = analytic_epr_block(0.3454);
  EXPECT_NEAR(b(0, 0), 0.6241, 1e-4);
  EXPECT_NEAR(b(0, 2), 0.3735, 1e-4);
  EXPECT_GT(b(0, 2), 0);
  EXPECT_LT(b(1, 3), 0);
  EXPECT_NEAR(b(1, 3), -b(0, 2), 1e-15);
}

TEST(Covariance, UnfilteredSchmidtBasisIsBlockDiagonal) {
  const auto ref = fixture::reference();
  const auto id = make_identity_filter(ref.grid);
  const auto cov = assemble_covariance(filtered_projections(ref.schmidt, id, id, schmidt_basis(ref.schmidt, 5)), 5);
  for (int k = 0; k < 5; ++k) {
    for (int l = 0; l < 5; ++l) {
      const Eigen::Matrix4d expect = k == l ? analytic_epr_block(ref.schmidt.r()[k]) : Eigen::Matrix4d::Zero();
      EXPECT_LT((cov.sigma.block<4, 4>(4 * k, 4 * l) - expect).cwiseAbs().maxCoeff(), 1e-9) << k << "," << l;
    }
  }
  EXPECT_LT(cov.asymmetry, kAsymmetryWarning);
}

TEST(Covariance, BlockingGivesVacuum) {
  const auto ref = fixture::reference();
  const auto blk = make_blocking_filter(ref.grid);
  const auto cov = assemble_covariance(filtered_projections(ref.schmidt, blk, blk, schmidt_basis(ref.schmidt, 5)), 5);
  EXPECT_LT((cov.sigma - 0.5 * Eigen::MatrixXd::Identity(20, 20)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Covariance, RectFilterParityStructure) {
  const auto ref = fixture::reference();
  const auto fa = make_rect_filter(0, 4, ref.grid);
  const auto cov = assemble_covariance(filtered_projections(ref.schmidt, fa, fa, schmidt_basis(ref.schmidt, 5)), 5);
  EXPECT_GT(max_cross_block(cov.sigma, 0, 2), 1e-2);
  EXPECT_LT(max_cross_block(cov.sigma, 0, 1), 1e-9);
  EXPECT_LT(max_cross_block(cov.sigma, 1, 2), 1e-9);
}

TEST(Covariance, MatchesGaussianChannelOracle) {
  const auto ref = fixture::reference();
  const auto& g = ref.grid;
  const Eigen::MatrixXd psi = fixture::hat(ref.schmidt.signal_modes, g);
  const Eigen::MatrixXd phi = fixture::hat(ref.schmidt.idler_modes, g);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 6; ++trial) {
    const Filter fa = trial % 2 ? make_gauss_filter(4 * u(rng) - 2, 1 + 6 * u(rng), g)
                                : make_rect_filter(4 * u(rng) - 2, 1 + 10 * u(rng), g);
    const Filter fb = trial < 3 ? fa : make_rect_filter(4 * u(rng) - 2, 1 + 10 * u(rng), g);
    const Eigen::MatrixXd f = random_real_basis(g, 4, rng, 15);
    const Eigen::MatrixXd h = random_real_basis(g, 4, rng, 15);
    const auto basis = make_basis((f / std::sqrt(g.d_omega)).cast<std::complex<double>>(),
                                  (h / std::sqrt(g.d_omega)).cast<std::complex<double>>(), g, "random");
    const auto cov = assemble_covariance(filtered_projections(ref.schmidt, fa, fb, basis), 4);
    const oracle::BinChannel ch(psi, phi, ref.schmidt.r(), fa.transmission.real(), fb.transmission.real());
    EXPECT_LT((cov.sigma - ch.measure(f, h)).cwiseAbs().maxCoeff(), 1e-10) << trial;
    EXPECT_LT(cov.imag_residue, 1e-12);
  }
}

TEST(Covariance, FlatLossMatchesLossyBlock) {
  const auto ref = fixture::reference();
  for (double eta : {0.25, 0.5, 0.9}) {
    const auto fl = make_flat_filter(std::sqrt(eta), ref.grid);
    const auto cov = assemble_covariance(filtered_projections(ref.schmidt, fl, fl, schmidt_basis(ref.schmidt, 5)), 5);
    for (int k = 0; k < 5; ++k) {
      for (int l = 0; l < 5; ++l) {
        const Eigen::Matrix4d expect = k == l ? oracle::lossy_epr_block(ref.schmidt.r()[k], eta) : Eigen::Matrix4d::Zero();
        EXPECT_LT((cov.sigma.block<4, 4>(4 * k, 4 * l) - expect).cwiseAbs().maxCoeff(), 1e-9);
      }
    }
  }
  // Rank-1 state.
  const auto g = build_frequency_grid(80, -15, 15);
  auto s = apply_gain(schmidt_decompose(build_gaussian_jsa(GaussianJsaParams{3, 3, 0, 0}, g), 3), 1.1);
  const auto fl = make_flat_filter(std::sqrt(0.5), g);
  const auto cov = assemble_covariance(filtered_projections(s, fl, fl, schmidt_basis(s, 1)), 1);
  EXPECT_LT((cov.sigma - oracle::lossy_epr_block(1.1, 0.5)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Covariance, UnphysicalProjectionsAreRejected) {
  const auto ref = fixture::reference();
  const auto id = make_identity_filter(ref.grid);
  auto p = filtered_projections(ref.schmidt, id, id, schmidt_basis(ref.schmidt, 3));
  p.Ua *= 0.5;
  p.Ub *= 0.5;
  EXPECT_THROW(assemble_covariance(p, 3), PhysicalityError);
  EXPECT_THROW(assemble_covariance(p, 4), ContractViolation);
}

TEST(Symplectic, KnownSpectra) {
  const Eigen::VectorXd vac = symplectic_eigenvalues(0.5 * Eigen::MatrixXd::Identity(8, 8));
  EXPECT_EQ(vac.size(), 4);
  EXPECT_LT((vac.array() - 0.5).abs().maxCoeff(), 1e-14);
  for (double r : {0.1, 0.69, 2.0}) {
    const Eigen::VectorXd nu = symplectic_eigenvalues(analytic_epr_block(r));
    EXPECT_LT((nu.array() - 0.5).abs().maxCoeff(), 1e-10);
  }
  const Eigen::VectorXd bad = symplectic_eigenvalues(0.4 * Eigen::MatrixXd::Identity(4, 4));
  EXPECT_NEAR(bad.minCoeff(), 0.4, 1e-14);
  EXPECT_TRUE(check_physicality(0.5 * Eigen::MatrixXd::Identity(4, 4), 1e-9).physical);
  EXPECT_TRUE(check_physicality(analytic_epr_block(1.0), 1e-9).physical);
  EXPECT_FALSE(check_physicality(0.4 * Eigen::MatrixXd::Identity(4, 4), 1e-9).physical);
}

TEST(Symplectic, WilliamsonOracle) {
  // Thermal diag(nu) pushed through a product of random squeezers and beam splitters.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  const int m = 4;
  Eigen::VectorXd nu(m);
  nu << 0.5, 0.9, 1.7, 3.2;
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(2 * m, 2 * m);
  for (int step = 0; step < 12; ++step) {
    Eigen::MatrixXd t = Eigen::MatrixXd::Identity(2 * m, 2 * m);
    const int a = step % m, b = (step + 1) % m;
    const double z = u(rng), th = 3 * u(rng);
    t(2 * a, 2 * a) = std::exp(z);
    t(2 * a + 1, 2 * a + 1) = std::exp(-z);
    Eigen::MatrixXd bs = Eigen::MatrixXd::Identity(2 * m, 2 * m);
    for (int q = 0; q < 2; ++q) {
      bs(2 * a + q, 2 * a + q) = std::cos(th);
      bs(2 * a + q, 2 * b + q) = std::sin(th);
      bs(2 * b + q, 2 * a + q) = -std::sin(th);
      bs(2 * b + q, 2 * b + q) = std::cos(th);
    }
    s = bs * t * s;
  }
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  for (int j = 0; j < m; ++j) d(2 * j, 2 * j) = d(2 * j + 1, 2 * j + 1) = nu[j];
  const Eigen::MatrixXd sigma = s * d * s.transpose();
  const Eigen::MatrixXd omega = symplectic_form(m);
  ASSERT_LT((s * omega * s.transpose() - omega).cwiseAbs().maxCoeff(), 1e-12);
  const Eigen::VectorXd got = symplectic_eigenvalues(0.5 * (sigma + sigma.transpose()));
  for (int j = 0; j < m; ++j) EXPECT_NEAR(got[j], nu[m - 1 - j], 1e-9);
}

TEST(Symplectic, Contracts) {
  Eigen::MatrixXd a = 0.5 * Eigen::MatrixXd::Identity(4, 4);
  a(0, 1) = 0.1;
  EXPECT_THROW(symplectic_eigenvalues(a), ContractViolation);
  EXPECT_THROW(symplectic_eigenvalues(Eigen::MatrixXd::Identity(3, 3)), ContractViolation);
  Eigen::MatrixXd neg = -Eigen::MatrixXd::Identity(2, 2);
  EXPECT_THROW(symplectic_eigenvalues(neg), NumericalError);
  EXPECT_FALSE(check_physicality(neg, 1e-9).physical);
}

TEST(CovarianceCsv, RoundTripIsExact) {
  const auto ref = fixture::reference();
  const auto fa = make_rect_filter(0, 4, ref.grid);
  const auto eff = svd_effective_basis(ref.jsa, ref.gain_B, fa, fa, 10);
  const auto cov = assemble_covariance(filtered_projections(ref.schmidt, fa, fa, eff.basis(5)), 5);
  const auto path = std::filesystem::temp_directory_path() / "pdcf_cov_roundtrip.csv";
  write_covariance_csv(cov.sigma, path);
  const Eigen::MatrixXd back = read_covariance_csv(path);
  ASSERT_EQ(back.rows(), 20);
  EXPECT_LT((back - cov.sigma).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(back, cov.sigma);
  std::filesystem::remove(path);
  EXPECT_THROW(read_covariance_csv(path), IoError);
}
