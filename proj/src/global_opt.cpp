#include "pdcf/global_opt.hpp"

#include "pdcf/covariance.hpp"
#include "pdcf/csv.hpp"
#include "pdcf/errors.hpp"
#include "pdcf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

namespace pdcf {

namespace {

constexpr const char* kModule = "global_opt";
constexpr double kRankTolerance = 1e-10;

Eigen::MatrixXd real_part(const Eigen::MatrixXcd& m) { return m.real(); }

}  // namespace

void GaParams::validate() const {
  if (population < 4 || population % 2 != 0) throw ConfigError(kModule, "population must be even and at least 4");
  if (!(mutation_prob >= 0.0 && mutation_prob <= 1.0)) throw ConfigError(kModule, "mutation_prob must lie in [0, 1]");
  if (!(mutation_sigma >= 0.0) || !std::isfinite(mutation_sigma)) {
    throw ConfigError(kModule, "mutation_sigma must be finite and non-negative");
  }
  if (!(convergence_tol > 0.0)) throw ConfigError(kModule, "convergence_tol must be positive");
  if (convergence_window < 1) throw ConfigError(kModule, "convergence_window must be at least 1");
  if (max_generations < 1) throw ConfigError(kModule, "max_generations must be at least 1");
}

std::optional<QrFactors> qr_orthonormalize(const Eigen::MatrixXd& A) {
  if (A.cols() == 0 || A.rows() < A.cols()) throw ContractViolation(kModule, "QR needs a tall, non-empty matrix");
  if (!A.allFinite()) return std::nullopt;
  const Eigen::Index k = A.cols();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  QrFactors out;
  out.R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  out.Q = qr.householderQ() * Eigen::MatrixXd::Identity(A.rows(), k);
  const double scale = std::max(A.norm(), std::numeric_limits<double>::min());
  for (Eigen::Index i = 0; i < k; ++i) {
    if (std::abs(out.R(i, i)) <= kRankTolerance * scale) return std::nullopt;
    if (out.R(i, i) < 0.0) {
      out.R.row(i) *= -1.0;
      out.Q.col(i) *= -1.0;
    }
  }
  return out;
}

StateContext::StateContext(SchmidtData s, Filter fa, Filter fb)
    : schmidt(std::move(s)), filter_a(std::move(fa)), filter_b(std::move(fb)), kernels(build_uv_kernels(schmidt)) {
  if (!(filter_a.grid == schmidt.grid) || !(filter_b.grid == schmidt.grid)) {
    throw ConfigError(kModule, "filter grid does not match the Schmidt grid");
  }
}

double objective_squeezing(const StateContext& ctx, const Eigen::MatrixXd& phi, int k_prime) {
  if (k_prime < 0 || k_prime >= phi.cols()) throw ContractViolation(kModule, "objective mode index out of range");
  const Eigen::MatrixXcd fns = phi.cast<std::complex<double>>();
  const MeasurementBasis basis = make_basis(fns, fns, ctx.schmidt.grid, "ga");
  const ProjectionSet proj = filtered_projections(ctx.kernels, ctx.filter_a, ctx.filter_b, basis);
  const Eigen::MatrixXd block = covariance_block(proj, k_prime, k_prime);
  return mode_squeezing_db(block, 0).squeezing_db;
}

SharedBasisObjective::SharedBasisObjective(const StateContext& ctx) : d_omega(ctx.schmidt.grid.d_omega) {
  const UvKernels& k = ctx.kernels;
  const Eigen::MatrixXcd kua = ctx.filter_a.transmission.asDiagonal() * k.Ua * d_omega;
  const Eigen::MatrixXcd kva = ctx.filter_a.transmission.asDiagonal() * k.Va * d_omega;
  const Eigen::MatrixXcd kub = ctx.filter_b.transmission.asDiagonal() * k.Ub * d_omega;
  const Eigen::MatrixXcd kvb = ctx.filter_b.transmission.asDiagonal() * k.Vb * d_omega;
  const Eigen::VectorXd ra2 = ctx.filter_a.reflection().array().square();
  const Eigen::VectorXd rb2 = ctx.filter_b.reflection().array().square();

  Eigen::MatrixXd a = real_part(kua * kua.adjoint()) + real_part(kva * kva.adjoint());
  a.diagonal() += ra2;
  Eigen::MatrixXd b = real_part(kub * kub.adjoint()) + real_part(kvb * kvb.adjoint());
  b.diagonal() += rb2;
  Eigen::MatrixXd e = real_part(kua * kvb.transpose() + kub * kva.transpose());
  e = 0.5 * (e + e.transpose()).eval();
  a = 0.5 * (a + a.transpose()).eval();
  b = 0.5 * (b + b.transpose()).eval();

  m_minus = 0.5 * (a + b) - e;
  m_plus = 0.5 * (a + b) + e;
}

double SharedBasisObjective::squeezing_db_hat(const Eigen::VectorXd& phi_hat) const {
  const double minus = phi_hat.dot(m_minus * phi_hat);
  const double plus = phi_hat.dot(m_plus * phi_hat);
  if (!(minus > 0.0) || !(plus > 0.0)) throw NumericalError(kModule, "non-positive EPR variance in fitness");
  return std::max(-10.0 * std::log10(minus), -10.0 * std::log10(plus));
}

double SharedBasisObjective::squeezing_db(const Eigen::VectorXd& phi) const {
  return squeezing_db_hat(phi * std::sqrt(d_omega));
}

MeasurementBasis OptimizedBasis::basis() const {
  const Eigen::MatrixXcd fns = modes.cast<std::complex<double>>();
  return make_basis(fns, fns, grid, "ga");
}

std::string OptimizedBasis::log_csv() const {
  std::string out = "mode,generation,best_db,mean_db\n";
  for (const auto& e : log) {
    out += std::to_string(e.mode + 1) + ',' + std::to_string(e.generation) + ',' + csv::format_double(e.best_db) +
           ',' + csv::format_double(e.mean_db) + '\n';
  }
  return out;
}

namespace {

// One mode's search. Only the column `mode` of the gene matrix evolves.
class ColumnSearch {
 public:
  ColumnSearch(const SharedBasisObjective& objective, const Eigen::MatrixXd& frozen_genes, int mode, int threads)
      : objective_(objective), frozen_(frozen_genes), mode_(mode), threads_(std::max(1, threads)) {}

  std::optional<double> fitness(const Eigen::VectorXd& column) const {
    Eigen::MatrixXd a(frozen_.rows(), mode_ + 1);
    a.leftCols(mode_) = frozen_.leftCols(mode_);
    a.col(mode_) = column;
    const auto qr = qr_orthonormalize(a);
    if (!qr) return std::nullopt;
    return objective_.squeezing_db_hat(qr->Q.col(mode_));
  }

  // Parallel over individuals; consumes no randomness.
  std::vector<std::optional<double>> evaluate(const std::vector<Eigen::VectorXd>& genes) const {
    std::vector<std::optional<double>> out(genes.size());
    const std::size_t n = genes.size();
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads_), n);
    if (workers <= 1) {
      for (std::size_t i = 0; i < n; ++i) out[i] = fitness(genes[i]);
      return out;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < n; i += workers) out[i] = fitness(genes[i]);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    return out;
  }

 private:
  const SharedBasisObjective& objective_;
  const Eigen::MatrixXd& frozen_;
  int mode_;
  int threads_;
};

}  // namespace

OptimizedBasis ga_optimize_basis(const StateContext& ctx, int k_max, const GaParams& params, int threads) {
  params.validate();
  const FrequencyGrid& grid = ctx.schmidt.grid;
  const int l = grid.n_points;
  if (k_max < 1 || k_max > ctx.schmidt.n_retained || k_max > l) {
    throw ConfigError(kModule, "k_max must lie in [1, n_retained]");
  }
  if (l < 2) throw ConfigError(kModule, "grid too small for crossover");

  const SharedBasisObjective objective(ctx);
  std::mt19937_64 rng(params.rng_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, params.population - 1);
  std::uniform_int_distribution<int> cut(1, l - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const auto random_column = [&] {
    Eigen::VectorXd v(l);
    for (int i = 0; i < l; ++i) v[i] = normal(rng);
    return v;
  };

  OptimizedBasis out;
  out.grid = grid;
  out.genes = Eigen::MatrixXd::Zero(l, k_max);
  out.modes = Eigen::MatrixXd::Zero(l, k_max);
  Eigen::MatrixXd frozen_q(l, 0);

  for (int mode = 0; mode < k_max; ++mode) {
    const ColumnSearch search(objective, out.genes, mode, threads);

    // Evaluated in parallel, then any rank-deficient individual is redrawn sequentially.
    const auto evaluate = [&](std::vector<Eigen::VectorXd>& genes) {
      auto fit = search.evaluate(genes);
      std::vector<double> values(genes.size());
      for (std::size_t i = 0; i < genes.size(); ++i) {
        while (!fit[i]) {
          genes[i] = random_column();
          fit[i] = search.fitness(genes[i]);
        }
        values[i] = *fit[i];
      }
      return values;
    };

    std::vector<Eigen::VectorXd> population(static_cast<std::size_t>(params.population));
    for (auto& g : population) g = random_column();
    std::vector<double> fitness = evaluate(population);

    const auto record = [&](int generation) {
      const double mean = std::accumulate(fitness.begin(), fitness.end(), 0.0) / static_cast<double>(fitness.size());
      out.log.push_back({mode, generation, fitness.front(), mean});
    };
    {
      std::vector<std::size_t> order(population.size());
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return fitness[i] > fitness[j]; });
      std::vector<Eigen::VectorXd> p;
      std::vector<double> f;
      for (auto i : order) {
        p.push_back(std::move(population[i]));
        f.push_back(fitness[i]);
      }
      population = std::move(p);
      fitness = std::move(f);
    }
    record(0);

    std::vector<double> best_history{fitness.front()};
    bool converged = false;
    int generation = 0;
    while (generation < params.max_generations) {
      ++generation;
      std::vector<Eigen::VectorXd> children;
      children.reserve(population.size());
      for (int pair = 0; pair < params.population / 2; ++pair) {
        const Eigen::VectorXd& p1 = population[static_cast<std::size_t>(pick(rng))];
        const Eigen::VectorXd& p2 = population[static_cast<std::size_t>(pick(rng))];
        const int c = cut(rng);
        Eigen::VectorXd c1(l), c2(l);
        c1.head(c) = p1.head(c);
        c1.tail(l - c) = p2.tail(l - c);
        c2.head(c) = p2.head(c);
        c2.tail(l - c) = p1.tail(l - c);
        children.push_back(std::move(c1));
        children.push_back(std::move(c2));
      }
      for (auto& child : children) {
        for (int i = 0; i < l; ++i) {
          if (unit(rng) < params.mutation_prob) child[i] += params.mutation_sigma * normal(rng);
        }
      }
      const std::vector<double> child_fitness = evaluate(children);

      // Parents and children compete; the best `population` survive (parents win ties).
      std::vector<std::size_t> order(population.size() + children.size());
      std::iota(order.begin(), order.end(), 0);
      const std::size_t np = population.size();
      const auto fit_of = [&](std::size_t i) { return i < np ? fitness[i] : child_fitness[i - np]; };
      std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return fit_of(i) > fit_of(j); });
      std::vector<Eigen::VectorXd> next;
      std::vector<double> next_fit;
      next.reserve(np);
      next_fit.reserve(np);
      for (std::size_t s = 0; s < np; ++s) {
        const std::size_t i = order[s];
        next_fit.push_back(fit_of(i));
        next.push_back(i < np ? population[i] : children[i - np]);
      }
      population = std::move(next);
      fitness = std::move(next_fit);
      record(generation);
      best_history.push_back(fitness.front());

      const int w = params.convergence_window;
      if (generation >= w && best_history[static_cast<std::size_t>(generation)] -
                                     best_history[static_cast<std::size_t>(generation - w)] <
                                 params.convergence_tol) {
        converged = true;
        break;
      }
    }

    out.genes.col(mode) = population.front();
    const auto qr = qr_orthonormalize(out.genes.leftCols(mode + 1));
    if (!qr) throw NumericalError(kModule, "winning gene matrix is rank deficient");
    Eigen::MatrixXd q(l, mode + 1);
    q.leftCols(mode) = frozen_q;
    q.col(mode) = qr->Q.col(mode);
    frozen_q = q;
    out.modes.col(mode) = qr->Q.col(mode) / std::sqrt(grid.d_omega);
    out.per_mode_squeezing_db.push_back(fitness.front());
    out.generations_used.push_back(generation);
    out.converged.push_back(converged);
  }
  return out;
}

}  // namespace pdcf
