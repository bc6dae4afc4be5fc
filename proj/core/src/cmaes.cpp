#include "dptune/cmaes.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "dptune/io.hpp"

namespace dptune {

void BoxBounds::validate() const {
  if (lower.size() == 0 || lower.size() != upper.size()) {
    throw std::invalid_argument("box bounds must be non-empty and of equal length");
  }
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (!std::isfinite(lower(i)) || !std::isfinite(upper(i)) || !(lower(i) < upper(i))) {
      throw std::invalid_argument("degenerate box in dimension " + std::to_string(i));
    }
  }
}

bool BoxBounds::contains(const Eigen::VectorXd& x) const {
  if (x.size() != lower.size()) return false;
  return (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
}

Eigen::VectorXd BoxBounds::from_unit(const Eigen::VectorXd& u) const {
  Eigen::VectorXd x = lower.array() + u.array() * (upper - lower).array();
  // Guard the end points against rounding in the affine map.
  return x.cwiseMax(lower).cwiseMin(upper);
}

Eigen::VectorXd BoxBounds::to_unit(const Eigen::VectorXd& x) const {
  return ((x - lower).array() / (upper - lower).array()).matrix();
}

std::size_t default_population(std::size_t dimension) {
  return 4 + static_cast<std::size_t>(std::floor(3.0 * std::log(static_cast<double>(dimension))));
}

namespace {

void reset_distribution(CmaState& s) {
  const auto n = static_cast<Eigen::Index>(s.dimension);
  s.sigma = s.config.sigma0;
  s.covariance = Eigen::MatrixXd::Identity(n, n);
  s.basis = Eigen::MatrixXd::Identity(n, n);
  s.scales = Eigen::VectorXd::Ones(n);
  s.path_sigma = Eigen::VectorXd::Zero(n);
  s.path_c = Eigen::VectorXd::Zero(n);
}

// Returns false when the covariance has lost positive definiteness or its
// condition number exceeds the ceiling.
bool decompose(CmaState& s) {
  s.covariance = 0.5 * (s.covariance + s.covariance.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.covariance);
  if (eig.info() != Eigen::Success) return false;
  const Eigen::VectorXd values = eig.eigenvalues();
  const double smallest = values.minCoeff();
  const double largest = values.maxCoeff();
  if (!(smallest > 0.0) || !(largest / smallest <= s.config.max_condition)) return false;
  s.basis = eig.eigenvectors();
  s.scales = values.cwiseSqrt();
  return true;
}

}  // namespace

CmaState initialize(const BoxBounds& bounds, const CmaConfig& config) {
  bounds.validate();
  if (!(config.sigma0 > 0.0)) throw std::invalid_argument("sigma0 must be positive");

  CmaState s;
  s.bounds = bounds;
  s.config = config;
  s.dimension = bounds.dimension();
  s.lambda = config.population == 0 ? default_population(s.dimension) : config.population;
  if (s.lambda < 4) throw std::invalid_argument("population must be at least 4");
  s.mu = s.lambda / 2;

  const double n = static_cast<double>(s.dimension);
  s.weights.resize(static_cast<Eigen::Index>(s.mu));
  for (std::size_t i = 0; i < s.mu; ++i) {
    s.weights(static_cast<Eigen::Index>(i)) =
        std::log((static_cast<double>(s.lambda) + 1.0) / 2.0) - std::log(static_cast<double>(i + 1));
  }
  s.weights /= s.weights.sum();
  s.mueff = 1.0 / s.weights.squaredNorm();

  s.cc = (4.0 + s.mueff / n) / (n + 4.0 + 2.0 * s.mueff / n);
  s.cs = (s.mueff + 2.0) / (n + s.mueff + 5.0);
  s.c1 = 2.0 / ((n + 1.3) * (n + 1.3) + s.mueff);
  s.cmu = std::min(1.0 - s.c1,
                   2.0 * (s.mueff - 2.0 + 1.0 / s.mueff) / ((n + 2.0) * (n + 2.0) + s.mueff));
  s.damps = 1.0 + 2.0 * std::max(0.0, std::sqrt((s.mueff - 1.0) / (n + 1.0)) - 1.0) + s.cs;
  s.chi_n = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));

  s.mean = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(s.dimension), 0.5);
  reset_distribution(s);
  s.rng.seed(config.seed);
  return s;
}

CandidateBatch ask(CmaState& state) {
  const auto n = static_cast<Eigen::Index>(state.dimension);
  std::normal_distribution<double> normal(0.0, 1.0);
  CandidateBatch batch;
  batch.candidates.reserve(state.lambda);
  batch.unit.reserve(state.lambda);
  batch.repair_penalty.reserve(state.lambda);
  for (std::size_t k = 0; k < state.lambda; ++k) {
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(state.rng);
    const Eigen::VectorXd raw = state.mean + state.sigma * (state.basis * state.scales.cwiseProduct(z));
    const Eigen::VectorXd repaired = raw.cwiseMax(0.0).cwiseMin(1.0);
    batch.repair_penalty.push_back(state.config.repair_weight * (raw - repaired).squaredNorm());
    batch.unit.push_back(repaired);
    batch.candidates.push_back(state.bounds.from_unit(repaired));
  }
  return batch;
}

void tell(CmaState& s, const CandidateBatch& batch, std::span<const double> values) {
  if (batch.unit.size() != s.lambda || values.size() != s.lambda ||
      batch.repair_penalty.size() != s.lambda) {
    throw std::invalid_argument("tell expects exactly lambda candidates and values");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("tell received a non-finite fitness");
  }

  std::vector<double> fitness(s.lambda);
  for (std::size_t k = 0; k < s.lambda; ++k) fitness[k] = values[k] + batch.repair_penalty[k];
  std::vector<std::size_t> order(s.lambda);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return fitness[a] < fitness[b]; });

  s.evaluations += s.lambda;
  for (std::size_t k = 0; k < s.lambda; ++k) {
    if (values[k] < s.best_f) {
      s.best_f = values[k];
      s.best_x = batch.candidates[k];
    }
  }

  const double n = static_cast<double>(s.dimension);
  const Eigen::VectorXd old_mean = s.mean;
  s.mean.setZero();
  for (std::size_t i = 0; i < s.mu; ++i) {
    s.mean += s.weights(static_cast<Eigen::Index>(i)) * batch.unit[order[i]];
  }
  const Eigen::VectorXd step = (s.mean - old_mean) / s.sigma;

  // C^{-1/2} step
  const Eigen::VectorXd whitened =
      s.basis * (s.basis.transpose() * step).cwiseQuotient(s.scales);
  s.path_sigma = (1.0 - s.cs) * s.path_sigma + std::sqrt(s.cs * (2.0 - s.cs) * s.mueff) * whitened;

  const double gen = static_cast<double>(s.generation + 1);
  const double ps_norm = s.path_sigma.norm();
  const bool hsig = ps_norm / std::sqrt(1.0 - std::pow(1.0 - s.cs, 2.0 * gen)) / s.chi_n <
                    1.4 + 2.0 / (n + 1.0);
  s.path_c = (1.0 - s.cc) * s.path_c +
             (hsig ? std::sqrt(s.cc * (2.0 - s.cc) * s.mueff) : 0.0) * step;

  Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(s.covariance.rows(), s.covariance.cols());
  for (std::size_t i = 0; i < s.mu; ++i) {
    const Eigen::VectorXd y = (batch.unit[order[i]] - old_mean) / s.sigma;
    rank_mu.noalias() += s.weights(static_cast<Eigen::Index>(i)) * y * y.transpose();
  }
  const double hsig_correction = hsig ? 0.0 : s.cc * (2.0 - s.cc);
  s.covariance = (1.0 - s.c1 - s.cmu) * s.covariance +
                 s.c1 * (s.path_c * s.path_c.transpose() + hsig_correction * s.covariance) +
                 s.cmu * rank_mu;

  s.sigma *= std::exp((s.cs / s.damps) * (ps_norm / s.chi_n - 1.0));
  ++s.generation;

  if (!decompose(s)) {
    // Documented restart: keep the mean, reset the search distribution.
    reset_distribution(s);
    ++s.restarts;
  }
}

namespace {

std::vector<double> evaluate_batch(const ObjectiveFunction& f, const CandidateBatch& batch,
                                   std::size_t workers) {
  const std::size_t count = batch.candidates.size();
  std::vector<double> values(count);
  std::vector<std::exception_ptr> errors(count);
  auto run = [&](std::size_t first) {
    for (std::size_t k = first; k < count; k += workers) {
      try {
        values[k] = f(batch.candidates[k]);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    workers = 1;
    run(0);
  } else {
    workers = std::min(workers, count);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return values;
}

}  // namespace

OptimizationResult optimize(const ObjectiveFunction& f, const BoxBounds& bounds,
                            const CmaConfig& config) {
  CmaState state = initialize(bounds, config);
  OptimizationResult result;
  double last_improvement_f = state.best_f;
  std::size_t stagnant = 0;

  while (true) {
    if (state.evaluations + state.lambda > config.max_evaluations) {
      result.stop_reason = "budget";
      break;
    }
    const CandidateBatch batch = ask(state);
    const std::vector<double> values = evaluate_batch(f, batch, config.workers);
    tell(state, batch, values);

    GenerationRecord rec;
    rec.generation = state.generation;
    rec.evaluations = state.evaluations;
    rec.best_f = state.best_f;
    rec.sigma = state.sigma;
    rec.mean = bounds.from_unit(state.mean.cwiseMax(0.0).cwiseMin(1.0));
    result.history.push_back(std::move(rec));

    if (state.best_f <= config.target_fitness) {
      result.stop_reason = "target";
      break;
    }
    if (last_improvement_f - state.best_f > config.stagnation_tolerance ||
        !std::isfinite(last_improvement_f)) {
      last_improvement_f = state.best_f;
      stagnant = 0;
    } else if (++stagnant >= config.stagnation_generations) {
      result.stop_reason = "stagnation";
      break;
    }
    if (state.sigma < config.sigma_floor) {
      result.stop_reason = "sigma";
      break;
    }
  }

  result.best_x = state.best_x;
  result.best_f = state.best_f;
  result.evaluations = state.evaluations;
  result.restarts = state.restarts;
  return result;
}

void write_history_csv(std::ostream& out, const std::vector<GenerationRecord>& history) {
  out << "generation,evaluations,best_f,sigma\n";
  for (const auto& r : history) {
    out << r.generation << ',' << r.evaluations << ',' << format_double(r.best_f) << ','
        << format_double(r.sigma) << '\n';
  }
}

}  // namespace dptune
