#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace dptune {

struct BoxBounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  std::size_t dimension() const { return static_cast<std::size_t>(lower.size()); }
  /// Throws std::invalid_argument unless lower < upper component-wise (and finite).
  void validate() const;
  bool contains(const Eigen::VectorXd& x) const;
  Eigen::VectorXd from_unit(const Eigen::VectorXd& u) const;
  Eigen::VectorXd to_unit(const Eigen::VectorXd& x) const;
};

struct CmaConfig {
  std::size_t population = 0;  // 0 selects 4 + floor(3 ln n)
  double sigma0 = 0.3;         // in the unit cube
  std::size_t max_evaluations = 30000;
  std::uint64_t seed = 1;
  std::size_t stagnation_generations = 50;
  double stagnation_tolerance = 0.0;
  double sigma_floor = 1e-10;
  double max_condition = 1e14;  // covariance condition number that forces a restart
  double repair_weight = 1e3;   // multiplies the squared unit-cube repair distance
  double target_fitness = -std::numeric_limits<double>::infinity();
  std::size_t workers = 1;
};

/// Standard (mu/mu_w, lambda) CMA-ES internals. The search runs in the unit cube
/// mapped affinely onto the box.
struct CmaState {
  BoxBounds bounds;
  CmaConfig config;

  std::size_t dimension = 0;
  std::size_t lambda = 0;
  std::size_t mu = 0;
  Eigen::VectorXd weights;
  double mueff = 0.0;
  double cc = 0.0, cs = 0.0, c1 = 0.0, cmu = 0.0, damps = 0.0, chi_n = 0.0;

  Eigen::VectorXd mean;
  double sigma = 0.0;
  Eigen::MatrixXd covariance;
  Eigen::MatrixXd basis;  // eigenvectors of the covariance
  Eigen::VectorXd scales; // square roots of its eigenvalues
  Eigen::VectorXd path_sigma;
  Eigen::VectorXd path_c;

  std::size_t generation = 0;
  std::size_t evaluations = 0;
  std::size_t restarts = 0;

  Eigen::VectorXd best_x;
  double best_f = std::numeric_limits<double>::infinity();

  std::mt19937_64 rng;
};

struct CandidateBatch {
  std::vector<Eigen::VectorXd> candidates;  // repaired, in box coordinates
  std::vector<Eigen::VectorXd> unit;        // repaired, in unit-cube coordinates
  std::vector<double> repair_penalty;       // repair_weight * |raw - repaired|^2 (unit cube)
};

/// Default population size 4 + floor(3 ln n).
std::size_t default_population(std::size_t dimension);

CmaState initialize(const BoxBounds& bounds, const CmaConfig& config);

/// Samples lambda candidates and clamps each into the box.
CandidateBatch ask(CmaState& state);

/// Ranks by objective + repair penalty and updates mean, paths, covariance and
/// step size. Best-so-far tracks the plain objective of the repaired points.
/// Throws std::invalid_argument on size mismatch or non-finite values.
void tell(CmaState& state, const CandidateBatch& batch, std::span<const double> values);

struct GenerationRecord {
  std::size_t generation = 0;
  std::size_t evaluations = 0;
  double best_f = 0.0;
  double sigma = 0.0;
  Eigen::VectorXd mean;  // box coordinates
};

struct OptimizationResult {
  Eigen::VectorXd best_x;
  double best_f = std::numeric_limits<double>::infinity();
  std::size_t evaluations = 0;
  std::size_t restarts = 0;
  std::string stop_reason;
  std::vector<GenerationRecord> history;
};

using ObjectiveFunction = std::function<double(const Eigen::VectorXd&)>;

/// ask/tell loop until the evaluation budget, the target, fitness stagnation or
/// the sigma floor. Candidates of one generation are evaluated by
/// config.workers threads; results are consumed in sampling order.
OptimizationResult optimize(const ObjectiveFunction& f, const BoxBounds& bounds,
                            const CmaConfig& config);

/// generation,evaluations,best_f,sigma
void write_history_csv(std::ostream& out, const std::vector<GenerationRecord>& history);

}  // namespace dptune
