#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sage/attack.hpp"
#include "sage/config.hpp"
#include "sage/estimator.hpp"
#include "sage/graph.hpp"
#include "sage/measurement.hpp"

namespace sage {

struct MetricSample {
  std::uint64_t iter = 0;
  double max_rmse = 0.0;   ///< max_n ||x_n(t) - theta||_2
  double mean_rmse = 0.0;  ///< mean_n ||x_n(t) - theta||_2
  double consensus_residual = 0.0;
  double saturated_frac = 0.0;  ///< share of gains below 1 in the step that produced x(t)
};

struct EstimatorTrace {
  EstimatorKind kind = EstimatorKind::kSage;
  std::vector<MetricSample> samples;
  std::vector<Eigen::VectorXd> final_estimates;
  GainStats gains;
};

struct TrialResult {
  std::uint64_t trial_index = 0;
  std::vector<std::size_t> compromised;  ///< 0-based streams
  std::vector<EstimatorTrace> traces;

  const EstimatorTrace& trace(EstimatorKind kind) const;
};

struct Summary {
  double mean = 0.0;
  double median = 0.0;
  double q05 = 0.0;
  double q95 = 0.0;
};

/// Mean and linearly interpolated quantiles. Throws on an empty input.
Summary summarize(std::vector<double> values);
double quantile(std::vector<double> values, double q);

struct AggregatePoint {
  std::uint64_t iter = 0;
  Summary max_rmse;
  Summary mean_rmse;
  Summary consensus_residual;
  Summary saturated_frac;
};

struct EstimatorAggregate {
  EstimatorKind kind = EstimatorKind::kSage;
  std::vector<AggregatePoint> points;
  GainStats gains;

  const AggregatePoint& at(std::uint64_t iter) const;
  const AggregatePoint& final() const { return points.back(); }
};

struct ExperimentResult {
  std::vector<TrialResult> trials;  ///< sorted by trial index
  std::vector<EstimatorAggregate> aggregates;

  const EstimatorAggregate& aggregate(EstimatorKind kind) const;
};

/// Cross-trial statistics. The result does not depend on the order of `trials`.
std::vector<EstimatorAggregate> aggregate_trials(std::vector<TrialResult>& trials);

/// Max and mean over agents of ||x_n - theta||_2.
std::pair<double, double> local_errors(const std::vector<Eigen::VectorXd>& estimates,
                                       const Eigen::VectorXd& theta);

/// Materialized experiment: base graph, noise level and weights resolved
/// from a configuration. Immutable and shareable across threads.
class Experiment {
 public:
  explicit Experiment(SimulationConfig config);

  const SimulationConfig& config() const noexcept { return config_; }
  const NetworkModel& network() const noexcept { return network_; }
  const MeasurementModel& model() const noexcept { return model_; }
  const WeightSchedule& schedule() const noexcept { return schedule_; }
  const Eigen::VectorXd& theta() const noexcept { return config_.theta; }
  /// Seed that produced the base graph (after connectivity retries).
  std::uint64_t graph_seed() const noexcept { return graph_seed_; }

  AttackScenario scenario_for_trial(std::uint64_t trial_index) const;

  /// T synchronous rounds; every configured estimator sees the same graph
  /// instances, noise and attack. Deterministic in (seed, trial_index).
  /// Throws NonFinite if an estimate overflows.
  TrialResult run_trial(std::uint64_t trial_index) const;

  /// All trials, spread over thread_budget() workers.
  ExperimentResult run() const;

 private:
  SimulationConfig config_;
  std::uint64_t graph_seed_ = 0;  // set while building network_
  NetworkModel network_;
  MeasurementModel model_;
  WeightSchedule schedule_;
};

TrialResult run_trial(const SimulationConfig& config, std::uint64_t trial_index);
ExperimentResult run_experiment(const SimulationConfig& config);

/// Worker count: SAGE_THREADS if set, else hardware concurrency.
std::size_t thread_budget();

struct SweepRow {
  double value = 0.0;
  EstimatorKind kind = EstimatorKind::kSage;
  std::uint64_t iter = 0;
  Summary final_max_rmse;
};

/// One experiment per Gamma; everything else fixed.
std::vector<SweepRow> sweep_gamma(const SimulationConfig& config, const std::vector<double>& gammas);

/// One experiment per number of attacked agents, drawn afresh in every trial.
std::vector<SweepRow> sweep_attack_count(const SimulationConfig& config, const std::vector<std::size_t>& counts);

struct SeriesPoint {
  double t;
  double value;
};

/// Least-squares slope of log(value) against log(t + 1) over the last half
/// of the series. Throws DegenerateSeries for fewer than 10 points or any
/// non-positive value.
double decay_slope(std::span<const SeriesPoint> series);

}  // namespace sage
