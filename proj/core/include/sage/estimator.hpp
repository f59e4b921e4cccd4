#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "sage/graph.hpp"
#include "sage/measurement.hpp"

namespace sage {

/// alpha_t = a/(t+1)^tau1, beta_t = b/(t+1)^tau2, gamma_t = Gamma/(t+1)^tau_gamma.
class WeightSchedule {
 public:
  /// Throws InvalidSchedule unless a, b, Gamma > 0, 0 < tau2 < tau1 < 1 and
  /// 0 < tau_gamma < min(1/2, tau1 - tau2).
  WeightSchedule(double a, double tau1, double b, double tau2, double gamma_scale, double tau_gamma);

  double alpha(std::uint64_t t) const;
  double beta(std::uint64_t t) const;
  double gamma(std::uint64_t t) const;

  double a() const noexcept { return a_; }
  double tau1() const noexcept { return tau1_; }
  double b() const noexcept { return b_; }
  double tau2() const noexcept { return tau2_; }
  double gamma_scale() const noexcept { return gamma_scale_; }
  double tau_gamma() const noexcept { return tau_gamma_; }

 private:
  double a_, tau1_, b_, tau2_, gamma_scale_, tau_gamma_;
};

/// a = 1, b = 1/lambda_N(L), tau1 = 0.26, tau2 = 0.001, tau_gamma = 0.25.
/// Gamma has no rule and is supplied by the caller. Throws DegenerateGraph
/// when lambda_N(L) = 0.
WeightSchedule recommended_weights(const Eigen::MatrixXd& base_laplacian, double gamma_scale);

/// min(1, threshold / |innovation|); 1 for a zero innovation.
double saturating_gain(double innovation, double threshold);

enum class EstimatorKind { kSage, kBaseline };

std::string_view to_string(EstimatorKind kind);
EstimatorKind parse_estimator_kind(std::string_view name);

/// Per-agent estimates x_n(t) and measurement running averages.
class EstimatorState {
 public:
  /// x_n(0) = 0 for every agent.
  explicit EstimatorState(const MeasurementModel& model);
  EstimatorState(std::vector<Eigen::VectorXd> estimates, std::vector<RunningAverage> averages,
                 std::uint64_t iteration);

  std::uint64_t iteration() const noexcept { return t_; }
  std::size_t agent_count() const noexcept { return x_.size(); }
  const std::vector<Eigen::VectorXd>& estimates() const noexcept { return x_; }
  const Eigen::VectorXd& estimate(std::size_t n) const { return x_.at(n); }
  const std::vector<RunningAverage>& running_averages() const noexcept { return avg_; }

  /// Across-agent mean estimate.
  Eigen::VectorXd mean_estimate() const;
  bool finite() const;

 private:
  friend struct StepKernel;
  std::vector<Eigen::VectorXd> x_;
  std::vector<RunningAverage> avg_;
  std::uint64_t t_ = 0;
};

/// Gain bookkeeping for one or more steps.
struct GainStats {
  std::uint64_t total = 0;
  std::uint64_t saturated = 0;   ///< gains with k_p < 1
  std::uint64_t violations = 0;  ///< k_p outside (0, 1] or |k_p * innovation| > gamma_t

  double saturated_fraction() const noexcept {
    return total == 0 ? 0.0 : static_cast<double>(saturated) / static_cast<double>(total);
  }
  GainStats& operator+=(const GainStats& o) noexcept {
    total += o.total;
    saturated += o.saturated;
    violations += o.violations;
    return *this;
  }
};

struct StepResult {
  EstimatorState state;
  GainStats gains;
};

/// One synchronous round of the saturating adaptive gain estimator.
///
/// Every agent first folds y_n(t) into its running average, then forms the
/// innovation ybar_n(t) - H_n x_n(t), saturates each component at gamma_t and
/// moves by the consensus and innovation terms:
///
///   x_n(t+1) = x_n(t) - beta_t sum_{l in Omega_n(t)} (x_n(t) - x_l(t))
///                     + alpha_t H_n^T K_n(t) (ybar_n(t) - H_n x_n(t)).
///
/// Neighbours are read at iteration t only. `measurements` is the stacked,
/// already attacked vector y(t). Throws DimensionMismatch.
StepResult sage_step(const EstimatorState& state, const WeightSchedule& schedule, const Graph& graph,
                     const Eigen::VectorXd& measurements, const MeasurementModel& model);

/// Same round with K_n(t) = I (plain consensus+innovations).
StepResult baseline_step(const EstimatorState& state, const WeightSchedule& schedule, const Graph& graph,
                         const Eigen::VectorXd& measurements, const MeasurementModel& model);

StepResult estimator_step(EstimatorKind kind, const EstimatorState& state, const WeightSchedule& schedule,
                          const Graph& graph, const Eigen::VectorXd& measurements,
                          const MeasurementModel& model);

/// ||x - 1 (x) xbar||_2 over all agents.
double consensus_residual(const EstimatorState& state);

}  // namespace sage
