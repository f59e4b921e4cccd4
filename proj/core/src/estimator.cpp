#include "sage/estimator.hpp"

#include <cassert>
#include <cmath>
#include <string>

#include "sage/errors.hpp"

namespace sage {

WeightSchedule::WeightSchedule(double a, double tau1, double b, double tau2, double gamma_scale, double tau_gamma)
    : a_(a), tau1_(tau1), b_(b), tau2_(tau2), gamma_scale_(gamma_scale), tau_gamma_(tau_gamma) {
  if (!(a > 0.0) || !(b > 0.0) || !(gamma_scale > 0.0)) {
    throw InvalidSchedule("a, b and Gamma must be positive");
  }
  if (!(0.0 < tau2 && tau2 < tau1 && tau1 < 1.0)) {
    throw InvalidSchedule("decay rates must satisfy 0 < tau2 < tau1 < 1");
  }
  if (!(0.0 < tau_gamma && tau_gamma < std::min(0.5, tau1 - tau2))) {
    throw InvalidSchedule("tau_gamma must satisfy 0 < tau_gamma < min(1/2, tau1 - tau2)");
  }
}

double WeightSchedule::alpha(std::uint64_t t) const {
  return a_ / std::pow(static_cast<double>(t) + 1.0, tau1_);
}

double WeightSchedule::beta(std::uint64_t t) const {
  return b_ / std::pow(static_cast<double>(t) + 1.0, tau2_);
}

double WeightSchedule::gamma(std::uint64_t t) const {
  return gamma_scale_ / std::pow(static_cast<double>(t) + 1.0, tau_gamma_);
}

WeightSchedule recommended_weights(const Eigen::MatrixXd& base_laplacian, double gamma_scale) {
  const double lambda_n = max_laplacian_eigenvalue(base_laplacian);
  if (!(lambda_n > kConnectivityThreshold)) {
    throw DegenerateGraph("base graph has no edges; lambda_N(L) = 0");
  }
  return WeightSchedule(1.0, 0.26, 1.0 / lambda_n, 0.001, gamma_scale, 0.25);
}

double saturating_gain(double innovation, double threshold) {
  const double magnitude = std::abs(innovation);
  if (magnitude <= threshold) return 1.0;
  return threshold / magnitude;
}

std::string_view to_string(EstimatorKind kind) {
  return kind == EstimatorKind::kSage ? "sage" : "baseline";
}

EstimatorKind parse_estimator_kind(std::string_view name) {
  if (name == "sage") return EstimatorKind::kSage;
  if (name == "baseline") return EstimatorKind::kBaseline;
  throw ConfigError("unknown estimator \"" + std::string(name) + "\"");
}

EstimatorState::EstimatorState(const MeasurementModel& model)
    : x_(model.agent_count(), Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.m_dim()))) {
  avg_.reserve(model.agent_count());
  for (std::size_t n = 0; n < model.agent_count(); ++n) avg_.emplace_back(model.streams_of(n).count);
}

EstimatorState::EstimatorState(std::vector<Eigen::VectorXd> estimates, std::vector<RunningAverage> averages,
                               std::uint64_t iteration)
    : x_(std::move(estimates)), avg_(std::move(averages)), t_(iteration) {
  if (x_.size() != avg_.size()) throw DimensionMismatch("one running average per agent is required");
}

Eigen::VectorXd EstimatorState::mean_estimate() const {
  if (x_.empty()) return {};
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(x_.front().size());
  for (const auto& x : x_) sum += x;
  return sum / static_cast<double>(x_.size());
}

bool EstimatorState::finite() const {
  for (const auto& x : x_) {
    if (!x.allFinite()) return false;
  }
  return true;
}

struct StepKernel {
  static StepResult run(bool saturate, const EstimatorState& state, const WeightSchedule& schedule,
                        const Graph& graph, const Eigen::VectorXd& y, const MeasurementModel& model) {
    const std::size_t agents = model.agent_count();
    const auto m = static_cast<Eigen::Index>(model.m_dim());
    if (state.x_.size() != agents) throw DimensionMismatch("state and model disagree on the number of agents");
    if (graph.size() != agents) throw DimensionMismatch("graph and model disagree on the number of agents");
    if (static_cast<std::size_t>(y.size()) != model.stream_count()) {
      throw DimensionMismatch("measurement vector has length " + std::to_string(y.size()) + ", expected " +
                              std::to_string(model.stream_count()));
    }
    for (std::size_t n = 0; n < agents; ++n) {
      if (state.x_[n].size() != m) throw DimensionMismatch("estimate of agent " + std::to_string(n + 1) + " has wrong dimension");
      if (state.avg_[n].dim() != model.streams_of(n).count) {
        throw DimensionMismatch("running average of agent " + std::to_string(n + 1) + " has wrong dimension");
      }
    }

    const std::uint64_t t = state.t_;
    const double alpha = schedule.alpha(t);
    const double beta = schedule.beta(t);
    const double gamma = schedule.gamma(t);

    StepResult out{state, {}};
    auto& next = out.state;
    for (std::size_t n = 0; n < agents; ++n) {
      const auto& r = model.streams_of(n);
      next.avg_[n].add(y.segment(static_cast<Eigen::Index>(r.first), static_cast<Eigen::Index>(r.count)));
    }

    Eigen::VectorXd consensus(m);
    for (std::size_t n = 0; n < agents; ++n) {
      const auto& x = state.x_[n];
      const auto& H = model.agent_matrix(n);
      consensus.setZero();
      for (auto l : graph.neighbors(n)) consensus += x - state.x_[l];

      Eigen::VectorXd innovation = next.avg_[n].mean() - H * x;
      out.gains.total += static_cast<std::uint64_t>(innovation.size());
      if (saturate) {
        for (Eigen::Index i = 0; i < innovation.size(); ++i) {
          const double raw = innovation(i);
          const double k = saturating_gain(raw, gamma);
          // Clamping is k * raw evaluated without the rounding of the product.
          const double scaled = std::abs(raw) <= gamma ? raw : std::copysign(gamma, raw);
          if (k < 1.0) ++out.gains.saturated;
          if (!(k > 0.0 && k <= 1.0) || !(std::abs(scaled) <= gamma)) ++out.gains.violations;
          assert(k > 0.0 && k <= 1.0 && std::abs(scaled) <= gamma);
          innovation(i) = scaled;
        }
      }
      next.x_[n] = x - beta * consensus + alpha * (H.transpose() * innovation);
    }
    next.t_ = t + 1;
    return out;
  }
};

StepResult sage_step(const EstimatorState& state, const WeightSchedule& schedule, const Graph& graph,
                     const Eigen::VectorXd& measurements, const MeasurementModel& model) {
  return StepKernel::run(true, state, schedule, graph, measurements, model);
}

StepResult baseline_step(const EstimatorState& state, const WeightSchedule& schedule, const Graph& graph,
                         const Eigen::VectorXd& measurements, const MeasurementModel& model) {
  return StepKernel::run(false, state, schedule, graph, measurements, model);
}

StepResult estimator_step(EstimatorKind kind, const EstimatorState& state, const WeightSchedule& schedule,
                          const Graph& graph, const Eigen::VectorXd& measurements, const MeasurementModel& model) {
  return StepKernel::run(kind == EstimatorKind::kSage, state, schedule, graph, measurements, model);
}

double consensus_residual(const EstimatorState& state) {
  if (state.agent_count() == 0) return 0.0;
  // Offsets from agent 0 keep identical estimates at exactly zero residual.
  const auto& xs = state.estimates();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(xs.front().size());
  for (const auto& x : xs) mean += x - xs.front();
  mean /= static_cast<double>(xs.size());
  double sq = 0.0;
  for (const auto& x : xs) sq += ((x - xs.front()) - mean).squaredNorm();
  return std::sqrt(sq);
}

}  // namespace sage
