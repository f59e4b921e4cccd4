#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "sage/measurement.hpp"
#include "sage/rng.hpp"

namespace sage {

/// What an attacker sees for one compromised stream at one iteration.
struct StreamSample {
  std::uint64_t t;
  std::size_t stream;  ///< 0-based stacked index
  std::size_t rank;    ///< position of the stream within the sorted compromised set
  double clean;        ///< h_p^T theta + w_p(t)
  double signal;       ///< h_p^T theta
};

struct NoAttack {};

/// Compromised streams read `value`.
struct ConstantValue {
  double value;
};

/// Compromised streams read factor * h_p^T theta + noise.
struct ScaledParameter {
  double factor;
};

/// Compromised streams read h_p^T target + noise, i.e. they are consistent
/// with a different parameter.
struct FixedTarget {
  Eigen::VectorXd target;
};

/// Row t of the table gives the values at iteration t; the last row repeats
/// afterwards. A row holds either one value for every compromised stream or
/// one value per compromised stream in ascending stream order.
struct CustomTimeSeries {
  std::vector<std::vector<double>> rows;
};

/// Arbitrary adversary. Must be a pure function of its arguments.
using AttackFunction = std::function<double(const StreamSample&, const Eigen::VectorXd& theta)>;

using Strategy =
    std::variant<NoAttack, ConstantValue, ScaledParameter, FixedTarget, CustomTimeSeries, AttackFunction>;

std::string strategy_name(const Strategy& s);

/// Names of the strategies understood by strategy_from_json.
std::vector<std::string> builtin_strategies();

/// {"kind": "none"|"constant"|"scaled_parameter"|"fixed_target"|"custom_time_series", ...}
Strategy strategy_from_json(const nlohmann::json& j);

/// A fixed set of compromised streams together with the disturbance they carry.
class AttackScenario {
 public:
  AttackScenario() = default;
  /// `streams` are 0-based stacked indices; duplicates are removed.
  AttackScenario(std::vector<std::size_t> streams, Strategy strategy);

  /// Compromises every stream of the listed (0-based) agents.
  static AttackScenario on_agents(const MeasurementModel& model, const std::vector<std::size_t>& agents,
                                  Strategy strategy);

  const std::vector<std::size_t>& compromised() const noexcept { return compromised_; }
  const Strategy& strategy() const noexcept { return strategy_; }
  bool is_compromised(std::size_t p) const;
  bool active() const noexcept;

  /// Replaces the compromised components of `clean` according to the strategy.
  /// Every other component is copied unchanged. Throws DimensionMismatch.
  Eigen::VectorXd apply(std::uint64_t t, const Eigen::VectorXd& clean, const Eigen::VectorXd& theta,
                        const MeasurementModel& model) const;

 private:
  std::vector<std::size_t> compromised_;
  Strategy strategy_ = NoAttack{};
};

inline Eigen::VectorXd apply_attack(const AttackScenario& scenario, std::uint64_t t,
                                    const Eigen::VectorXd& clean, const Eigen::VectorXd& theta,
                                    const MeasurementModel& model) {
  return scenario.apply(t, clean, theta, model);
}

/// Uniform sample of `count` distinct indices from [0, total), sorted.
/// Throws InvalidCount unless count < total.
std::vector<std::size_t> random_compromised_set(std::size_t total, std::size_t count, Rng& rng);

/// Expands {"compromised_agents": [...]} or {"compromised_streams": [...]}
/// (1-based) plus "strategy" into a scenario.
AttackScenario attack_scenario_from_json(const nlohmann::json& j, const MeasurementModel& model);

}  // namespace sage
