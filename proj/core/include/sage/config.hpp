#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "sage/attack.hpp"
#include "sage/estimator.hpp"
#include "sage/graph.hpp"
#include "sage/measurement.hpp"

namespace sage {

struct GeometricSpec {
  std::size_t n = 0;
  double radius = 0.0;
  std::uint64_t seed = 0;
  /// Retry with seed+1, seed+2, ... until the base graph is connected.
  bool require_connected = true;
};

struct NetworkSpec {
  std::variant<GeometricSpec, Graph> topology;
  double link_failure_prob = 0.0;
};

struct AttackSpec {
  enum class Target { kNone, kAgents, kStreams, kRandomAgents };
  Target target = Target::kNone;
  std::vector<std::size_t> ids;  ///< 0-based agents or streams
  std::size_t random_count = 0;  ///< agents drawn per trial for kRandomAgents
  Strategy strategy = NoAttack{};
};

struct ScheduleSpec {
  double a = 1.0;
  double tau1 = 0.26;
  std::optional<double> b;  ///< nullopt: 1 / lambda_N of the base Laplacian
  double tau2 = 0.001;
  double gamma_scale = 1.0;
  double tau_gamma = 0.25;
};

struct SimulationConfig {
  NetworkSpec network;
  MeasurementModel model;
  /// When set, replaces the model's noise with one network-wide level.
  std::optional<double> snr_db;
  Eigen::VectorXd theta;
  AttackSpec attack;
  ScheduleSpec schedule;
  std::uint64_t iterations = 1000;
  std::uint64_t trials = 1;
  std::uint64_t seed = 1;
  std::uint64_t stride = 10;
  std::vector<EstimatorKind> estimators{EstimatorKind::kSage, EstimatorKind::kBaseline};
};

/// Throws ConfigError on any malformed or inconsistent field.
SimulationConfig config_from_json(const nlohmann::json& j);
SimulationConfig load_config(const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace sage
