#include "sage/config.hpp"

#include <fstream>
#include <string>

#include "sage/errors.hpp"

namespace sage {

namespace {

using nlohmann::json;

NetworkSpec network_from_json(const json& j) {
  NetworkSpec spec;
  spec.link_failure_prob = j.value("link_failure_prob", 0.0);
  if (j.contains("geometric")) {
    const auto& g = j["geometric"];
    GeometricSpec geo;
    geo.n = g.at("n").get<std::size_t>();
    geo.radius = g.at("radius").get<double>();
    geo.seed = g.value("seed", std::uint64_t{1});
    geo.require_connected = g.value("require_connected", true);
    if (geo.n == 0 || !(geo.radius > 0.0)) throw ConfigError("geometric network needs n >= 1 and radius > 0");
    spec.topology = geo;
  } else if (j.contains("edges")) {
    const auto n = j.at("n").get<std::size_t>();
    std::vector<Edge> edges;
    for (const auto& e : j["edges"]) {
      const auto pair = e.get<std::vector<std::size_t>>();
      if (pair.size() != 2 || pair[0] < 1 || pair[1] < 1) throw ConfigError("edges are [u, v] pairs of 1-based vertices");
      edges.push_back({pair[0] - 1, pair[1] - 1});
    }
    spec.topology = Graph(n, std::move(edges));
  } else if (j.contains("complete")) {
    spec.topology = complete_graph(j["complete"].get<std::size_t>());
  } else {
    throw ConfigError("network needs \"geometric\", \"edges\" or \"complete\"");
  }
  if (!(spec.link_failure_prob >= 0.0 && spec.link_failure_prob <= 1.0)) {
    throw ConfigError("link_failure_prob must lie in [0, 1]");
  }
  return spec;
}

Eigen::VectorXd theta_from_json(const json& j, std::size_t m_dim) {
  Eigen::VectorXd theta(static_cast<Eigen::Index>(m_dim));
  if (j.is_array()) {
    const auto v = j.get<std::vector<double>>();
    if (v.size() != m_dim) throw ConfigError("theta must have m_dim entries");
    for (std::size_t i = 0; i < m_dim; ++i) theta(static_cast<Eigen::Index>(i)) = v[i];
  } else if (j.contains("uniform")) {
    const auto& u = j["uniform"];
    Rng rng(u.value("seed", std::uint64_t{1}));
    const double lo = u.at("low").get<double>();
    const double hi = u.at("high").get<double>();
    for (auto& x : theta) x = rng.uniform(lo, hi);
  } else if (j.contains("constant")) {
    theta.setConstant(j["constant"].get<double>());
  } else {
    throw ConfigError("theta must be an array or {\"uniform\": ...} / {\"constant\": ...}");
  }
  return theta;
}

AttackSpec attack_from_json(const json& j, const MeasurementModel& model) {
  AttackSpec spec;
  if (j.contains("strategy")) spec.strategy = strategy_from_json(j["strategy"]);
  int targets = 0;
  auto ids = [&](const char* key, std::size_t limit) {
    std::vector<std::size_t> out;
    for (auto id : j[key].get<std::vector<std::size_t>>()) {
      if (id < 1 || id > limit) throw ConfigError(std::string(key) + ": index " + std::to_string(id) + " out of range");
      out.push_back(id - 1);
    }
    return out;
  };
  if (j.contains("compromised_agents")) {
    spec.target = AttackSpec::Target::kAgents;
    spec.ids = ids("compromised_agents", model.agent_count());
    ++targets;
  }
  if (j.contains("compromised_streams")) {
    spec.target = AttackSpec::Target::kStreams;
    spec.ids = ids("compromised_streams", model.stream_count());
    ++targets;
  }
  if (j.contains("random_agents")) {
    spec.target = AttackSpec::Target::kRandomAgents;
    spec.random_count = j["random_agents"].get<std::size_t>();
    if (spec.random_count >= model.agent_count()) throw ConfigError("random_agents must be smaller than the number of agents");
    ++targets;
  }
  if (targets > 1) throw ConfigError("attack: choose one of compromised_agents, compromised_streams, random_agents");
  return spec;
}

ScheduleSpec schedule_from_json(const json& j) {
  ScheduleSpec s;
  s.a = j.value("a", s.a);
  s.tau1 = j.value("tau1", s.tau1);
  if (j.contains("b") && !(j["b"].is_string() && j["b"].get<std::string>() == "guideline")) s.b = j["b"].get<double>();
  s.tau2 = j.value("tau2", s.tau2);
  s.gamma_scale = j.value("gamma", s.gamma_scale);
  s.tau_gamma = j.value("tau_gamma", s.tau_gamma);
  return s;
}

}  // namespace

SimulationConfig config_from_json(const json& j) {
  try {
    SimulationConfig c;
    c.network = network_from_json(j.at("network"));
    c.model = measurement_model_from_json(j.at("measurement"));
    if (j.contains("snr_db")) c.snr_db = j["snr_db"].get<double>();
    c.theta = theta_from_json(j.at("theta"), c.model.m_dim());
    if (j.contains("attack")) c.attack = attack_from_json(j["attack"], c.model);
    if (j.contains("schedule")) c.schedule = schedule_from_json(j["schedule"]);
    c.iterations = j.value("iterations", c.iterations);
    c.trials = j.value("trials", c.trials);
    c.seed = j.value("seed", c.seed);
    c.stride = j.value("stride", c.stride);
    if (j.contains("estimators")) {
      c.estimators.clear();
      for (const auto& e : j["estimators"]) c.estimators.push_back(parse_estimator_kind(e.get<std::string>()));
    }
    if (c.iterations < 1 || c.trials < 1 || c.stride < 1) throw ConfigError("iterations, trials and stride must be >= 1");
    if (c.estimators.empty()) throw ConfigError("at least one estimator is required");
    const std::size_t agents = std::visit(
        [](const auto& t) {
          if constexpr (std::is_same_v<std::decay_t<decltype(t)>, GeometricSpec>) {
            return t.n;
          } else {
            return t.size();
          }
        },
        c.network.topology);
    if (agents != c.model.agent_count()) {
      throw ConfigError("network has " + std::to_string(agents) + " vertices but the model has " +
                        std::to_string(c.model.agent_count()) + " agents");
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

SimulationConfig load_config(const std::filesystem::path& path) {
  return config_from_json(read_json_file(path));
}

}  // namespace sage
