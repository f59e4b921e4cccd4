#include "sage/attack.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include <nlohmann/json.hpp>

#include "sage/errors.hpp"

namespace sage {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string strategy_name(const Strategy& s) {
  return std::visit(Overloaded{
                        [](const NoAttack&) { return std::string("none"); },
                        [](const ConstantValue&) { return std::string("constant"); },
                        [](const ScaledParameter&) { return std::string("scaled_parameter"); },
                        [](const FixedTarget&) { return std::string("fixed_target"); },
                        [](const CustomTimeSeries&) { return std::string("custom_time_series"); },
                        [](const AttackFunction&) { return std::string("function"); },
                    },
                    s);
}

std::vector<std::string> builtin_strategies() {
  return {"none", "constant", "scaled_parameter", "fixed_target", "custom_time_series"};
}

Strategy strategy_from_json(const nlohmann::json& j) {
  try {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "none") return NoAttack{};
    if (kind == "constant") return ConstantValue{j.at("value").get<double>()};
    if (kind == "scaled_parameter") return ScaledParameter{j.at("factor").get<double>()};
    if (kind == "fixed_target") {
      const auto v = j.at("target").get<std::vector<double>>();
      return FixedTarget{Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()))};
    }
    if (kind == "custom_time_series") {
      CustomTimeSeries ts{j.at("values").get<std::vector<std::vector<double>>>()};
      if (ts.rows.empty()) throw ConfigError("custom_time_series needs at least one row");
      for (const auto& r : ts.rows) {
        if (r.empty()) throw ConfigError("custom_time_series rows must be non-empty");
      }
      return ts;
    }
    throw ConfigError("unknown attack strategy \"" + kind + "\"");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("attack strategy: ") + e.what());
  }
}

AttackScenario::AttackScenario(std::vector<std::size_t> streams, Strategy strategy)
    : compromised_(std::move(streams)), strategy_(std::move(strategy)) {
  std::sort(compromised_.begin(), compromised_.end());
  compromised_.erase(std::unique(compromised_.begin(), compromised_.end()), compromised_.end());
  if (const auto* ts = std::get_if<CustomTimeSeries>(&strategy_)) {
    for (const auto& r : ts->rows) {
      if (r.size() != 1 && r.size() != compromised_.size()) {
        throw ConfigError("custom_time_series rows must hold 1 or |A| values");
      }
    }
    if (ts->rows.empty()) throw ConfigError("custom_time_series needs at least one row");
  }
}

AttackScenario AttackScenario::on_agents(const MeasurementModel& model, const std::vector<std::size_t>& agents,
                                         Strategy strategy) {
  std::vector<std::size_t> streams;
  for (auto n : agents) {
    if (n >= model.agent_count()) throw ConfigError("compromised agent " + std::to_string(n + 1) + " does not exist");
    const auto& r = model.streams_of(n);
    for (std::size_t p = r.first; p < r.end(); ++p) streams.push_back(p);
  }
  return AttackScenario(std::move(streams), std::move(strategy));
}

bool AttackScenario::is_compromised(std::size_t p) const {
  return std::binary_search(compromised_.begin(), compromised_.end(), p);
}

bool AttackScenario::active() const noexcept {
  return !compromised_.empty() && !std::holds_alternative<NoAttack>(strategy_);
}

Eigen::VectorXd AttackScenario::apply(std::uint64_t t, const Eigen::VectorXd& clean, const Eigen::VectorXd& theta,
                                      const MeasurementModel& model) const {
  if (static_cast<std::size_t>(clean.size()) != model.stream_count()) {
    throw DimensionMismatch("stacked measurement has length " + std::to_string(clean.size()) + ", expected " +
                            std::to_string(model.stream_count()));
  }
  if (static_cast<std::size_t>(theta.size()) != model.m_dim()) throw DimensionMismatch("parameter has wrong dimension");
  Eigen::VectorXd out = clean;
  if (!active()) return out;
  if (compromised_.back() >= model.stream_count()) {
    throw ConfigError("compromised stream " + std::to_string(compromised_.back() + 1) + " does not exist");
  }
  const auto& H = model.stacked();
  for (std::size_t rank = 0; rank < compromised_.size(); ++rank) {
    const auto p = compromised_[rank];
    const auto ip = static_cast<Eigen::Index>(p);
    const double signal = H.row(ip).dot(theta);
    const StreamSample sample{t, p, rank, clean(ip), signal};
    out(ip) = std::visit(
        Overloaded{
            [&](const NoAttack&) { return sample.clean; },
            [&](const ConstantValue& c) { return c.value; },
            [&](const ScaledParameter& s) { return s.factor * signal + (sample.clean - signal); },
            [&](const FixedTarget& f) {
              if (f.target.size() != theta.size()) throw DimensionMismatch("fixed_target has wrong dimension");
              return H.row(ip).dot(f.target) + (sample.clean - signal);
            },
            [&](const CustomTimeSeries& ts) {
              const auto& row = ts.rows[std::min<std::size_t>(t, ts.rows.size() - 1)];
              return row.size() == 1 ? row[0] : row[rank];
            },
            [&](const AttackFunction& fn) { return fn(sample, theta); },
        },
        strategy_);
  }
  return out;
}

std::vector<std::size_t> random_compromised_set(std::size_t total, std::size_t count, Rng& rng) {
  if (count >= total) {
    throw InvalidCount("cannot compromise " + std::to_string(count) + " of " + std::to_string(total) +
                       " streams: at least one must stay clean");
  }
  // Partial Fisher-Yates.
  std::vector<std::size_t> idx(total);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + rng.below(total - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

AttackScenario attack_scenario_from_json(const nlohmann::json& j, const MeasurementModel& model) {
  try {
    Strategy strategy = j.contains("strategy") ? strategy_from_json(j["strategy"]) : Strategy{NoAttack{}};
    const bool by_agent = j.contains("compromised_agents");
    const bool by_stream = j.contains("compromised_streams");
    if (by_agent == by_stream) {
      if (!by_agent) return AttackScenario({}, std::move(strategy));
      throw ConfigError("give either compromised_agents or compromised_streams, not both");
    }
    const auto ids = j.at(by_agent ? "compromised_agents" : "compromised_streams").get<std::vector<std::size_t>>();
    const auto limit = by_agent ? model.agent_count() : model.stream_count();
    std::vector<std::size_t> zero_based;
    for (auto id : ids) {
      if (id < 1 || id > limit) throw ConfigError("compromised index " + std::to_string(id) + " out of range");
      zero_based.push_back(id - 1);
    }
    if (by_agent) return AttackScenario::on_agents(model, zero_based, std::move(strategy));
    return AttackScenario(std::move(zero_based), std::move(strategy));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("attack scenario: ") + e.what());
  }
}

}  // namespace sage
