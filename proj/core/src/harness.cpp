#include "sage/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>

#include "sage/errors.hpp"

namespace sage {

namespace {

// Substream tags for derive_seed.
constexpr std::uint64_t kGraphStream = 1;
constexpr std::uint64_t kNoiseStream = 2;
constexpr std::uint64_t kAttackStream = 3;

constexpr int kMaxConnectivityRetries = 1000;

std::pair<Graph, std::uint64_t> build_base_graph(const NetworkSpec& spec) {
  if (const auto* g = std::get_if<Graph>(&spec.topology)) return {*g, 0};
  const auto& geo = std::get<GeometricSpec>(spec.topology);
  for (int attempt = 0; attempt < kMaxConnectivityRetries; ++attempt) {
    const std::uint64_t seed = geo.seed + static_cast<std::uint64_t>(attempt);
    Graph g = random_geometric(geo.n, geo.radius, seed);
    if (!geo.require_connected || g.connected()) return {std::move(g), seed};
  }
  throw DegenerateGraph("no connected geometric graph after " + std::to_string(kMaxConnectivityRetries) +
                        " seeds; increase the radius");
}

MeasurementModel resolve_noise(const SimulationConfig& c) {
  if (!c.snr_db) return c.model;
  return c.model.with_uniform_noise(noise_stddev_for_snr(c.model, c.theta, *c.snr_db));
}

WeightSchedule resolve_schedule(const ScheduleSpec& s, const Graph& base) {
  if (s.b) return WeightSchedule(s.a, s.tau1, *s.b, s.tau2, s.gamma_scale, s.tau_gamma);
  const double lambda_n = max_laplacian_eigenvalue(laplacian(base));
  if (!(lambda_n > kConnectivityThreshold)) throw DegenerateGraph("guideline b needs a base graph with edges");
  return WeightSchedule(s.a, s.tau1, 1.0 / lambda_n, s.tau2, s.gamma_scale, s.tau_gamma);
}

MetricSample sample_metrics(const EstimatorState& state, const Eigen::VectorXd& theta, const GainStats& step) {
  const auto [mx, mean] = local_errors(state.estimates(), theta);
  return {state.iteration(), mx, mean, consensus_residual(state), step.saturated_fraction()};
}

}  // namespace

const EstimatorTrace& TrialResult::trace(EstimatorKind kind) const {
  for (const auto& t : traces) {
    if (t.kind == kind) return t;
  }
  throw ConfigError("trial has no trace for estimator " + std::string(to_string(kind)));
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw DegenerateSeries("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

Summary summarize(std::vector<double> values) {
  if (values.empty()) throw DegenerateSeries("summary of an empty sample");
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  auto at = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  return {sum / static_cast<double>(values.size()), at(0.5), at(0.05), at(0.95)};
}

const AggregatePoint& EstimatorAggregate::at(std::uint64_t iter) const {
  auto it = std::lower_bound(points.begin(), points.end(), iter,
                             [](const AggregatePoint& p, std::uint64_t i) { return p.iter < i; });
  if (it == points.end() || it->iter != iter) {
    throw ConfigError("iteration " + std::to_string(iter) + " was not sampled");
  }
  return *it;
}

const EstimatorAggregate& ExperimentResult::aggregate(EstimatorKind kind) const {
  for (const auto& a : aggregates) {
    if (a.kind == kind) return a;
  }
  throw ConfigError("experiment has no aggregate for estimator " + std::string(to_string(kind)));
}

std::pair<double, double> local_errors(const std::vector<Eigen::VectorXd>& estimates, const Eigen::VectorXd& theta) {
  double mx = 0.0;
  double sum = 0.0;
  for (const auto& x : estimates) {
    const double e = (x - theta).norm();
    mx = std::max(mx, e);
    sum += e;
  }
  return {mx, estimates.empty() ? 0.0 : sum / static_cast<double>(estimates.size())};
}

std::vector<EstimatorAggregate> aggregate_trials(std::vector<TrialResult>& trials) {
  std::sort(trials.begin(), trials.end(),
            [](const TrialResult& a, const TrialResult& b) { return a.trial_index < b.trial_index; });
  std::vector<EstimatorAggregate> out;
  if (trials.empty()) return out;
  for (std::size_t e = 0; e < trials.front().traces.size(); ++e) {
    EstimatorAggregate agg;
    agg.kind = trials.front().traces[e].kind;
    const auto& ref = trials.front().traces[e].samples;
    for (std::size_t s = 0; s < ref.size(); ++s) {
      std::vector<double> mx, mean, cons, sat;
      for (const auto& t : trials) {
        const auto& sample = t.traces.at(e).samples.at(s);
        mx.push_back(sample.max_rmse);
        mean.push_back(sample.mean_rmse);
        cons.push_back(sample.consensus_residual);
        sat.push_back(sample.saturated_frac);
      }
      agg.points.push_back({ref[s].iter, summarize(std::move(mx)), summarize(std::move(mean)),
                            summarize(std::move(cons)), summarize(std::move(sat))});
    }
    for (const auto& t : trials) agg.gains += t.traces.at(e).gains;
    out.push_back(std::move(agg));
  }
  return out;
}

Experiment::Experiment(SimulationConfig config)
    : config_(std::move(config)),
      network_([&] {
        auto [g, seed] = build_base_graph(config_.network);
        graph_seed_ = seed;
        return NetworkModel(std::move(g), config_.network.link_failure_prob);
      }()),
      model_(resolve_noise(config_)),
      schedule_(resolve_schedule(config_.schedule, network_.base())) {
  if (static_cast<std::size_t>(config_.theta.size()) != model_.m_dim()) {
    throw DimensionMismatch("theta does not match the model dimension");
  }
  if (network_.base().size() != model_.agent_count()) {
    throw ConfigError("network size differs from the number of agents");
  }
}

AttackScenario Experiment::scenario_for_trial(std::uint64_t trial_index) const {
  const auto& spec = config_.attack;
  switch (spec.target) {
    case AttackSpec::Target::kNone:
      return AttackScenario({}, spec.strategy);
    case AttackSpec::Target::kStreams:
      return AttackScenario(spec.ids, spec.strategy);
    case AttackSpec::Target::kAgents:
      return AttackScenario::on_agents(model_, spec.ids, spec.strategy);
    case AttackSpec::Target::kRandomAgents: {
      Rng rng(derive_seed(config_.seed, trial_index, kAttackStream));
      const auto agents = random_compromised_set(model_.agent_count(), spec.random_count, rng);
      return AttackScenario::on_agents(model_, agents, spec.strategy);
    }
  }
  return {};
}

TrialResult Experiment::run_trial(std::uint64_t trial_index) const {
  const AttackScenario scenario = scenario_for_trial(trial_index);
  Rng graph_rng(derive_seed(config_.seed, trial_index, kGraphStream));
  Rng noise_rng(derive_seed(config_.seed, trial_index, kNoiseStream));

  TrialResult result;
  result.trial_index = trial_index;
  result.compromised = scenario.compromised();

  std::vector<EstimatorState> states(config_.estimators.size(), EstimatorState(model_));
  for (auto kind : config_.estimators) {
    EstimatorTrace trace;
    trace.kind = kind;
    trace.samples.push_back(sample_metrics(states.front(), config_.theta, {}));
    result.traces.push_back(std::move(trace));
  }

  for (std::uint64_t t = 0; t < config_.iterations; ++t) {
    const Graph instance = network_.sample_instance(graph_rng);
    const Eigen::VectorXd clean = model_.clean_stacked(config_.theta, noise_rng);
    const Eigen::VectorXd y = scenario.apply(t, clean, config_.theta, model_);
    const bool record = (t + 1) % config_.stride == 0 || t + 1 == config_.iterations;
    for (std::size_t e = 0; e < states.size(); ++e) {
      auto step = estimator_step(config_.estimators[e], states[e], schedule_, instance, y, model_);
      states[e] = std::move(step.state);
      if (!states[e].finite()) throw NonFinite(t + 1);
      auto& trace = result.traces[e];
      trace.gains += step.gains;
      if (record) trace.samples.push_back(sample_metrics(states[e], config_.theta, step.gains));
    }
  }
  for (std::size_t e = 0; e < states.size(); ++e) result.traces[e].final_estimates = states[e].estimates();
  return result;
}

std::size_t thread_budget() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SAGE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) n = static_cast<std::size_t>(v);
  }
  return n;
}

ExperimentResult Experiment::run() const {
  const auto trials = static_cast<std::size_t>(config_.trials);
  const std::size_t workers = std::min(thread_budget(), trials);
  ExperimentResult result;
  result.trials.resize(trials);
  std::vector<std::exception_ptr> errors(workers);
  auto work = [&](std::size_t w) {
    try {
      for (std::size_t i = w; i < trials; i += workers) result.trials[i] = run_trial(i);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  result.aggregates = aggregate_trials(result.trials);
  return result;
}

TrialResult run_trial(const SimulationConfig& config, std::uint64_t trial_index) {
  return Experiment(config).run_trial(trial_index);
}

ExperimentResult run_experiment(const SimulationConfig& config) {
  return Experiment(config).run();
}

namespace {

void append_final_rows(std::vector<SweepRow>& rows, double value, const ExperimentResult& r) {
  for (const auto& agg : r.aggregates) {
    rows.push_back({value, agg.kind, agg.final().iter, agg.final().max_rmse});
  }
}

}  // namespace

std::vector<SweepRow> sweep_gamma(const SimulationConfig& config, const std::vector<double>& gammas) {
  if (gammas.empty()) throw ConfigError("gamma sweep needs at least one value");
  std::vector<SweepRow> rows;
  for (double g : gammas) {
    SimulationConfig c = config;
    c.schedule.gamma_scale = g;
    append_final_rows(rows, g, run_experiment(c));
  }
  return rows;
}

std::vector<SweepRow> sweep_attack_count(const SimulationConfig& config, const std::vector<std::size_t>& counts) {
  if (counts.empty()) throw ConfigError("attack-count sweep needs at least one value");
  std::vector<SweepRow> rows;
  for (auto count : counts) {
    SimulationConfig c = config;
    if (count >= c.model.agent_count()) throw InvalidCount("cannot attack every agent");
    c.attack.target = count == 0 ? AttackSpec::Target::kNone : AttackSpec::Target::kRandomAgents;
    c.attack.random_count = count;
    c.attack.ids.clear();
    append_final_rows(rows, static_cast<double>(count), run_experiment(c));
  }
  return rows;
}

double decay_slope(std::span<const SeriesPoint> series) {
  if (series.size() < 10) throw DegenerateSeries("decay slope needs at least 10 samples");
  for (const auto& p : series) {
    if (!(p.value > 0.0)) throw DegenerateSeries("decay slope needs positive values");
  }
  const auto tail = series.subspan(series.size() / 2);
  double sx = 0.0, sy = 0.0;
  for (const auto& p : tail) {
    sx += std::log(p.t + 1.0);
    sy += std::log(p.value);
  }
  const double n = static_cast<double>(tail.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : tail) {
    const double dx = std::log(p.t + 1.0) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(p.value) - my);
  }
  if (!(sxx > 0.0)) throw DegenerateSeries("decay slope needs distinct sample times");
  return sxy / sxx;
}

}  // namespace sage
