#include "sage/report.hpp"

#include <charconv>
#include <ostream>
#include <system_error>

#include "sage/resilience.hpp"

namespace sage {

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

void write_metrics_csv(std::ostream& out, const ExperimentResult& result) {
  out << "trial,iter,estimator,max_rmse,mean_rmse,consensus_residual,saturated_frac\n";
  for (const auto& trial : result.trials) {
    for (const auto& trace : trial.traces) {
      for (const auto& s : trace.samples) {
        out << trial.trial_index << ',' << s.iter << ',' << to_string(trace.kind) << ',' << format_double(s.max_rmse)
            << ',' << format_double(s.mean_rmse) << ',' << format_double(s.consensus_residual) << ','
            << format_double(s.saturated_frac) << '\n';
      }
    }
  }
}

namespace {

nlohmann::json summary_to_json(const Summary& s) {
  return {{"mean", s.mean}, {"median", s.median}, {"q05", s.q05}, {"q95", s.q95}};
}

}  // namespace

nlohmann::json summary_json(const Experiment& experiment, const ExperimentResult& result) {
  const auto& c = experiment.config();
  const auto& w = experiment.schedule();
  nlohmann::json j;
  j["settings"] = {
      {"agents", experiment.model().agent_count()},
      {"streams", experiment.model().stream_count()},
      {"m_dim", experiment.model().m_dim()},
      {"base_edges", experiment.network().base().edge_count()},
      {"graph_seed", experiment.graph_seed()},
      {"link_failure_prob", experiment.network().link_failure_prob()},
      {"iterations", c.iterations},
      {"trials", c.trials},
      {"seed", c.seed},
      {"stride", c.stride},
      {"schedule",
       {{"a", w.a()}, {"tau1", w.tau1()}, {"b", w.b()}, {"tau2", w.tau2()}, {"gamma", w.gamma_scale()},
        {"tau_gamma", w.tau_gamma()}}},
  };
  if (c.snr_db) {
    j["settings"]["snr_db"] = *c.snr_db;
    j["settings"]["noise_stddev"] = experiment.model().noise_stddevs(0)(0);
  }

  nlohmann::json aggs = nlohmann::json::array();
  for (const auto& agg : result.aggregates) {
    nlohmann::json points = nlohmann::json::array();
    for (const auto& p : agg.points) {
      points.push_back({{"iter", p.iter},
                        {"max_rmse", summary_to_json(p.max_rmse)},
                        {"mean_rmse", summary_to_json(p.mean_rmse)},
                        {"consensus_residual", summary_to_json(p.consensus_residual)},
                        {"saturated_frac", summary_to_json(p.saturated_frac)}});
    }
    aggs.push_back({{"estimator", to_string(agg.kind)},
                    {"gain_violations", agg.gains.violations},
                    {"final_max_rmse", summary_to_json(agg.final().max_rmse)},
                    {"points", std::move(points)}});
  }
  j["aggregates"] = std::move(aggs);

  if (!result.trials.empty()) {
    const auto& attacked = result.trials.front().compromised;
    nlohmann::json rep;
    if (attacked.size() < experiment.model().stream_count()) {
      rep = to_json(check_resilience(experiment.model(), attacked));
    } else {
      rep = {{"compromised_streams", attacked.size()}, {"verdict", "every stream compromised"}};
    }
    rep["trial"] = result.trials.front().trial_index;
    j["resilience"] = std::move(rep);
  }
  return j;
}

void write_sweep_csv(std::ostream& out, const std::string& param, const std::vector<SweepRow>& rows) {
  out << "param,value,estimator,iter,mean,median,q05,q95\n";
  for (const auto& r : rows) {
    out << param << ',' << format_double(r.value) << ',' << to_string(r.kind) << ',' << r.iter << ','
        << format_double(r.final_max_rmse.mean) << ',' << format_double(r.final_max_rmse.median) << ','
        << format_double(r.final_max_rmse.q05) << ',' << format_double(r.final_max_rmse.q95) << '\n';
  }
}

}  // namespace sage
