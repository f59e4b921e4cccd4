#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sage/harness.hpp"

namespace sage {

/// Shortest round-trip representation.
std::string format_double(double v);

/// Header: trial,iter,estimator,max_rmse,mean_rmse,consensus_residual,saturated_frac
void write_metrics_csv(std::ostream& out, const ExperimentResult& result);

/// Aggregates, resolved settings, and the resilience report for the first
/// trial's compromised set.
nlohmann::json summary_json(const Experiment& experiment, const ExperimentResult& result);

void write_sweep_csv(std::ostream& out, const std::string& param, const std::vector<SweepRow>& rows);

}  // namespace sage
