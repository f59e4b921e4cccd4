#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "sage/measurement.hpp"

namespace sage {

/// 0-based stacked stream indices.
using StreamSet = std::vector<std::size_t>;

/// Relative tolerance for invertibility and strict eigenvalue comparisons.
inline constexpr double kEigenTolerance = 1e-9;
inline constexpr std::uint64_t kDefaultSubsetBudget = 1'000'000;
inline constexpr std::size_t kDefaultExactCap = 20;

/// sum_{p in X} h_p h_p^T.
Eigen::MatrixXd grammian(const MeasurementModel& model, const StreamSet& streams);
Eigen::MatrixXd full_grammian(const MeasurementModel& model);

double min_eigenvalue(const Eigen::MatrixXd& symmetric);

/// [0, total) minus `removed`.
StreamSet complement(std::size_t total, const StreamSet& removed);

/// lambda_min of the Grammian above the invertibility tolerance.
bool is_globally_observable(const MeasurementModel& model, const StreamSet& streams);

/// C(n, k), saturating at UINT64_MAX.
std::uint64_t binomial(std::size_t n, std::size_t k) noexcept;

/// True iff removing any s streams leaves a globally observable set.
/// Exhaustive; throws TooLarge when C(P, s) exceeds `budget`.
bool is_sparse_observable(const MeasurementModel& model, std::size_t s,
                          std::uint64_t budget = kDefaultSubsetBudget);

/// Multiplicity of each distinct row direction when the distinct rows form
/// an orthonormal basis of R^M (detected within 1e-12); nullopt otherwise.
std::optional<std::vector<std::size_t>> orthogonal_multiplicities(const MeasurementModel& model);

enum class SearchMethod { kAuto, kExhaustive, kOrthogonal };

/// Largest s such that lambda_min(G_{P \ A}) > |A| for every |A| <= s.
/// kAuto uses the closed form ceil(min multiplicity / 2) - 1 when the distinct
/// rows are orthonormal and falls back to exhaustive search otherwise.
/// Throws NotObservable if P itself is not observable, TooLarge when the
/// search exceeds `budget` subsets per size.
std::size_t max_tolerable_s(const MeasurementModel& model, SearchMethod method = SearchMethod::kAuto,
                            std::uint64_t budget = kDefaultSubsetBudget);

struct Disturbance {
  double value = 0.0;
  bool exact = true;
};

/// Worst-case disturbance max_{||v||_inf <= 1} ||H_A^T v||_2.
///
/// The objective is convex, so the maximum sits on a vertex of the box; for
/// |A| <= exact_cap all sign patterns are visited. Larger sets report the
/// upper bound |A| and exact = false.
Disturbance delta_a(const MeasurementModel& model, const StreamSet& attacked,
                    std::size_t exact_cap = kDefaultExactCap);

struct ResilienceReport {
  std::size_t compromised_count = 0;
  double lambda_min_clean = 0.0;  ///< lambda_min(G_N)
  double delta_a = 0.0;
  bool delta_exact = true;
  double margin_kappa = 0.0;  ///< lambda_min_clean - delta_a
  bool strict_holds = false;  ///< lambda_min(G_N) > Delta_A
  bool relaxed_holds = false; ///< lambda_min(G_N) > |A|

  /// The checks are sufficient conditions only; a failure never means that
  /// estimation is impossible.
  std::string verdict() const;
};

/// Throws AllStreamsCompromised when every stream is in `attacked`.
ResilienceReport check_resilience(const MeasurementModel& model, const StreamSet& attacked,
                                  std::size_t exact_cap = kDefaultExactCap);

nlohmann::json to_json(const ResilienceReport& report);

}  // namespace sage
