#include "sage/resilience.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <nlohmann/json.hpp>

#include "sage/errors.hpp"

namespace sage {

namespace {

constexpr double kSameRow = 1e-12;

/// Calls f(indices) for every k-subset of [0, n) in lexicographic order until f returns false.
template <class F>
bool for_each_subset(std::size_t n, std::size_t k, F&& f) {
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  while (true) {
    if (!f(idx)) return false;
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) return true;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

double max_eigenvalue(const Eigen::MatrixXd& sym) {
  if (sym.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(sym.rows() - 1);
}

double tolerance_for(const Eigen::MatrixXd& reference) {
  return kEigenTolerance * std::max(1.0, max_eigenvalue(reference));
}

void check_streams(const MeasurementModel& model, const StreamSet& streams) {
  for (auto p : streams) {
    if (p >= model.stream_count()) throw ConfigError("stream " + std::to_string(p + 1) + " does not exist");
  }
}

StreamSet sorted_unique(StreamSet s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

void subtract_outer(Eigen::MatrixXd& G, const Eigen::MatrixXd& H, const std::vector<std::size_t>& rows) {
  for (auto p : rows) {
    const auto h = H.row(static_cast<Eigen::Index>(p));
    G.noalias() -= h.transpose() * h;
  }
}

}  // namespace

Eigen::MatrixXd grammian(const MeasurementModel& model, const StreamSet& streams) {
  check_streams(model, streams);
  const auto m = static_cast<Eigen::Index>(model.m_dim());
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(m, m);
  const auto& H = model.stacked();
  for (auto p : streams) {
    const auto h = H.row(static_cast<Eigen::Index>(p));
    G.noalias() += h.transpose() * h;
  }
  return G;
}

Eigen::MatrixXd full_grammian(const MeasurementModel& model) {
  return model.stacked().transpose() * model.stacked();
}

double min_eigenvalue(const Eigen::MatrixXd& sym) {
  if (sym.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

StreamSet complement(std::size_t total, const StreamSet& removed) {
  std::vector<char> drop(total, 0);
  for (auto p : removed) {
    if (p < total) drop[p] = 1;
  }
  StreamSet out;
  for (std::size_t p = 0; p < total; ++p) {
    if (!drop[p]) out.push_back(p);
  }
  return out;
}

bool is_globally_observable(const MeasurementModel& model, const StreamSet& streams) {
  const auto G = grammian(model, streams);
  return min_eigenvalue(G) > tolerance_for(G);
}

std::uint64_t binomial(std::size_t n, std::size_t k) noexcept {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 r = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(r);
}

bool is_sparse_observable(const MeasurementModel& model, std::size_t s, std::uint64_t budget) {
  const auto P = model.stream_count();
  if (s >= P) throw InvalidCount("sparse observability needs s < P");
  const auto subsets = binomial(P, s);
  if (subsets > budget) {
    throw TooLarge("C(" + std::to_string(P) + ", " + std::to_string(s) + ") = " + std::to_string(subsets) +
                   " subsets exceeds the budget of " + std::to_string(budget));
  }
  const Eigen::MatrixXd full = full_grammian(model);
  const double tol = tolerance_for(full);
  const auto& H = model.stacked();
  return for_each_subset(P, s, [&](const std::vector<std::size_t>& removed) {
    Eigen::MatrixXd G = full;
    subtract_outer(G, H, removed);
    return min_eigenvalue(G) > tol;
  });
}

std::optional<std::vector<std::size_t>> orthogonal_multiplicities(const MeasurementModel& model) {
  const auto& H = model.stacked();
  std::vector<Eigen::Index> distinct;
  std::vector<std::size_t> counts;
  for (Eigen::Index p = 0; p < H.rows(); ++p) {
    bool matched = false;
    for (std::size_t d = 0; d < distinct.size(); ++d) {
      if ((H.row(p) - H.row(distinct[d])).norm() <= kSameRow) {
        ++counts[d];
        matched = true;
        break;
      }
    }
    if (!matched) {
      distinct.push_back(p);
      counts.push_back(1);
    }
  }
  if (distinct.size() != model.m_dim()) return std::nullopt;
  for (std::size_t i = 0; i < distinct.size(); ++i) {
    for (std::size_t j = i + 1; j < distinct.size(); ++j) {
      if (std::abs(H.row(distinct[i]).dot(H.row(distinct[j]))) > kSameRow) return std::nullopt;
    }
  }
  return counts;
}

std::size_t max_tolerable_s(const MeasurementModel& model, SearchMethod method, std::uint64_t budget) {
  const auto P = model.stream_count();
  const Eigen::MatrixXd full = full_grammian(model);
  const double tol = tolerance_for(full);
  if (!(min_eigenvalue(full) > tol)) throw NotObservable("the full stream set is not globally observable");

  if (method != SearchMethod::kExhaustive) {
    if (auto counts = orthogonal_multiplicities(model)) {
      // G_N has eigenvalues |N_1|, ..., |N_M|; the worst attack of size s
      // removes s copies of the rarest direction.
      const auto rarest = *std::min_element(counts->begin(), counts->end());
      return (rarest - 1) / 2;
    }
    if (method == SearchMethod::kOrthogonal) throw ConfigError("distinct measurement rows are not orthonormal");
  }

  const auto& H = model.stacked();
  const double m = static_cast<double>(model.m_dim());
  for (std::size_t s = 1; s < P; ++s) {
    const double bound = static_cast<double>(s);
    // trace(G_{P \ A}) = P - s, so lambda_min <= (P - s) / M.
    if (static_cast<double>(P - s) / m <= bound + tol) return s - 1;
    const auto subsets = binomial(P, s);
    if (subsets > budget) {
      throw TooLarge("C(" + std::to_string(P) + ", " + std::to_string(s) + ") = " + std::to_string(subsets) +
                     " subsets exceeds the budget of " + std::to_string(budget));
    }
    const bool all_hold = for_each_subset(P, s, [&](const std::vector<std::size_t>& attacked) {
      Eigen::MatrixXd G = full;
      subtract_outer(G, H, attacked);
      return min_eigenvalue(G) - bound > tol;
    });
    if (!all_hold) return s - 1;
  }
  return P - 1;
}

Disturbance delta_a(const MeasurementModel& model, const StreamSet& attacked_in, std::size_t exact_cap) {
  const StreamSet attacked = sorted_unique(attacked_in);
  check_streams(model, attacked);
  const std::size_t k = attacked.size();
  if (k == 0) return {0.0, true};
  if (k > exact_cap || k > 62) return {static_cast<double>(k), false};

  const auto m = static_cast<Eigen::Index>(model.m_dim());
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows(static_cast<Eigen::Index>(k), m);
  for (std::size_t i = 0; i < k; ++i) rows.row(static_cast<Eigen::Index>(i)) = model.stacked().row(static_cast<Eigen::Index>(attacked[i]));

  // v and -v give the same norm, so the first sign stays +1. Walk the
  // remaining 2^(k-1) sign patterns in Gray-code order, one flip per step.
  Eigen::VectorXd u = rows.colwise().sum().transpose();
  std::uint64_t pattern = 0;  // bit j set: sign of row j+1 is -1
  double best = u.squaredNorm();
  std::uint64_t best_pattern = 0;
  const std::uint64_t steps = std::uint64_t{1} << (k - 1);
  for (std::uint64_t i = 1; i < steps; ++i) {
    const auto j = static_cast<unsigned>(std::countr_zero(i));
    const auto row = static_cast<Eigen::Index>(j + 1);
    const bool was_negative = (pattern >> j) & 1U;
    if (was_negative) {
      u += 2.0 * rows.row(row).transpose();
    } else {
      u -= 2.0 * rows.row(row).transpose();
    }
    pattern ^= std::uint64_t{1} << j;
    const double value = u.squaredNorm();
    if (value > best) {
      best = value;
      best_pattern = pattern;
    }
  }
  // Recompute the winner directly to shed the drift accumulated by the walk.
  Eigen::VectorXd w = rows.row(0).transpose();
  for (std::size_t i = 1; i < k; ++i) {
    const double sign = ((best_pattern >> (i - 1)) & 1U) ? -1.0 : 1.0;
    w += sign * rows.row(static_cast<Eigen::Index>(i)).transpose();
  }
  return {w.norm(), true};
}

std::string ResilienceReport::verdict() const {
  if (strict_holds) return "sufficient condition holds";
  return "sufficient condition violated";
}

ResilienceReport check_resilience(const MeasurementModel& model, const StreamSet& attacked_in, std::size_t exact_cap) {
  const StreamSet attacked = sorted_unique(attacked_in);
  check_streams(model, attacked);
  const auto P = model.stream_count();
  if (attacked.size() == P) throw AllStreamsCompromised("every measurement stream is compromised");

  ResilienceReport r;
  r.compromised_count = attacked.size();
  r.lambda_min_clean = min_eigenvalue(grammian(model, complement(P, attacked)));
  const auto d = delta_a(model, attacked, exact_cap);
  r.delta_a = d.value;
  r.delta_exact = d.exact;
  r.margin_kappa = r.lambda_min_clean - r.delta_a;
  const double tol = tolerance_for(full_grammian(model));
  r.strict_holds = r.margin_kappa > tol;
  r.relaxed_holds = r.lambda_min_clean - static_cast<double>(attacked.size()) > tol;
  return r;
}

nlohmann::json to_json(const ResilienceReport& r) {
  return {
      {"compromised_streams", r.compromised_count},
      {"lambda_min_clean", r.lambda_min_clean},
      {"delta_a", r.delta_a},
      {"delta_a_exact", r.delta_exact},
      {"margin_kappa", r.margin_kappa},
      {"strict_holds", r.strict_holds},
      {"relaxed_holds", r.relaxed_holds},
      {"verdict", r.verdict()},
  };
}

}  // namespace sage
