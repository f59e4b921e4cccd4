#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "sage/rng.hpp"

namespace sage {

struct RowNormalization {
  Eigen::MatrixXd normalized;
  /// Diagonal of D with D * raw = normalized.
  Eigen::VectorXd scale;
};

/// Scales each row to unit l2 norm. Throws ZeroRow for rows with norm < 1e-12.
RowNormalization normalize_rows(const Eigen::MatrixXd& raw);

/// Contiguous block of stacked stream indices owned by one agent (0-based).
struct StreamRange {
  std::size_t first = 0;
  std::size_t count = 0;
  std::size_t end() const noexcept { return first + count; }
  friend bool operator==(const StreamRange&, const StreamRange&) = default;
};

/// Heterogeneous linear measurement model y_n = H_n theta + w_n.
///
/// Rows are normalized once, at construction. Noise standard deviations are
/// given for the raw rows and rescaled together with them, so that the model
/// always describes the normalized measurements the estimator processes.
class MeasurementModel {
 public:
  MeasurementModel() = default;
  MeasurementModel(std::size_t m_dim, std::vector<Eigen::MatrixXd> raw_matrices,
                   std::vector<Eigen::VectorXd> raw_noise_stddevs);

  /// Single agent holding every row; convenient for stream-level analysis.
  static MeasurementModel from_rows(const Eigen::MatrixXd& rows, double noise_stddev = 0.0);

  /// One agent per row.
  static MeasurementModel one_stream_per_agent(const Eigen::MatrixXd& rows, double noise_stddev = 0.0);

  std::size_t m_dim() const noexcept { return m_; }
  std::size_t agent_count() const noexcept { return matrices_.size(); }
  std::size_t stream_count() const noexcept { return static_cast<std::size_t>(stacked_.rows()); }

  const Eigen::MatrixXd& agent_matrix(std::size_t n) const { return matrices_.at(n); }
  const Eigen::VectorXd& noise_stddevs(std::size_t n) const { return stddevs_.at(n); }
  const StreamRange& streams_of(std::size_t n) const { return ranges_.at(n); }
  const std::vector<StreamRange>& stream_ranges() const noexcept { return ranges_; }
  std::size_t agent_of_stream(std::size_t p) const { return owner_.at(p); }

  /// Stacked P x M matrix of normalized rows h_p^T.
  const Eigen::MatrixXd& stacked() const noexcept { return stacked_; }
  /// Scaling applied to each raw row (stacked order).
  const Eigen::VectorXd& row_scales() const noexcept { return scales_; }

  /// H_n theta + w with w ~ N(0, diag(sigma^2)).
  Eigen::VectorXd clean_measurement(std::size_t n, const Eigen::VectorXd& theta, Rng& rng) const;
  /// Stacked clean measurement for all agents, drawn in agent order.
  Eigen::VectorXd clean_stacked(const Eigen::VectorXd& theta, Rng& rng) const;

  /// Copy with every stream using the same (normalized) noise standard deviation.
  MeasurementModel with_uniform_noise(double sigma) const;

 private:
  void index_streams();

  std::size_t m_ = 0;
  std::vector<Eigen::MatrixXd> matrices_;
  std::vector<Eigen::VectorXd> stddevs_;
  std::vector<StreamRange> ranges_;
  std::vector<std::size_t> owner_;
  Eigen::MatrixXd stacked_;
  Eigen::VectorXd scales_;
};

std::vector<StreamRange> stream_index_map(const MeasurementModel& model);

/// Network-wide noise level for a local SNR in dB:
/// sigma^2 = (||H theta||^2 / P) / 10^(snr/10), i.e. mean per-stream signal
/// power divided by the linear SNR.
double noise_stddev_for_snr(const MeasurementModel& model, const Eigen::VectorXd& theta,
                            double snr_db);

/// Time average of a vector stream, updated as
/// mean(t) = t/(t+1) mean(t-1) + 1/(t+1) y(t) with mean(-1) = 0.
class RunningAverage {
 public:
  explicit RunningAverage(std::size_t dim = 0) : mean_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim))) {}

  std::uint64_t count() const noexcept { return count_; }
  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(mean_.size()); }

  /// Throws DimensionMismatch.
  void add(const Eigen::VectorXd& y);

 private:
  std::uint64_t count_ = 0;
  Eigen::VectorXd mean_;
};

RunningAverage update_running_average(RunningAverage avg, const Eigen::VectorXd& y);

/// Canonical-basis selector for a pixel window: every cell of a
/// grid_w x grid_h grid (row-major, component = y * grid_w + x) within
/// Chebyshev distance half_span of (x, y), clipped at the borders.
Eigen::MatrixXd window_selector(std::size_t grid_w, std::size_t grid_h, std::size_t half_span,
                                std::size_t x, std::size_t y);

/// {"m_dim": M, "agents": [{"rows": [[...]], "noise_stddev": s}, ...]}.
/// An agent may use {"window": {"grid_w", "grid_h", "half_span", "position": [x, y]}}
/// or {"identity": true} instead of "rows", and "repeat": k to stand for k
/// identical agents. "noise_stddev" is a scalar or one value per row.
MeasurementModel measurement_model_from_json(const nlohmann::json& j);

}  // namespace sage
