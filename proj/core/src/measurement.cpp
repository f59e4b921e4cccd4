#include "sage/measurement.hpp"

#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "sage/errors.hpp"

namespace sage {

namespace {
constexpr double kZeroRowNorm = 1e-12;
}

RowNormalization normalize_rows(const Eigen::MatrixXd& raw) {
  RowNormalization out{raw, Eigen::VectorXd(raw.rows())};
  for (Eigen::Index p = 0; p < raw.rows(); ++p) {
    const double norm = raw.row(p).norm();
    if (!(norm >= kZeroRowNorm)) throw ZeroRow(static_cast<std::size_t>(p));
    out.scale(p) = 1.0 / norm;
    out.normalized.row(p) = raw.row(p) * out.scale(p);
  }
  return out;
}

MeasurementModel::MeasurementModel(std::size_t m_dim, std::vector<Eigen::MatrixXd> raw_matrices,
                                   std::vector<Eigen::VectorXd> raw_noise_stddevs)
    : m_(m_dim) {
  if (m_ == 0) throw ConfigError("parameter dimension must be positive");
  if (raw_matrices.empty()) throw ConfigError("measurement model needs at least one agent");
  if (raw_noise_stddevs.size() != raw_matrices.size()) {
    throw DimensionMismatch("one noise vector per agent is required");
  }
  std::size_t offset = 0;
  matrices_.reserve(raw_matrices.size());
  stddevs_.reserve(raw_matrices.size());
  std::vector<double> scales;
  for (std::size_t n = 0; n < raw_matrices.size(); ++n) {
    const auto& H = raw_matrices[n];
    const auto& sd = raw_noise_stddevs[n];
    if (static_cast<std::size_t>(H.cols()) != m_) {
      throw DimensionMismatch("agent " + std::to_string(n + 1) + ": matrix has " + std::to_string(H.cols()) +
                              " columns, expected " + std::to_string(m_));
    }
    if (sd.size() != H.rows()) {
      throw DimensionMismatch("agent " + std::to_string(n + 1) + ": noise vector length differs from row count");
    }
    for (Eigen::Index i = 0; i < sd.size(); ++i) {
      if (!(sd(i) >= 0.0) || !std::isfinite(sd(i))) throw ConfigError("noise standard deviations must be finite and >= 0");
    }
    RowNormalization norm;
    try {
      norm = normalize_rows(H);
    } catch (const ZeroRow& e) {
      throw ZeroRow(offset + e.row());
    }
    stddevs_.push_back(sd.cwiseProduct(norm.scale));
    for (Eigen::Index i = 0; i < norm.scale.size(); ++i) scales.push_back(norm.scale(i));
    matrices_.push_back(std::move(norm.normalized));
    offset += static_cast<std::size_t>(H.rows());
  }
  if (offset == 0) throw ConfigError("measurement model has no streams");
  scales_ = Eigen::Map<const Eigen::VectorXd>(scales.data(), static_cast<Eigen::Index>(scales.size()));
  index_streams();
}

void MeasurementModel::index_streams() {
  ranges_.clear();
  owner_.clear();
  std::size_t offset = 0;
  for (std::size_t n = 0; n < matrices_.size(); ++n) {
    const auto count = static_cast<std::size_t>(matrices_[n].rows());
    ranges_.push_back({offset, count});
    owner_.insert(owner_.end(), count, n);
    offset += count;
  }
  stacked_.resize(static_cast<Eigen::Index>(offset), static_cast<Eigen::Index>(m_));
  for (std::size_t n = 0; n < matrices_.size(); ++n) {
    stacked_.middleRows(static_cast<Eigen::Index>(ranges_[n].first), matrices_[n].rows()) = matrices_[n];
  }
}

MeasurementModel MeasurementModel::from_rows(const Eigen::MatrixXd& rows, double noise_stddev) {
  return MeasurementModel(static_cast<std::size_t>(rows.cols()), {rows},
                          {Eigen::VectorXd::Constant(rows.rows(), noise_stddev)});
}

MeasurementModel MeasurementModel::one_stream_per_agent(const Eigen::MatrixXd& rows, double noise_stddev) {
  std::vector<Eigen::MatrixXd> mats;
  std::vector<Eigen::VectorXd> sds;
  for (Eigen::Index p = 0; p < rows.rows(); ++p) {
    mats.emplace_back(rows.row(p));
    sds.push_back(Eigen::VectorXd::Constant(1, noise_stddev));
  }
  return MeasurementModel(static_cast<std::size_t>(rows.cols()), std::move(mats), std::move(sds));
}

Eigen::VectorXd MeasurementModel::clean_measurement(std::size_t n, const Eigen::VectorXd& theta, Rng& rng) const {
  const auto& H = matrices_.at(n);
  if (static_cast<std::size_t>(theta.size()) != m_) throw DimensionMismatch("parameter has wrong dimension");
  Eigen::VectorXd y = H * theta;
  const auto& sd = stddevs_[n];
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (sd(i) > 0.0) y(i) += sd(i) * rng.normal();
  }
  return y;
}

Eigen::VectorXd MeasurementModel::clean_stacked(const Eigen::VectorXd& theta, Rng& rng) const {
  Eigen::VectorXd y(stacked_.rows());
  for (std::size_t n = 0; n < matrices_.size(); ++n) {
    y.segment(static_cast<Eigen::Index>(ranges_[n].first), static_cast<Eigen::Index>(ranges_[n].count)) =
        clean_measurement(n, theta, rng);
  }
  return y;
}

MeasurementModel MeasurementModel::with_uniform_noise(double sigma) const {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("noise standard deviation must be finite and >= 0");
  MeasurementModel copy = *this;
  for (auto& sd : copy.stddevs_) sd.setConstant(sigma);
  return copy;
}

std::vector<StreamRange> stream_index_map(const MeasurementModel& model) {
  return model.stream_ranges();
}

double noise_stddev_for_snr(const MeasurementModel& model, const Eigen::VectorXd& theta, double snr_db) {
  if (static_cast<std::size_t>(theta.size()) != model.m_dim()) throw DimensionMismatch("parameter has wrong dimension");
  const double signal_power = (model.stacked() * theta).squaredNorm() / static_cast<double>(model.stream_count());
  return std::sqrt(signal_power / std::pow(10.0, snr_db / 10.0));
}

void RunningAverage::add(const Eigen::VectorXd& y) {
  if (y.size() != mean_.size()) {
    throw DimensionMismatch("running average of dimension " + std::to_string(mean_.size()) +
                            " given a sample of dimension " + std::to_string(y.size()));
  }
  const double t = static_cast<double>(count_);
  mean_ = (t / (t + 1.0)) * mean_ + (1.0 / (t + 1.0)) * y;
  ++count_;
}

RunningAverage update_running_average(RunningAverage avg, const Eigen::VectorXd& y) {
  avg.add(y);
  return avg;
}

Eigen::MatrixXd window_selector(std::size_t grid_w, std::size_t grid_h, std::size_t half_span, std::size_t x,
                                std::size_t y) {
  if (grid_w == 0 || grid_h == 0) throw ConfigError("window grid must be non-empty");
  if (x >= grid_w || y >= grid_h) throw ConfigError("window position outside the grid");
  const std::size_t x0 = x >= half_span ? x - half_span : 0;
  const std::size_t y0 = y >= half_span ? y - half_span : 0;
  const std::size_t x1 = std::min(grid_w - 1, x + half_span);
  const std::size_t y1 = std::min(grid_h - 1, y + half_span);
  const auto rows = static_cast<Eigen::Index>((x1 - x0 + 1) * (y1 - y0 + 1));
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(grid_w * grid_h));
  Eigen::Index r = 0;
  for (std::size_t cy = y0; cy <= y1; ++cy) {
    for (std::size_t cx = x0; cx <= x1; ++cx) {
      H(r++, static_cast<Eigen::Index>(cy * grid_w + cx)) = 1.0;
    }
  }
  return H;
}

namespace {

Eigen::MatrixXd rows_from_json(const nlohmann::json& rows, std::size_t m_dim) {
  if (!rows.is_array() || rows.empty()) throw ConfigError("agent \"rows\" must be a non-empty array");
  Eigen::MatrixXd H(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(m_dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (!r.is_array() || r.size() != m_dim) {
      throw ConfigError("row " + std::to_string(i + 1) + " must have m_dim = " + std::to_string(m_dim) + " entries");
    }
    for (std::size_t k = 0; k < m_dim; ++k) H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = r[k].get<double>();
  }
  return H;
}

}  // namespace

MeasurementModel measurement_model_from_json(const nlohmann::json& j) {
  try {
    const auto m_dim = j.at("m_dim").get<std::size_t>();
    const auto& agents = j.at("agents");
    if (!agents.is_array() || agents.empty()) throw ConfigError("\"agents\" must be a non-empty array");
    std::vector<Eigen::MatrixXd> mats;
    std::vector<Eigen::VectorXd> sds;
    for (const auto& a : agents) {
      Eigen::MatrixXd H;
      if (a.contains("rows")) {
        H = rows_from_json(a["rows"], m_dim);
      } else if (a.contains("window")) {
        const auto& w = a["window"];
        const auto gw = w.at("grid_w").get<std::size_t>();
        const auto gh = w.at("grid_h").get<std::size_t>();
        if (gw * gh != m_dim) throw ConfigError("window grid size must equal m_dim");
        const auto pos = w.at("position").get<std::vector<std::size_t>>();
        if (pos.size() != 2) throw ConfigError("window position must be [x, y]");
        H = window_selector(gw, gh, w.at("half_span").get<std::size_t>(), pos[0], pos[1]);
      } else if (a.value("identity", false)) {
        H = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(m_dim), static_cast<Eigen::Index>(m_dim));
      } else {
        throw ConfigError("agent needs \"rows\", \"window\" or \"identity\"");
      }
      Eigen::VectorXd sd;
      const auto& s = a.contains("noise_stddev") ? a["noise_stddev"] : nlohmann::json(0.0);
      if (s.is_array()) {
        const auto v = s.get<std::vector<double>>();
        if (v.size() != static_cast<std::size_t>(H.rows())) throw ConfigError("noise_stddev array must match row count");
        sd = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
      } else {
        sd = Eigen::VectorXd::Constant(H.rows(), s.get<double>());
      }
      const auto repeat = a.value("repeat", std::size_t{1});
      if (repeat == 0) throw ConfigError("\"repeat\" must be positive");
      for (std::size_t r = 0; r < repeat; ++r) {
        mats.push_back(H);
        sds.push_back(sd);
      }
    }
    return MeasurementModel(m_dim, std::move(mats), std::move(sds));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("measurement model: ") + e.what());
  }
}

}  // namespace sage
