#include <gtest/gtest.h>

#include <cmath>
#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "sage/errors.hpp"
#include "sage/measurement.hpp"
#include "sage/rng.hpp"

namespace {

using sage::MeasurementModel;

MeasurementModel random_model(std::uint64_t seed, std::size_t m, std::size_t agents) {
  sage::Rng rng(seed);
  std::vector<Eigen::MatrixXd> hs;
  std::vector<Eigen::VectorXd> sds;
  for (std::size_t n = 0; n < agents; ++n) {
    const auto rows = static_cast<Eigen::Index>(1 + rng.below(3));
    Eigen::MatrixXd h(rows, static_cast<Eigen::Index>(m));
    for (Eigen::Index i = 0; i < h.size(); ++i) h(i) = rng.uniform(-2.0, 2.0);
    hs.push_back(h);
    sds.push_back(Eigen::VectorXd::Constant(rows, 0.5));
  }
  return MeasurementModel(m, hs, sds);
}

TEST(Measurement, RowsAreNormalizedAndNoiseRescaled) {
  Eigen::MatrixXd h(2, 2);
  h << 3, 4, 0, 2;
  const MeasurementModel model(2, {h}, {Eigen::Vector2d(5.0, 1.0)});
  const auto& s = model.stacked();
  EXPECT_NEAR(s(0, 0), 0.6, 1e-15);
  EXPECT_NEAR(s(0, 1), 0.8, 1e-15);
  EXPECT_NEAR(s(1, 1), 1.0, 1e-15);
  EXPECT_NEAR(model.noise_stddevs(0)(0), 1.0, 1e-15);
  EXPECT_NEAR(model.noise_stddevs(0)(1), 0.5, 1e-15);
  EXPECT_NEAR(model.row_scales()(0), 0.2, 1e-15);
}

TEST(Measurement, UnitRowNormProperty) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto model = random_model(seed, 4, 6);
    for (Eigen::Index p = 0; p < model.stacked().rows(); ++p) {
      EXPECT_NEAR(model.stacked().row(p).norm(), 1.0, 1e-12);
    }
  }
}

TEST(Measurement, ZeroRowIsRejected) {
  Eigen::MatrixXd h(2, 2);
  h << 1, 0, 0, 0;
  EXPECT_THROW(MeasurementModel(2, {h}, {Eigen::Vector2d::Zero()}), sage::ZeroRow);
  try {
    sage::normalize_rows(h);
    ADD_FAILURE() << "zero row accepted";
  } catch (const sage::ZeroRow& e) {
    EXPECT_EQ(e.row(), 1u);
  }
}

TEST(Measurement, DimensionChecks) {
  EXPECT_THROW(MeasurementModel(3, {Eigen::MatrixXd::Identity(2, 2)}, {Eigen::Vector2d::Zero()}),
               sage::DimensionMismatch);
  EXPECT_THROW(MeasurementModel(2, {Eigen::MatrixXd::Identity(2, 2)}, {Eigen::Vector3d::Zero()}),
               sage::DimensionMismatch);
}

TEST(Measurement, StreamIndicesPartitionByAgent) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto model = random_model(seed, 3, 7);
    std::size_t next = 0;
    for (std::size_t n = 0; n < model.agent_count(); ++n) {
      const auto& r = model.streams_of(n);
      EXPECT_EQ(r.first, next);
      EXPECT_EQ(r.count, static_cast<std::size_t>(model.agent_matrix(n).rows()));
      for (std::size_t p = r.first; p < r.end(); ++p) EXPECT_EQ(model.agent_of_stream(p), n);
      next = r.end();
    }
    EXPECT_EQ(next, model.stream_count());
    EXPECT_EQ(sage::stream_index_map(model), model.stream_ranges());
  }
}

TEST(Measurement, StackedGrammianMatchesOuterProducts) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto model = random_model(seed, 4, 5);
    oracle::Dense rows;
    std::vector<std::size_t> all;
    for (Eigen::Index p = 0; p < model.stacked().rows(); ++p) {
      rows.emplace_back();
      for (Eigen::Index j = 0; j < 4; ++j) rows.back().push_back(model.stacked()(p, j));
      all.push_back(static_cast<std::size_t>(p));
    }
    const auto g = oracle::grammian(rows, all, 4);
    const Eigen::MatrixXd hth = model.stacked().transpose() * model.stacked();
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(hth(i, j), g[i][j], 1e-12);
  }
}

TEST(Measurement, NoiseFreeSampleIsExact) {
  const auto model = random_model(3, 3, 4);
  const Eigen::Vector3d theta(1.0, -2.0, 0.5);
  sage::Rng rng(0);
  const MeasurementModel quiet = model.with_uniform_noise(0.0);
  const Eigen::VectorXd y = quiet.clean_stacked(theta, rng);
  EXPECT_LE((y - model.stacked() * theta).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Measurement, NoiseHasRequestedSpread) {
  const auto model = MeasurementModel::one_stream_per_agent(Eigen::MatrixXd::Identity(2, 2), 2.0);
  sage::Rng rng(9);
  double sq = 0.0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) sq += model.clean_stacked(Eigen::Vector2d::Zero(), rng).squaredNorm();
  EXPECT_NEAR(sq / (2.0 * n), 4.0, 0.1);
}

TEST(Measurement, SnrConversion) {
  const auto model = MeasurementModel::one_stream_per_agent(Eigen::MatrixXd::Identity(2, 2));
  const Eigen::Vector2d theta(1.0, 1.0);
  // Mean per-stream power 1; -10 dB gives sigma^2 = 10.
  EXPECT_NEAR(sage::noise_stddev_for_snr(model, theta, -10.0), std::sqrt(10.0), 1e-12);
  EXPECT_NEAR(sage::noise_stddev_for_snr(model, theta, 0.0), 1.0, 1e-12);
}

TEST(RunningAverage, SmallExamples) {
  sage::RunningAverage avg(1);
  avg.add(Eigen::VectorXd::Constant(1, 1.0));
  EXPECT_EQ(avg.mean()(0), 1.0);
  avg.add(Eigen::VectorXd::Constant(1, 3.0));
  EXPECT_EQ(avg.mean()(0), 2.0);
  EXPECT_EQ(avg.count(), 2u);
  EXPECT_THROW(avg.add(Eigen::VectorXd::Zero(2)), sage::DimensionMismatch);
}

TEST(RunningAverage, ConstantStream) {
  const Eigen::Vector3d v(0.1, -7.3, 1e3);
  sage::RunningAverage avg(3);
  for (int i = 0; i < 1000; ++i) avg = sage::update_running_average(avg, v);
  EXPECT_LE((avg.mean() - v).cwiseAbs().maxCoeff(), 1e-12 * 1e3);
}

TEST(RunningAverage, MatchesArithmeticMean) {
  sage::Rng rng(5);
  sage::RunningAverage avg(2);
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  for (int k = 1; k <= 500; ++k) {
    const Eigen::Vector2d y(rng.normal(), rng.uniform(-3, 3));
    sum += y;
    avg.add(y);
    ASSERT_LE((avg.mean() - sum / k).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(RunningAverage, IsLinearInItsInput) {
  sage::Rng rng(6);
  sage::RunningAverage clean(2), attack(2), sum(2);
  for (int i = 0; i < 300; ++i) {
    const Eigen::Vector2d c(rng.normal(), rng.normal());
    const Eigen::Vector2d a(rng.uniform(-100, 100), 255.0);
    clean.add(c);
    attack.add(a);
    sum.add(c + a);
  }
  EXPECT_LE((sum.mean() - clean.mean() - attack.mean()).cwiseAbs().maxCoeff(), 1e-10);
}

// (t+1)^0.4 ||wbar_t|| for M = 2, sigma = 1. wbar_t has covariance I/(t+1), so
// the statistic scales as (t+1)^-0.1 and the median ratio between t = 1e4 and
// t = 1e3 is about 10^-0.1.
TEST(RunningAverage, TimeAveragedNoiseDecays) {
  std::vector<double> early, late;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    sage::Rng rng(sage::derive_seed(77, seed));
    sage::RunningAverage avg(2);
    for (std::uint64_t t = 0; t <= 10000; ++t) {
      avg.add(Eigen::Vector2d(rng.normal(), rng.normal()));
      if (t == 1000) early.push_back(std::pow(t + 1.0, 0.4) * avg.mean().norm());
      if (t == 10000) late.push_back(std::pow(t + 1.0, 0.4) * avg.mean().norm());
    }
  }
  const double ratio = oracle::median(late) / oracle::median(early);
  EXPECT_LT(ratio, 1.0);
  EXPECT_NEAR(ratio, std::pow(10.0, -0.1), 0.15);
}

TEST(Window, ClippedChebyshevWindow) {
  const Eigen::MatrixXd corner = sage::window_selector(10, 10, 2, 0, 0);
  EXPECT_EQ(corner.rows(), 9);
  const Eigen::MatrixXd inner = sage::window_selector(10, 10, 2, 5, 5);
  EXPECT_EQ(inner.rows(), 25);
  for (Eigen::Index r = 0; r < inner.rows(); ++r) {
    Eigen::Index col;
    EXPECT_EQ(inner.row(r).maxCoeff(&col), 1.0);
    EXPECT_EQ(inner.row(r).sum(), 1.0);
    const auto x = col % 10, y = col / 10;
    EXPECT_LE(std::abs(x - 5), 2);
    EXPECT_LE(std::abs(y - 5), 2);
  }
  EXPECT_EQ(sage::window_selector(10, 10, 2, 9, 4).rows(), 15);
}

TEST(Measurement, JsonLoader) {
  const auto j = nlohmann::json::parse(R"({
    "m_dim": 4,
    "agents": [
      {"rows": [[1, 0, 0, 0], [0, 2, 0, 0]], "noise_stddev": [1, 2]},
      {"window": {"grid_w": 2, "grid_h": 2, "half_span": 0, "position": [1, 1]}, "noise_stddev": 0.5},
      {"identity": true, "noise_stddev": 1, "repeat": 2}
    ]})");
  const auto model = sage::measurement_model_from_json(j);
  EXPECT_EQ(model.agent_count(), 4u);
  EXPECT_EQ(model.stream_count(), 2u + 1u + 8u);
  EXPECT_EQ(model.agent_matrix(1)(0, 3), 1.0);
  EXPECT_NEAR(model.noise_stddevs(0)(1), 1.0, 1e-15);
  EXPECT_THROW(sage::measurement_model_from_json(nlohmann::json::parse(R"({"m_dim": 2, "agents": []})")),
               sage::ConfigError);
}

}  // namespace
