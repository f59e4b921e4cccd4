#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "sage/attack.hpp"
#include "sage/errors.hpp"
#include "sage/measurement.hpp"
#include "sage/resilience.hpp"
#include "sage/rng.hpp"

namespace {

using sage::MeasurementModel;
using sage::StreamSet;

MeasurementModel scalar_model(std::size_t p) { return MeasurementModel::from_rows(Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(p), 1)); }

Eigen::MatrixXd random_rows(sage::Rng& rng, std::size_t p, std::size_t m) {
  Eigen::MatrixXd h(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(m));
  for (Eigen::Index i = 0; i < h.size(); ++i) h(i) = rng.normal();
  return h;
}

Eigen::MatrixXd random_orthonormal(sage::Rng& rng, std::size_t m) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_rows(rng, m, m));
  return qr.householderQ();
}

// Rows drawn from an orthonormal basis with a random multiplicity per direction.
MeasurementModel orthogonal_model(sage::Rng& rng, std::size_t m, std::size_t max_p, std::vector<std::size_t>& mult) {
  const Eigen::MatrixXd q = random_orthonormal(rng, m);
  mult.assign(m, 1);
  std::size_t p = m;
  const std::size_t extra = rng.below(max_p - m + 1);
  for (std::size_t i = 0; i < extra; ++i, ++p) ++mult[rng.below(m)];
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(m));
  Eigen::Index r = 0;
  for (std::size_t d = 0; d < m; ++d)
    for (std::size_t c = 0; c < mult[d]; ++c) rows.row(r++) = q.col(static_cast<Eigen::Index>(d)).transpose();
  return MeasurementModel::from_rows(rows);
}

oracle::Dense dense_rows(const MeasurementModel& model) {
  oracle::Dense rows;
  for (Eigen::Index p = 0; p < model.stacked().rows(); ++p) {
    rows.emplace_back();
    for (Eigen::Index j = 0; j < model.stacked().cols(); ++j) rows.back().push_back(model.stacked()(p, j));
  }
  return rows;
}

double oracle_lambda_min(const oracle::Dense& rows, const std::vector<std::size_t>& keep, std::size_t m) {
  return oracle::symmetric_eigenvalues(oracle::grammian(rows, keep, m)).front();
}

std::vector<std::size_t> complement_of(std::size_t p, const std::vector<std::size_t>& removed) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < p; ++i)
    if (std::find(removed.begin(), removed.end(), i) == removed.end()) keep.push_back(i);
  return keep;
}

TEST(Grammian, AdditiveOverDisjointSets) {
  sage::Rng rng(1);
  for (int trial = 0; trial < 30; ++trial) {
    const auto model = MeasurementModel::from_rows(random_rows(rng, 9, 3));
    StreamSet x, y;
    for (std::size_t p = 0; p < 9; ++p) (rng.bernoulli(0.5) ? x : y).push_back(p);
    StreamSet both = x;
    both.insert(both.end(), y.begin(), y.end());
    const Eigen::MatrixXd diff = sage::grammian(model, both) - sage::grammian(model, x) - sage::grammian(model, y);
    EXPECT_LE(diff.cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_TRUE(sage::grammian(model, both).isApprox(sage::full_grammian(model)));
  }
}

TEST(Grammian, EigenvaluesMatchJacobi) {
  sage::Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto model = MeasurementModel::from_rows(random_rows(rng, 7, 4));
    std::vector<std::size_t> all(7);
    for (std::size_t i = 0; i < 7; ++i) all[i] = i;
    EXPECT_NEAR(sage::min_eigenvalue(sage::full_grammian(model)), oracle_lambda_min(dense_rows(model), all, 4), 1e-9);
  }
}

TEST(Observability, GlobalAndSparse) {
  const auto model = scalar_model(3);
  EXPECT_TRUE(sage::is_globally_observable(model, {0}));
  EXPECT_FALSE(sage::is_globally_observable(model, {}));
  EXPECT_TRUE(sage::is_sparse_observable(model, 2));
  EXPECT_THROW(sage::is_sparse_observable(model, 3), sage::InvalidCount);
  const auto eye = MeasurementModel::from_rows(Eigen::MatrixXd::Identity(3, 3));
  EXPECT_TRUE(sage::is_sparse_observable(eye, 0));
  EXPECT_FALSE(sage::is_sparse_observable(eye, 1));
  EXPECT_THROW(sage::is_sparse_observable(MeasurementModel::from_rows(Eigen::MatrixXd::Ones(60, 1)), 30, 1000), sage::TooLarge);
}

TEST(Observability, SparseMatchesSubsetOracle) {
  sage::Rng rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t p = 4 + rng.below(5), m = 1 + rng.below(3);
    Eigen::MatrixXd rows = random_rows(rng, p, m);
    // Repeat some rows so that both outcomes occur.
    for (Eigen::Index r = 1; r < rows.rows(); ++r)
      if (rng.bernoulli(0.4)) rows.row(r) = rows.row(r - 1);
    const auto model = MeasurementModel::from_rows(rows);
    const auto dense = dense_rows(model);
    for (std::size_t s = 0; s < p; ++s) {
      bool expected = true;
      oracle::for_each_subset(p, s, [&](const std::vector<std::size_t>& removed) {
        if (oracle_lambda_min(dense, complement_of(p, removed), m) <= 1e-9) expected = false;
      });
      EXPECT_EQ(sage::is_sparse_observable(model, s), expected) << "trial " << trial << " s " << s;
    }
  }
}

TEST(Binomial, Values) {
  EXPECT_EQ(sage::binomial(5, 2), 10u);
  EXPECT_EQ(sage::binomial(5, 0), 1u);
  EXPECT_EQ(sage::binomial(3, 5), 0u);
  EXPECT_EQ(sage::binomial(60, 30), 118264581564861424ULL);
  EXPECT_EQ(sage::binomial(200, 100), UINT64_MAX);
}

TEST(DeltaA, SmallCases) {
  const auto scalar = scalar_model(5);
  EXPECT_EQ(sage::delta_a(scalar, {}).value, 0.0);
  EXPECT_NEAR(sage::delta_a(scalar, {0, 3}).value, 2.0, 1e-12);
  const auto eye = MeasurementModel::from_rows(Eigen::MatrixXd::Identity(4, 4));
  EXPECT_NEAR(sage::delta_a(eye, {0, 1, 2, 3}).value, 2.0, 1e-12);
  const auto capped = sage::delta_a(MeasurementModel::from_rows(Eigen::MatrixXd::Ones(25, 1)), StreamSet{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20});
  EXPECT_FALSE(capped.exact);
  EXPECT_EQ(capped.value, 21.0);
}

TEST(DeltaA, MatchesSignPatternOracleAndBounds) {
  sage::Rng rng(4);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t p = 8, m = 1 + rng.below(4);
    const auto model = MeasurementModel::from_rows(random_rows(rng, p, m));
    const auto attacked = sage::random_compromised_set(p, 1 + rng.below(6), rng);
    const auto d = sage::delta_a(model, attacked);
    ASSERT_TRUE(d.exact);
    EXPECT_NEAR(d.value, oracle::sign_pattern_max(dense_rows(model), attacked, m), 1e-9);
    EXPECT_LE(d.value, static_cast<double>(attacked.size()) + 1e-9);
    double sampled = 0.0;
    for (int i = 0; i < 2000; ++i) {
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
      for (auto a : attacked) acc += rng.uniform(-1, 1) * model.stacked().row(static_cast<Eigen::Index>(a)).transpose();
      sampled = std::max(sampled, acc.norm());
    }
    EXPECT_GE(d.value + 1e-12, sampled);
  }
}

TEST(Resilience, ScalarMajority) {
  const auto model = scalar_model(5);
  const auto ok = sage::check_resilience(model, {0, 1});
  EXPECT_NEAR(ok.lambda_min_clean, 3.0, 1e-12);
  EXPECT_NEAR(ok.delta_a, 2.0, 1e-12);
  EXPECT_TRUE(ok.strict_holds);
  EXPECT_TRUE(ok.relaxed_holds);
  EXPECT_EQ(ok.verdict(), "sufficient condition holds");
  const auto bad = sage::check_resilience(model, {0, 1, 2});
  EXPECT_FALSE(bad.strict_holds);
  EXPECT_FALSE(bad.relaxed_holds);
  EXPECT_NEAR(bad.margin_kappa, -1.0, 1e-12);
  EXPECT_EQ(bad.verdict(), "sufficient condition violated");
  EXPECT_THROW(sage::check_resilience(model, {0, 1, 2, 3, 4}), sage::AllStreamsCompromised);
}

TEST(Resilience, EmptyAttackSet) {
  sage::Rng rng(5);
  const auto model = MeasurementModel::from_rows(random_rows(rng, 6, 3));
  const auto r = sage::check_resilience(model, {});
  EXPECT_TRUE(r.strict_holds);
  EXPECT_NEAR(r.margin_kappa, sage::min_eigenvalue(sage::full_grammian(model)), 1e-12);
  EXPECT_EQ(r.delta_a, 0.0);
}

TEST(Resilience, RelaxedImpliesStrict) {
  sage::Rng rng(6);
  int relaxed = 0, strict_only = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t p = 10, m = 1 + rng.below(3);
    const auto model = MeasurementModel::from_rows(random_rows(rng, p, m));
    const auto r = sage::check_resilience(model, sage::random_compromised_set(p, rng.below(4), rng));
    if (r.relaxed_holds) {
      ++relaxed;
      EXPECT_TRUE(r.strict_holds);
    } else if (r.strict_holds) {
      ++strict_only;
    }
    EXPECT_NEAR(r.margin_kappa, r.lambda_min_clean - r.delta_a, 1e-15);
  }
  EXPECT_GT(relaxed, 0);
  EXPECT_GT(strict_only, 0);
}

TEST(TolerableS, OrthogonalSpectrumIsMultiplicity) {
  sage::Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::size_t> mult;
    const auto model = orthogonal_model(rng, 1 + rng.below(4), 12, mult);
    const auto counted = sage::orthogonal_multiplicities(model);
    ASSERT_TRUE(counted.has_value());
    EXPECT_EQ(*counted, mult);
    EXPECT_NEAR(sage::min_eigenvalue(sage::full_grammian(model)),
                static_cast<double>(*std::min_element(mult.begin(), mult.end())), 1e-9);
    EXPECT_EQ(sage::max_tolerable_s(model, sage::SearchMethod::kOrthogonal),
              sage::max_tolerable_s(model, sage::SearchMethod::kExhaustive));
  }
}

TEST(TolerableS, ImpliesSparseObservability) {
  sage::Rng rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t p = 5 + rng.below(6), m = 1 + rng.below(2);
    Eigen::MatrixXd rows = random_rows(rng, p, m);
    for (Eigen::Index r = 1; r < rows.rows(); ++r)
      if (rng.bernoulli(0.5)) rows.row(r) = rows.row(r - 1);
    const auto model = MeasurementModel::from_rows(rows);
    if (!sage::is_sparse_observable(model, 0)) continue;
    const auto s = sage::max_tolerable_s(model);
    if (2 * s < p) EXPECT_TRUE(sage::is_sparse_observable(model, 2 * s));
  }
}

TEST(TolerableS, Errors) {
  EXPECT_THROW(sage::max_tolerable_s(MeasurementModel::from_rows(Eigen::MatrixXd::Ones(3, 2))), sage::NotObservable);
  Eigen::MatrixXd skew(3, 2);
  skew << 1, 0, 0, 1, 1, 1;
  EXPECT_THROW(sage::max_tolerable_s(MeasurementModel::from_rows(skew), sage::SearchMethod::kOrthogonal),
               sage::ConfigError);
  EXPECT_EQ(sage::max_tolerable_s(scalar_model(5)), 2u);
  EXPECT_EQ(sage::max_tolerable_s(scalar_model(4)), 1u);
}

}  // namespace
