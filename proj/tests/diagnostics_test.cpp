#include "bbt/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>
#include <json.hpp>

#include "bbt/error.hpp"
#include "bbt/sim.hpp"
#include "test_util.hpp"

namespace bbt {
namespace {

using testing::ar1;
using testing::gaussian_matrix;
using testing::rel_frobenius;

std::int64_t brute_force_kendall(const std::vector<int>& a, const std::vector<int>& b) {
  std::int64_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j)
      if ((a[i] < a[j]) != (b[i] < b[j])) ++d;
  return d;
}

std::vector<int> random_permutation(int m, std::mt19937_64& rng) {
  std::vector<int> p(static_cast<std::size_t>(m));
  std::iota(p.begin(), p.end(), 1);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

TEST(Autocovariance, IidLagZeroIsIdentity) {
  auto x = gaussian_matrix(100000, 3, 1);
  EXPECT_LT(rel_frobenius(autocovariance(x, 0), Eigen::MatrixXd::Identity(3, 3)), 0.05);
}

TEST(Autocovariance, ConstantChainIsZero) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Constant(50, 3, 2.5);
  for (Eigen::Index k : {0, 1, 7}) EXPECT_EQ(autocovariance(x, k).norm(), 0.0);
}

TEST(Autocovariance, Ar1Decay) {
  Eigen::MatrixXd x = ar1(200000, 0.5, 2);
  const double g0 = autocovariance(x, 0)(0, 0);
  for (int k = 1; k <= 5; ++k) EXPECT_NEAR(autocovariance(x, k)(0, 0) / g0, std::pow(0.5, k), 0.03);
  EXPECT_THROW(autocovariance(x, -1), ValidationError);
}

TEST(SpectralLongrun, UnitBandwidthIsSampleCovariance) {
  auto x = gaussian_matrix(500, 4, 3);
  auto lr = spectral_longrun(x, 1);
  EXPECT_EQ(lr.matrix, sample_covariance(x));
  EXPECT_FALSE(lr.eigen_floor_hit);
  // Lag-0 autocovariance uses divisor N; sample covariance uses N - 1.
  EXPECT_LT((autocovariance(x, 0) * 500.0 / 499.0 - lr.matrix).norm(), 1e-12);
}

TEST(SpectralLongrun, IidMatchesCovariance) {
  Eigen::MatrixXd mix(3, 3);
  mix << 1, 0, 0,
         0.5, 1, 0,
         -0.3, 0.2, 2;
  Eigen::MatrixXd x = gaussian_matrix(100000, 3, 4) * mix.transpose();
  auto lr = spectral_longrun(x, default_bandwidth(x.rows()));
  EXPECT_EQ(default_bandwidth(100000), 46);
  EXPECT_LT(rel_frobenius(lr.matrix, sample_covariance(x)), 0.10);
}

TEST(SpectralLongrun, Ar1LongRunVariance) {
  Eigen::MatrixXd x = ar1(1000000, 0.5, 5);
  auto lr = spectral_longrun(x, default_bandwidth(x.rows()));
  EXPECT_NEAR(lr.matrix(0, 0), 3.0, 0.3);
}

TEST(MultivariateEss, IidFullRank) {
  Eigen::MatrixXd mix = gaussian_matrix(5, 5, 6) + 3 * Eigen::MatrixXd::Identity(5, 5);
  Eigen::MatrixXd x = gaussian_matrix(100000, 5, 7) * mix.transpose();
  auto e = multivariate_ess(x);
  EXPECT_EQ(e.rank, 5);
  EXPECT_GE(e.ess, 0.9 * 100000);
  EXPECT_LE(e.ess, 1.1 * 100000);
}

TEST(MultivariateEss, SumZeroDrawsLoseOneRank) {
  Eigen::MatrixXd x = gaussian_matrix(20000, 5, 8);
  x = x.colwise() - x.rowwise().mean();
  EXPECT_LT(x.rowwise().sum().cwiseAbs().maxCoeff(), 1e-12);
  auto e = multivariate_ess(x, 1e-8);
  EXPECT_EQ(e.rank, 4);
  EXPECT_GT(e.ess, 0.8 * 20000);
}

TEST(MultivariateEss, AutocorrelatedChainBelowShuffled) {
  Eigen::MatrixXd x(100000, 3);
  for (int j = 0; j < 3; ++j) x.col(j) = ar1(100000, 0.3 + 0.2 * j, 10 + j);
  std::vector<Eigen::Index> idx(100000);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(1);
  std::shuffle(idx.begin(), idx.end(), rng);
  Eigen::MatrixXd shuffled(100000, 3);
  for (Eigen::Index r = 0; r < 100000; ++r) shuffled.row(r) = x.row(idx[static_cast<std::size_t>(r)]);
  EXPECT_GT(multivariate_ess(shuffled).ess, multivariate_ess(x).ess);
}

TEST(MultivariateEss, InvariantUnderInvertibleMaps) {
  Eigen::MatrixXd x(50000, 4);
  for (int j = 0; j < 4; ++j) x.col(j) = ar1(50000, 0.6, 20 + j);
  const double base = multivariate_ess(x).ess;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    Eigen::MatrixXd a = gaussian_matrix(4, 4, seed) + 2 * Eigen::MatrixXd::Identity(4, 4);
    Eigen::MatrixXd y = x * a.transpose();
    EXPECT_NEAR(multivariate_ess(y).ess, base, 0.02 * base);
  }
}

TEST(MultivariateEss, ConstantChainRejected) {
  EXPECT_THROW(multivariate_ess(Eigen::MatrixXd::Ones(100, 3)), NumericError);
}

TEST(UnivariateEss, IidAndAr1) {
  Eigen::VectorXd iid = gaussian_matrix(100000, 1, 9).col(0);
  EXPECT_NEAR(univariate_ess(iid), 100000, 10000);
  Eigen::VectorXd x = ar1(200000, 0.5, 3);
  EXPECT_NEAR(univariate_ess(x), 200000 / 3.0, 0.1 * 200000 / 3.0);
  EXPECT_TRUE(std::isnan(univariate_ess(Eigen::VectorXd::Ones(10))));
}

TEST(Autocorrelation, WhiteNoiseBand) {
  Eigen::VectorXd x = gaussian_matrix(40000, 1, 13).col(0);
  auto acf = autocorrelation(x, 3);
  EXPECT_DOUBLE_EQ(acf(0), 1.0);
  EXPECT_LT(std::abs(acf(1)), 4.0 / std::sqrt(40000.0));
}

TEST(AcceptanceRate, Values) {
  ChainSamples s;
  s.proposed = 10;
  s.accepted = 0;
  EXPECT_EQ(acceptance_rate(s), 0.0);
  s.accepted = 10;
  EXPECT_EQ(acceptance_rate(s), 1.0);
  s.proposed = 0;
  EXPECT_THROW(acceptance_rate(s), ValidationError);
}

TEST(Kendall, Examples) {
  std::vector<int> id{1, 2, 3, 4, 5}, rev{5, 4, 3, 2, 1};
  EXPECT_EQ(kendall_tau_distance(id, id), 0);
  EXPECT_EQ(kendall_tau_distance(id, rev), 10);
  std::vector<int> a{1, 2, 3}, b{1, 3, 2};
  EXPECT_EQ(kendall_tau_distance(a, b), 1);
  std::vector<int> bad{1, 1, 2};
  EXPECT_THROW(kendall_tau_distance(a, bad), ValidationError);
  std::vector<int> shorter{1, 2};
  EXPECT_THROW(kendall_tau_distance(a, shorter), ValidationError);
}

TEST(Kendall, ExhaustiveAgainstBruteForce) {
  for (int m = 1; m <= 5; ++m) {
    std::vector<int> a(static_cast<std::size_t>(m));
    std::iota(a.begin(), a.end(), 1);
    std::vector<std::vector<int>> perms;
    do perms.push_back(a); while (std::next_permutation(a.begin(), a.end()));
    for (const auto& p : perms)
      for (const auto& q : perms) EXPECT_EQ(kendall_tau_distance(p, q), brute_force_kendall(p, q));
  }
}

TEST(Kendall, MetricProperties) {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 2000; ++t) {
    const int m = 2 + t % 7;
    auto a = random_permutation(m, rng), b = random_permutation(m, rng), c = random_permutation(m, rng);
    const auto ab = kendall_tau_distance(a, b);
    EXPECT_EQ(ab, kendall_tau_distance(b, a));
    EXPECT_EQ(ab == 0, a == b);
    EXPECT_LE(kendall_tau_distance(a, c), ab + kendall_tau_distance(b, c));
  }
}

TEST(Kendall, LargeInputMatchesBruteForce) {
  std::mt19937_64 rng(5);
  auto a = random_permutation(300, rng), b = random_permutation(300, rng);
  EXPECT_EQ(kendall_tau_distance(a, b), brute_force_kendall(a, b));
}

TEST(RankByScore, DescendingWithNameTieBreak) {
  Eigen::Vector4d s(1.0, 3.0, 1.0, -2.0);
  EXPECT_EQ(rank_by_score(s, {"b", "z", "a", "c"}), (std::vector<int>{3, 1, 2, 4}));
}

ChainSamples constant_chain(int n) {
  ChainSamples s;
  s.entities = {"a", "b", "c"};
  s.mu_draws = Eigen::RowVector3d(2, 1, -3).replicate(n, 1);
  s.alpha2_draws = Eigen::VectorXd::Ones(n);
  s.loglik_draws = Eigen::VectorXd::Zero(n);
  s.quadform_draws = Eigen::VectorXd::Zero(n);
  s.config.iterations = n + 10;
  s.config.burn_in = 10;
  s.proposed = n;
  s.accepted = n / 2;
  return s;
}

TEST(RankStability, ConstantChainIsAllZero) {
  auto s = constant_chain(95);
  auto series = rank_stability_series(s, 10);
  ASSERT_EQ(series.size(), 10u);
  for (const auto& p : series) EXPECT_EQ(p.distance, 0);
  EXPECT_EQ(series.front().iteration, 20);
  EXPECT_EQ(series.back().iteration, 105);
}

TEST(RankStability, RecoveryChainTrendsDown) {
  Rng rng(2024);
  MeritVector truth(10);
  for (int i = 0; i < 10; ++i) truth(i) = 0.25 * (i - 4.5);
  auto w = simulate_win_matrix(truth, 100, rng);
  Eigen::VectorXd income = Eigen::VectorXd::LinSpaced(10, std::log(50000.0), std::log(300000.0)).array().exp();
  auto cov = constrain(kernel_matrix(log_income_distance(income), {KernelKind::kSquaredExponential, 0.3, 1.0}));
  SamplerConfig c;
  c.iterations = 60000;
  c.burn_in = 10000;
  c.beta = 0.1;
  c.seed = 8;
  auto s = run_chain(w, cov, c);
  auto series = rank_stability_series(s, 100);
  ASSERT_EQ(series.size(), 500u);
  EXPECT_EQ(series.back().distance, 0);
  std::vector<double> block(10, 0.0);
  for (std::size_t i = 0; i < series.size(); ++i) block[i / 50] += series[i].distance / 50.0;
  for (std::size_t b = 1; b < block.size(); ++b) EXPECT_LE(block[b], block[b - 1]) << "block " << b;
}

TEST(TraceExport, RowCounts) {
  auto s = constant_chain(100);
  auto t = trace_export(s, {"alpha2"});
  EXPECT_EQ(t.num_rows(), 100u);
  auto all = trace_export(s, {"mu"}, 1, 5);
  EXPECT_EQ(all.num_rows(), 300u);
  EXPECT_EQ(all.series[1].parameter, "mu[b]");
  auto strided = trace_export(s, {"b", "loglik"}, 7);
  EXPECT_EQ(strided.iterations.size(), 15u);
  EXPECT_THROW(trace_export(s, {"nope"}), ValidationError);
}

TEST(Diagnose, ReportAndJson) {
  ChainSamples s;
  s.entities = {"a", "b", "c"};
  Eigen::MatrixXd x = gaussian_matrix(5000, 3, 40);
  s.mu_draws = x.colwise() - x.rowwise().mean();
  s.alpha2_draws = Eigen::VectorXd::Ones(5000);
  s.loglik_draws = Eigen::VectorXd::Zero(5000);
  s.quadform_draws = Eigen::VectorXd::Zero(5000);
  s.config.iterations = 6000;
  s.config.burn_in = 1000;
  s.proposed = 5000;
  s.accepted = 250;
  auto r = diagnose(s);
  EXPECT_EQ(r.rank_est, 2);
  EXPECT_EQ(r.per_param_ess.size(), 3u);
  EXPECT_DOUBLE_EQ(r.acceptance_rate, 0.05);
  ASSERT_FALSE(r.warnings.empty());
  EXPECT_NE(r.warnings.back().find("20-30%"), std::string::npos);

  auto dir = testing::scratch_dir();
  write_diagnostics_json(r, dir / "d.json");
  auto j = nlohmann::json::parse(testing::read_text(dir / "d.json"));
  EXPECT_EQ(j["rank_est"], 2);
  EXPECT_TRUE(j["flags"].contains("jitter_applied"));
  EXPECT_TRUE(j["flags"].contains("eigen_floor_hit"));
  EXPECT_EQ(j["per_param_ess"].size(), 3u);
}

}  // namespace
}  // namespace bbt
