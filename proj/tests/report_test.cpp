#include "bbt/report.hpp"

#include <algorithm>
#include <numeric>

#include <gtest/gtest.h>

#include "bbt/csv.hpp"
#include "bbt/diagnostics.hpp"
#include "bbt/error.hpp"
#include "test_util.hpp"

namespace bbt {
namespace {

ChainSamples chain_from(std::vector<std::string> names, Eigen::MatrixXd draws) {
  ChainSamples s;
  s.entities = std::move(names);
  const auto n = draws.rows();
  s.mu_draws = std::move(draws);
  s.alpha2_draws = Eigen::VectorXd::Ones(n);
  s.loglik_draws = Eigen::VectorXd::Zero(n);
  s.quadform_draws = Eigen::VectorXd::Zero(n);
  s.config.iterations = n + 1;
  s.config.burn_in = 1;
  s.proposed = n;
  s.accepted = n;
  return s;
}

ChainSamples noisy_chain(std::uint64_t seed, int n = 4000) {
  Eigen::MatrixXd x = testing::gaussian_matrix(n, 5, seed);
  x.col(0).array() += 1.5;
  x.col(2).array() -= 0.7;
  x.col(4).array() += 0.2;
  x = x.colwise() - x.rowwise().mean();
  return chain_from({"e", "d", "c", "b", "a"}, x);
}

TEST(Summarize, ConstantChain) {
  auto r = summarize(chain_from({"x", "y", "z"}, Eigen::RowVector3d(2, 1, 0).replicate(100, 1)));
  EXPECT_EQ(r.rank, (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(r.outrank(0, 1), 1.0);
  EXPECT_EQ(r.outrank(1, 0), 0.0);
  EXPECT_EQ(r.outrank(2, 2), 0.5);
  EXPECT_EQ(r.sd, Eigen::Vector3d::Zero());
  EXPECT_EQ(r.ci_low, r.mean);
  EXPECT_EQ(r.ci_high, r.mean);
}

TEST(Summarize, ExchangeableDrawsGiveHalf) {
  auto r = summarize(chain_from({"a", "b", "c", "d"}, testing::gaussian_matrix(40000, 4, 2)));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(r.outrank(i, j), 0.5, 4 * 0.5 / std::sqrt(40000.0));
}

TEST(Summarize, TiedDrawsCountHalf) {
  Eigen::MatrixXd d(100, 2);
  d.col(0) = Eigen::VectorXd::LinSpaced(100, 0, 1);
  d.col(1) = d.col(0);
  d(0, 1) = -1;
  auto r = summarize(chain_from({"a", "b"}, d));
  EXPECT_DOUBLE_EQ(r.outrank(0, 1), (1 + 0.5 * 99) / 100);
}

TEST(Summarize, InvariantsOnRandomChains) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto r = summarize(noisy_chain(seed));
    const auto m = static_cast<Eigen::Index>(r.entities.size());
    for (Eigen::Index i = 0; i < m; ++i) {
      EXPECT_LE(r.ci_low[i], r.ci_high[i]);
      for (Eigen::Index j = 0; j < m; ++j) EXPECT_EQ(r.outrank(i, j) + r.outrank(j, i), 1.0);
    }
    std::vector<std::size_t> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return r.rank[a] < r.rank[b];
    });
    for (std::size_t k = 1; k < order.size(); ++k) {
      const double prev = r.mean[static_cast<Eigen::Index>(order[k - 1])];
      const double cur = r.mean[static_cast<Eigen::Index>(order[k])];
      EXPECT_TRUE(prev > cur || (prev == cur && r.entities[order[k - 1]] < r.entities[order[k]]));
    }
  }
}

TEST(Summarize, PermutationEquivariant) {
  auto s = noisy_chain(9);
  auto base = summarize(s);
  std::vector<Eigen::Index> perm{3, 0, 4, 1, 2};
  ChainSamples p = s;
  for (Eigen::Index k = 0; k < 5; ++k) {
    p.entities[static_cast<std::size_t>(k)] = s.entities[static_cast<std::size_t>(perm[static_cast<std::size_t>(k)])];
    p.mu_draws.col(k) = s.mu_draws.col(perm[static_cast<std::size_t>(k)]);
  }
  auto r = summarize(p);
  for (Eigen::Index a = 0; a < 5; ++a) {
    const auto pa = perm[static_cast<std::size_t>(a)];
    EXPECT_DOUBLE_EQ(r.mean[a], base.mean[pa]);
    EXPECT_DOUBLE_EQ(r.ci_low[a], base.ci_low[pa]);
    EXPECT_EQ(r.rank[static_cast<std::size_t>(a)], base.rank[static_cast<std::size_t>(pa)]);
    for (Eigen::Index b = 0; b < 5; ++b)
      EXPECT_DOUBLE_EQ(r.outrank(a, b), base.outrank(pa, perm[static_cast<std::size_t>(b)]));
  }
}

TEST(Summarize, RejectsShortChains) {
  EXPECT_THROW(summarize(chain_from({"a", "b"}, Eigen::MatrixXd::Zero(10, 2))), ValidationError);
}

TEST(Quantile, TypeSeven) {
  Eigen::VectorXd v(5);
  v << 4, 1, 3, 2, 5;
  EXPECT_DOUBLE_EQ(quantile(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile(v, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(quantile(v, 0.1), 1.4);
  EXPECT_DOUBLE_EQ(quantile(v, 1.0), 5.0);
}

TEST(CompareRankings, Cases) {
  std::vector<std::string> e{"a", "b", "c"};
  auto same = compare_rankings(e, {1, 2, 3}, e, {1, 2, 3});
  EXPECT_EQ(same.kendall, 0);
  EXPECT_TRUE(same.swaps.empty());
  auto swap = compare_rankings(e, {1, 2, 3}, {"c", "a", "b"}, {3, 2, 1});
  EXPECT_EQ(swap.kendall, 1);
  ASSERT_EQ(swap.swaps.size(), 1u);
  EXPECT_EQ(swap.swaps[0], (std::pair<std::string, std::string>{"a", "b"}));
  EXPECT_THROW(compare_rankings(e, {1, 2, 3}, {"a", "b", "q"}, {1, 2, 3}), ValidationError);
}

TEST(Export, CsvHasOneRowPerEntity) {
  auto r = summarize(chain_from({"x", "y", "z"}, testing::gaussian_matrix(200, 3, 4)));
  auto dir = testing::scratch_dir();
  export_report(r, ReportFormat::kCsv, dir / "r.csv");
  auto rows = csv::read_file(dir / "r.csv");
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], (csv::Row{"entity", "mean", "sd", "ci_low", "ci_high", "rank", "mle_rank"}));
  EXPECT_EQ(testing::read_text(dir / "r.csv").find("outrank"), std::string::npos);
}

TEST(Export, JsonRoundTrip) {
  auto r = summarize(noisy_chain(3));
  r.mle_rank = std::vector<int>{2, 1, 3, 5, 4};
  auto dir = testing::scratch_dir();
  export_report(r, ReportFormat::kJson, dir / "r.json");
  auto back = load_report_json(dir / "r.json");
  EXPECT_EQ(back.entities, r.entities);
  EXPECT_EQ(back.mean, r.mean);
  EXPECT_EQ(back.sd, r.sd);
  EXPECT_EQ(back.ci_low, r.ci_low);
  EXPECT_EQ(back.ci_high, r.ci_high);
  EXPECT_EQ(back.rank, r.rank);
  EXPECT_EQ(back.outrank, r.outrank);
  EXPECT_EQ(back.mle_rank, r.mle_rank);
  EXPECT_EQ(back.level, r.level);
}

TEST(Export, MleRanking) {
  auto dir = testing::scratch_dir();
  export_mle_ranking({"a", "b"}, Eigen::Vector2d(-0.5, 0.5), dir / "m.csv");
  auto rows = csv::read_file(dir / "m.csv");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1][2], "2");
  EXPECT_EQ(rows[2][2], "1");
}

}  // namespace
}  // namespace bbt
