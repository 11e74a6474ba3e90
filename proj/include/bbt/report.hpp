#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bbt/mcmc.hpp"

namespace bbt {

/// Posterior ranking summary. rank 1 is the highest posterior mean merit.
/// outrank(i, j) estimates P(mu_i > mu_j); equal draws count half.
struct RankingReport {
  std::vector<std::string> entities;
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;
  Eigen::VectorXd ci_low;
  Eigen::VectorXd ci_high;
  double level = 0.95;
  std::vector<int> rank;
  Eigen::MatrixXd outrank;
  std::optional<std::vector<int>> mle_rank;
};

inline constexpr Eigen::Index kMinDrawsForSummary = 100;

/// Equal-tailed credible intervals at `level`; quantiles interpolate linearly
/// between order statistics.
RankingReport summarize(const ChainSamples& samples, double level = 0.95);

/// Linear-interpolation quantile of an unsorted vector, p in [0, 1].
double quantile(Eigen::VectorXd values, double p);

struct RankComparison {
  std::int64_t kendall = 0;
  std::vector<std::pair<std::string, std::string>> swaps;  // discordant pairs
};

/// Rankings are given per entity name; both must cover the same names.
RankComparison compare_rankings(const std::vector<std::string>& entities_a,
                                const std::vector<int>& rank_a,
                                const std::vector<std::string>& entities_b,
                                const std::vector<int>& rank_b);

enum class ReportFormat { kCsv, kJson };

/// csv: entity,mean,sd,ci_low,ci_high,rank,mle_rank (empty when absent).
/// json: every field including the outrank matrix.
void export_report(const RankingReport& report, ReportFormat format,
                   const std::filesystem::path& path);

RankingReport load_report_json(const std::filesystem::path& path);

/// mle_ranking.csv: entity,mu,rank.
void export_mle_ranking(const std::vector<std::string>& entities, const Eigen::VectorXd& mu,
                        const std::filesystem::path& path);

}  // namespace bbt
