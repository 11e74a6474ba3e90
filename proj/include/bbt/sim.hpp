#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bbt/mcmc.hpp"
#include "bbt/win_matrix.hpp"

namespace bbt {

/// Synthetic recovery design. Incomes drive the prior covariance; when empty,
/// m incomes spaced geometrically between 50,000 and 300,000 are used.
struct SimStudySpec {
  int m = 10;
  int k_comparisons = 100;
  KernelSpec kernel;
  std::vector<double> length_scales{0.09, 0.3};
  double alpha2_true = 1.0;
  int replications = 20;
  std::uint64_t seed = 1;
  std::vector<double> incomes;
  int threads = 0;  // 0: hardware concurrency

  void validate() const;
  Eigen::VectorXd income_vector() const;
};

/// x_ij ~ Binomial(k, P(i beats j)) for i < j, x_ji = k - x_ij.
WinMatrix simulate_win_matrix(const MeritVector& mu_true, int k, Rng& rng,
                              std::vector<std::string> entities = {});

struct StudyRow {
  int replication = 0;
  double length_scale = 0.0;
  std::string method;  // "bayes" or "mle"
  double spearman = 0.0;
  double pearson = 0.0;
  double rmse = 0.0;
  double kendall = 0.0;  // NaN when the fit failed
  std::string status = "ok";
};

struct StudyEstimate {
  int replication = 0;
  double length_scale = 0.0;
  std::string method;
  std::string entity;
  double truth = 0.0;
  double estimate = 0.0;
};

struct StudyResults {
  std::vector<StudyRow> rows;
  std::vector<StudyEstimate> estimates;
};

/// For every replication and length scale: draw true merits from the prior,
/// simulate a win matrix, fit the posterior mean and the Newman MLE, and score
/// both against the truth. Cells run concurrently; results are ordered by
/// (replication, length scale, method). MLE failures are recorded, not thrown.
/// The true merits depend only on (seed, replication, length scale), not on k.
StudyResults run_recovery_study(const SimStudySpec& spec, const SamplerConfig& sampler);

double spearman_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b);
double pearson_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// study.csv: replication,length_scale,method,spearman,pearson,rmse,kendall.
void write_study_csv(const StudyResults& results, const std::filesystem::path& path);
/// Per-entity rows: replication,length_scale,method,entity,truth,estimate.
void write_study_estimates_csv(const StudyResults& results, const std::filesystem::path& path);

}  // namespace bbt
