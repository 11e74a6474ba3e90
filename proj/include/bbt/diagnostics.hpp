#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bbt/mcmc.hpp"

namespace bbt {

/// Lag-k autocovariance (1/N) sum_t (x_t - xbar)(x_{t+k} - xbar)'. Requires 0 <= lag < N.
Eigen::MatrixXd autocovariance(const Eigen::MatrixXd& draws, Eigen::Index lag);

/// Sample covariance with divisor N - 1.
Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& draws);

/// floor(N^(1/3)), at least 1.
Eigen::Index default_bandwidth(Eigen::Index n);

struct LongRunEstimate {
  Eigen::MatrixXd matrix;
  bool eigen_floor_hit = false;  // negative eigenvalues were clipped to 0
};

/// Spectral variance estimate sample_covariance + sum_{k<b} w_k (L_k + L_k')
/// with Bartlett weights w_k = 1 - k/b.
LongRunEstimate spectral_longrun(const Eigen::MatrixXd& draws, Eigen::Index bandwidth);

struct EssEstimate {
  double ess = 0.0;
  int rank = 0;
  Eigen::Index bandwidth = 0;
  bool eigen_floor_hit = false;
  bool capped = false;  // raw estimate exceeded 1.5 N
};

/// Multivariate ESS for possibly rank-deficient chains:
///   N [pdet(U' S U) / pdet(U' L U)]^(1/r)
/// where U spans eigenvectors of the sample covariance S with eigenvalue above
/// threshold * lambda_max, and L is the spectral long-run estimate.
EssEstimate multivariate_ess(const Eigen::MatrixXd& draws, double threshold = 1e-8,
                             std::optional<Eigen::Index> bandwidth = std::nullopt);

/// Univariate ESS from Geyer's initial monotone sequence. NaN for a constant series.
double univariate_ess(const Eigen::VectorXd& x);

double acceptance_rate(const ChainSamples& samples);

/// Number of discordant pairs between two rank vectors over the same items.
/// O(M log M) via merge-sort inversion counting.
std::int64_t kendall_tau_distance(std::span<const int> rank_a, std::span<const int> rank_b);

/// Ranks 1..M by descending score, ties broken by name order.
std::vector<int> rank_by_score(const Eigen::VectorXd& score, const std::vector<std::string>& names);

struct KendallPoint {
  std::int64_t iteration = 0;
  std::int64_t distance = 0;
};

/// Every `window` kept draws, the ranking implied by the running posterior mean
/// is compared with the final ranking. The last kept draw is always included.
std::vector<KendallPoint> rank_stability_series(const ChainSamples& samples, Eigen::Index window);

struct TraceSeries {
  std::string parameter;
  Eigen::VectorXd values;
};

struct AcfRow {
  std::string parameter;
  Eigen::Index lag = 0;
  double value = 0.0;
};

/// Long-format (iteration, parameter, value) data for plotting, plus
/// autocorrelations up to max_lag computed on the full kept series.
struct TraceTable {
  std::vector<std::int64_t> iterations;
  std::vector<TraceSeries> series;
  std::vector<AcfRow> acf;

  std::size_t num_rows() const { return iterations.size() * series.size(); }
  void write_traces_csv(const std::filesystem::path& path) const;
  void write_acf_csv(const std::filesystem::path& path) const;
};

/// params: "alpha2", "loglik", "quadform", "mu" (every merit) or an entity
/// name. Rows are taken every `stride` kept draws.
TraceTable trace_export(const ChainSamples& samples, const std::vector<std::string>& params,
                        Eigen::Index stride = 1, Eigen::Index max_lag = 0);

/// Autocorrelation of a scalar series for lags 0..max_lag.
Eigen::VectorXd autocorrelation(const Eigen::VectorXd& x, Eigen::Index max_lag);

struct DiagnosticsOptions {
  std::optional<Eigen::Index> bandwidth;
  double threshold = 1e-8;
  Eigen::Index window = 0;  // 0: about 100 points over the chain
};

struct DiagnosticsReport {
  double ess = 0.0;
  int rank_est = 0;
  double acceptance_rate = 0.0;
  Eigen::Index bandwidth = 0;
  std::vector<std::string> entities;
  std::vector<double> per_param_ess;  // one per entity merit
  std::vector<KendallPoint> kendall_series;
  std::int64_t kept = 0;
  bool jitter_applied = false;
  bool eigen_floor_hit = false;
  bool ess_capped = false;
  std::vector<std::string> warnings;
};

DiagnosticsReport diagnose(const ChainSamples& samples, const DiagnosticsOptions& options = {});

/// Acceptance band outside of which a warning is raised.
inline constexpr double kAcceptanceWarnLow = 0.15;
inline constexpr double kAcceptanceWarnHigh = 0.45;

void write_diagnostics_json(const DiagnosticsReport& report, const std::filesystem::path& path);
void write_kendall_csv(const std::vector<KendallPoint>& series, const std::filesystem::path& path);

}  // namespace bbt
