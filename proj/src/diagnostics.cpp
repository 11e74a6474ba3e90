#include "bbt/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "bbt/csv.hpp"
#include "bbt/error.hpp"

namespace bbt {

namespace {

Eigen::MatrixXd centered_rows(const Eigen::MatrixXd& draws) {
  return draws.rowwise() - draws.colwise().mean();
}

Eigen::MatrixXd lag_product(const Eigen::MatrixXd& x, Eigen::Index lag) {
  const auto n = x.rows();
  return x.topRows(n - lag).transpose() * x.bottomRows(n - lag) / static_cast<double>(n);
}

std::int64_t merge_count(std::vector<int>& v, std::vector<int>& tmp, std::size_t lo,
                         std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t count = merge_count(v, tmp, lo, mid) + merge_count(v, tmp, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[i] <= v[j]) {
      tmp[k++] = v[i++];
    } else {
      count += static_cast<std::int64_t>(mid - i);
      tmp[k++] = v[j++];
    }
  }
  while (i < mid) tmp[k++] = v[i++];
  while (j < hi) tmp[k++] = v[j++];
  std::copy(tmp.begin() + static_cast<std::ptrdiff_t>(lo), tmp.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return count;
}

}  // namespace

Eigen::MatrixXd autocovariance(const Eigen::MatrixXd& draws, Eigen::Index lag) {
  if (lag < 0 || lag >= draws.rows())
    throw ValidationError("autocovariance lag " + std::to_string(lag) + " outside [0, " +
                          std::to_string(draws.rows()) + ")");
  return lag_product(centered_rows(draws), lag);
}

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& draws) {
  const auto n = draws.rows();
  if (n < 2) throw ValidationError("sample covariance needs at least 2 draws");
  const Eigen::MatrixXd x = centered_rows(draws);
  return x.transpose() * x / static_cast<double>(n - 1);
}

Eigen::Index default_bandwidth(Eigen::Index n) {
  auto b = static_cast<Eigen::Index>(std::floor(std::cbrt(static_cast<double>(n)) + 1e-9));
  return std::max<Eigen::Index>(b, 1);
}

LongRunEstimate spectral_longrun(const Eigen::MatrixXd& draws, Eigen::Index bandwidth) {
  const auto n = draws.rows();
  if (bandwidth < 1 || bandwidth > n)
    throw ValidationError("bandwidth must lie in [1, N]");
  if (n < 2) throw ValidationError("long-run covariance needs at least 2 draws");
  const Eigen::MatrixXd x = centered_rows(draws);
  LongRunEstimate out;
  out.matrix = x.transpose() * x / static_cast<double>(n - 1);
  for (Eigen::Index k = 1; k < bandwidth; ++k) {
    const double weight = 1.0 - static_cast<double>(k) / static_cast<double>(bandwidth);
    const Eigen::MatrixXd lk = lag_product(x, k);
    out.matrix += weight * (lk + lk.transpose());
  }
  out.matrix = 0.5 * (out.matrix + out.matrix.transpose());
  if (bandwidth > 1) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.matrix);
    const double tol = 1e-10 * eig.eigenvalues().cwiseAbs().maxCoeff();
    if ((eig.eigenvalues().array() < -tol).any()) {
      out.eigen_floor_hit = true;
      const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
      out.matrix = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
    }
  }
  return out;
}

EssEstimate multivariate_ess(const Eigen::MatrixXd& draws, double threshold,
                             std::optional<Eigen::Index> bandwidth) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw ValidationError("eigenvalue threshold must lie in (0, 1)");
  const auto n = draws.rows();
  EssEstimate out;
  out.bandwidth = bandwidth.value_or(default_bandwidth(n));
  const Eigen::MatrixXd s = sample_covariance(draws);
  const auto lr = spectral_longrun(draws, out.bandwidth);
  out.eigen_floor_hit = lr.eigen_floor_hit;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double lambda_max = lambda.maxCoeff();
  std::vector<Eigen::Index> keep;
  if (lambda_max > 0.0)
    for (Eigen::Index k = 0; k < lambda.size(); ++k)
      if (lambda[k] > threshold * lambda_max) keep.push_back(k);
  out.rank = static_cast<int>(keep.size());
  if (out.rank == 0) throw NumericError("multivariate ESS: no eigenvalue above threshold (constant chain?)");

  Eigen::MatrixXd u(s.rows(), out.rank);
  double log_pdet_s = 0.0;
  for (int r = 0; r < out.rank; ++r) {
    u.col(r) = eig.eigenvectors().col(keep[static_cast<std::size_t>(r)]);
    log_pdet_s += std::log(lambda[keep[static_cast<std::size_t>(r)]]);
  }
  const Eigen::MatrixXd l_proj = u.transpose() * lr.matrix * u;
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (l_proj + l_proj.transpose()));
  if (llt.info() != Eigen::Success)
    throw NumericError("multivariate ESS: projected long-run covariance is singular; "
                       "use more draws or a larger bandwidth");
  double log_det_l = 0.0;
  for (Eigen::Index k = 0; k < l_proj.rows(); ++k) log_det_l += 2.0 * std::log(llt.matrixL()(k, k));

  out.ess = static_cast<double>(n) * std::exp((log_pdet_s - log_det_l) / out.rank);
  if (out.ess > 1.5 * static_cast<double>(n)) {
    out.ess = 1.5 * static_cast<double>(n);
    out.capped = true;
  }
  return out;
}

Eigen::VectorXd autocorrelation(const Eigen::VectorXd& x, Eigen::Index max_lag) {
  const auto n = x.size();
  max_lag = std::min(max_lag, n - 1);
  const Eigen::VectorXd c = x.array() - x.mean();
  const double g0 = c.squaredNorm() / static_cast<double>(n);
  Eigen::VectorXd acf(max_lag + 1);
  for (Eigen::Index k = 0; k <= max_lag; ++k) {
    const double gk = c.head(n - k).dot(c.tail(n - k)) / static_cast<double>(n);
    acf[k] = g0 > 0.0 ? gk / g0 : std::numeric_limits<double>::quiet_NaN();
  }
  return acf;
}

double univariate_ess(const Eigen::VectorXd& x) {
  const auto n = x.size();
  if (n < 4) throw ValidationError("univariate ESS needs at least 4 draws");
  const Eigen::VectorXd c = x.array() - x.mean();
  auto gamma = [&](Eigen::Index k) {
    return c.head(n - k).dot(c.tail(n - k)) / static_cast<double>(n);
  };
  const double g0 = gamma(0);
  if (!(g0 > 0.0)) return std::numeric_limits<double>::quiet_NaN();

  // Initial monotone positive sequence of paired autocovariances.
  double sum = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  for (Eigen::Index m = 0; 2 * m + 1 < n; ++m) {
    double pair = (m == 0 ? g0 : gamma(2 * m)) + gamma(2 * m + 1);
    if (pair <= 0.0) break;
    pair = std::min(pair, prev);
    prev = pair;
    sum += pair;
  }
  const double asymptotic = std::max(-g0 + 2.0 * sum, 1e-300);
  return static_cast<double>(n) * g0 / asymptotic;
}

double acceptance_rate(const ChainSamples& samples) {
  if (samples.proposed <= 0) throw ValidationError("acceptance rate undefined: no proposals recorded");
  return static_cast<double>(samples.accepted) / static_cast<double>(samples.proposed);
}

std::int64_t kendall_tau_distance(std::span<const int> rank_a, std::span<const int> rank_b) {
  if (rank_a.size() != rank_b.size())
    throw ValidationError("Kendall distance: rankings have different lengths (" +
                          std::to_string(rank_a.size()) + " vs " + std::to_string(rank_b.size()) + ")");
  std::vector<int> sa(rank_a.begin(), rank_a.end()), sb(rank_b.begin(), rank_b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  if (std::adjacent_find(sa.begin(), sa.end()) != sa.end() || sa != sb)
    throw ValidationError("Kendall distance: inputs are not permutations of the same items");

  const auto m = rank_a.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return rank_a[i] < rank_a[j]; });
  std::vector<int> seq(m), tmp(m);
  for (std::size_t k = 0; k < m; ++k) seq[k] = rank_b[order[k]];
  return merge_count(seq, tmp, 0, m);
}

std::vector<int> rank_by_score(const Eigen::VectorXd& score, const std::vector<std::string>& names) {
  const auto m = static_cast<std::size_t>(score.size());
  if (names.size() != m) throw ValidationError("rank_by_score: names and scores differ in length");
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double sa = score[static_cast<Eigen::Index>(a)], sb = score[static_cast<Eigen::Index>(b)];
    if (sa != sb) return sa > sb;
    return names[a] < names[b];
  });
  std::vector<int> rank(m);
  for (std::size_t pos = 0; pos < m; ++pos) rank[order[pos]] = static_cast<int>(pos) + 1;
  return rank;
}

std::vector<KendallPoint> rank_stability_series(const ChainSamples& samples, Eigen::Index window) {
  if (window < 1) throw ValidationError("rank stability window must be at least 1");
  const auto n = samples.num_kept();
  if (n < 1) return {};
  const auto final_rank = rank_by_score(posterior_mean(samples), samples.entities);

  std::vector<KendallPoint> out;
  Eigen::VectorXd running = Eigen::VectorXd::Zero(samples.mu_draws.cols());
  for (Eigen::Index r = 0; r < n; ++r) {
    running += samples.mu_draws.row(r).transpose();
    if ((r + 1) % window != 0 && r + 1 != n) continue;
    const Eigen::VectorXd mean = running / static_cast<double>(r + 1);
    const auto rank = rank_by_score(mean, samples.entities);
    out.push_back({samples.iteration_of(r), kendall_tau_distance(rank, final_rank)});
  }
  return out;
}

TraceTable trace_export(const ChainSamples& samples, const std::vector<std::string>& params,
                        Eigen::Index stride, Eigen::Index max_lag) {
  if (stride < 1) throw ValidationError("trace stride must be at least 1");
  std::vector<TraceSeries> full;
  for (const auto& p : params) {
    if (p == "alpha2") {
      full.push_back({p, samples.alpha2_draws});
    } else if (p == "loglik") {
      full.push_back({p, samples.loglik_draws});
    } else if (p == "quadform") {
      full.push_back({p, samples.quadform_draws});
    } else if (p == "mu") {
      for (std::size_t j = 0; j < samples.entities.size(); ++j)
        full.push_back({"mu[" + samples.entities[j] + "]",
                        samples.mu_draws.col(static_cast<Eigen::Index>(j))});
    } else {
      auto it = std::find(samples.entities.begin(), samples.entities.end(), p);
      if (it == samples.entities.end()) throw ValidationError("unknown trace parameter '" + p + "'");
      const auto j = static_cast<Eigen::Index>(it - samples.entities.begin());
      full.push_back({"mu[" + p + "]", samples.mu_draws.col(j)});
    }
  }

  TraceTable table;
  const auto n = samples.num_kept();
  for (Eigen::Index r = 0; r < n; r += stride) table.iterations.push_back(samples.iteration_of(r));
  for (auto& s : full) {
    if (max_lag > 0 && n > 1) {
      const auto acf = autocorrelation(s.values, max_lag);
      for (Eigen::Index k = 0; k < acf.size(); ++k) table.acf.push_back({s.parameter, k, acf[k]});
    }
    TraceSeries kept{s.parameter, Eigen::VectorXd(static_cast<Eigen::Index>(table.iterations.size()))};
    for (Eigen::Index r = 0, i = 0; r < n; r += stride, ++i) kept.values[i] = s.values[r];
    table.series.push_back(std::move(kept));
  }
  return table;
}

void TraceTable::write_traces_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "iteration,parameter,value\n";
  for (const auto& s : series) {
    const auto name = csv::escape(s.parameter);
    for (std::size_t i = 0; i < iterations.size(); ++i)
      out << iterations[i] << ',' << name << ',' << csv::format_double(s.values[static_cast<Eigen::Index>(i)]) << '\n';
  }
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

void TraceTable::write_acf_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "parameter,lag,acf\n";
  for (const auto& row : acf)
    out << csv::escape(row.parameter) << ',' << row.lag << ',' << csv::format_double(row.value) << '\n';
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

DiagnosticsReport diagnose(const ChainSamples& samples, const DiagnosticsOptions& options) {
  DiagnosticsReport report;
  const auto n = samples.num_kept();
  report.kept = n;
  report.entities = samples.entities;
  report.jitter_applied = samples.jitter_applied;
  report.acceptance_rate = acceptance_rate(samples);

  const auto ess = multivariate_ess(samples.mu_draws, options.threshold, options.bandwidth);
  report.ess = ess.ess;
  report.rank_est = ess.rank;
  report.bandwidth = ess.bandwidth;
  report.eigen_floor_hit = ess.eigen_floor_hit;
  report.ess_capped = ess.capped;
  if (ess.capped) report.warnings.push_back("multivariate ESS exceeded 1.5 N and was capped");
  if (ess.eigen_floor_hit)
    report.warnings.push_back("negative eigenvalues of the long-run covariance were floored at 0");

  for (Eigen::Index j = 0; j < samples.mu_draws.cols(); ++j)
    report.per_param_ess.push_back(univariate_ess(samples.mu_draws.col(j)));

  const Eigen::Index window = options.window > 0 ? options.window : std::max<Eigen::Index>(1, (n + 99) / 100);
  report.kendall_series = rank_stability_series(samples, window);

  if (report.acceptance_rate < kAcceptanceWarnLow || report.acceptance_rate > kAcceptanceWarnHigh)
    report.warnings.push_back("acceptance rate " + std::to_string(report.acceptance_rate) +
                              " is outside [0.15, 0.45]; a multivariate chain is expected to "
                              "accept about 20-30% of proposals (tune beta)");
  return report;
}

void write_diagnostics_json(const DiagnosticsReport& report, const std::filesystem::path& path) {
  nlohmann::ordered_json j;
  j["ess"] = report.ess;
  j["rank_est"] = report.rank_est;
  j["acceptance_rate"] = report.acceptance_rate;
  j["bandwidth"] = report.bandwidth;
  j["kept"] = report.kept;
  nlohmann::ordered_json per_param = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < report.entities.size(); ++i) {
    const double v = report.per_param_ess[i];
    per_param[report.entities[i]] = std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json();
  }
  j["per_param_ess"] = per_param;
  j["flags"] = {{"jitter_applied", report.jitter_applied},
                {"eigen_floor_hit", report.eigen_floor_hit},
                {"ess_capped", report.ess_capped}};
  j["warnings"] = report.warnings;
  auto series = nlohmann::ordered_json::array();
  for (const auto& p : report.kendall_series) series.push_back({p.iteration, p.distance});
  j["kendall_series"] = series;

  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

void write_kendall_csv(const std::vector<KendallPoint>& series, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "iteration,distance\n";
  for (const auto& p : series) out << p.iteration << ',' << p.distance << '\n';
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

}  // namespace bbt
