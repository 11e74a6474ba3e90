#include "bbt/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <optional>
#include <numeric>
#include <thread>

#include "bbt/csv.hpp"
#include "bbt/diagnostics.hpp"
#include "bbt/error.hpp"

namespace bbt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Rng derived_rng(std::uint64_t seed, int replication, std::size_t scale_index, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replication),
                    static_cast<std::uint32_t>(scale_index), stream};
  return Rng(seq);
}

Eigen::VectorXd average_ranks(const Eigen::VectorXd& v) {
  const auto n = static_cast<std::size_t>(v.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return v[static_cast<Eigen::Index>(a)] < v[static_cast<Eigen::Index>(b)];
  });
  Eigen::VectorXd r(v.size());
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && v[static_cast<Eigen::Index>(order[j + 1])] == v[static_cast<Eigen::Index>(order[i])]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[static_cast<Eigen::Index>(order[k])] = avg;
    i = j + 1;
  }
  return r;
}

std::vector<std::string> default_names(int m) {
  std::vector<std::string> names;
  for (int i = 0; i < m; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "E%02d", i + 1);
    names.emplace_back(buf);
  }
  return names;
}

void score(StudyRow& row, const Eigen::VectorXd& truth, const Eigen::VectorXd& est,
           const std::vector<std::string>& names) {
  row.spearman = spearman_correlation(truth, est);
  row.pearson = pearson_correlation(truth, est);
  row.rmse = std::sqrt((truth - est).squaredNorm() / static_cast<double>(truth.size()));
  row.kendall = static_cast<double>(
      kendall_tau_distance(rank_by_score(truth, names), rank_by_score(est, names)));
}

}  // namespace

void SimStudySpec::validate() const {
  if (m < 2) throw ValidationError("simulation needs m >= 2");
  if (k_comparisons < 1) throw ValidationError("k_comparisons must be at least 1");
  if (replications < 1) throw ValidationError("replications must be at least 1");
  if (length_scales.empty()) throw ValidationError("length_scales must not be empty");
  for (double l : length_scales)
    if (!(l > 0.0)) throw ValidationError("length scales must be positive");
  if (!(alpha2_true > 0.0)) throw ValidationError("alpha2_true must be positive");
  if (!incomes.empty() && incomes.size() != static_cast<std::size_t>(m))
    throw ValidationError("incomes must list exactly m values");
  for (double p : incomes)
    if (!(p > 0.0)) throw ValidationError("incomes must be positive");
}

Eigen::VectorXd SimStudySpec::income_vector() const {
  if (!incomes.empty())
    return Eigen::Map<const Eigen::VectorXd>(incomes.data(), static_cast<Eigen::Index>(incomes.size()));
  const Eigen::VectorXd logs =
      Eigen::VectorXd::LinSpaced(m, std::log(50000.0), std::log(300000.0));
  return logs.array().exp();
}

WinMatrix simulate_win_matrix(const MeritVector& mu_true, int k, Rng& rng,
                              std::vector<std::string> entities) {
  if (k < 1) throw ValidationError("comparisons per pair must be at least 1");
  const auto m = mu_true.size();
  if (entities.empty()) entities = default_names(static_cast<int>(m));
  WinMatrix w;
  w.entities = std::move(entities);
  w.wins = Eigen::MatrixXd::Zero(m, m);
  w.comparisons = Eigen::MatrixXi::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i + 1; j < m; ++j) {
      std::binomial_distribution<int> binom(k, win_probability(mu_true[i], mu_true[j]));
      const int x = binom(rng);
      w.wins(i, j) = x;
      w.wins(j, i) = k - x;
      w.comparisons(i, j) = w.comparisons(j, i) = k;
    }
  return w;
}

double pearson_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd ca = a.array() - a.mean();
  const Eigen::VectorXd cb = b.array() - b.mean();
  const double denom = ca.norm() * cb.norm();
  return denom > 0.0 ? ca.dot(cb) / denom : kNaN;
}

double spearman_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return pearson_correlation(average_ranks(a), average_ranks(b));
}

StudyResults run_recovery_study(const SimStudySpec& spec, const SamplerConfig& sampler) {
  spec.validate();
  sampler.validate();
  const auto names = default_names(spec.m);
  const Eigen::MatrixXd dist = log_income_distance(spec.income_vector());

  struct Cell {
    int replication;
    std::size_t scale_index;
    StudyRow bayes, mle;
    std::vector<StudyEstimate> estimates;
  };
  std::vector<Cell> cells;
  for (int r = 0; r < spec.replications; ++r)
    for (std::size_t s = 0; s < spec.length_scales.size(); ++s) cells.push_back({r, s, {}, {}, {}});

  std::vector<ConstrainedCovariance> covs;
  for (double l : spec.length_scales) {
    KernelSpec kernel = spec.kernel;
    kernel.length_scale = l;
    covs.push_back(constrain(kernel_matrix(dist, kernel)));
  }

  auto run_cell = [&](Cell& cell) {
    const double l = spec.length_scales[cell.scale_index];
    const auto& cov = covs[cell.scale_index];
    Rng truth_rng = derived_rng(spec.seed, cell.replication, cell.scale_index, 0);
    Rng data_rng = derived_rng(spec.seed, cell.replication, cell.scale_index, 1);
    Rng chain_seed_rng = derived_rng(spec.seed, cell.replication, cell.scale_index, 2);
    const MeritVector truth = sample_constrained(cov, spec.alpha2_true, truth_rng);
    const WinMatrix w = simulate_win_matrix(truth, spec.k_comparisons, data_rng, names);

    SamplerConfig cfg = sampler;
    cfg.kernel = spec.kernel;
    cfg.kernel.length_scale = l;
    cfg.seed = chain_seed_rng();
    const MeritVector bayes = posterior_mean(run_chain(w, cov, cfg));

    cell.bayes = {cell.replication, l, "bayes"};
    score(cell.bayes, truth, bayes, names);
    cell.mle = {cell.replication, l, "mle"};
    std::optional<MeritVector> mle;
    try {
      mle = mle_newman(w).mu;
      score(cell.mle, truth, *mle, names);
    } catch (const NumericError& e) {
      cell.mle.spearman = cell.mle.pearson = cell.mle.rmse = cell.mle.kendall = kNaN;
      cell.mle.status = e.what();
    }
    for (Eigen::Index i = 0; i < truth.size(); ++i) {
      const auto& name = names[static_cast<std::size_t>(i)];
      cell.estimates.push_back({cell.replication, l, "bayes", name, truth[i], bayes[i]});
      cell.estimates.push_back({cell.replication, l, "mle", name, truth[i], mle ? (*mle)[i] : kNaN});
    }
  };

  unsigned threads = spec.threads > 0 ? static_cast<unsigned>(spec.threads)
                                      : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(cells.size()));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        run_cell(cells[i]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  StudyResults out;
  for (auto& cell : cells) {
    out.rows.push_back(cell.bayes);
    out.rows.push_back(cell.mle);
    for (auto& e : cell.estimates) out.estimates.push_back(std::move(e));
  }
  return out;
}

void write_study_csv(const StudyResults& results, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "replication,length_scale,method,spearman,pearson,rmse,kendall\n";
  for (const auto& r : results.rows)
    out << r.replication << ',' << csv::format_double(r.length_scale) << ',' << r.method << ','
        << csv::format_double(r.spearman) << ',' << csv::format_double(r.pearson) << ','
        << csv::format_double(r.rmse) << ',' << csv::format_double(r.kendall) << '\n';
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

void write_study_estimates_csv(const StudyResults& results, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "replication,length_scale,method,entity,truth,estimate\n";
  for (const auto& e : results.estimates)
    out << e.replication << ',' << csv::format_double(e.length_scale) << ',' << e.method << ','
        << e.entity << ',' << csv::format_double(e.truth) << ',' << csv::format_double(e.estimate) << '\n';
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

}  // namespace bbt
