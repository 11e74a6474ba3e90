#include "bbt/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "bbt/csv.hpp"
#include "bbt/diagnostics.hpp"
#include "bbt/error.hpp"

namespace bbt {

double quantile(Eigen::VectorXd values, double p) {
  const auto n = values.size();
  if (n == 0) throw ValidationError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = p * static_cast<double>(n - 1);
  const auto lo = static_cast<Eigen::Index>(std::floor(h));
  const auto hi = std::min<Eigen::Index>(lo + 1, n - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

RankingReport summarize(const ChainSamples& samples, double level) {
  const auto n = samples.num_kept();
  if (n < kMinDrawsForSummary)
    throw ValidationError("summary needs at least " + std::to_string(kMinDrawsForSummary) +
                          " kept draws, chain has " + std::to_string(n));
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("credible level must lie in (0, 1)");
  const auto m = samples.mu_draws.cols();

  RankingReport r;
  r.entities = samples.entities;
  r.level = level;
  r.mean = posterior_mean(samples);
  r.sd.resize(m);
  r.ci_low.resize(m);
  r.ci_high.resize(m);
  const double tail = 0.5 * (1.0 - level);
  for (Eigen::Index j = 0; j < m; ++j) {
    const Eigen::VectorXd col = samples.mu_draws.col(j);
    r.sd[j] = n > 1 ? std::sqrt((col.array() - r.mean[j]).square().sum() / static_cast<double>(n - 1)) : 0.0;
    r.ci_low[j] = quantile(col, tail);
    r.ci_high[j] = quantile(col, 1.0 - tail);
  }
  r.rank = rank_by_score(r.mean, r.entities);

  // Twice the count so ties contribute exactly one half to each side.
  Eigen::MatrixXi doubled = Eigen::MatrixXi::Zero(m, m);
  for (Eigen::Index t = 0; t < n; ++t) {
    const auto row = samples.mu_draws.row(t);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = i + 1; j < m; ++j) {
        if (row[i] > row[j]) {
          doubled(i, j) += 2;
        } else if (row[i] == row[j]) {
          doubled(i, j) += 1;
        }
      }
  }
  r.outrank = Eigen::MatrixXd::Constant(m, m, 0.5);
  const double denom = 2.0 * static_cast<double>(n);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i + 1; j < m; ++j) {
      r.outrank(i, j) = doubled(i, j) / denom;
      r.outrank(j, i) = (2 * n - doubled(i, j)) / denom;
    }
  return r;
}

RankComparison compare_rankings(const std::vector<std::string>& entities_a,
                                const std::vector<int>& rank_a,
                                const std::vector<std::string>& entities_b,
                                const std::vector<int>& rank_b) {
  if (entities_a.size() != rank_a.size() || entities_b.size() != rank_b.size())
    throw ValidationError("ranking and entity lists differ in length");
  if (entities_a.size() != entities_b.size())
    throw ValidationError("rankings cover different numbers of entities");
  std::unordered_map<std::string, std::size_t> pos_b;
  for (std::size_t i = 0; i < entities_b.size(); ++i) pos_b[entities_b[i]] = i;
  std::vector<int> aligned_b(entities_a.size());
  for (std::size_t i = 0; i < entities_a.size(); ++i) {
    auto it = pos_b.find(entities_a[i]);
    if (it == pos_b.end())
      throw ValidationError("entity '" + entities_a[i] + "' missing from the second ranking");
    aligned_b[i] = rank_b[it->second];
  }

  RankComparison out;
  out.kendall = kendall_tau_distance(rank_a, aligned_b);
  for (std::size_t i = 0; i < entities_a.size(); ++i)
    for (std::size_t j = i + 1; j < entities_a.size(); ++j)
      if ((rank_a[i] < rank_a[j]) != (aligned_b[i] < aligned_b[j])) {
        // Report the pair in first-ranking order.
        if (rank_a[i] < rank_a[j]) out.swaps.emplace_back(entities_a[i], entities_a[j]);
        else out.swaps.emplace_back(entities_a[j], entities_a[i]);
      }
  return out;
}

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

void export_report(const RankingReport& report, ReportFormat format,
                   const std::filesystem::path& path) {
  auto out = open_for_write(path);
  const auto m = report.entities.size();
  if (format == ReportFormat::kCsv) {
    out << "entity,mean,sd,ci_low,ci_high,rank,mle_rank\n";
    for (std::size_t i = 0; i < m; ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      out << csv::escape(report.entities[i]) << ',' << csv::format_double(report.mean[k]) << ','
          << csv::format_double(report.sd[k]) << ',' << csv::format_double(report.ci_low[k]) << ','
          << csv::format_double(report.ci_high[k]) << ',' << report.rank[i] << ',';
      if (report.mle_rank) out << (*report.mle_rank)[i];
      out << '\n';
    }
  } else {
    nlohmann::ordered_json j;
    j["entities"] = report.entities;
    j["level"] = report.level;
    j["mean"] = to_std(report.mean);
    j["sd"] = to_std(report.sd);
    j["ci_low"] = to_std(report.ci_low);
    j["ci_high"] = to_std(report.ci_high);
    j["rank"] = report.rank;
    auto outrank = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < report.outrank.rows(); ++i)
      outrank.push_back(to_std(report.outrank.row(i).transpose()));
    j["outrank"] = outrank;
    j["mle_rank"] = report.mle_rank ? nlohmann::ordered_json(*report.mle_rank) : nlohmann::ordered_json();
    out << j.dump(2) << '\n';
  }
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

RankingReport load_report_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
    RankingReport r;
    r.entities = j.at("entities").get<std::vector<std::string>>();
    r.level = j.at("level").get<double>();
    r.mean = to_eigen(j.at("mean").get<std::vector<double>>());
    r.sd = to_eigen(j.at("sd").get<std::vector<double>>());
    r.ci_low = to_eigen(j.at("ci_low").get<std::vector<double>>());
    r.ci_high = to_eigen(j.at("ci_high").get<std::vector<double>>());
    r.rank = j.at("rank").get<std::vector<int>>();
    const auto rows = j.at("outrank").get<std::vector<std::vector<double>>>();
    r.outrank.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows.size()) throw ValidationError("outrank matrix is not square");
      for (std::size_t k = 0; k < rows.size(); ++k)
        r.outrank(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
    if (!j.at("mle_rank").is_null()) r.mle_rank = j.at("mle_rank").get<std::vector<int>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed report '" + path.string() + "': " + e.what());
  }
}

void export_mle_ranking(const std::vector<std::string>& entities, const Eigen::VectorXd& mu,
                        const std::filesystem::path& path) {
  auto out = open_for_write(path);
  const auto rank = rank_by_score(mu, entities);
  out << "entity,mu,rank\n";
  for (std::size_t i = 0; i < entities.size(); ++i)
    out << csv::escape(entities[i]) << ',' << csv::format_double(mu[static_cast<Eigen::Index>(i)])
        << ',' << rank[i] << '\n';
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

}  // namespace bbt
