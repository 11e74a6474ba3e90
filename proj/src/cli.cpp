#include "bbt/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "bbt/bt_model.hpp"
#include "bbt/chain_io.hpp"
#include "bbt/csv.hpp"
#include "bbt/diagnostics.hpp"
#include "bbt/error.hpp"
#include "bbt/prior_cov.hpp"
#include "bbt/report.hpp"

namespace bbt {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& value) {
  const auto v = csv::parse_number(value);
  if (!v) throw ValidationError("config key '" + key + "': '" + value + "' is not a number");
  return *v;
}

std::int64_t to_int(const std::string& key, const std::string& value) {
  const double v = to_double(key, value);
  if (v != std::floor(v) || std::abs(v) > 9.0e15)
    throw ValidationError("config key '" + key + "': '" + value + "' is not an integer");
  return static_cast<std::int64_t>(v);
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ValidationError("config key '" + key + "': '" + value + "' is not a boolean");
}

fs::path resolve(const std::string& value, const fs::path& base) {
  fs::path p(value);
  return p.is_relative() && !base.empty() ? base / p : p;
}

void apply_sampler_key(SamplerConfig& s, const std::string& key, const std::string& value,
                       bool* burn_in_set) {
  if (key == "beta") s.beta = to_double(key, value);
  else if (key == "chi") s.chi = to_double(key, value);
  else if (key == "omega") s.omega = to_double(key, value);
  else if (key == "iterations") s.iterations = to_int(key, value);
  else if (key == "burn_in") {
    s.burn_in = to_int(key, value);
    if (burn_in_set) *burn_in_set = true;
  } else if (key == "thin") s.thin = to_int(key, value);
  else if (key == "seed") s.seed = static_cast<std::uint64_t>(to_int(key, value));
  else if (key == "kernel") s.kernel.kind = parse_kernel_kind(value);
  else if (key == "length_scale") s.kernel.length_scale = to_double(key, value);
  else if (key == "mixture") s.kernel.mixture = to_double(key, value);
  else if (key == "rank_adjusted_shape") s.rank_adjusted_shape = to_bool(key, value);
  else if (key == "conjugate_scale") s.conjugate_scale = to_bool(key, value);
  else if (key == "fixed_alpha2") s.fixed_alpha2 = to_double(key, value);
  else if (key == "profile") {
    if (value == "smoke") s.iterations = 100'000;
    else if (value == "paper") s.iterations = 3'000'000;
    else throw ValidationError("unknown profile '" + value + "' (expected smoke or paper)");
  } else {
    throw ValidationError("unknown config key '" + key + "'");
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw IoError("cannot create output directory '" + dir.string() + "'");
}

void write_matrix_csv(const Eigen::MatrixXd& m, const std::vector<std::string>& names, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "entity";
  for (const auto& n : names) out << ',' << csv::escape(n);
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << csv::escape(names[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << csv::format_double(m(i, j));
    out << '\n';
  }
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

Eigen::Index trace_stride(Eigen::Index kept, Eigen::Index points) {
  if (points <= 0 || kept <= points) return 1;
  return (kept + points - 1) / points;
}

void write_diagnostic_outputs(const ChainSamples& chain, const DiagnosticsOptions& dopt,
                              Eigen::Index trace_points, const fs::path& dir,
                              const std::string& suffix, DiagnosticsReport* report_out) {
  const auto report = diagnose(chain, dopt);
  write_diagnostics_json(report, dir / ("diagnostics" + suffix + ".json"));
  write_kendall_csv(report.kendall_series, dir / ("kendall" + suffix + ".csv"));
  const auto traces = trace_export(chain, {"mu", "alpha2", "quadform", "loglik"},
                                   trace_stride(chain.num_kept(), trace_points), report.bandwidth);
  traces.write_traces_csv(dir / ("traces" + suffix + ".csv"));
  traces.write_acf_csv(dir / ("acf" + suffix + ".csv"));
  if (report_out) *report_out = report;
}

ChainSamples pool_chains(const std::vector<ChainSamples>& chains) {
  if (chains.size() == 1) return chains.front();
  ChainSamples pooled = chains.front();
  Eigen::Index rows = 0;
  for (const auto& c : chains) rows += c.num_kept();
  const auto m = pooled.mu_draws.cols();
  pooled.mu_draws.resize(rows, m);
  pooled.alpha2_draws.resize(rows);
  pooled.loglik_draws.resize(rows);
  pooled.quadform_draws.resize(rows);
  pooled.accepted = pooled.proposed = 0;
  Eigen::Index r = 0;
  for (const auto& c : chains) {
    const auto n = c.num_kept();
    pooled.mu_draws.middleRows(r, n) = c.mu_draws;
    pooled.alpha2_draws.segment(r, n) = c.alpha2_draws;
    pooled.loglik_draws.segment(r, n) = c.loglik_draws;
    pooled.quadform_draws.segment(r, n) = c.quadform_draws;
    pooled.accepted += c.accepted;
    pooled.proposed += c.proposed;
    r += n;
  }
  return pooled;
}

void print_ranking_extremes(std::ostream& out, const RankingReport& report) {
  std::vector<std::size_t> order(report.entities.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[static_cast<std::size_t>(report.rank[i] - 1)] = i;
  const std::size_t shown = std::min<std::size_t>(5, order.size());
  out << "top " << shown << ":\n";
  for (std::size_t p = 0; p < shown; ++p)
    out << "  " << std::setw(3) << p + 1 << "  " << report.entities[order[p]] << "  "
        << std::fixed << std::setprecision(4) << report.mean[static_cast<Eigen::Index>(order[p])] << '\n';
  out << "bottom " << shown << ":\n";
  for (std::size_t p = order.size() - shown; p < order.size(); ++p)
    out << "  " << std::setw(3) << p + 1 << "  " << report.entities[order[p]] << "  "
        << std::fixed << std::setprecision(4) << report.mean[static_cast<Eigen::Index>(order[p])] << '\n';
  out.unsetf(std::ios::fixed);
  out << std::setprecision(6);
}

}  // namespace

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ValidationError("config line " + std::to_string(lineno) + ": empty key");
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

std::map<std::string, std::string> read_key_value_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_key_values(buf.str());
}

void RunConfig::set(const std::string& key, const std::string& value, const fs::path& base_dir) {
  if (key == "indicators") indicators = resolve(value, base_dir);
  else if (key == "polarity") polarity = resolve(value, base_dir);
  else if (key == "income") income = resolve(value, base_dir);
  else if (key == "out") out = resolve(value, base_dir);
  else if (key == "missing_policy") {
    if (value == "drop_indicators") missing_policy = DropIndicators{};
    else if (value == "drop_entities") {
      if (!std::holds_alternative<DropEntities>(missing_policy)) missing_policy = DropEntities{};
    } else throw ValidationError("unknown missing_policy '" + value + "'");
  } else if (key == "drop_entities") missing_policy = DropEntities{split_list(value)};
  else if (key == "tie_policy") tie_policy = parse_tie_policy(value);
  else if (key == "zones") {
    zones.clear();
    for (const auto& z : split_list(value)) zones.insert(parse_zone(z));
  } else if (key == "low_income_max") thresholds.low_max = to_double(key, value);
  else if (key == "high_income_min") thresholds.high_min = to_double(key, value);
  else if (key == "jitter") jitter = to_double(key, value);
  else if (key == "chains") chains = static_cast<int>(to_int(key, value));
  else if (key == "bandwidth") {
    const auto b = to_int(key, value);
    bandwidth = b > 0 ? std::optional<Eigen::Index>(b) : std::nullopt;
  } else if (key == "ess_threshold") ess_threshold = to_double(key, value);
  else if (key == "kendall_window") kendall_window = to_int(key, value);
  else if (key == "trace_points") trace_points = to_int(key, value);
  else if (key == "level") level = to_double(key, value);
  else if (key == "export_win_matrix") export_win_matrix = to_bool(key, value);
  else if (key == "export_covariance") export_covariance = to_bool(key, value);
  else apply_sampler_key(sampler, key, value, &burn_in_set);
}

void RunConfig::load_file(const fs::path& path) {
  const auto kv = read_key_value_file(path);
  const auto base = path.parent_path();
  // A profile sets defaults that explicit keys in the same file override.
  if (auto it = kv.find("profile"); it != kv.end()) set(it->first, it->second, base);
  for (const auto& [k, v] : kv)
    if (k != "profile") set(k, v, base);
}

void RunConfig::finalize() {
  if (!burn_in_set) sampler.burn_in = sampler.iterations / 3;
  if (chains < 1) throw ValidationError("chains must be at least 1");
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("level must lie in (0, 1)");
  if (!(thresholds.low_max <= thresholds.high_min))
    throw ValidationError("low_income_max must not exceed high_income_min");
  sampler.validate();
}

PreparedData prepare_data(const RunConfig& config, bool require_income) {
  if (config.indicators.empty()) throw ValidationError("no indicators file configured");
  if (config.polarity.empty()) throw ValidationError("no polarity file configured");
  for (const auto* p : {&config.indicators, &config.polarity})
    if (!fs::exists(*p)) throw IoError("input file '" + p->string() + "' does not exist");
  const bool have_income = !config.income.empty();
  if (require_income && !have_income) throw ValidationError("no income file configured");
  if (have_income && !fs::exists(config.income))
    throw IoError("input file '" + config.income.string() + "' does not exist");
  if (!config.zones.empty() && !have_income)
    throw ValidationError("zone filtering needs an income file");

  PreparedData data;
  auto table = load_indicators(config.indicators, config.polarity);
  if (have_income) {
    auto aligned = align(table, load_income(config.income, config.thresholds));
    table = std::move(aligned.indicators);
    data.income = std::move(aligned.income);
    data.dropped_without_income = std::move(aligned.dropped);
  }
  table = apply_missing_policy(table, config.missing_policy);
  if (data.income) {
    // Entity-dropping policies may have removed rows; keep income aligned.
    data.income = align(table, *data.income).income;
    if (!config.zones.empty()) {
      auto [ind, inc] = subset_by_zone(table, *data.income, config.zones);
      table = std::move(ind);
      data.income = std::move(inc);
    }
  }
  data.wins = build_win_matrix(table, config.tie_policy);
  data.indicators = std::move(table);
  return data;
}

int cmd_fit(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const auto data = prepare_data(config, true);
  ensure_dir(config.out);
  for (const auto& name : data.dropped_without_income)
    err << "note: entity '" << name << "' has no income row and was removed\n";

  if (config.export_win_matrix) export_win_matrix_csv(data.wins, config.out / "win_matrix.csv");
  const auto sigma = kernel_matrix(log_income_distance(*data.income), config.sampler.kernel);
  const auto cov = constrain(sigma, config.jitter);
  if (cov.jitter_applied) err << "note: jitter " << config.jitter << " added to the kernel matrix\n";
  if (config.export_covariance) {
    write_matrix_csv(cov.sigma, data.wins.entities, config.out / "sigma.csv");
    write_matrix_csv(cov.c, data.wins.entities, config.out / "constrained_covariance.csv");
  }

  std::vector<ChainSamples> chains(static_cast<std::size_t>(config.chains));
  auto run_one = [&](std::size_t c) {
    SamplerConfig sc = config.sampler;
    if (c > 0) {
      std::seed_seq seq{static_cast<std::uint32_t>(sc.seed), static_cast<std::uint32_t>(sc.seed >> 32),
                        static_cast<std::uint32_t>(c)};
      sc.seed = Rng(seq)();
    }
    chains[c] = run_chain(data.wins, cov, sc);
  };
  if (config.chains == 1) {
    run_one(0);
  } else {
    std::vector<std::exception_ptr> errors(chains.size());
    {
      std::vector<std::jthread> pool;
      for (std::size_t c = 0; c < chains.size(); ++c)
        pool.emplace_back([&, c] {
          try {
            run_one(c);
          } catch (...) {
            errors[c] = std::current_exception();
          }
        });
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  DiagnosticsOptions dopt{config.bandwidth, config.ess_threshold, config.kendall_window};
  std::vector<DiagnosticsReport> reports(chains.size());
  for (std::size_t c = 0; c < chains.size(); ++c) {
    const std::string suffix = chains.size() == 1 ? "" : "_" + std::to_string(c + 1);
    save_chain(chains[c], config.out / ("chain" + suffix + ".bin"));
    write_diagnostic_outputs(chains[c], dopt, config.trace_points, config.out, suffix, &reports[c]);
  }

  const auto pooled = pool_chains(chains);
  auto report = summarize(pooled, config.level);
  try {
    const auto mle = mle_newman(data.wins);
    report.mle_rank = rank_by_score(mle.mu, data.wins.entities);
    export_mle_ranking(data.wins.entities, mle.mu, config.out / "mle_ranking.csv");
  } catch (const NumericError& e) {
    err << "warning: classical MLE unavailable: " << e.what() << '\n';
  }
  export_report(report, ReportFormat::kCsv, config.out / "ranking.csv");
  export_report(report, ReportFormat::kJson, config.out / "ranking.json");

  nlohmann::ordered_json run;
  run["entities"] = data.wins.entities;
  run["indicators"] = data.indicators.indicators;
  run["dropped_without_income"] = data.dropped_without_income;
  run["tie_policy"] = to_string(config.tie_policy);
  run["total_comparisons"] = total_comparisons(data.wins);
  run["jitter_applied"] = cov.jitter_applied;
  run["prior_rank"] = cov.rank;
  run["chains"] = config.chains;
  run["sampler"] = to_json(config.sampler);
  std::ofstream(config.out / "run.json") << run.dump(2) << '\n';

  out << "entities: " << data.wins.size() << ", indicators: " << data.indicators.num_indicators()
      << ", comparisons: " << total_comparisons(data.wins) << '\n';
  for (std::size_t c = 0; c < reports.size(); ++c) {
    if (reports.size() > 1) out << "chain " << c + 1 << ": ";
    out << "acceptance rate " << reports[c].acceptance_rate << ", multivariate ESS " << reports[c].ess
        << " (rank " << reports[c].rank_est << ", bandwidth " << reports[c].bandwidth << ")\n";
    for (const auto& w : reports[c].warnings) err << "warning: " << w << '\n';
  }
  print_ranking_extremes(out, report);
  out << "outputs written to " << config.out.string() << '\n';
  return 0;
}

int cmd_mle(const RunConfig& config, std::ostream& out, std::ostream&) {
  const auto data = prepare_data(config, false);
  ensure_dir(config.out);
  MleOptions opt;
  const auto mle = mle_newman(data.wins, opt);
  export_mle_ranking(data.wins.entities, mle.mu, config.out / "mle_ranking.csv");
  const auto rank = rank_by_score(mle.mu, data.wins.entities);
  out << "Newman iteration converged in " << mle.iterations << " sweeps\n";
  std::vector<std::size_t> order(rank.size());
  for (std::size_t i = 0; i < rank.size(); ++i) order[static_cast<std::size_t>(rank[i] - 1)] = i;
  for (std::size_t p = 0; p < order.size(); ++p)
    out << "  " << std::setw(3) << p + 1 << "  " << data.wins.entities[order[p]] << "  "
        << csv::format_double(mle.mu[static_cast<Eigen::Index>(order[p])]) << '\n';
  return 0;
}

int cmd_diagnose(const DiagnoseOptions& options, std::ostream& out, std::ostream& err) {
  const auto chain = load_chain(options.chain);
  ensure_dir(options.out);
  DiagnosticsReport report;
  write_diagnostic_outputs(chain, {options.bandwidth, options.threshold, options.window},
                           options.trace_points, options.out, "", &report);
  out << "kept draws: " << report.kept << ", acceptance rate " << report.acceptance_rate
      << ", multivariate ESS " << report.ess << " (rank " << report.rank_est << ", bandwidth "
      << report.bandwidth << ")\n";
  for (const auto& w : report.warnings) err << "warning: " << w << '\n';
  return 0;
}

SimulateJob load_simulate_job(const fs::path& spec_path) {
  SimulateJob job;
  job.sampler.iterations = 100'000;
  job.sampler.beta = 0.05;
  bool burn_in_set = false;
  if (!spec_path.empty()) {
    for (const auto& [key, value] : read_key_value_file(spec_path)) {
      auto& s = job.spec;
      if (key == "m") s.m = static_cast<int>(to_int(key, value));
      else if (key == "k_comparisons") s.k_comparisons = static_cast<int>(to_int(key, value));
      else if (key == "alpha2_true") s.alpha2_true = to_double(key, value);
      else if (key == "replications") s.replications = static_cast<int>(to_int(key, value));
      else if (key == "threads") s.threads = static_cast<int>(to_int(key, value));
      else if (key == "length_scales") {
        s.length_scales.clear();
        for (const auto& v : split_list(value)) s.length_scales.push_back(to_double(key, v));
      } else if (key == "incomes") {
        s.incomes.clear();
        for (const auto& v : split_list(value)) s.incomes.push_back(to_double(key, v));
      } else if (key == "seed") {
        s.seed = static_cast<std::uint64_t>(to_int(key, value));
      } else if (key == "kernel") {
        s.kernel.kind = parse_kernel_kind(value);
      } else if (key == "mixture") {
        s.kernel.mixture = to_double(key, value);
      } else {
        apply_sampler_key(job.sampler, key, value, &burn_in_set);
      }
    }
  }
  if (!burn_in_set) job.sampler.burn_in = job.sampler.iterations / 3;
  job.spec.validate();
  job.sampler.validate();
  return job;
}

int cmd_simulate(const SimulateJob& job, const fs::path& out_dir, std::ostream& out, std::ostream&) {
  const auto results = run_recovery_study(job.spec, job.sampler);
  ensure_dir(out_dir);
  write_study_csv(results, out_dir / "study.csv");
  write_study_estimates_csv(results, out_dir / "study_estimates.csv");
  std::vector<double> bayes;
  for (const auto& r : results.rows)
    if (r.method == "bayes") bayes.push_back(r.spearman);
  std::sort(bayes.begin(), bayes.end());
  out << "cells: " << bayes.size() << ", median Spearman (posterior mean vs truth): "
      << bayes[bayes.size() / 2] << '\n'
      << "results written to " << (out_dir / "study.csv").string() << '\n';
  return 0;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian Bradley-Terry ranking from indicator tables"};
  app.require_subcommand(1);

  struct Common {
    std::string config, indicators, polarity, income, out_dir, zones, tie_policy, profile;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> iterations;
    std::optional<double> beta;
  };
  Common fit_opts, mle_opts;
  auto add_common = [](CLI::App* sub, Common& c, bool sampler) {
    sub->add_option("--config", c.config, "key = value configuration file");
    sub->add_option("--indicators", c.indicators, "indicators.csv");
    sub->add_option("--polarity", c.polarity, "polarity.csv");
    sub->add_option("--income", c.income, "income.csv");
    sub->add_option("--out", c.out_dir, "output directory");
    sub->add_option("--zones", c.zones, "comma-separated income zones (low,middle,high)");
    sub->add_option("--tie-policy", c.tie_policy, "split or drop");
    sub->add_option("--set", c.sets, "override any config key: key=value")->take_all();
    if (sampler) {
      sub->add_option("--seed", c.seed, "random seed");
      sub->add_option("--iterations", c.iterations, "total MCMC iterations");
      sub->add_option("--beta", c.beta, "pCN step size");
      sub->add_option("--profile", c.profile, "smoke (1e5 iterations) or paper (3e6)");
    }
  };
  auto* fit = app.add_subcommand("fit", "sample the posterior and write rankings and diagnostics");
  add_common(fit, fit_opts, true);
  auto* mle = app.add_subcommand("mle", "classical Bradley-Terry ranking");
  add_common(mle, mle_opts, false);

  DiagnoseOptions dopt;
  std::string diag_chain, diag_out;
  std::optional<Eigen::Index> diag_bandwidth;
  auto* diag = app.add_subcommand("diagnose", "recompute diagnostics from a chain dump");
  diag->add_option("--chain", diag_chain, "chain.bin written by fit")->required();
  diag->add_option("--out", diag_out, "output directory");
  diag->add_option("--bandwidth", diag_bandwidth, "spectral bandwidth (default floor(N^1/3))");
  diag->add_option("--threshold", dopt.threshold, "relative eigenvalue threshold");
  diag->add_option("--window", dopt.window, "kept draws between Kendall points");
  diag->add_option("--trace-points", dopt.trace_points, "max points per trace series");

  std::string sim_spec, sim_out;
  std::optional<std::uint64_t> sim_seed;
  std::optional<std::int64_t> sim_iterations;
  std::optional<double> sim_beta;
  auto* sim = app.add_subcommand("simulate", "synthetic recovery study");
  sim->add_option("--spec", sim_spec, "key = value study specification");
  sim->add_option("--out", sim_out, "output directory");
  sim->add_option("--seed", sim_seed, "master seed");
  sim->add_option("--iterations", sim_iterations, "MCMC iterations per fit");
  sim->add_option("--beta", sim_beta, "pCN step size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  auto build_config = [](const Common& c) {
    RunConfig cfg;
    if (!c.config.empty()) cfg.load_file(c.config);
    if (!c.profile.empty()) cfg.set("profile", c.profile);
    if (!c.indicators.empty()) cfg.set("indicators", c.indicators);
    if (!c.polarity.empty()) cfg.set("polarity", c.polarity);
    if (!c.income.empty()) cfg.set("income", c.income);
    if (!c.out_dir.empty()) cfg.set("out", c.out_dir);
    if (!c.zones.empty()) cfg.set("zones", c.zones);
    if (!c.tie_policy.empty()) cfg.set("tie_policy", c.tie_policy);
    for (const auto& s : c.sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + s + "'");
      cfg.set(trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
    }
    if (c.seed) cfg.sampler.seed = *c.seed;
    if (c.iterations) cfg.sampler.iterations = *c.iterations;
    if (c.beta) cfg.sampler.beta = *c.beta;
    cfg.finalize();
    return cfg;
  };

  try {
    if (*fit) return cmd_fit(build_config(fit_opts), out, err);
    if (*mle) return cmd_mle(build_config(mle_opts), out, err);
    if (*diag) {
      dopt.chain = diag_chain;
      if (!diag_out.empty()) dopt.out = diag_out;
      dopt.bandwidth = diag_bandwidth;
      return cmd_diagnose(dopt, out, err);
    }
    if (*sim) {
      auto job = load_simulate_job(sim_spec);
      if (sim_seed) job.spec.seed = *sim_seed;
      if (sim_iterations) {
        job.sampler.iterations = *sim_iterations;
        job.sampler.burn_in = *sim_iterations / 3;
      }
      if (sim_beta) job.sampler.beta = *sim_beta;
      job.sampler.validate();
      return cmd_simulate(job, sim_out.empty() ? fs::path("out") : fs::path(sim_out), out, err);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace bbt
