#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "bbt/data_ingest.hpp"
#include "bbt/mcmc.hpp"
#include "bbt/sim.hpp"
#include "bbt/win_matrix.hpp"

namespace bbt {

/// Flat "key = value" text; '#' starts a comment. Later keys override earlier ones.
std::map<std::string, std::string> parse_key_values(const std::string& text);
std::map<std::string, std::string> read_key_value_file(const std::filesystem::path& path);

struct RunConfig {
  std::filesystem::path indicators;
  std::filesystem::path polarity;
  std::filesystem::path income;
  std::filesystem::path out = "out";

  MissingPolicy missing_policy = DropIndicators{};
  TiePolicy tie_policy = TiePolicy::kSplit;
  std::set<Zone> zones;  // empty: all entities
  ZoneThresholds thresholds;

  double jitter = 1e-10;
  SamplerConfig sampler;
  bool burn_in_set = false;  // otherwise a third of the iterations
  int chains = 1;

  std::optional<Eigen::Index> bandwidth;
  double ess_threshold = 1e-8;
  Eigen::Index kendall_window = 0;
  Eigen::Index trace_points = 10000;

  double level = 0.95;
  bool export_win_matrix = true;
  bool export_covariance = false;

  /// Applies one key; relative paths resolve against base_dir.
  void set(const std::string& key, const std::string& value,
           const std::filesystem::path& base_dir = {});
  void load_file(const std::filesystem::path& path);
  /// Fills derived defaults (burn-in) and checks invariants.
  void finalize();
};

/// Loads, aligns, filters and builds the win matrix as configured.
struct PreparedData {
  IndicatorTable indicators;
  std::optional<IncomeTable> income;
  WinMatrix wins;
  std::vector<std::string> dropped_without_income;
};
PreparedData prepare_data(const RunConfig& config, bool require_income);

int cmd_fit(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_mle(const RunConfig& config, std::ostream& out, std::ostream& err);
struct DiagnoseOptions {
  std::filesystem::path chain;
  std::filesystem::path out = "out";
  std::optional<Eigen::Index> bandwidth;
  double threshold = 1e-8;
  Eigen::Index window = 0;
  Eigen::Index trace_points = 10000;
};
int cmd_diagnose(const DiagnoseOptions& options, std::ostream& out, std::ostream& err);

struct SimulateJob {
  SimStudySpec spec;
  SamplerConfig sampler;
};
SimulateJob load_simulate_job(const std::filesystem::path& spec_path);
int cmd_simulate(const SimulateJob& job, const std::filesystem::path& out_dir, std::ostream& out,
                 std::ostream& err);

/// Entry point shared by the executable and tests. Returns the exit code:
/// 0 success, 1 validation, 2 numeric failure, 3 I/O.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bbt
