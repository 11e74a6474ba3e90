#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace bbt {

using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Entities x indicators. polarity[k] is +1 when larger values are better and
/// -1 when smaller values are better. values(i, k) is only meaningful where
/// missing(i, k) is false.
struct IndicatorTable {
  std::vector<std::string> entities;
  std::vector<std::string> indicators;
  Eigen::MatrixXd values;
  std::vector<int> polarity;
  BoolMatrix missing;

  std::size_t num_entities() const { return entities.size(); }
  std::size_t num_indicators() const { return indicators.size(); }
  bool complete() const { return !missing.any(); }

  /// Throws ValidationError if any structural invariant is violated.
  void validate() const;
};

enum class Zone { kLow, kMiddle, kHigh };

std::string to_string(Zone z);
Zone parse_zone(std::string_view text);

/// Income cut points for zone labels when income.csv omits them.
/// income < low_max -> low; income >= high_min -> high; otherwise middle.
struct ZoneThresholds {
  double low_max = 100000.0;
  double high_min = 200000.0;

  Zone classify(double income) const;
};

struct IncomeTable {
  std::vector<std::string> entities;
  Eigen::VectorXd income;
  std::vector<Zone> zone;

  std::size_t size() const { return entities.size(); }
  void validate() const;
};

IndicatorTable load_indicators(const std::filesystem::path& path,
                               const std::filesystem::path& polarity_path);

/// Builds a table from in-memory columns; non-finite values are marked missing.
IndicatorTable make_indicator_table(std::vector<std::string> entities,
                                    std::vector<std::string> indicators,
                                    const Eigen::MatrixXd& values,
                                    std::vector<int> polarity);

struct DropIndicators {};
struct DropEntities {
  std::vector<std::string> names;
};
using MissingPolicy = std::variant<DropIndicators, DropEntities>;

/// Result has no missing cells. DropEntities removes the named rows first and
/// then any still-incomplete columns.
IndicatorTable apply_missing_policy(const IndicatorTable& table, const MissingPolicy& policy);

IncomeTable load_income(const std::filesystem::path& path, const ZoneThresholds& thresholds = {});

/// Result of aligning income rows to indicator rows.
struct AlignedTables {
  IndicatorTable indicators;
  IncomeTable income;
  /// Indicator entities without an income row; they are removed.
  std::vector<std::string> dropped;
};

/// Reorders income to indicator order. Indicator rows lacking income are
/// dropped and reported; an income entity absent from the indicator table is
/// an error.
AlignedTables align(const IndicatorTable& indicators, const IncomeTable& income);

/// Restricts both tables to the given zones, preserving row order.
std::pair<IndicatorTable, IncomeTable> subset_by_zone(const IndicatorTable& ind,
                                                      const IncomeTable& inc,
                                                      const std::set<Zone>& zones);

/// Restricts a table to the listed rows (by index, order kept as given).
IndicatorTable select_entities(const IndicatorTable& table, const std::vector<std::size_t>& rows);

}  // namespace bbt
