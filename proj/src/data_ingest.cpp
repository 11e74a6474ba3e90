#include "bbt/data_ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "bbt/csv.hpp"
#include "bbt/error.hpp"

namespace bbt {

namespace {

void require_unique(const std::vector<std::string>& names, const std::string& what) {
  std::unordered_set<std::string> seen;
  for (const auto& n : names) {
    if (n.empty()) throw ValidationError("empty " + what + " name");
    if (!seen.insert(n).second) throw ValidationError("duplicate " + what + " name '" + n + "'");
  }
}

int parse_polarity(const std::string& text, const std::string& indicator) {
  if (text == "+1" || text == "1") return +1;
  if (text == "-1") return -1;
  throw ValidationError("polarity for indicator '" + indicator + "' must be +1 or -1, got '" +
                        text + "'");
}

IndicatorTable select_columns(const IndicatorTable& t, const std::vector<std::size_t>& cols) {
  IndicatorTable out;
  out.entities = t.entities;
  out.values.resize(t.values.rows(), static_cast<Eigen::Index>(cols.size()));
  out.missing.resize(t.values.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const auto src = static_cast<Eigen::Index>(cols[c]);
    const auto dst = static_cast<Eigen::Index>(c);
    out.indicators.push_back(t.indicators[cols[c]]);
    out.polarity.push_back(t.polarity[cols[c]]);
    out.values.col(dst) = t.values.col(src);
    out.missing.col(dst) = t.missing.col(src);
  }
  return out;
}

IndicatorTable drop_incomplete_columns(const IndicatorTable& t) {
  std::vector<std::size_t> keep;
  for (Eigen::Index k = 0; k < t.missing.cols(); ++k)
    if (!t.missing.col(k).any()) keep.push_back(static_cast<std::size_t>(k));
  return select_columns(t, keep);
}

void require_shape(const IndicatorTable& t) {
  if (t.num_entities() < 2)
    throw ValidationError("indicator table needs at least 2 entities, has " +
                          std::to_string(t.num_entities()));
  if (t.num_indicators() < 1)
    throw ValidationError("indicator table has no indicators left");
}

}  // namespace

void IndicatorTable::validate() const {
  require_shape(*this);
  require_unique(entities, "entity");
  require_unique(indicators, "indicator");
  const auto m = static_cast<Eigen::Index>(entities.size());
  const auto k = static_cast<Eigen::Index>(indicators.size());
  if (values.rows() != m || values.cols() != k || missing.rows() != m || missing.cols() != k)
    throw ValidationError("indicator table dimensions disagree with its names");
  if (polarity.size() != indicators.size())
    throw ValidationError("polarity length differs from indicator count");
  for (std::size_t j = 0; j < polarity.size(); ++j)
    if (polarity[j] != 1 && polarity[j] != -1)
      throw ValidationError("polarity of '" + indicators[j] + "' must be +1 or -1");
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < k; ++j)
      if (!missing(i, j) && !std::isfinite(values(i, j)))
        throw ValidationError("non-finite value at entity '" + entities[i] + "', indicator '" +
                              indicators[j] + "'");
}

std::string to_string(Zone z) {
  switch (z) {
    case Zone::kLow: return "low";
    case Zone::kMiddle: return "middle";
    case Zone::kHigh: return "high";
  }
  return "?";
}

Zone parse_zone(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "low") return Zone::kLow;
  if (lower == "middle") return Zone::kMiddle;
  if (lower == "high") return Zone::kHigh;
  throw ValidationError("unknown income zone '" + std::string(text) +
                        "' (expected low, middle or high)");
}

Zone ZoneThresholds::classify(double income) const {
  if (income < low_max) return Zone::kLow;
  if (income >= high_min) return Zone::kHigh;
  return Zone::kMiddle;
}

void IncomeTable::validate() const {
  require_unique(entities, "entity");
  if (static_cast<std::size_t>(income.size()) != entities.size() || zone.size() != entities.size())
    throw ValidationError("income table columns have different lengths");
  for (std::size_t i = 0; i < entities.size(); ++i)
    if (!(income[static_cast<Eigen::Index>(i)] > 0.0) ||
        !std::isfinite(income[static_cast<Eigen::Index>(i)]))
      throw ValidationError("income of '" + entities[i] + "' must be positive and finite");
}

IndicatorTable make_indicator_table(std::vector<std::string> entities,
                                    std::vector<std::string> indicators,
                                    const Eigen::MatrixXd& values, std::vector<int> polarity) {
  IndicatorTable t;
  t.entities = std::move(entities);
  t.indicators = std::move(indicators);
  t.values = values;
  t.polarity = std::move(polarity);
  t.missing = values.array().isFinite() == false;
  t.values = t.missing.select(0.0, values);
  t.validate();
  return t;
}

IndicatorTable load_indicators(const std::filesystem::path& path,
                               const std::filesystem::path& polarity_path) {
  if (!std::filesystem::exists(polarity_path))
    throw IoError("polarity file '" + polarity_path.string() + "' does not exist");
  const auto rows = csv::read_file(path);
  if (rows.empty()) throw ValidationError("'" + path.string() + "' is empty");

  IndicatorTable t;
  t.indicators.assign(rows[0].begin() + 1, rows[0].end());
  require_unique(t.indicators, "indicator");
  const auto k = t.indicators.size();

  const auto m = rows.size() - 1;
  t.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k));
  t.missing = BoolMatrix::Constant(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k), true);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() > k + 1)
      throw ValidationError("'" + path.string() + "' row " + std::to_string(r + 1) + " has " +
                            std::to_string(row.size()) + " fields, header has " +
                            std::to_string(k + 1));
    t.entities.push_back(row[0]);
    for (std::size_t c = 1; c < row.size(); ++c) {
      if (auto v = csv::parse_number(row[c])) {
        t.values(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(c - 1)) = *v;
        t.missing(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(c - 1)) = false;
      }
    }
  }
  require_unique(t.entities, "entity");

  std::unordered_map<std::string, int> polarity;
  for (const auto& row : csv::read_file(polarity_path)) {
    if (row.size() < 2) throw ValidationError("polarity row needs 'indicator,polarity'");
    if (row[0] == "indicator" && row[1] == "polarity") continue;
    if (!polarity.emplace(row[0], parse_polarity(row[1], row[0])).second)
      throw ValidationError("indicator '" + row[0] + "' listed twice in polarity file");
  }
  for (const auto& name : t.indicators) {
    auto it = polarity.find(name);
    if (it == polarity.end())
      throw ValidationError("indicator '" + name + "' has no entry in polarity file '" +
                            polarity_path.string() + "'");
    t.polarity.push_back(it->second);
  }
  t.validate();
  return t;
}

IndicatorTable select_entities(const IndicatorTable& table, const std::vector<std::size_t>& rows) {
  IndicatorTable out;
  out.indicators = table.indicators;
  out.polarity = table.polarity;
  out.values.resize(static_cast<Eigen::Index>(rows.size()), table.values.cols());
  out.missing.resize(static_cast<Eigen::Index>(rows.size()), table.values.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.entities.push_back(table.entities.at(rows[r]));
    out.values.row(static_cast<Eigen::Index>(r)) = table.values.row(static_cast<Eigen::Index>(rows[r]));
    out.missing.row(static_cast<Eigen::Index>(r)) = table.missing.row(static_cast<Eigen::Index>(rows[r]));
  }
  return out;
}

IndicatorTable apply_missing_policy(const IndicatorTable& table, const MissingPolicy& policy) {
  IndicatorTable out;
  if (const auto* drop = std::get_if<DropEntities>(&policy)) {
    const std::unordered_set<std::string> names(drop->names.begin(), drop->names.end());
    for (const auto& n : names)
      if (std::find(table.entities.begin(), table.entities.end(), n) == table.entities.end())
        throw ValidationError("cannot drop unknown entity '" + n + "'");
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < table.entities.size(); ++i)
      if (!names.contains(table.entities[i])) keep.push_back(i);
    out = drop_incomplete_columns(select_entities(table, keep));
  } else {
    out = drop_incomplete_columns(table);
  }
  require_shape(out);
  return out;
}

IncomeTable load_income(const std::filesystem::path& path, const ZoneThresholds& thresholds) {
  const auto rows = csv::read_file(path);
  IncomeTable t;
  std::vector<double> incomes;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (r == 0 && !row.empty() && row[0] == "entity") continue;
    if (row.size() < 2 || row.size() > 3)
      throw ValidationError("'" + path.string() + "' line " + std::to_string(r + 1) +
                            ": expected entity,income[,zone]");
    const auto value = csv::parse_number(row[1]);
    if (!value) throw ValidationError("income of '" + row[0] + "' is not a number: '" + row[1] + "'");
    if (*value <= 0.0)
      throw ValidationError("income of '" + row[0] + "' must be positive (log is taken), got " +
                            row[1]);
    t.entities.push_back(row[0]);
    incomes.push_back(*value);
    t.zone.push_back(row.size() == 3 && !row[2].empty() ? parse_zone(row[2])
                                                        : thresholds.classify(*value));
  }
  t.income = Eigen::Map<const Eigen::VectorXd>(incomes.data(), static_cast<Eigen::Index>(incomes.size()));
  t.validate();
  return t;
}

AlignedTables align(const IndicatorTable& indicators, const IncomeTable& income) {
  std::unordered_map<std::string, std::size_t> income_row;
  for (std::size_t i = 0; i < income.entities.size(); ++i) income_row[income.entities[i]] = i;
  std::unordered_set<std::string> ind_names(indicators.entities.begin(), indicators.entities.end());
  for (const auto& n : income.entities)
    if (!ind_names.contains(n))
      throw ValidationError("income entity '" + n + "' is absent from the indicator table");

  AlignedTables out;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < indicators.entities.size(); ++i) {
    auto it = income_row.find(indicators.entities[i]);
    if (it == income_row.end()) {
      out.dropped.push_back(indicators.entities[i]);
      continue;
    }
    keep.push_back(i);
    out.income.entities.push_back(indicators.entities[i]);
    out.income.zone.push_back(income.zone[it->second]);
  }
  out.income.income.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t r = 0; r < keep.size(); ++r)
    out.income.income[static_cast<Eigen::Index>(r)] =
        income.income[static_cast<Eigen::Index>(income_row.at(indicators.entities[keep[r]]))];
  out.indicators = select_entities(indicators, keep);
  require_shape(out.indicators);
  return out;
}

std::pair<IndicatorTable, IncomeTable> subset_by_zone(const IndicatorTable& ind,
                                                      const IncomeTable& inc,
                                                      const std::set<Zone>& zones) {
  if (zones.empty()) throw ValidationError("zone filter is empty");
  if (ind.entities != inc.entities)
    throw ValidationError("indicator and income tables are not aligned");
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < inc.entities.size(); ++i)
    if (zones.contains(inc.zone[i])) keep.push_back(i);
  if (keep.empty()) throw ValidationError("no entity falls in the requested income zones");
  if (keep.size() < 2)
    throw ValidationError("only one entity falls in the requested income zones; need at least 2");

  IncomeTable sub;
  sub.income.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t r = 0; r < keep.size(); ++r) {
    sub.entities.push_back(inc.entities[keep[r]]);
    sub.zone.push_back(inc.zone[keep[r]]);
    sub.income[static_cast<Eigen::Index>(r)] = inc.income[static_cast<Eigen::Index>(keep[r])];
  }
  return {select_entities(ind, keep), std::move(sub)};
}

}  // namespace bbt
