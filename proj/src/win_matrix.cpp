#include "bbt/win_matrix.hpp"

#include <cmath>
#include <fstream>

#include "bbt/csv.hpp"
#include "bbt/error.hpp"

namespace bbt {

void WinMatrix::validate() const {
  const auto m = static_cast<Eigen::Index>(entities.size());
  if (wins.rows() != m || wins.cols() != m || comparisons.rows() != m || comparisons.cols() != m)
    throw ValidationError("win matrix dimensions disagree with entity count");
  for (Eigen::Index i = 0; i < m; ++i) {
    if (wins(i, i) != 0.0 || comparisons(i, i) != 0)
      throw ValidationError("win matrix diagonal must be zero");
    for (Eigen::Index j = 0; j < m; ++j) {
      if (i == j) continue;
      if (!(wins(i, j) >= 0.0) || wins(i, j) > comparisons(i, j))
        throw ValidationError("wins out of range for pair (" + entities[i] + ", " + entities[j] + ")");
      if (comparisons(i, j) != comparisons(j, i) ||
          std::abs(wins(i, j) + wins(j, i) - comparisons(i, j)) > 1e-9)
        throw ValidationError("wins and comparisons disagree for pair (" + entities[i] + ", " +
                              entities[j] + ")");
    }
  }
}

TiePolicy parse_tie_policy(std::string_view text) {
  if (text == "split") return TiePolicy::kSplit;
  if (text == "drop") return TiePolicy::kDrop;
  throw ValidationError("unknown tie policy '" + std::string(text) + "' (expected split or drop)");
}

std::string to_string(TiePolicy p) { return p == TiePolicy::kSplit ? "split" : "drop"; }

WinMatrix build_win_matrix(const IndicatorTable& table, TiePolicy tie_policy) {
  table.validate();
  if (!table.complete())
    throw ValidationError("win matrix needs a complete indicator table; apply a missing-value policy first");

  const auto m = static_cast<Eigen::Index>(table.num_entities());
  WinMatrix w;
  w.entities = table.entities;
  w.wins = Eigen::MatrixXd::Zero(m, m);
  w.comparisons = Eigen::MatrixXi::Zero(m, m);

  for (Eigen::Index k = 0; k < table.values.cols(); ++k) {
    const double sign = table.polarity[static_cast<std::size_t>(k)];
    for (Eigen::Index i = 0; i < m; ++i) {
      const double vi = sign * table.values(i, k);
      for (Eigen::Index j = i + 1; j < m; ++j) {
        const double vj = sign * table.values(j, k);
        if (vi > vj) {
          w.wins(i, j) += 1.0;
        } else if (vj > vi) {
          w.wins(j, i) += 1.0;
        } else if (tie_policy == TiePolicy::kSplit) {
          w.wins(i, j) += 0.5;
          w.wins(j, i) += 0.5;
        } else {
          continue;
        }
        ++w.comparisons(i, j);
        ++w.comparisons(j, i);
      }
    }
  }
  return w;
}

WinMatrix make_win_matrix(std::vector<std::string> entities, const Eigen::MatrixXd& wins) {
  WinMatrix w;
  w.entities = std::move(entities);
  w.wins = wins;
  const auto m = wins.rows();
  w.comparisons = Eigen::MatrixXi::Zero(m, wins.cols());
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < wins.cols(); ++j)
      if (i != j) w.comparisons(i, j) = static_cast<int>(std::lround(wins(i, j) + wins(j, i)));
  w.validate();
  return w;
}

std::int64_t total_comparisons(const WinMatrix& w) {
  std::int64_t total = 0;
  for (Eigen::Index i = 0; i < w.comparisons.rows(); ++i)
    for (Eigen::Index j = i + 1; j < w.comparisons.cols(); ++j) total += w.comparisons(i, j);
  return total;
}

void export_win_matrix_csv(const WinMatrix& w, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "entity_i,entity_j,wins,comparisons\n";
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = 0; j < w.size(); ++j) {
      if (i == j) continue;
      const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
      out << csv::escape(w.entities[i]) << ',' << csv::escape(w.entities[j]) << ','
          << csv::format_double(w.wins(a, b)) << ',' << w.comparisons(a, b) << '\n';
    }
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

}  // namespace bbt
