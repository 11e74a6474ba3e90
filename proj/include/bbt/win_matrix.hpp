#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bbt/data_ingest.hpp"

namespace bbt {

/// Pairwise win counts. wins(i, j) is how often i outperformed j (halves
/// appear under tie splitting); comparisons(i, j) is the number of contests
/// actually held between i and j.
struct WinMatrix {
  std::vector<std::string> entities;
  Eigen::MatrixXd wins;
  Eigen::MatrixXi comparisons;

  std::size_t size() const { return entities.size(); }
  void validate() const;
};

enum class TiePolicy { kSplit, kDrop };

TiePolicy parse_tie_policy(std::string_view text);
std::string to_string(TiePolicy p);

/// One contest per indicator and pair; the larger polarity-adjusted value wins.
/// Exact ties are split 0.5/0.5 or dropped (no contest) per policy.
WinMatrix build_win_matrix(const IndicatorTable& table, TiePolicy tie_policy = TiePolicy::kSplit);

/// Builds a WinMatrix from raw counts; comparisons(i, j) = wins(i, j) + wins(j, i)
/// rounded to the nearest integer.
WinMatrix make_win_matrix(std::vector<std::string> entities, const Eigen::MatrixXd& wins);

/// Sum of comparisons over unordered pairs, i.e. K * M(M-1)/2 with no dropped ties.
std::int64_t total_comparisons(const WinMatrix& w);

/// Long-format audit export: entity_i,entity_j,wins,comparisons for i != j.
void export_win_matrix_csv(const WinMatrix& w, const std::filesystem::path& path);

}  // namespace bbt
