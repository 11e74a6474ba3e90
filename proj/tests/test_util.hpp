#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <Eigen/Dense>
#include <gtest/gtest.h>

namespace bbt::testing {

inline std::filesystem::path data_dir() { return BBT_DATA_DIR; }

// Fresh per-test scratch directory.
inline std::filesystem::path scratch_dir() {
  const char* env = std::getenv("BBT_TEST_TMP");
  std::filesystem::path root = env ? env : std::filesystem::temp_directory_path() / "bbt_test";
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  auto dir = root / (std::string(info->test_suite_name()) + "." + info->name());
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline double rel_frobenius(const Eigen::MatrixXd& a, const Eigen::MatrixXd& ref) {
  return (a - ref).norm() / ref.norm();
}

inline Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = z(rng);
  return m;
}

// x_t = rho x_{t-1} + sqrt(1 - rho^2) e_t, unit stationary variance.
inline Eigen::VectorXd ar1(Eigen::Index n, double rho, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  Eigen::VectorXd x(n);
  const double s = std::sqrt(1.0 - rho * rho);
  x(0) = z(rng);
  for (Eigen::Index t = 1; t < n; ++t) x(t) = rho * x(t - 1) + s * z(rng);
  return x;
}

}  // namespace bbt::testing
