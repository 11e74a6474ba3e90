#pragma once

#include <random>
#include <string>

#include <Eigen/Dense>

#include "bbt/bt_model.hpp"
#include "bbt/data_ingest.hpp"

namespace bbt {

using Rng = std::mt19937_64;

enum class KernelKind { kSquaredExponential, kRationalQuadratic };

KernelKind parse_kernel_kind(std::string_view text);
std::string to_string(KernelKind k);

/// Unit-variance kernel; the variance alpha^2 is applied by the sampler.
struct KernelSpec {
  KernelKind kind = KernelKind::kSquaredExponential;
  double length_scale = 0.09;
  double mixture = 1.0;  // rational quadratic only

  void validate() const;
};

/// Prior covariance restricted to the sum-to-zero subspace.
///   sigma   unit-variance kernel matrix (with jitter, if it was needed)
///   c       sigma - sigma 1 (1' sigma 1)^-1 1' sigma
///   factor  M x rank, factor * factor' = c
///   pinv    Moore-Penrose pseudo-inverse of c
struct ConstrainedCovariance {
  Eigen::MatrixXd sigma;
  Eigen::MatrixXd c;
  Eigen::MatrixXd factor;
  Eigen::MatrixXd pinv;
  int rank = 0;
  bool jitter_applied = false;
  double jitter = 0.0;

  Eigen::Index dim() const { return c.rows(); }

  /// mu' pinv mu.
  double quadratic_form(const MeritVector& mu) const;
};

/// |log p_i - log p_j|.
Eigen::MatrixXd log_income_distance(const Eigen::VectorXd& income);
Eigen::MatrixXd log_income_distance(const IncomeTable& inc);

/// Squared exponential exp(-d^2/l^2) or rational quadratic
/// (1 + d^2/(2 s^2 l^2))^-s, applied elementwise.
Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& d, const KernelSpec& spec);

/// Relative eigenvalue cut used for rank, factor and pseudo-inverse.
inline constexpr double kRankEpsilon = 1e-10;

/// Projects sigma onto the sum-to-zero subspace. Adds jitter * I first when the
/// smallest eigenvalue of sigma is below 10 * jitter.
ConstrainedCovariance constrain(const Eigen::MatrixXd& sigma, double jitter = 1e-10);

/// sqrt(scale) * factor * z with z ~ N(0, I_rank); sums to zero.
MeritVector sample_constrained(const ConstrainedCovariance& cov, double scale, Rng& rng);

}  // namespace bbt
