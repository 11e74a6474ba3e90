#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bbt/bt_model.hpp"
#include "bbt/prior_cov.hpp"
#include "bbt/win_matrix.hpp"

namespace bbt {

struct SamplerConfig {
  double beta = 0.009;  // pCN step size
  double chi = 2.0;     // inverse-gamma shape
  double omega = 1.0;   // inverse-gamma scale
  std::int64_t iterations = 3'000'000;
  std::int64_t burn_in = 1'000'000;
  std::int64_t thin = 1;
  std::uint64_t seed = 1;
  KernelSpec kernel;
  /// Gibbs shape chi + rank/2 instead of chi + M/2.
  bool rank_adjusted_shape = false;
  /// Gibbs scale omega + q/2 instead of omega + q. Together with
  /// rank_adjusted_shape this is the exact conjugate conditional.
  bool conjugate_scale = false;
  /// Skip the Gibbs step and hold alpha^2 at this value.
  std::optional<double> fixed_alpha2;

  void validate() const;
  /// ceil((iterations - burn_in) / thin).
  std::int64_t kept() const;
};

struct ChainState {
  MeritVector mu;
  double alpha2 = 1.0;
  double loglik = 0.0;
};

/// Stored draws after burn-in, one row per kept iteration.
struct ChainSamples {
  std::vector<std::string> entities;
  Eigen::MatrixXd mu_draws;        // kept x M
  Eigen::VectorXd alpha2_draws;    // kept
  Eigen::VectorXd loglik_draws;    // kept
  Eigen::VectorXd quadform_draws;  // mu' C^+ mu, kept
  std::vector<std::uint8_t> accept_flags;  // one per post-burn-in iteration
  std::int64_t accepted = 0;
  std::int64_t proposed = 0;
  SamplerConfig config;
  bool jitter_applied = false;

  Eigen::Index num_kept() const { return mu_draws.rows(); }
  /// Absolute iteration index (1-based) of kept row r.
  std::int64_t iteration_of(Eigen::Index r) const {
    return config.burn_in + 1 + static_cast<std::int64_t>(r) * config.thin;
  }
};

struct GibbsParameters {
  double shape = 0.0;
  double scale = 0.0;
};

/// Inverse-gamma parameters of alpha^2 | mu: shape chi + M/2, scale omega + mu' C^+ mu
/// (variants per the config switches).
GibbsParameters gibbs_alpha2_parameters(const MeritVector& mu, const ConstrainedCovariance& cov,
                                        const SamplerConfig& config);

/// One draw of alpha^2 | mu.
double gibbs_alpha2(const MeritVector& mu, const ConstrainedCovariance& cov, double chi,
                    double omega, Rng& rng);
double gibbs_alpha2(const MeritVector& mu, const ConstrainedCovariance& cov,
                    const SamplerConfig& config, Rng& rng);

/// Inverse-gamma draw: scale / Gamma(shape, 1).
double sample_inverse_gamma(double shape, double scale, Rng& rng);

/// sqrt(1 - beta^2) mu + beta xi, xi ~ N(0, alpha2 C). beta in (0, 1].
MeritVector pcn_propose(const ChainState& state, const ConstrainedCovariance& cov, double beta,
                        Rng& rng);

/// Accepts with probability min(1, exp(loglik_new - loglik_old)).
bool mh_accept(double loglik_new, double loglik_old, Rng& rng);

/// Alternating Gibbs (alpha^2) and pCN Metropolis-Hastings (mu) updates,
/// starting from mu = 0, alpha^2 = 1. Deterministic for a given seed.
ChainSamples run_chain(const WinMatrix& w, const ConstrainedCovariance& cov,
                       const SamplerConfig& config);

/// Column means of the kept mu draws.
MeritVector posterior_mean(const ChainSamples& samples);

}  // namespace bbt
