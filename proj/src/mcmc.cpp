#include "bbt/mcmc.hpp"

#include <cmath>

#include "bbt/error.hpp"

namespace bbt {

void SamplerConfig::validate() const {
  if (!(beta > 0.0 && beta < 1.0)) throw ValidationError("beta must lie in (0, 1)");
  if (!(chi > 0.0)) throw ValidationError("inverse-gamma shape chi must be positive");
  if (!(omega > 0.0)) throw ValidationError("inverse-gamma scale omega must be positive");
  if (iterations < 1) throw ValidationError("iterations must be positive");
  if (burn_in < 0 || burn_in >= iterations)
    throw ValidationError("burn-in must be non-negative and smaller than iterations");
  if (thin < 1) throw ValidationError("thin must be positive");
  if (fixed_alpha2 && !(*fixed_alpha2 > 0.0)) throw ValidationError("fixed alpha^2 must be positive");
  kernel.validate();
}

std::int64_t SamplerConfig::kept() const { return (iterations - burn_in + thin - 1) / thin; }

double sample_inverse_gamma(double shape, double scale, Rng& rng) {
  std::gamma_distribution<double> gamma(shape, 1.0);
  return scale / gamma(rng);
}

GibbsParameters gibbs_alpha2_parameters(const MeritVector& mu, const ConstrainedCovariance& cov,
                                        const SamplerConfig& config) {
  const double dim = config.rank_adjusted_shape ? cov.rank : static_cast<double>(mu.size());
  const double q = cov.quadratic_form(mu);
  return {config.chi + 0.5 * dim, config.omega + (config.conjugate_scale ? 0.5 * q : q)};
}

double gibbs_alpha2(const MeritVector& mu, const ConstrainedCovariance& cov,
                    const SamplerConfig& config, Rng& rng) {
  const auto p = gibbs_alpha2_parameters(mu, cov, config);
  return sample_inverse_gamma(p.shape, p.scale, rng);
}

double gibbs_alpha2(const MeritVector& mu, const ConstrainedCovariance& cov, double chi,
                    double omega, Rng& rng) {
  SamplerConfig config;
  config.chi = chi;
  config.omega = omega;
  return gibbs_alpha2(mu, cov, config, rng);
}

MeritVector pcn_propose(const ChainState& state, const ConstrainedCovariance& cov, double beta,
                        Rng& rng) {
  if (!(beta > 0.0 && beta <= 1.0)) throw ValidationError("pCN step must lie in (0, 1]");
  const MeritVector xi = sample_constrained(cov, state.alpha2, rng);
  return std::sqrt(1.0 - beta * beta) * state.mu + beta * xi;
}

bool mh_accept(double loglik_new, double loglik_old, Rng& rng) {
  const double diff = loglik_new - loglik_old;
  if (diff >= 0.0) return true;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  return std::log(unif(rng)) < diff;
}

ChainSamples run_chain(const WinMatrix& w, const ConstrainedCovariance& cov,
                       const SamplerConfig& config) {
  config.validate();
  const auto m = static_cast<Eigen::Index>(w.size());
  if (cov.dim() != m) throw ValidationError("prior covariance size differs from win matrix size");

  Rng rng(config.seed);
  ChainSamples out;
  out.entities = w.entities;
  out.config = config;
  out.jitter_applied = cov.jitter_applied;
  const auto kept = config.kept();
  out.mu_draws.resize(kept, m);
  out.alpha2_draws.resize(kept);
  out.loglik_draws.resize(kept);
  out.quadform_draws.resize(kept);
  out.accept_flags.reserve(static_cast<std::size_t>(config.iterations - config.burn_in));

  ChainState state{MeritVector::Zero(m), config.fixed_alpha2.value_or(1.0), 0.0};
  state.loglik = log_likelihood(state.mu, w);

  Eigen::Index row = 0;
  for (std::int64_t t = 1; t <= config.iterations; ++t) {
    if (!config.fixed_alpha2) state.alpha2 = gibbs_alpha2(state.mu, cov, config, rng);
    MeritVector proposal = pcn_propose(state, cov, config.beta, rng);
    const double ll = log_likelihood(proposal, w);
    if (!std::isfinite(ll))
      throw NumericError("non-finite log-likelihood at iteration " + std::to_string(t));
    const bool accept = mh_accept(ll, state.loglik, rng);
    if (accept) {
      state.mu = std::move(proposal);
      state.loglik = ll;
    }
    if (t <= config.burn_in) continue;
    ++out.proposed;
    out.accepted += accept ? 1 : 0;
    out.accept_flags.push_back(accept ? 1 : 0);
    if ((t - config.burn_in - 1) % config.thin == 0) {
      out.mu_draws.row(row) = state.mu.transpose();
      out.alpha2_draws[row] = state.alpha2;
      out.loglik_draws[row] = state.loglik;
      out.quadform_draws[row] = cov.quadratic_form(state.mu);
      ++row;
    }
  }
  return out;
}

MeritVector posterior_mean(const ChainSamples& samples) {
  if (samples.num_kept() < 1) throw ValidationError("posterior mean needs at least one draw");
  return samples.mu_draws.colwise().mean().transpose();
}

}  // namespace bbt
