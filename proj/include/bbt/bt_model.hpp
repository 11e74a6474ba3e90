#pragma once

#include <Eigen/Dense>

#include "bbt/win_matrix.hpp"

namespace bbt {

/// Merit parameters (log-strengths), one per entity. Only differences are
/// identified; sampler and MLE outputs are centered (sum zero).
using MeritVector = Eigen::VectorXd;

/// Subtracts the mean so that the entries sum to zero.
MeritVector centered(const MeritVector& mu);

/// P(i beats j) = exp(mu_i) / (exp(mu_i) + exp(mu_j)), evaluated as a
/// logistic of the difference so it never overflows.
double win_probability(double mu_i, double mu_j);

/// log P(i beats j), stable for large |mu_i - mu_j|.
double log_win_probability(double mu_i, double mu_j);

/// Binomial log-likelihood of the win matrix over unordered pairs, without
/// the binomial coefficients (constant in mu).
double log_likelihood(const MeritVector& mu, const WinMatrix& w);

/// Analytic gradient of log_likelihood.
Eigen::VectorXd log_likelihood_gradient(const MeritVector& mu, const WinMatrix& w);

struct MleOptions {
  double tol = 1e-10;
  int max_iter = 10000;
};

struct MleResult {
  MeritVector mu;  // centered
  int iterations = 0;
};

/// Classical Bradley-Terry MLE using Newman's fixed-point iteration on
/// strengths exp(mu), updated in place and renormalized to unit geometric
/// mean every sweep. Throws NumericError naming the entity when the MLE does
/// not exist (no wins, no losses, or a win graph that is not strongly
/// connected) and when max_iter is exhausted.
MleResult mle_newman(const WinMatrix& w, const MleOptions& options = {});

}  // namespace bbt
