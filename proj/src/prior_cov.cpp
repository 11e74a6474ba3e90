#include "bbt/prior_cov.hpp"

#include <cmath>

#include "bbt/error.hpp"

namespace bbt {

KernelKind parse_kernel_kind(std::string_view text) {
  if (text == "squared_exponential" || text == "se") return KernelKind::kSquaredExponential;
  if (text == "rational_quadratic" || text == "rq") return KernelKind::kRationalQuadratic;
  throw ValidationError("unknown kernel '" + std::string(text) +
                        "' (expected squared_exponential or rational_quadratic)");
}

std::string to_string(KernelKind k) {
  return k == KernelKind::kSquaredExponential ? "squared_exponential" : "rational_quadratic";
}

void KernelSpec::validate() const {
  if (!(length_scale > 0.0) || !std::isfinite(length_scale))
    throw ValidationError("kernel length scale must be positive");
  if (kind == KernelKind::kRationalQuadratic && (!(mixture > 0.0) || !std::isfinite(mixture)))
    throw ValidationError("rational quadratic mixture parameter must be positive");
}

double ConstrainedCovariance::quadratic_form(const MeritVector& mu) const {
  return mu.dot(pinv * mu);
}

Eigen::MatrixXd log_income_distance(const Eigen::VectorXd& income) {
  if ((income.array() <= 0.0).any()) throw ValidationError("incomes must be positive");
  const Eigen::VectorXd lp = income.array().log();
  const auto m = lp.size();
  Eigen::MatrixXd d(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) d(i, j) = std::abs(lp[i] - lp[j]);
  return d;
}

Eigen::MatrixXd log_income_distance(const IncomeTable& inc) {
  return log_income_distance(inc.income);
}

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& d, const KernelSpec& spec) {
  spec.validate();
  const double l2 = spec.length_scale * spec.length_scale;
  const Eigen::ArrayXXd d2 = d.array().square();
  if (spec.kind == KernelKind::kSquaredExponential) return (-d2 / l2).exp().matrix();
  const double s = spec.mixture;
  return (1.0 + d2 / (2.0 * s * s * l2)).pow(-s).matrix();
}

ConstrainedCovariance constrain(const Eigen::MatrixXd& sigma, double jitter) {
  if (sigma.rows() != sigma.cols() || sigma.rows() < 2)
    throw ValidationError("kernel matrix must be square with at least 2 rows");
  if (jitter < 0.0) throw ValidationError("jitter must be non-negative");
  const double scale = sigma.cwiseAbs().maxCoeff();
  if (!sigma.allFinite() || (sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw ValidationError("kernel matrix is not symmetric");

  const auto m = sigma.rows();
  ConstrainedCovariance cov;
  cov.sigma = 0.5 * (sigma + sigma.transpose());
  const double lambda_min =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(cov.sigma, Eigen::EigenvaluesOnly)
          .eigenvalues()
          .minCoeff();
  if (lambda_min < 10.0 * jitter) {
    cov.sigma.diagonal().array() += jitter;
    cov.jitter_applied = true;
    cov.jitter = jitter;
  }

  const Eigen::VectorXd s1 = cov.sigma.rowwise().sum();
  const double total = s1.sum();
  if (!(total > 0.0)) throw NumericError("1' sigma 1 is not positive; cannot constrain");
  cov.c = cov.sigma - s1 * s1.transpose() / total;
  cov.c = 0.5 * (cov.c + cov.c.transpose());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov.c);
  if (eig.info() != Eigen::Success) throw NumericError("eigendecomposition of C failed");
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double lambda_max = lambda.maxCoeff();
  if (!(lambda_max > 0.0)) throw NumericError("constrained covariance has no positive eigenvalue");

  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < m; ++k)
    if (lambda[k] > kRankEpsilon * lambda_max) keep.push_back(k);
  cov.rank = static_cast<int>(keep.size());

  // Retained eigenvectors are orthogonal to 1 up to rounding; remove the
  // residual so every draw sums to zero at machine precision.
  Eigen::MatrixXd u(m, cov.rank);
  Eigen::VectorXd lam(cov.rank);
  for (int r = 0; r < cov.rank; ++r) {
    Eigen::VectorXd v = eig.eigenvectors().col(keep[static_cast<std::size_t>(r)]);
    v.array() -= v.mean();
    u.col(r) = v.normalized();
    lam[r] = lambda[keep[static_cast<std::size_t>(r)]];
  }
  cov.factor = u * lam.cwiseSqrt().asDiagonal();
  cov.pinv = u * lam.cwiseInverse().asDiagonal() * u.transpose();
  cov.pinv = 0.5 * (cov.pinv + cov.pinv.transpose());
  return cov;
}

MeritVector sample_constrained(const ConstrainedCovariance& cov, double scale, Rng& rng) {
  if (!(scale > 0.0)) throw ValidationError("prior scale must be positive");
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(cov.rank);
  for (int k = 0; k < cov.rank; ++k) z[k] = normal(rng);
  return std::sqrt(scale) * (cov.factor * z);
}

}  // namespace bbt
