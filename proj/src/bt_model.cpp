#include "bbt/bt_model.hpp"

#include <cmath>
#include <vector>

#include "bbt/error.hpp"

namespace bbt {

MeritVector centered(const MeritVector& mu) {
  if (mu.size() == 0) return mu;
  return mu.array() - mu.mean();
}

double win_probability(double mu_i, double mu_j) {
  const double d = mu_i - mu_j;
  if (d >= 0.0) return 1.0 / (1.0 + std::exp(-d));
  const double e = std::exp(d);
  return e / (1.0 + e);
}

double log_win_probability(double mu_i, double mu_j) {
  const double d = mu_i - mu_j;
  if (d >= 0.0) return -std::log1p(std::exp(-d));
  return d - std::log1p(std::exp(d));
}

double log_likelihood(const MeritVector& mu, const WinMatrix& w) {
  const auto m = w.wins.rows();
  if (mu.size() != m) throw ValidationError("merit vector length differs from win matrix size");
  double ll = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      const double xij = w.wins(i, j);
      const double xji = w.wins(j, i);
      if (xij > 0.0) ll += xij * log_win_probability(mu[i], mu[j]);
      if (xji > 0.0) ll += xji * log_win_probability(mu[j], mu[i]);
    }
  }
  return ll;
}

Eigen::VectorXd log_likelihood_gradient(const MeritVector& mu, const WinMatrix& w) {
  const auto m = w.wins.rows();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      const double n = w.wins(i, j) + w.wins(j, i);
      if (n == 0.0) continue;
      const double r = w.wins(i, j) - n * win_probability(mu[i], mu[j]);
      g[i] += r;
      g[j] -= r;
    }
  }
  return g;
}

namespace {

// Every entity must reach every other through "beat" edges, otherwise the
// likelihood keeps increasing as some group of merits drifts apart.
void check_mle_exists(const WinMatrix& w) {
  const auto m = w.wins.rows();
  for (Eigen::Index i = 0; i < m; ++i) {
    double won = 0.0, lost = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      won += w.wins(i, j);
      lost += w.wins(j, i);
    }
    if (won == 0.0)
      throw NumericError("MLE does not exist: entity '" + w.entities[i] +
                         "' never wins a comparison");
    if (lost == 0.0)
      throw NumericError("MLE does not exist: entity '" + w.entities[i] +
                         "' never loses a comparison");
  }
  auto reach = [&](bool forward) {
    std::vector<char> seen(static_cast<std::size_t>(m), 0);
    std::vector<Eigen::Index> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      for (Eigen::Index v = 0; v < m; ++v) {
        const double edge = forward ? w.wins(u, v) : w.wins(v, u);
        if (edge > 0.0 && !seen[static_cast<std::size_t>(v)]) {
          seen[static_cast<std::size_t>(v)] = 1;
          stack.push_back(v);
        }
      }
    }
    return seen;
  };
  for (bool forward : {true, false}) {
    const auto seen = reach(forward);
    for (Eigen::Index v = 0; v < m; ++v)
      if (!seen[static_cast<std::size_t>(v)])
        throw NumericError("MLE does not exist: win graph is not strongly connected (entity '" +
                           w.entities[v] + "' is separated from '" + w.entities[0] + "')");
  }
}

}  // namespace

MleResult mle_newman(const WinMatrix& w, const MleOptions& options) {
  w.validate();
  check_mle_exists(w);
  const auto m = w.wins.rows();
  Eigen::VectorXd p = Eigen::VectorXd::Ones(m);

  for (int it = 1; it <= options.max_iter; ++it) {
    const Eigen::VectorXd prev = p;
    for (Eigen::Index i = 0; i < m; ++i) {
      double num = 0.0, den = 0.0;
      for (Eigen::Index j = 0; j < m; ++j) {
        if (j == i) continue;
        const double s = p[i] + p[j];
        num += w.wins(i, j) * p[j] / s;
        den += w.wins(j, i) / s;
      }
      p[i] = num / den;
    }
    const double log_gm = p.array().log().mean();
    p *= std::exp(-log_gm);
    if (!p.allFinite() || (p.array() <= 0.0).any())
      throw NumericError("Newman iteration produced invalid strengths at sweep " +
                         std::to_string(it));
    const double change = ((p - prev).array().abs() / prev.array()).maxCoeff();
    if (change < options.tol) return {centered(p.array().log().matrix()), it};
  }
  throw NumericError("Newman iteration did not converge within " +
                     std::to_string(options.max_iter) + " sweeps");
}

}  // namespace bbt
