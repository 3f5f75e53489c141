#pragma once

// Reference unpenalized NB2 maximum likelihood, written independently of the
// library: std::lgamma for the likelihood, Newton-Raphson on beta at fixed
// alpha, golden-section search on ln(alpha) over the profile likelihood.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace oracle {

struct Estimate {
  Eigen::VectorXd beta;
  double alpha;
  double loglik;
};

inline double nb_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& beta, double alpha) {
  const double m = 1.0 / alpha;
  double ll = 0.0;
  for (Eigen::Index j = 0; j < X.rows(); ++j) {
    const double eta = X.row(j).dot(beta);
    const double mu = std::exp(eta);
    const double p = 1.0 / (1.0 + alpha * mu);
    ll += std::lgamma(m + y[j]) - std::lgamma(y[j] + 1.0) - std::lgamma(m) + m * std::log(p) +
          y[j] * std::log1p(-p);
  }
  return ll;
}

/// argmax over beta at fixed alpha; the NB2 log-likelihood is concave in beta.
inline Eigen::VectorXd newton_beta(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha,
                                   Eigen::VectorXd beta) {
  for (int it = 0; it < 200; ++it) {
    Eigen::VectorXd score = Eigen::VectorXd::Zero(X.cols());
    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(X.cols(), X.cols());
    for (Eigen::Index j = 0; j < X.rows(); ++j) {
      const double mu = std::exp(X.row(j).dot(beta));
      const double d = 1.0 + alpha * mu;
      score += X.row(j).transpose() * ((y[j] - mu) / d);
      // observed information: mu (1 + alpha y) / (1 + alpha mu)^2
      info += X.row(j).transpose() * X.row(j) * (mu * (1.0 + alpha * y[j]) / (d * d));
    }
    const Eigen::VectorXd step = info.ldlt().solve(score);
    double t = 1.0;
    const double base = nb_loglik(X, y, beta, alpha);
    while (t > 1e-8 && nb_loglik(X, y, beta + t * step, alpha) < base - 1e-12) t *= 0.5;
    beta += t * step;
    // quadratic convergence: a 1e-10 step leaves an error far below 1e-15
    if (step.cwiseAbs().maxCoeff() < 1e-10 || t <= 1e-8) break;
  }
  return beta;
}

inline Estimate fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(X.cols());
  beta[0] = std::log(y.mean() + 0.5);
  auto profile = [&](double log_alpha) {
    beta = newton_beta(X, y, std::exp(log_alpha), beta);
    return nb_loglik(X, y, beta, std::exp(log_alpha));
  };
  // golden-section search for the maximum over ln(alpha)
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = std::log(1e-6), b = std::log(50.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = profile(c), fd = profile(d);
  while (b - a > 1e-11) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = profile(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = profile(d);
    }
  }
  const double alpha = std::exp(0.5 * (a + b));
  beta = newton_beta(X, y, alpha, beta);
  return Estimate{beta, alpha, nb_loglik(X, y, beta, alpha)};
}

}  // namespace oracle
