#pragma once

// NB2 regression likelihood. For observation j with mean mu_j = exp(x_j . beta),
// over-dispersion alpha, m = 1/alpha and p_j = 1 / (1 + alpha mu_j):
//
//   L = -sum_j [ lnG(m + y_j) - lnG(y_j + 1) - lnG(m) + m ln p_j + y_j ln(1 - p_j) ]
//
// The terms are regrouped as
//
//   [lnG(m + y) - lnG(m) + y ln alpha] - lnG(y + 1) - (m + y) log1p(alpha mu) + y eta
//
// which stays finite and accurate as alpha -> 0 (the Poisson limit).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nbsparse/dataset.hpp"
#include "nbsparse/error.hpp"
#include "nbsparse/special.hpp"

namespace nbsparse {

/// Linear predictors are clamped to [-cap, cap] before exponentiation.
inline constexpr double kLinearPredictorCap = 500.0;

struct NBParams {
  Eigen::VectorXd beta;
  double alpha = 1.0;
};

/// Which coefficients carry the L1 penalty. Defaults to all of them,
/// including the intercept.
class PenaltySet {
 public:
  static PenaltySet all() { return PenaltySet(); }
  static PenaltySet only(std::vector<std::size_t> indices) {
    PenaltySet s;
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
    s.all_ = false;
    s.indices_ = std::move(indices);
    return s;
  }
  /// Every column except the intercept.
  static PenaltySet all_but_intercept(std::size_t p) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 1; i < p; ++i) idx.push_back(i);
    return only(std::move(idx));
  }

  bool is_all() const noexcept { return all_; }
  const std::vector<std::size_t>& indices() const noexcept { return indices_; }

  std::vector<char> mask(std::size_t p) const {
    std::vector<char> m(p, all_ ? 1 : 0);
    if (!all_) {
      for (auto i : indices_) {
        if (i >= p) throw ContractViolation("PenaltySet: index " + std::to_string(i) + " out of range");
        m[i] = 1;
      }
    }
    return m;
  }

 private:
  bool all_ = true;
  std::vector<std::size_t> indices_;
};

/// Whether an objective is summed over observations or averaged.
enum class LossScale { Sum, Mean };

inline double clamp_linear_predictor(double eta) noexcept {
  return std::clamp(eta, -kLinearPredictorCap, kLinearPredictorCap);
}

/// exp(x . beta), with the dot product clamped at +-kLinearPredictorCap.
inline double link_mu(std::span<const double> x_row, std::span<const double> beta) {
  if (x_row.size() != beta.size()) {
    throw ContractViolation("link_mu: x has " + std::to_string(x_row.size()) + " entries but beta has " +
                            std::to_string(beta.size()));
  }
  double eta = 0.0;
  for (std::size_t i = 0; i < x_row.size(); ++i) {
    if (!std::isfinite(x_row[i]) || !std::isfinite(beta[i])) throw ContractViolation("link_mu: non-finite input");
    eta += x_row[i] * beta[i];
  }
  return std::exp(clamp_linear_predictor(eta));
}

namespace detail {

inline void check_params(const Dataset& data, const NBParams& params) {
  if (static_cast<std::size_t>(params.beta.size()) != data.cols()) {
    throw ContractViolation("beta has " + std::to_string(params.beta.size()) + " entries but data has " +
                            std::to_string(data.cols()) + " columns");
  }
  if (!(params.alpha > 0.0) || !std::isfinite(params.alpha)) throw ContractViolation("alpha must be positive and finite");
  if (!params.beta.allFinite()) throw ContractViolation("beta must be finite");
}

/// Per-observation log-likelihood given the (already clamped) linear predictor.
inline double nb_loglik_term(double y, double eta, double alpha) {
  const double mu = std::exp(eta);
  const double m = 1.0 / alpha;
  return log_rising_scaled(alpha, y) - log_gamma(y + 1.0) - (m + y) * std::log1p(alpha * mu) + y * eta;
}

}  // namespace detail

/// Negative log-likelihood L (summed over observations).
inline double nb_neg_loglik(const Dataset& data, const NBParams& params) {
  detail::check_params(data, params);
  const Eigen::VectorXd eta = data.X() * params.beta;
  double total = 0.0;
  for (Eigen::Index j = 0; j < eta.size(); ++j) {
    const double term = detail::nb_loglik_term(data.y()[j], clamp_linear_predictor(eta[j]), params.alpha);
    if (!std::isfinite(term)) {
      throw NumericalError("nb_neg_loglik: non-finite term at row " + std::to_string(j),
                           static_cast<std::size_t>(j));
    }
    total -= term;
  }
  return total;
}

/// dL/dbeta: component i is -sum_j x_ji (y_j - mu_j) / (1 + alpha mu_j).
inline Eigen::VectorXd grad_beta(const Dataset& data, const NBParams& params) {
  detail::check_params(data, params);
  const Eigen::VectorXd eta = data.X() * params.beta;
  Eigen::VectorXd resid(eta.size());
  for (Eigen::Index j = 0; j < eta.size(); ++j) {
    const double mu = std::exp(clamp_linear_predictor(eta[j]));
    resid[j] = (data.y()[j] - mu) / (1.0 + params.alpha * mu);
    if (!std::isfinite(resid[j])) {
      throw NumericalError("grad_beta: non-finite residual at row " + std::to_string(j), static_cast<std::size_t>(j));
    }
  }
  return -(data.X().transpose() * resid);
}

/// dL/d(ln alpha) = -sum_j { m [log1p(alpha mu_j) - (psi(m + y_j) - psi(m))] + (y_j - mu_j) / (1 + alpha mu_j) }.
inline double grad_log_alpha(const Dataset& data, const NBParams& params) {
  detail::check_params(data, params);
  const Eigen::VectorXd eta = data.X() * params.beta;
  const double a = params.alpha;
  const double m = 1.0 / a;
  double total = 0.0;
  for (Eigen::Index j = 0; j < eta.size(); ++j) {
    const double mu = std::exp(clamp_linear_predictor(eta[j]));
    const double y = data.y()[j];
    const double term = m * (std::log1p(a * mu) - digamma_increment(m, y)) + (y - mu) / (1.0 + a * mu);
    if (!std::isfinite(term)) {
      throw NumericalError("grad_log_alpha: non-finite term at row " + std::to_string(j),
                           static_cast<std::size_t>(j));
    }
    total -= term;
  }
  return total;
}

/// lambda * sum over the penalized set of |beta_i|.
inline double l1_penalty(const Eigen::VectorXd& beta, double lambda, const PenaltySet& penalized = PenaltySet::all()) {
  const auto mask = penalized.mask(static_cast<std::size_t>(beta.size()));
  double s = 0.0;
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    if (mask[static_cast<std::size_t>(i)]) s += std::abs(beta[i]);
  }
  return lambda * s;
}

/// L + lambda ||beta_S||_1. With LossScale::Mean the likelihood part is L / n,
/// which is the convention the coordinate-descent solver minimizes.
inline double penalized_objective(const Dataset& data, const NBParams& params, double lambda,
                                  const PenaltySet& penalized = PenaltySet::all(), LossScale scale = LossScale::Sum) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ContractViolation("penalized_objective: lambda must be >= 0");
  double loss = nb_neg_loglik(data, params);
  if (scale == LossScale::Mean) loss /= static_cast<double>(data.rows());
  return loss + l1_penalty(params.beta, lambda, penalized);
}

}  // namespace nbsparse
