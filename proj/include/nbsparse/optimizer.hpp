#pragma once

// Cyclic coordinate descent for the L1-penalized NB2 objective
//
//   (1/n) L(beta, alpha) + lambda * sum_{i in S} |beta_i|
//
// Each sweep visits beta_1..beta_p in order, taking one gradient step of size
// eta on the coordinate followed by soft-thresholding, then takes one plain
// gradient step on ln(alpha). The gradient is recomputed for every coordinate
// from a cached mean vector that is updated as each coefficient moves.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nbsparse/dataset.hpp"
#include "nbsparse/error.hpp"
#include "nbsparse/model.hpp"
#include "nbsparse/special.hpp"

namespace nbsparse {

inline constexpr double kAlphaFloor = 1e-10;
inline constexpr double kAlphaCeiling = 1e4;

namespace detail {
// Sweeps between full recomputations of the cached means.
inline constexpr std::size_t kRefreshPeriod = 16;
}  // namespace detail

struct SolverOptions {
  double eta = 0.002;
  std::size_t max_iters = 50000;
  double tol = 1e-8;
  PenaltySet penalized = PenaltySet::all();
  std::uint64_t seed = 0;  // unused: the coordinate order is cyclic

  void validate() const {
    if (!(eta > 0.0) || !std::isfinite(eta)) throw ContractViolation("SolverOptions: eta must be positive");
    if (max_iters < 1) throw ContractViolation("SolverOptions: max_iters must be >= 1");
    if (!(tol >= 0.0)) throw ContractViolation("SolverOptions: tol must be >= 0");
  }
};

struct FitResult {
  Eigen::VectorXd beta;
  double alpha = 1.0;
  double lambda = 0.0;
  double objective = 0.0;               // penalized mean objective at (beta, alpha)
  std::vector<double> objective_trace;  // per sweep, after the beta pass (before that sweep's alpha step)
  std::size_t iters_run = 0;
  bool converged = false;
  std::vector<ColumnScaling> scaling;
  std::vector<std::string> column_names;
  std::size_t clamp_events = 0;  // linear predictors clipped at +-kLinearPredictorCap

  NBParams params() const { return NBParams{beta, alpha}; }
};

/// One proximal coordinate step: v = beta_i - eta * grad_i, shrunk toward zero
/// by eta * lambda, landing on exactly 0.0 when |v| <= eta * lambda.
inline double soft_threshold_step(double beta_i, double grad_i, double eta, double lambda) {
  if (!std::isfinite(beta_i) || !std::isfinite(grad_i) || !std::isfinite(eta) || !std::isfinite(lambda)) {
    throw ContractViolation("soft_threshold_step: non-finite input");
  }
  const double v = beta_i - eta * grad_i;
  const double t = eta * lambda;
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

namespace detail {

/// Solver state for one dataset. Holds the running linear predictor, means,
/// and working residuals r_j = (y_j - mu_j) / (1 + alpha mu_j) so that each
/// coordinate gradient is a single dot product.
class CoordinateDescentState {
 public:
  static constexpr std::size_t kMaxDiscreteLevels = 16;
  static constexpr double kDenseCountLimit = 8192.0;
  static constexpr double kMuMin = 7.124576406741286e-218;  // exp(-500)
  static constexpr double kMuMax = 1.4035922178528375e+217;  // exp(500)

  CoordinateDescentState(const Dataset& data, const NBParams& start)
      : data_(data),
        n_(data.rows()),
        p_(data.cols()),
        inv_n_(1.0 / static_cast<double>(data.rows())),
        beta_(start.beta),
        log_alpha_(std::log(start.alpha)),
        alpha_(start.alpha),
        lin_(data.X() * start.beta),
        mu_(static_cast<Eigen::Index>(n_)),
        resid_(static_cast<Eigen::Index>(n_)),
        scratch_(static_cast<Eigen::Index>(n_)),
        log_arg_(static_cast<Eigen::Index>(n_)) {
    std::map<double, double> hist;
    all_zero_y_ = true;
    for (Eigen::Index j = 0; j < data.y().size(); ++j) {
      const double y = data.y()[j];
      hist[y] += 1.0;
      if (y != 0.0) all_zero_y_ = false;
      sum_log_factorial_ += log_gamma(y + 1.0);
    }
    for (const auto& [value, count] : hist) {
      y_values_.push_back(value);
      y_counts_.push_back(count);
    }
    // survival_[t] = #{j : y_j > t}; turns the count-dependent sums into a
    // single pass over 0..max(y)-1.
    const double max_y = y_values_.back();
    if (max_y <= kDenseCountLimit) {
      survival_.assign(static_cast<std::size_t>(max_y), 0.0);
      for (std::size_t k = 0; k < y_values_.size(); ++k) {
        for (std::size_t t = 0; t < static_cast<std::size_t>(y_values_[k]); ++t) survival_[t] += y_counts_[k];
      }
      use_survival_ = true;
    }
    if (all_zero_y_) set_log_alpha(std::log(kAlphaFloor));
    xty_ = data.X().transpose() * data.y();
    index_discrete_columns();
    refresh();
  }

  const Eigen::VectorXd& beta() const noexcept { return beta_; }
  double alpha() const noexcept { return alpha_; }
  bool all_zero_y() const noexcept { return all_zero_y_; }
  std::size_t clamp_events() const noexcept { return clamp_events_; }

  /// d(L/n)/d beta_i at the current state.
  double coordinate_gradient(std::size_t i) const {
    return -data_.X().col(static_cast<Eigen::Index>(i)).dot(resid_) * inv_n_;
  }

  /// Sets beta_i and updates the cached means and residuals. Within a sweep
  /// the means are updated multiplicatively and clamped in value space;
  /// refresh() recomputes them from the exact linear predictor.
  void set_coefficient(std::size_t i, double value) {
    const double delta = value - beta_[static_cast<Eigen::Index>(i)];
    if (delta == 0.0) return;
    beta_[static_cast<Eigen::Index>(i)] = value;
    const auto& levels = levels_[i];
    double* f = scratch_.data();
    if (levels.size() == 1) {
      scratch_.setConstant(std::exp(delta * levels[0]));
    } else if (levels.size() == 2) {
      const double f0 = std::exp(delta * levels[0]);
      const double step = std::exp(delta * levels[1]) - f0;
      const double* ind = indicator_[i].data();
      for (std::size_t j = 0; j < n_; ++j) f[j] = f0 + step * ind[j];
    } else if (!levels.empty()) {
      double factor[kMaxDiscreteLevels];
      for (std::size_t k = 0; k < levels.size(); ++k) factor[k] = std::exp(delta * levels[k]);
      const std::uint8_t* code = codes_[i].data();
      for (std::size_t j = 0; j < n_; ++j) f[j] = factor[code[j]];
    } else {
      scratch_.array() = (delta * data_.X().col(static_cast<Eigen::Index>(i)).array()).exp();
    }
    const double* y = data_.y().data();
    double* mu = mu_.data();
    double* resid = resid_.data();
    const double a = alpha_;
    int hit = 0;
    for (std::size_t j = 0; j < n_; ++j) {
      const double m = std::min(std::max(mu[j] * f[j], kMuMin), kMuMax);
      hit |= static_cast<int>(m == kMuMin) | static_cast<int>(m == kMuMax);
      mu[j] = m;
      resid[j] = (y[j] - m) / (1.0 + a * m);
    }
    if (hit) clamp_active_ = true;
  }

  struct DispersionPass {
    double mean_loss;           // L / n
    double log_alpha_gradient;  // d(L/n) / d ln(alpha)
  };

  /// Loss and ln(alpha) gradient at the current state, sharing one
  /// log(1 + alpha mu_j) evaluation per row.
  DispersionPass dispersion_pass() {
    const double a = alpha_;
    const double m = 1.0 / a;
    // sum_j [psi(m + y_j) - psi(m)] and sum_j [lnG(m + y_j) - lnG(m) + y_j ln a]
    double digamma_part = 0.0;
    double rising_part = 0.0;
    if (use_survival_) {
      for (std::size_t t = 0; t < survival_.size(); ++t) {
        const double td = static_cast<double>(t);
        digamma_part += survival_[t] / (m + td);
        rising_part += survival_[t] * log1p_nonneg(a * td);
      }
    } else {
      for (std::size_t k = 0; k < y_values_.size(); ++k) {
        digamma_part += y_counts_[k] * digamma_increment(m, y_values_[k]);
        rising_part += y_counts_[k] * log_rising_scaled(a, y_values_[k]);
      }
    }
    // sum_j y_j eta_j is beta . X'y unless some predictor sits on the clamp.
    double y_eta = 0.0;
    if (clamp_active_) {
      const Eigen::VectorXd lin = data_.X() * beta_;
      for (Eigen::Index j = 0; j < lin.size(); ++j) y_eta += data_.y()[j] * clamp_linear_predictor(lin[j]);
    } else {
      y_eta = beta_.dot(xty_);
    }
    // log1p(u) = log(w) + (u - (w - 1)) / w with w = fl(1 + u), which recovers
    // the bits lost in forming w.
    log_arg_.array() = 1.0 + alpha_ * mu_.array();
    scratch_.array() = log_arg_.array().log() + (alpha_ * mu_.array() - (log_arg_.array() - 1.0)) / log_arg_.array();
    const double weighted_log = ((m + data_.y().array()) * scratch_.array()).sum();
    const double plain_log = scratch_.sum();
    const double resid_sum = resid_.sum();
    const double loglik = rising_part - sum_log_factorial_ + y_eta - weighted_log;
    const double grad = -(m * plain_log + resid_sum - m * digamma_part);
    return {-loglik * inv_n_, grad * inv_n_};
  }

  double mean_loss() { return dispersion_pass().mean_loss; }
  double log_alpha_gradient() { return dispersion_pass().log_alpha_gradient; }

  void set_log_alpha(double log_alpha) {
    log_alpha_ = std::clamp(log_alpha, std::log(kAlphaFloor), std::log(kAlphaCeiling));
    alpha_ = std::exp(log_alpha_);
  }
  double log_alpha() const noexcept { return log_alpha_; }

  /// Recomputes the linear predictor, means and residuals from beta and
  /// alpha, dropping any drift from the in-sweep multiplicative updates.
  void refresh() {
    lin_.noalias() = data_.X() * beta_;
    const auto clipped = static_cast<std::size_t>((lin_.array().abs() > kLinearPredictorCap).count());
    clamp_events_ += clipped;
    clamp_active_ = clipped > 0;
    mu_.array() = lin_.array().max(-kLinearPredictorCap).min(kLinearPredictorCap).exp();
    update_residuals();
  }

  /// Recomputes residuals only (after an alpha step).
  void update_residuals() {
    resid_.array() = (data_.y().array() - mu_.array()) / (1.0 + alpha_ * mu_.array());
  }

 private:
  // Columns with few distinct values (binary indicators, even after
  // standardization) update mu by a per-level factor instead of one exp per row.
  void index_discrete_columns() {
    levels_.assign(p_, {});
    codes_.assign(p_, {});
    indicator_.assign(p_, {});
    for (std::size_t i = 0; i < p_; ++i) {
      const auto col = data_.X().col(static_cast<Eigen::Index>(i));
      std::vector<double> levels;
      std::vector<std::uint8_t> code(n_);
      bool discrete = true;
      for (std::size_t j = 0; j < n_ && discrete; ++j) {
        const double v = col[static_cast<Eigen::Index>(j)];
        auto it = std::find(levels.begin(), levels.end(), v);
        if (it == levels.end()) {
          if (levels.size() == kMaxDiscreteLevels) {
            discrete = false;
            break;
          }
          levels.push_back(v);
          it = levels.end() - 1;
        }
        code[j] = static_cast<std::uint8_t>(it - levels.begin());
      }
      if (discrete) {
        if (levels.size() == 2) {
          indicator_[i].resize(n_);
          for (std::size_t j = 0; j < n_; ++j) indicator_[i][j] = code[j] == 1 ? 1.0 : 0.0;
        }
        levels_[i] = std::move(levels);
        codes_[i] = std::move(code);
      }
    }
  }

  const Dataset& data_;
  std::size_t n_;
  std::size_t p_;
  double inv_n_;
  Eigen::VectorXd beta_;
  double log_alpha_;
  double alpha_;
  Eigen::VectorXd lin_;
  Eigen::VectorXd mu_;
  Eigen::VectorXd resid_;
  Eigen::VectorXd scratch_;
  Eigen::VectorXd log_arg_;
  std::vector<double> y_values_;
  std::vector<double> y_counts_;
  std::vector<double> survival_;
  bool use_survival_ = false;
  double sum_log_factorial_ = 0.0;
  bool all_zero_y_ = false;
  std::size_t clamp_events_ = 0;
  bool clamp_active_ = false;
  Eigen::VectorXd xty_;
  std::vector<std::vector<double>> levels_;
  std::vector<std::vector<std::uint8_t>> codes_;
  std::vector<std::vector<double>> indicator_;
};

}  // namespace detail

/// Minimizes the penalized mean objective at a single lambda. Without `init`
/// the solver starts from beta = 1 (every entry) and alpha = 1.
///
/// Stops after max_iters sweeps or once a sweep changes the objective by less
/// than tol relative to its previous value. When every response is zero the
/// likelihood carries no dispersion information; alpha is then held at
/// kAlphaFloor.
inline FitResult fit(const Dataset& data, double lambda, const SolverOptions& opts = {},
                     const std::optional<NBParams>& init = std::nullopt) {
  opts.validate();
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ContractViolation("fit: lambda must be finite and >= 0");
  const std::size_t p = data.cols();
  NBParams start{Eigen::VectorXd::Ones(static_cast<Eigen::Index>(p)), 1.0};
  if (init) {
    detail::check_params(data, *init);
    start = *init;
    start.alpha = std::clamp(start.alpha, kAlphaFloor, kAlphaCeiling);
  }
  const auto mask = opts.penalized.mask(p);
  detail::CoordinateDescentState state(data, start);

  FitResult out;
  out.lambda = lambda;
  out.scaling = data.scaling();
  out.column_names = data.column_names();
  out.objective_trace.reserve(std::min<std::size_t>(opts.max_iters, 4096));

  auto penalty = [&](const Eigen::VectorXd& beta) {
    double s = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      if (mask[i]) s += std::abs(beta[static_cast<Eigen::Index>(i)]);
    }
    return lambda * s;
  };

  double previous = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t iter = 1; iter <= opts.max_iters; ++iter) {
    for (std::size_t i = 0; i < p; ++i) {
      const double g = state.coordinate_gradient(i);
      if (!std::isfinite(g)) {
        throw NumericalError("fit: non-finite gradient at sweep " + std::to_string(iter) + ", coordinate " +
                                 std::to_string(i),
                             std::nullopt, iter, i);
      }
      const double current = state.beta()[static_cast<Eigen::Index>(i)];
      state.set_coefficient(i, soft_threshold_step(current, g, opts.eta, mask[i] ? lambda : 0.0));
    }
    const auto pass = state.dispersion_pass();
    const double objective = pass.mean_loss + penalty(state.beta());
    if (!std::isfinite(objective) || !std::isfinite(pass.log_alpha_gradient)) {
      throw NumericalError("fit: non-finite objective at sweep " + std::to_string(iter), std::nullopt, iter);
    }
    if (!state.all_zero_y()) state.set_log_alpha(state.log_alpha() - opts.eta * pass.log_alpha_gradient);
    if (iter % detail::kRefreshPeriod == 0) {
      state.refresh();
    } else {
      state.update_residuals();
    }

    out.objective_trace.push_back(objective);
    out.iters_run = iter;
    if (iter > 1 && std::abs(previous - objective) < opts.tol * std::abs(previous)) {
      out.converged = true;
      break;
    }
    previous = objective;
  }

  out.beta = state.beta();
  out.alpha = state.alpha();
  state.refresh();
  out.objective = state.mean_loss() + penalty(out.beta);
  out.clamp_events = state.clamp_events();
  return out;
}

/// Fits a strictly descending lambda grid, warm-starting each fit from the
/// previous solution.
inline std::vector<FitResult> fit_path(const Dataset& data, std::span<const double> lambdas,
                                       const SolverOptions& opts = {}) {
  if (lambdas.empty()) throw ContractViolation("fit_path: empty lambda grid");
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    if (!(lambdas[k] >= 0.0) || !std::isfinite(lambdas[k])) throw ContractViolation("fit_path: lambdas must be >= 0");
    if (k > 0 && !(lambdas[k] < lambdas[k - 1])) throw ContractViolation("fit_path: lambdas must be strictly descending");
  }
  std::vector<FitResult> path;
  path.reserve(lambdas.size());
  std::optional<NBParams> warm;
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    try {
      path.push_back(fit(data, lambdas[k], opts, warm));
    } catch (const NumericalError& e) {
      throw NumericalError("fit_path: lambda index " + std::to_string(k) + " (lambda=" + std::to_string(lambdas[k]) +
                               "): " + e.what(),
                           e.row(), e.iteration(), e.coordinate());
    }
    warm = path.back().params();
  }
  return path;
}

}  // namespace nbsparse
