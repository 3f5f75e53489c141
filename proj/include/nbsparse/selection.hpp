#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "nbsparse/dataset.hpp"
#include "nbsparse/error.hpp"
#include "nbsparse/model.hpp"
#include "nbsparse/optimizer.hpp"
#include "nbsparse/random.hpp"

namespace nbsparse {

struct CVReport {
  std::vector<double> lambdas;
  std::vector<double> mean_mse;
  std::vector<double> sd_mse;  // sample sd across folds
  std::vector<std::size_t> fold_assignment;
  double selected_lambda = 0.0;
  std::size_t k = 0;
  std::uint64_t seed = 0;

  /// fold_mse[f][l]: held-out MSE of fold f at lambdas[l].
  std::vector<std::vector<double>> fold_mse;

  std::size_t selected_index() const {
    const auto it = std::find(lambdas.begin(), lambdas.end(), selected_lambda);
    return static_cast<std::size_t>(it - lambdas.begin());
  }
};

/// (1/N) sum_j (y_j - exp(x_j . beta))^2 on data carrying the fit's scaling.
inline double mse(const FitResult& fit, const Dataset& data) {
  if (static_cast<std::size_t>(fit.beta.size()) != data.cols()) {
    throw ContractViolation("mse: fit has " + std::to_string(fit.beta.size()) + " coefficients but data has " +
                            std::to_string(data.cols()) + " columns");
  }
  if (!fit.scaling.empty() && fit.scaling != data.scaling()) {
    throw ContractViolation("mse: data scaling differs from the fit's scaling record");
  }
  const Eigen::VectorXd eta = data.X() * fit.beta;
  double total = 0.0;
  for (Eigen::Index j = 0; j < eta.size(); ++j) {
    const double r = data.y()[j] - std::exp(clamp_linear_predictor(eta[j]));
    total += r * r;
  }
  return total / static_cast<double>(data.rows());
}

/// Random partition of 0..n-1 into k folds whose sizes differ by at most one.
/// Entry j is the fold of row j.
inline std::vector<std::size_t> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ContractViolation("kfold_split: k must be >= 2");
  if (n < 1) throw ContractViolation("kfold_split: n must be >= 1");
  if (k > n) throw ContractViolation("kfold_split: k=" + std::to_string(k) + " exceeds n=" + std::to_string(n));
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(perm[i], perm[static_cast<std::size_t>(rng.uniform_index(i + 1))]);
  }
  std::vector<std::size_t> fold(n);
  for (std::size_t r = 0; r < n; ++r) fold[perm[r]] = r % k;
  return fold;
}

/// `points` log-spaced values from lambda_hi down to lambda_hi * ratio, where
/// lambda_hi = max over the penalized set of |dL/dbeta_i| / n at alpha = 1
/// and beta = 0 (the smallest penalty that keeps those coefficients at zero
/// from a zero start). An unpenalized intercept sits at its null-model value
/// log(mean y) instead of 0.
inline std::vector<double> default_lambda_grid(const Dataset& data, const PenaltySet& penalized = PenaltySet::all(),
                                               std::size_t points = 40, double ratio = 1e-4) {
  if (points < 1) throw ContractViolation("default_lambda_grid: points must be >= 1");
  if (!(ratio > 0.0 && ratio < 1.0)) throw ContractViolation("default_lambda_grid: ratio must be in (0, 1)");
  const auto mask = penalized.mask(data.cols());
  Eigen::VectorXd at = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(data.cols()));
  if (!mask[0] && data.y().mean() > 0.0) at[0] = std::log(data.y().mean());
  const Eigen::VectorXd g = grad_beta(data, NBParams{at, 1.0});
  double hi = 0.0;
  for (std::size_t i = 0; i < data.cols(); ++i) {
    if (mask[i]) hi = std::max(hi, std::abs(g[static_cast<Eigen::Index>(i)]));
  }
  hi /= static_cast<double>(data.rows());
  if (!(hi > 0.0)) throw ContractViolation("default_lambda_grid: zero gradient at beta = 0; supply a grid");
  std::vector<double> grid(points);
  for (std::size_t l = 0; l < points; ++l) {
    const double t = points == 1 ? 0.0 : static_cast<double>(l) / static_cast<double>(points - 1);
    grid[l] = hi * std::pow(ratio, t);
  }
  return grid;
}

/// Argmin of mean_mse; ties go to the larger lambda.
inline double select_lambda(const CVReport& report) {
  if (report.lambdas.empty() || report.lambdas.size() != report.mean_mse.size()) {
    throw ContractViolation("select_lambda: malformed report");
  }
  std::size_t best = 0;
  for (std::size_t l = 1; l < report.lambdas.size(); ++l) {
    const double a = report.mean_mse[l];
    const double b = report.mean_mse[best];
    if (a < b || (a == b && report.lambdas[l] > report.lambdas[best])) best = l;
  }
  return report.lambdas[best];
}

/// k-fold cross-validation of the lambda path. Each fold fits the full grid
/// (warm-started, descending) on the other folds and scores held-out MSE.
/// Folds run on up to `threads` workers; results do not depend on it.
inline CVReport cross_validate(const Dataset& data, std::span<const double> lambdas, std::size_t k,
                               const SolverOptions& opts = {}, std::uint64_t seed = 0, std::size_t threads = 1) {
  if (lambdas.empty()) throw ContractViolation("cross_validate: empty lambda grid");
  for (std::size_t l = 1; l < lambdas.size(); ++l) {
    if (!(lambdas[l] < lambdas[l - 1])) throw ContractViolation("cross_validate: lambdas must be strictly descending");
  }
  CVReport report;
  report.lambdas.assign(lambdas.begin(), lambdas.end());
  report.k = k;
  report.seed = seed;
  report.fold_assignment = kfold_split(data.rows(), k, seed);
  report.fold_mse.assign(k, std::vector<double>(lambdas.size(), 0.0));

  std::vector<std::exception_ptr> errors(k);
  auto run_fold = [&](std::size_t f) {
    try {
      std::vector<std::size_t> train, held;
      for (std::size_t j = 0; j < data.rows(); ++j) {
        (report.fold_assignment[j] == f ? held : train).push_back(j);
      }
      if (train.empty()) throw ContractViolation("cross_validate: fold " + std::to_string(f) + " has no training rows");
      const Dataset train_data = data.select_rows(train);
      const Dataset held_data = data.select_rows(held);
      std::vector<FitResult> path;
      try {
        path = fit_path(train_data, lambdas, opts);
      } catch (const NumericalError& e) {
        throw NumericalError("cross_validate: fold " + std::to_string(f) + ": " + e.what(), e.row(), e.iteration(),
                             e.coordinate());
      }
      for (std::size_t l = 0; l < path.size(); ++l) report.fold_mse[f][l] = mse(path[l], held_data);
    } catch (...) {
      errors[f] = std::current_exception();
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(threads, 1, k);
  if (workers == 1) {
    for (std::size_t f = 0; f < k; ++f) run_fold(f);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t f = w; f < k; f += workers) run_fold(f);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  const std::size_t L = lambdas.size();
  report.mean_mse.assign(L, 0.0);
  report.sd_mse.assign(L, 0.0);
  for (std::size_t l = 0; l < L; ++l) {
    double sum = 0.0;
    for (std::size_t f = 0; f < k; ++f) sum += report.fold_mse[f][l];
    const double mean = sum / static_cast<double>(k);
    double ss = 0.0;
    for (std::size_t f = 0; f < k; ++f) ss += (report.fold_mse[f][l] - mean) * (report.fold_mse[f][l] - mean);
    report.mean_mse[l] = mean;
    report.sd_mse[l] = std::sqrt(ss / static_cast<double>(k - 1));
  }
  report.selected_lambda = select_lambda(report);
  return report;
}

/// CV error curve: lambda, mean_mse, sd_mse.
inline void write_cv_curve(std::ostream& out, const CVReport& report) {
  out << "lambda,mean_mse,sd_mse\n";
  char buf[128];
  for (std::size_t l = 0; l < report.lambdas.size(); ++l) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", report.lambdas[l], report.mean_mse[l], report.sd_mse[l]);
    out << buf;
  }
}

}  // namespace nbsparse
