#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "nbsparse/dataset.hpp"
#include "nbsparse/error.hpp"
#include "nbsparse/optimizer.hpp"
#include "nbsparse/random.hpp"

namespace nbsparse {

struct BootstrapSummary {
  Eigen::MatrixXd draws;  // one row per successful replicate: beta_0..beta_{p-1}, alpha
  FitResult point;
  Eigen::VectorXd se;             // sample sd of each draws column
  Eigen::VectorXd zero_fraction;  // share of exact zeros per column
  Eigen::VectorXd ci_low;         // 2.5% percentile
  Eigen::VectorXd ci_high;        // 97.5% percentile
  std::size_t B = 0;              // replicates requested
  std::size_t failures = 0;       // replicates whose refit threw NumericalError
  std::vector<std::size_t> failed_replicates;
  std::uint64_t seed = 0;
};

struct CoefficientRow {
  std::string name;
  double estimate = 0.0;
  double se = 0.0;
  bool significant = false;  // percentile 95% CI excludes 0
  bool zero = false;         // estimate is exactly 0.0
};

struct CoefficientTable {
  std::vector<CoefficientRow> rows;
  double alpha = 0.0;
  double lambda = 0.0;
  std::size_t B = 0;
};

/// Sample quantile with linear interpolation between order statistics
/// (Hyndman-Fan type 7). `sorted` must be ascending.
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw ContractViolation("quantile_sorted: empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

namespace detail {

inline void summarize_draws(BootstrapSummary& s) {
  const auto rows = s.draws.rows();
  const auto cols = s.draws.cols();
  s.se.setZero(cols);
  s.zero_fraction.setZero(cols);
  s.ci_low.setZero(cols);
  s.ci_high.setZero(cols);
  std::vector<double> col(static_cast<std::size_t>(rows));
  for (Eigen::Index c = 0; c < cols; ++c) {
    double mean = 0.0;
    std::size_t zeros = 0;
    for (Eigen::Index r = 0; r < rows; ++r) {
      col[static_cast<std::size_t>(r)] = s.draws(r, c);
      mean += s.draws(r, c);
      if (s.draws(r, c) == 0.0) ++zeros;
    }
    mean /= static_cast<double>(rows);
    double ss = 0.0;
    for (Eigen::Index r = 0; r < rows; ++r) ss += (s.draws(r, c) - mean) * (s.draws(r, c) - mean);
    s.se[c] = rows > 1 ? std::sqrt(ss / static_cast<double>(rows - 1)) : 0.0;
    s.zero_fraction[c] = static_cast<double>(zeros) / static_cast<double>(rows);
    std::sort(col.begin(), col.end());
    s.ci_low[c] = quantile_sorted(col, 0.025);
    s.ci_high[c] = quantile_sorted(col, 0.975);
  }
}

}  // namespace detail

/// Nonparametric bootstrap of the penalized fit at a fixed lambda. Replicate
/// r resamples n rows with replacement from stream derive_seed(seed, r) and
/// refits warm-started from the full-data estimate. Replicates whose fit
/// fails numerically are skipped and counted; more than 5% failures abort.
inline BootstrapSummary bootstrap(const Dataset& data, double lambda, std::size_t B, const SolverOptions& opts = {},
                                  std::uint64_t seed = 0, std::size_t threads = 1,
                                  const std::optional<FitResult>& point = std::nullopt) {
  if (B < 2) throw ContractViolation("bootstrap: B must be >= 2");
  BootstrapSummary s;
  s.B = B;
  s.seed = seed;
  s.point = point ? *point : fit(data, lambda, opts);
  if (s.point.lambda != lambda) throw ContractViolation("bootstrap: point estimate was fitted at a different lambda");
  const NBParams start = s.point.params();
  const std::size_t n = data.rows();
  const auto p = static_cast<Eigen::Index>(data.cols());

  Eigen::MatrixXd all(static_cast<Eigen::Index>(B), p + 1);
  std::vector<char> ok(B, 0);
  std::vector<std::exception_ptr> errors(B);
  auto run = [&](std::size_t r) {
    try {
      Rng rng(derive_seed(seed, r));
      std::vector<std::size_t> idx(n);
      for (auto& i : idx) i = static_cast<std::size_t>(rng.uniform_index(n));
      const FitResult f = fit(data.select_rows(idx), lambda, opts, start);
      all.row(static_cast<Eigen::Index>(r)).head(p) = f.beta.transpose();
      all(static_cast<Eigen::Index>(r), p) = f.alpha;
      ok[r] = 1;
    } catch (const NumericalError&) {
      ok[r] = 0;
    } catch (...) {
      errors[r] = std::current_exception();
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, B);
  if (workers == 1) {
    for (std::size_t r = 0; r < B; ++r) run(r);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t r = w; r < B; r += workers) run(r);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  for (std::size_t r = 0; r < B; ++r) {
    if (!ok[r]) s.failed_replicates.push_back(r);
  }
  s.failures = s.failed_replicates.size();
  if (20 * s.failures > B) {
    throw NumericalError("bootstrap: " + std::to_string(s.failures) + " of " + std::to_string(B) +
                         " replicate fits failed (limit 5%)");
  }
  s.draws.resize(static_cast<Eigen::Index>(B - s.failures), p + 1);
  Eigen::Index row = 0;
  for (std::size_t r = 0; r < B; ++r) {
    if (ok[r]) s.draws.row(row++) = all.row(static_cast<Eigen::Index>(r));
  }
  detail::summarize_draws(s);
  return s;
}

inline CoefficientTable summarize(const BootstrapSummary& boot) {
  CoefficientTable t;
  const auto p = boot.point.beta.size();
  for (Eigen::Index i = 0; i < p; ++i) {
    CoefficientRow row;
    row.name = static_cast<std::size_t>(i) < boot.point.column_names.size()
                   ? boot.point.column_names[static_cast<std::size_t>(i)]
                   : "x" + std::to_string(i);
    row.estimate = boot.point.beta[i];
    row.se = boot.se[i];
    row.zero = row.estimate == 0.0;
    row.significant = !row.zero && (boot.ci_low[i] > 0.0 || boot.ci_high[i] < 0.0);
    t.rows.push_back(std::move(row));
  }
  t.alpha = boot.point.alpha;
  t.lambda = boot.point.lambda;
  t.B = boot.B;
  return t;
}

/// Bootstrap draws, one column per coefficient plus alpha.
inline void write_draws_csv(std::ostream& out, const BootstrapSummary& boot) {
  const auto& names = boot.point.column_names;
  for (std::size_t i = 0; i < names.size(); ++i) out << names[i] << ',';
  out << "alpha\n";
  char buf[32];
  for (Eigen::Index r = 0; r < boot.draws.rows(); ++r) {
    for (Eigen::Index c = 0; c < boot.draws.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", boot.draws(r, c));
      out << buf << (c + 1 < boot.draws.cols() ? ',' : '\n');
    }
  }
}

}  // namespace nbsparse
