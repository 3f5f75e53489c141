#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "nbsparse/dataset.hpp"
#include "nbsparse/error.hpp"
#include "nbsparse/model.hpp"
#include "nbsparse/random.hpp"

namespace nbsparse {

/// Draws y ~ Poisson(v mu) with v ~ Gamma(1/alpha, alpha), i.e. NB2 with
/// mean mu and variance mu + alpha mu^2.
inline std::uint64_t sample_nb(double mu, double alpha, Rng& rng) {
  if (!(mu > 0.0) || !(alpha > 0.0)) throw ContractViolation("sample_nb: mu and alpha must be positive");
  const double v = rng.gamma(1.0 / alpha, alpha);
  return rng.poisson(v * mu);
}

/// Column 0 is the intercept; the next `continuous_columns` columns are
/// standard normal controls and the rest are Bernoulli(binary_rate) topic
/// indicators.
struct SynthSpec {
  std::size_t n = 1000;
  std::size_t p = 4;
  std::vector<double> true_beta;
  double true_alpha = 0.5;
  std::size_t continuous_columns = 0;
  double binary_rate = 0.3;
  std::uint64_t seed = 0;

  void validate() const {
    if (n < 1 || p < 1) throw ContractViolation("SynthSpec: n and p must be >= 1");
    if (true_beta.size() != p) throw ContractViolation("SynthSpec: true_beta must have p entries");
    if (!(true_alpha > 0.0)) throw ContractViolation("SynthSpec: true_alpha must be positive");
    if (continuous_columns > p - 1) throw ContractViolation("SynthSpec: too many continuous columns");
    if (!(binary_rate > 0.0 && binary_rate < 1.0)) throw ContractViolation("SynthSpec: binary_rate must be in (0, 1)");
  }
};

struct SynthSample {
  Dataset data;
  NBParams truth;
};

inline std::vector<std::string> synth_column_names(std::size_t p, std::size_t continuous_columns) {
  std::vector<std::string> names{"Constant"};
  for (std::size_t c = 1; c < p; ++c) {
    names.push_back((c <= continuous_columns ? "z" : "t") + std::to_string(c));
  }
  return names;
}

inline SynthSample generate(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const auto n = static_cast<Eigen::Index>(spec.n);
  const auto p = static_cast<Eigen::Index>(spec.p);
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd y(n);
  const Eigen::Map<const Eigen::VectorXd> beta(spec.true_beta.data(), p);
  for (Eigen::Index j = 0; j < n; ++j) {
    X(j, 0) = 1.0;
    for (Eigen::Index c = 1; c < p; ++c) {
      X(j, c) = static_cast<std::size_t>(c) <= spec.continuous_columns ? rng.normal()
                                                                       : (rng.bernoulli(spec.binary_rate) ? 1.0 : 0.0);
    }
    const double mu = std::exp(clamp_linear_predictor(X.row(j).dot(beta)));
    y[j] = static_cast<double>(sample_nb(mu, spec.true_alpha, rng));
  }
  return SynthSample{Dataset(std::move(X), std::move(y), synth_column_names(spec.p, spec.continuous_columns)),
                     NBParams{beta, spec.true_alpha}};
}

/// Sparse benchmark design: intercept `intercept`, `nonzero` slopes placed at
/// random non-intercept positions with magnitudes uniform in
/// [min_abs, min_abs + 0.5] and random signs, all other slopes zero.
inline SynthSpec sparse_spec(std::size_t n, std::size_t p, std::size_t nonzero, double min_abs, double alpha,
                             std::uint64_t seed, std::size_t continuous_columns = 4, double intercept = 1.0) {
  if (nonzero > p - 1) throw ContractViolation("sparse_spec: more nonzeros than slopes");
  Rng rng(derive_seed(seed, 0x5eed));
  std::vector<std::size_t> slots;
  for (std::size_t c = 1; c < p; ++c) slots.push_back(c);
  for (std::size_t k = 0; k < nonzero; ++k) {
    const auto pick = k + static_cast<std::size_t>(rng.uniform_index(slots.size() - k));
    std::swap(slots[k], slots[pick]);
  }
  std::vector<double> beta(p, 0.0);
  beta[0] = intercept;
  for (std::size_t k = 0; k < nonzero; ++k) {
    const double mag = min_abs + 0.5 * rng.uniform();
    beta[slots[k]] = rng.bernoulli(0.5) ? mag : -mag;
  }
  return SynthSpec{n, p, std::move(beta), alpha, std::min(continuous_columns, p - 1), 0.3, seed};
}

}  // namespace nbsparse
