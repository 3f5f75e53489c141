#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <vector>

#include "nbsparse/inference.hpp"
#include "nbsparse/synth.hpp"

using namespace nbsparse;

namespace {

Dataset small_problem(std::size_t n, std::uint64_t seed) {
  SynthSpec spec;
  spec.n = n;
  spec.p = 4;
  spec.true_beta = {1.0, 0.5, 0.0, -0.4};
  spec.true_alpha = 0.5;
  spec.continuous_columns = 1;
  spec.seed = seed;
  return standardize(generate(spec).data);
}

BootstrapSummary fake_summary(double estimate, double lo, double hi) {
  BootstrapSummary s;
  s.point.beta = Eigen::VectorXd::Constant(1, estimate);
  s.point.alpha = 0.07;
  s.point.lambda = 0.00055;
  s.point.column_names = {"x"};
  s.se = Eigen::VectorXd::Constant(1, 0.1);
  s.ci_low = Eigen::VectorXd::Constant(1, lo);
  s.ci_high = Eigen::VectorXd::Constant(1, hi);
  s.B = 1000;
  return s;
}

}  // namespace

TEST_CASE("type-7 quantiles", "[inference]") {
  const std::vector<double> v{1, 2, 3, 4};
  CHECK(quantile_sorted(v, 0.0) == 1.0);
  CHECK(quantile_sorted(v, 1.0) == 4.0);
  CHECK(quantile_sorted(v, 0.5) == 2.5);
  CHECK(quantile_sorted(v, 0.025) == Catch::Approx(1.075));
  CHECK(quantile_sorted({5.0}, 0.3) == 5.0);
  CHECK_THROWS_AS(quantile_sorted({}, 0.5), ContractViolation);
}

TEST_CASE("identical rows give identical draws and zero se", "[inference]") {
  Eigen::MatrixXd X(10, 2);
  X.col(0).setOnes();
  X.col(1).setConstant(0.5);
  const Dataset d(X, Eigen::VectorXd::Constant(10, 3.0), {"Constant", "x"});
  SolverOptions opts;
  opts.max_iters = 2000;
  const BootstrapSummary s = bootstrap(d, 0.01, 2, opts, 5);
  REQUIRE(s.draws.rows() == 2);
  CHECK(s.draws.row(0) == s.draws.row(1));
  CHECK(s.se.head(2).isZero(0.0));
}

TEST_CASE("bootstrap invariants and determinism", "[inference]") {
  const Dataset d = small_problem(300, 2);
  const BootstrapSummary a = bootstrap(d, 0.01, 40, {}, 9);
  const BootstrapSummary b = bootstrap(d, 0.01, 40, {}, 9, 4);
  CHECK(a.draws == b.draws);
  CHECK(a.draws.rows() == 40);
  CHECK(a.draws.cols() == 5);
  CHECK(a.failures == 0);
  for (Eigen::Index c = 0; c < a.draws.cols(); ++c) {
    const auto col = a.draws.col(c);
    const double mean = col.mean();
    const double sd = std::sqrt((col.array() - mean).square().sum() / (col.size() - 1.0));
    CHECK(std::abs(a.se[c] - sd) <= 1e-12);
    CHECK(a.se[c] >= 0.0);
    CHECK(a.ci_low[c] <= a.ci_high[c]);
    CHECK(a.zero_fraction[c] >= 0.0);
    CHECK(a.zero_fraction[c] <= 1.0);
  }
  CHECK(bootstrap(d, 0.01, 40, {}, 10).draws != a.draws);

  const FitResult point = fit(d, 0.01);
  CHECK(bootstrap(d, 0.01, 40, {}, 9, 1, point).draws == a.draws);
  CHECK_THROWS_AS(bootstrap(d, 0.02, 40, {}, 9, 1, point), ContractViolation);
  CHECK_THROWS_AS(bootstrap(d, 0.01, 1), ContractViolation);

  std::ostringstream csv;
  write_draws_csv(csv, a);
  CHECK(csv.str().rfind("Constant,z1,t2,t3,alpha\n", 0) == 0);
}

TEST_CASE("summarize flags significance and exact zeros", "[inference]") {
  auto row = [](const BootstrapSummary& s) { return summarize(s).rows.front(); };
  CHECK(row(fake_summary(0.3, 0.1, 0.5)).significant);
  CHECK_FALSE(row(fake_summary(0.3, -0.1, 0.5)).significant);
  CHECK(row(fake_summary(-0.3, -0.5, -0.1)).significant);
  const auto z = row(fake_summary(0.0, 0.1, 0.5));
  CHECK(z.zero);
  CHECK_FALSE(z.significant);
  const auto t = summarize(fake_summary(0.3, 0.1, 0.5));
  CHECK(t.alpha == 0.07);
  CHECK(t.lambda == 0.00055);
  CHECK(t.B == 1000);
  CHECK(t.rows.front().name == "x");
}

// Reduced Monte Carlo: the percentile interval of a true-zero slope covers
// zero in most repetitions.
TEST_CASE("true-zero coefficient intervals cover zero", "[inference][montecarlo]") {
  int covered = 0;
  const int reps = 20;
  for (int rep = 0; rep < reps; ++rep) {
    const Dataset d = small_problem(300, 100 + static_cast<std::uint64_t>(rep));
    const BootstrapSummary s = bootstrap(d, 0.005, 100, {}, static_cast<std::uint64_t>(rep));
    if (s.ci_low[2] <= 0.0 && s.ci_high[2] >= 0.0) ++covered;
  }
  CHECK(covered >= 18);
}
