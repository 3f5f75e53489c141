#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <string>

#include "nbsparse/special.hpp"
#include "test_support.hpp"

using namespace nbsparse;

TEST_CASE("digamma matches the high-precision reference table", "[special]") {
  std::istringstream table(support::slurp(support::source_path("tests/golden/digamma_reference.csv")));
  std::string line;
  std::getline(table, line);
  int rows = 0;
  while (std::getline(table, line)) {
    const auto comma = line.find(',');
    const double x = std::stod(line.substr(0, comma));
    const double ref = std::stod(line.substr(comma + 1));
    INFO("x = " << x);
    CHECK(std::abs(digamma(x) - ref) < 1e-10);
    ++rows;
  }
  CHECK(rows == 20);
}

TEST_CASE("digamma hand values and recurrence", "[special]") {
  CHECK(digamma(1.0) == Catch::Approx(-0.5772156649015329).epsilon(1e-14));
  CHECK(digamma(2.0) == Catch::Approx(0.4227843350984671).epsilon(1e-14));
  CHECK(digamma(0.5) == Catch::Approx(-1.9635100260214235).epsilon(1e-14));
  for (double x : {0.1, 0.5, 1.0, 3.0, 10.0, 100.0}) {
    INFO("x = " << x);
    CHECK(std::abs(digamma(x + 1.0) - digamma(x) - 1.0 / x) < 1e-10);
  }
}

TEST_CASE("digamma and log_gamma reject non-positive arguments", "[special]") {
  CHECK_THROWS_AS(digamma(0.0), DomainError);
  CHECK_THROWS_AS(digamma(-1.5), DomainError);
  CHECK_THROWS_AS(log_gamma(0.0), DomainError);
  CHECK_THROWS_AS(log_gamma(std::nan("")), DomainError);
}

TEST_CASE("log_gamma agrees with std::lgamma", "[special]") {
  for (double x : {1e-6, 0.01, 0.3, 0.5, 1.0, 1.5, 2.0, 7.25, 30.0, 171.5, 1e4, 1e8}) {
    INFO("x = " << x);
    const double ref = std::lgamma(x);
    CHECK(std::abs(log_gamma(x) - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
  }
  CHECK(log_gamma(1.0) == Catch::Approx(0.0).margin(1e-14));
  CHECK(log_gamma(2.0) == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("count-specific sums match their closed forms", "[special]") {
  for (double alpha : {1e-3, 0.07, 0.5, 3.0}) {
    const double m = 1.0 / alpha;
    for (double y : {0.0, 1.0, 2.0, 17.0, 64.0, 65.0, 300.0}) {
      INFO("alpha = " << alpha << ", y = " << y);
      const double lg = std::lgamma(m + y) - std::lgamma(m) + y * std::log(alpha);
      CHECK(log_rising_scaled(alpha, y) == Catch::Approx(lg).epsilon(1e-10).margin(1e-10));
      CHECK(digamma_increment(m, y) == Catch::Approx(digamma(m + y) - digamma(m)).epsilon(1e-9).margin(1e-11));
    }
  }
  // Poisson limit: the rising sum vanishes as alpha -> 0
  CHECK(std::abs(log_rising_scaled(1e-12, 5.0)) < 1e-10);
}

TEST_CASE("log1p_nonneg is accurate on both branches", "[special]") {
  for (double x : {0.0, 1e-300, 1e-12, 1e-5, 0.0099, 0.01, 0.5, 3.0, 1e10}) {
    INFO("x = " << x);
    CHECK(log1p_nonneg(x) == Catch::Approx(std::log1p(x)).epsilon(5e-14).margin(1e-300));
  }
}
