#include <catch2/catch_amalgamated.hpp>

#include <sstream>
#include <string>
#include <vector>

#include "nbsparse/report.hpp"
#include "test_support.hpp"

using namespace nbsparse;

namespace {

CoefficientRow row(std::string name, double est, double se, bool sig) {
  return CoefficientRow{std::move(name), est, se, sig, est == 0.0};
}

// Two hand-built models with partly overlapping covariates.
std::vector<NamedTable> two_models() {
  CoefficientTable trump;
  trump.rows = {row("Constant", 7.912, 0.021, true), row("Followers", 6.512, 0.811, true),
                row("Length", -0.041, 0.012, true),  row("Http", -0.3, 0.05, true),
                row("Obama", 0.117, 0.061, false),   row("Jeb", 0.0, 0.004, false),
                row("ISIS", 0.414, 0.09, true),      row("Drugs", 0.012, 0.033, false)};
  trump.alpha = 0.07;
  trump.lambda = 0.00055;
  trump.B = 1000;
  CoefficientTable cruz;
  cruz.rows = {row("Constant", 6.25, 0.03, true), row("Followers", 1.5, 0.4, true), row("Length", 0.0, 0.0, false),
               row("Trump", 0.215, 0.08, true),   row("Jeb", 0.0, 0.0, false),     row("ISIS", 0.306, 0.1, true)};
  cruz.alpha = 0.5134;
  cruz.lambda = 0.0214;
  cruz.B = 1000;
  return {{"Trump", trump}, {"Cruz", cruz}};
}

}  // namespace

TEST_CASE("rendered table matches the golden file", "[report]") {
  const std::string golden = support::slurp(support::source_path("tests/golden/report_two_models.txt"));
  REQUIRE(!golden.empty());
  CHECK(render_table(two_models()) == golden);
}

TEST_CASE("table conventions", "[report]") {
  const std::string t = render_table(two_models());
  CHECK(t.find("0.414**") != std::string::npos);
  CHECK(t.find("(0.090)") != std::string::npos);
  CHECK(t.find("0.117**") == std::string::npos);
  CHECK(t.find("[0.000]") != std::string::npos);
  CHECK(t.find("0.0700") != std::string::npos);
  CHECK(t.find("0.00055") != std::string::npos);
  CHECK(t.find("0.0214") != std::string::npos);
  CHECK(t.find("Standard errors in parentheses") != std::string::npos);
  CHECK(t.find("** p < 0.05") != std::string::npos);
}

TEST_CASE("penalty and number formatting", "[report]") {
  CHECK(detail::penalty_text(0.00055) == "0.00055");
  CHECK(detail::penalty_text(0.0017) == "0.0017");
  CHECK(detail::penalty_text(0.0214) == "0.0214");
  CHECK(detail::penalty_text(0.0) == "0");
  CHECK(detail::penalty_text(1.5) == "1.5");
  CHECK(detail::penalty_text(123.4) == "123");
  CHECK(detail::fixed(-0.0, 3) == "0.000");
  CHECK(detail::fixed(-0.0001, 3) == "0.000");
  CHECK(detail::fixed(-0.0006, 3) == "-0.001");
}

TEST_CASE("covariate order merges across models", "[report]") {
  const auto names = detail::merged_names(two_models());
  const std::vector<std::string> want = {"Constant", "Followers", "Length", "Trump", "Http", "Obama", "Jeb", "ISIS", "Drugs"};
  CHECK(names == want);
}

TEST_CASE("long-format CSV", "[report]") {
  std::ostringstream out;
  write_table_csv(out, two_models());
  const std::string s = out.str();
  CHECK(s.rfind("model,term,estimate,se,significant,zero\n", 0) == 0);
  CHECK(s.find("Trump,ISIS,0.41399999999999998,0.089999999999999997,1,0\n") != std::string::npos);
  CHECK(s.find("Trump,Jeb,0,0.0040000000000000001,0,1\n") != std::string::npos);
  CHECK(s.find("Trump,alpha,0.070000000000000007,,,\n") != std::string::npos);
  CHECK(s.find("Cruz,lambda,0.021399999999999999,,,\n") != std::string::npos);
  CHECK_THROWS_AS(render_table({}), ContractViolation);
}
