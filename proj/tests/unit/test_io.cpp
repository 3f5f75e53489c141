#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <string>

#include "nbsparse/io.hpp"
#include "nbsparse/optimizer.hpp"
#include "nbsparse/synth.hpp"

using namespace nbsparse;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nbsparse_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

template <class F>
std::string parse_error_of(F&& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e.what();
  }
  return "<no error>";
}

}  // namespace

TEST_CASE("dataset round-trips through CSV and the schema sidecar", "[io]") {
  SynthSpec spec;
  spec.n = 25;
  spec.p = 4;
  spec.true_beta = {0.5, 0.2, 0.0, -0.3};
  spec.continuous_columns = 1;
  spec.seed = 3;
  const Dataset d = standardize(generate(spec).data);
  const fs::path dir = scratch_dir("roundtrip");
  write_dataset(dir / "d.csv", d, {"Gone"});
  CHECK(fs::exists(dir / "d.schema.json"));
  const Dataset back = read_dataset(dir / "d.csv");
  CHECK(back.X() == d.X());
  CHECK(back.y() == d.y());
  CHECK(back.column_names() == d.column_names());
  CHECK(back.scaling() == d.scaling());
  CHECK(dataset_csv(back) == dataset_csv(d));
  const Json schema = Json::parse(read_file(dir / "d.schema.json"));
  CHECK(schema["rows"] == 25);
  CHECK(schema["dropped"] == Json::array({"Gone"}));
  fs::remove_all(dir);
}

TEST_CASE("fit results round-trip through JSON", "[io]") {
  SynthSpec spec;
  spec.n = 200;
  spec.p = 3;
  spec.true_beta = {0.5, 0.2, -0.3};
  spec.continuous_columns = 2;
  spec.seed = 1;
  const Dataset d = standardize(generate(spec).data);
  SolverOptions opts;
  opts.max_iters = 500;
  const FitResult f = fit(d, 0.01, opts);
  const FitResult g = fit_from_json(Json::parse(fit_to_json(f).dump()));
  CHECK(g.beta == f.beta);
  CHECK(g.alpha == f.alpha);
  CHECK(g.lambda == f.lambda);
  CHECK(g.scaling == f.scaling);
  CHECK(g.column_names == f.column_names);
  CHECK(g.iters_run == f.iters_run);
}

TEST_CASE("format_double and hashing", "[io]") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(3.0) == "3");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(fnv1a64_hex("") == "cbf29ce484222325");
  CHECK(fnv1a64_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("corpus parsing reports file and line", "[io]") {
  const std::string good =
      R"({"id":"1","timestamp":"2016-02-09T12:00:00Z","text":"Hi","likes":5,"author":"a"})"
      "\n\n"
      R"({"id":2,"timestamp":"2016-02-09T13:00:00-05:00","text":"Yo","likes":0,"author":"a"})"
      "\n";
  const auto recs = parse_corpus(good, "c.jsonl");
  REQUIRE(recs.size() == 2);
  CHECK(recs[1].id == "2");
  CHECK(recs[1].timestamp - recs[0].timestamp == 6 * 3600);

  const std::string bad_likes =
      R"({"id":"1","timestamp":"2016-02-09T12:00:00Z","text":"Hi","likes":5,"author":"a"})"
      "\n"
      R"({"id":"2","timestamp":"2016-02-09T12:00:00Z","text":"Hi","likes":-1,"author":"a"})";
  CHECK(parse_error_of([&] { parse_corpus(bad_likes, "c.jsonl"); }).rfind("c.jsonl:2:", 0) == 0);
  CHECK(parse_error_of([&] { parse_corpus("{not json", "c.jsonl"); }).rfind("c.jsonl:1:", 0) == 0);
  CHECK(parse_error_of([&] {
          parse_corpus(R"({"id":"1","timestamp":"2016-02-09","text":"x","likes":1,"author":"a"})", "c.jsonl");
        }).find("timestamp") != std::string::npos);
  CHECK(parse_error_of([&] {
          parse_corpus(R"({"id":"1","timestamp":"2016-02-09T00:00:00Z","likes":1,"author":"a"})", "c.jsonl");
        }).find("missing field 'text'") != std::string::npos);
  CHECK(parse_corpus("", "c.jsonl").empty());
}

TEST_CASE("follower CSV parsing", "[io]") {
  const auto s = parse_followers("author,timestamp,count\na,2016-01-01T00:00:00Z,10\na,2016-01-02T00:00:00Z,20\n");
  CHECK(s.at("a", 1451606400 + 3600) == std::optional<double>(10.0));
  CHECK(parse_error_of([] { parse_followers("who,when,n\n", "f.csv"); }).rfind("f.csv:1:", 0) == 0);
  CHECK(parse_error_of([] {
          parse_followers("author,timestamp,count\na,2016-01-02T00:00:00Z,1\na,2016-01-01T00:00:00Z,2\n", "f.csv");
        }).rfind("f.csv:3:", 0) == 0);
  CHECK(parse_error_of([] { parse_followers("author,timestamp,count\na,2016-01-01T00:00:00Z,lots\n", "f.csv"); })
            .rfind("f.csv:2:", 0) == 0);
}

TEST_CASE("lexicon parsing lowercases issue patterns and validates", "[io]") {
  const auto lex = parse_lexicon(R"({"figures":[{"topic":"Obama","patterns":["Obama"]}],
                                     "issues":[{"topic":"Abortion","patterns":["Planned Parenthood"]}]})");
  CHECK(lex.figures[0].patterns[0] == "Obama");
  CHECK(lex.issues[0].patterns[0] == "planned parenthood");
  CHECK(lex.stopwords.size() == 127);
  CHECK_THROWS_AS(parse_lexicon(R"({"figures":[{"topic":"X","patterns":[]}]})"), ParseError);
  CHECK_THROWS_AS(parse_lexicon("[1,2"), ParseError);
}

TEST_CASE("dataset reader rejects malformed files", "[io]") {
  const fs::path dir = scratch_dir("bad");
  write_file(dir / "a.csv", "y,Constant,x\n1,1,0.5\n2,1\n");
  CHECK(parse_error_of([&] { read_dataset(dir / "a.csv"); }).find("a.csv:3:") != std::string::npos);
  write_file(dir / "b.csv", "Constant,x\n1,1\n");
  CHECK(parse_error_of([&] { read_dataset(dir / "b.csv"); }).find("b.csv:1:") != std::string::npos);
  write_file(dir / "c.csv", "y,Constant,x\n1.5,1,0\n");
  CHECK_THROWS_AS(read_dataset(dir / "c.csv"), ParseError);
  write_file(dir / "d.csv", "y,Constant,x\n1,1,0\n");
  write_file(dir / "d.schema.json", R"({"columns":[{"name":"Constant","multiplier":1,"offset":0}]})");
  CHECK_THROWS_AS(read_dataset(dir / "d.csv"), ParseError);
  fs::remove_all(dir);
}
