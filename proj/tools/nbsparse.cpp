// nbsparse: featurize, fit, cv, boot, report, simulate.
//
// Every command writes its outputs into --out-dir together with a
// <command>.manifest.json recording input hashes, options and seeds.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nbsparse/nbsparse.hpp"

namespace fs = std::filesystem;
using namespace nbsparse;

namespace {

constexpr const char* kVersion = "0.1.0";

struct SolverFlags {
  double eta = 0.002;
  std::size_t max_iters = 50000;
  double tol = 1e-8;
  std::string penalty_set = "all";

  void add(CLI::App* app) {
    app->add_option("--eta", eta, "Coordinate step size")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--max-iters", max_iters, "Maximum sweeps per fit")->capture_default_str();
    app->add_option("--tol", tol, "Relative objective change that stops a fit")->capture_default_str();
    app->add_option("--penalty-set", penalty_set, "Penalized coefficients: all | slopes")
        ->capture_default_str()
        ->check(CLI::IsMember({"all", "slopes"}));
  }

  SolverOptions options(std::size_t p) const {
    SolverOptions o;
    o.eta = eta;
    o.max_iters = max_iters;
    o.tol = tol;
    o.penalized = penalty_set == "all" ? PenaltySet::all() : PenaltySet::all_but_intercept(p);
    return o;
  }

  Json json() const {
    return Json{{"eta", eta}, {"max_iters", max_iters}, {"tol", tol}, {"penalty_set", penalty_set}};
  }
};

/// Collects outputs and the manifest for one command run.
class Run {
 public:
  Run(std::string command, fs::path out_dir) : command_(std::move(command)), out_dir_(std::move(out_dir)) {
    manifest_["command"] = command_;
    manifest_["version"] = kVersion;
    manifest_["inputs"] = Json::array();
    manifest_["options"] = Json::object();
    manifest_["seeds"] = Json::object();
    manifest_["outputs"] = Json::array();
  }

  void input(const fs::path& path) {
    manifest_["inputs"].push_back({{"path", path.string()}, {"fnv1a64", fnv1a64_hex(read_file(path))}});
  }
  Json& options() { return manifest_["options"]; }
  Json& seeds() { return manifest_["seeds"]; }

  /// Writes `contents` to out_dir/name and checks it reads back intact.
  void output(const std::string& name, const std::string& contents) {
    const fs::path path = out_dir_ / name;
    write_file(path, contents);
    if (read_file(path) != contents) throw std::runtime_error("verification failed for " + path.string());
    manifest_["outputs"].push_back({{"path", name}, {"fnv1a64", fnv1a64_hex(contents)}});
  }

  void finish() {
    const std::string name = command_ + ".manifest.json";
    const std::string text = manifest_.dump(2) + "\n";
    write_file(out_dir_ / name, text);
    if (read_file(out_dir_ / name) != text) throw std::runtime_error("verification failed for manifest");
  }

  const fs::path& out_dir() const { return out_dir_; }

 private:
  std::string command_;
  fs::path out_dir_;
  Json manifest_;
};

std::string csv_of(const Dataset& d) { return dataset_csv(d); }

double lambda_from(const std::optional<double>& lambda, const std::string& cv_path, Run& run) {
  if (lambda) return *lambda;
  if (cv_path.empty()) throw ContractViolation("give --lambda or --cv");
  run.input(cv_path);
  const Json j = Json::parse(read_file(cv_path));
  return j.at("selected_lambda").get<double>();
}

Json vector_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vector_from(const Json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

std::pair<std::string, std::string> split_named(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
    throw ContractViolation("expected MODEL=PATH, got '" + spec + "'");
  }
  return {spec.substr(0, eq), spec.substr(eq + 1)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"L1-regularized negative binomial regression"};
  app.set_config("--config", "", "TOML/INI file supplying any flag; command-line flags take precedence");
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // featurize
  auto* featurize = app.add_subcommand("featurize", "Build a dataset from a tweet corpus");
  std::string corpus_path, followers_path, lexicon_path, scaling = "standardize";
  std::string f_out;
  featurize->add_option("--corpus", corpus_path, "Corpus, one JSON record per line")->required()->check(CLI::ExistingFile);
  featurize->add_option("--followers", followers_path, "Follower CSV (author,timestamp,count)")
      ->required()
      ->check(CLI::ExistingFile);
  featurize->add_option("--lexicon", lexicon_path, "Topic lexicon JSON")->required()->check(CLI::ExistingFile);
  featurize->add_option("--scaling", scaling, "standardize | followers | none")
      ->capture_default_str()
      ->check(CLI::IsMember({"standardize", "followers", "none"}));
  featurize->add_option("--out-dir", f_out, "Output directory")->required();

  // fit
  auto* fitcmd = app.add_subcommand("fit", "Fit at one penalty");
  std::string fit_data, fit_cv, fit_out;
  std::optional<double> fit_lambda;
  SolverFlags fit_solver;
  fitcmd->add_option("--data", fit_data, "Dataset CSV")->required()->check(CLI::ExistingFile);
  fitcmd->add_option("--lambda", fit_lambda, "Penalty");
  fitcmd->add_option("--cv", fit_cv, "Take the penalty from a cv.json")->check(CLI::ExistingFile);
  fitcmd->add_option("--out-dir", fit_out, "Output directory")->required();
  fit_solver.add(fitcmd);

  // cv
  auto* cvcmd = app.add_subcommand("cv", "k-fold cross-validation over a penalty grid");
  std::string cv_data, cv_out;
  std::size_t cv_k = 5, cv_points = 40, cv_threads = 1;
  double cv_ratio = 1e-4;
  std::vector<double> cv_lambdas;
  bool cv_zero = false;
  std::uint64_t cv_seed = 0;
  SolverFlags cv_solver;
  cvcmd->add_option("--data", cv_data, "Dataset CSV")->required()->check(CLI::ExistingFile);
  cvcmd->add_option("--k", cv_k, "Folds")->capture_default_str();
  cvcmd->add_option("--grid-points", cv_points, "Default grid size")->capture_default_str();
  cvcmd->add_option("--grid-ratio", cv_ratio, "Smallest/largest penalty of the default grid")->capture_default_str();
  cvcmd->add_option("--lambdas", cv_lambdas, "Explicit descending grid (overrides the default)")->delimiter(',');
  cvcmd->add_flag("--include-zero", cv_zero, "Append the unpenalized fit (lambda = 0) to the grid");
  cvcmd->add_option("--seed", cv_seed, "Fold seed")->capture_default_str();
  cvcmd->add_option("--threads", cv_threads, "Worker threads")->capture_default_str();
  cvcmd->add_option("--out-dir", cv_out, "Output directory")->required();
  cv_solver.add(cvcmd);

  // boot
  auto* bootcmd = app.add_subcommand("boot", "Bootstrap the fit at a fixed penalty");
  std::string boot_data, boot_cv, boot_out;
  std::optional<double> boot_lambda;
  std::size_t boot_B = 1000, boot_threads = 1;
  std::uint64_t boot_seed = 0;
  SolverFlags boot_solver;
  bootcmd->add_option("--data", boot_data, "Dataset CSV")->required()->check(CLI::ExistingFile);
  bootcmd->add_option("--lambda", boot_lambda, "Penalty");
  bootcmd->add_option("--cv", boot_cv, "Take the penalty from a cv.json")->check(CLI::ExistingFile);
  bootcmd->add_option("--B", boot_B, "Replicates")->capture_default_str();
  bootcmd->add_option("--seed", boot_seed, "Resampling seed")->capture_default_str();
  bootcmd->add_option("--threads", boot_threads, "Worker threads")->capture_default_str();
  bootcmd->add_option("--out-dir", boot_out, "Output directory")->required();
  boot_solver.add(bootcmd);

  // report
  auto* reportcmd = app.add_subcommand("report", "Render the coefficient table");
  std::vector<std::string> report_boots, report_data;
  std::string report_out, report_response = "Likes";
  reportcmd->add_option("--boot", report_boots, "MODEL=path/to/boot.json (repeatable)")->required();
  reportcmd->add_option("--data", report_data, "MODEL=path/to/dataset.csv, for log_likes.csv (repeatable)");
  reportcmd->add_option("--response", report_response, "Response label")->capture_default_str();
  reportcmd->add_option("--out-dir", report_out, "Output directory")->required();

  // simulate
  auto* simcmd = app.add_subcommand("simulate", "Generate a synthetic sparse dataset");
  std::size_t sim_n = 2000, sim_p = 25, sim_nonzero = 5, sim_continuous = 4;
  double sim_min_abs = 0.3, sim_alpha = 0.5, sim_intercept = 1.0;
  std::uint64_t sim_seed = 0;
  bool sim_raw = false;
  std::string sim_out;
  simcmd->add_option("--n", sim_n, "Rows")->capture_default_str();
  simcmd->add_option("--p", sim_p, "Columns including the intercept")->capture_default_str();
  simcmd->add_option("--nonzero", sim_nonzero, "Nonzero slopes")->capture_default_str();
  simcmd->add_option("--min-abs", sim_min_abs, "Smallest nonzero magnitude")->capture_default_str();
  simcmd->add_option("--alpha", sim_alpha, "Over-dispersion")->capture_default_str();
  simcmd->add_option("--intercept", sim_intercept, "Intercept")->capture_default_str();
  simcmd->add_option("--continuous", sim_continuous, "Standard normal columns")->capture_default_str();
  simcmd->add_option("--seed", sim_seed, "Seed")->capture_default_str();
  simcmd->add_flag("--raw", sim_raw, "Skip standardization");
  simcmd->add_option("--out-dir", sim_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*featurize) {
      Run run("featurize", f_out);
      run.input(corpus_path);
      run.input(followers_path);
      run.input(lexicon_path);
      run.options()["scaling"] = scaling;
      const auto records = read_corpus(corpus_path);
      if (records.empty()) throw ContractViolation("empty corpus");
      const auto policy = scaling == "standardize" ? ScalingPolicy::Standardize
                          : scaling == "followers" ? ScalingPolicy::FollowersOnly
                                                   : ScalingPolicy::None;
      const DesignResult d = build_design(records, read_followers(followers_path), read_lexicon(lexicon_path), policy);
      run.output("dataset.csv", csv_of(d.data));
      run.output("dataset.schema.json", dataset_schema(d.data, d.dropped).dump(2) + "\n");
      std::string dropped;
      for (const auto& name : d.dropped) dropped += name + "\n";
      run.output("dropped_columns.txt", dropped);
      run.finish();
    } else if (*fitcmd) {
      Run run("fit", fit_out);
      run.input(fit_data);
      const Dataset data = read_dataset(fit_data);
      const double lambda = lambda_from(fit_lambda, fit_cv, run);
      run.options()["lambda"] = lambda;
      run.options()["solver"] = fit_solver.json();
      const FitResult f = fit(data, lambda, fit_solver.options(data.cols()));
      run.output("fit.json", fit_to_json(f).dump(2) + "\n");
      run.finish();
    } else if (*cvcmd) {
      Run run("cv", cv_out);
      run.input(cv_data);
      const Dataset data = read_dataset(cv_data);
      const SolverOptions opts = cv_solver.options(data.cols());
      std::vector<double> grid =
          cv_lambdas.empty() ? default_lambda_grid(data, opts.penalized, cv_points, cv_ratio) : cv_lambdas;
      if (cv_zero && grid.back() != 0.0) grid.push_back(0.0);
      run.options()["k"] = cv_k;
      run.options()["lambdas"] = grid;
      run.options()["solver"] = cv_solver.json();
      run.seeds()["folds"] = cv_seed;
      const CVReport rep = cross_validate(data, grid, cv_k, opts, cv_seed, cv_threads);
      Json j;
      j["selected_lambda"] = rep.selected_lambda;
      j["k"] = rep.k;
      j["seed"] = rep.seed;
      j["lambdas"] = rep.lambdas;
      j["mean_mse"] = rep.mean_mse;
      j["sd_mse"] = rep.sd_mse;
      j["fold_mse"] = rep.fold_mse;
      j["fold_assignment"] = rep.fold_assignment;
      std::ostringstream curve;
      write_cv_curve(curve, rep);
      run.output("cv.json", j.dump(2) + "\n");
      run.output("cv_curve.csv", curve.str());
      run.finish();
    } else if (*bootcmd) {
      Run run("boot", boot_out);
      run.input(boot_data);
      const Dataset data = read_dataset(boot_data);
      const double lambda = lambda_from(boot_lambda, boot_cv, run);
      run.options()["lambda"] = lambda;
      run.options()["B"] = boot_B;
      run.options()["solver"] = boot_solver.json();
      run.seeds()["resampling"] = boot_seed;
      const BootstrapSummary b = bootstrap(data, lambda, boot_B, boot_solver.options(data.cols()), boot_seed, boot_threads);
      Json j;
      j["B"] = b.B;
      j["seed"] = b.seed;
      j["failures"] = b.failures;
      j["failed_replicates"] = b.failed_replicates;
      j["point"] = fit_to_json(b.point);
      j["se"] = vector_json(b.se);
      j["zero_fraction"] = vector_json(b.zero_fraction);
      j["ci_low"] = vector_json(b.ci_low);
      j["ci_high"] = vector_json(b.ci_high);
      j["draws"] = "boot_draws.csv";
      std::ostringstream draws;
      write_draws_csv(draws, b);
      run.output("boot.json", j.dump(2) + "\n");
      run.output("boot_draws.csv", draws.str());
      run.finish();
    } else if (*reportcmd) {
      Run run("report", report_out);
      std::vector<NamedTable> tables;
      for (const auto& spec : report_boots) {
        const auto [model, path] = split_named(spec);
        run.input(path);
        const Json j = Json::parse(read_file(path));
        BootstrapSummary b;
        b.point = fit_from_json(j.at("point"));
        b.B = j.at("B").get<std::size_t>();
        b.se = vector_from(j.at("se"));
        b.zero_fraction = vector_from(j.at("zero_fraction"));
        b.ci_low = vector_from(j.at("ci_low"));
        b.ci_high = vector_from(j.at("ci_high"));
        tables.push_back(NamedTable{model, summarize(b)});
        const fs::path draws = fs::path(path).parent_path() / j.at("draws").get<std::string>();
        if (!fs::exists(draws)) throw ContractViolation("missing bootstrap draws " + draws.string());
        run.input(draws);
        run.output("coef_" + model + ".csv", read_file(draws));
      }
      run.options()["response"] = report_response;
      run.output("table.txt", render_table(tables, report_response));
      std::ostringstream csv;
      write_table_csv(csv, tables);
      run.output("table.csv", csv.str());
      if (!report_data.empty()) {
        std::string likes = "candidate,log_likes\n";
        for (const auto& spec : report_data) {
          const auto [model, path] = split_named(spec);
          run.input(path);
          const Dataset d = read_dataset(path);
          for (Eigen::Index j = 0; j < d.y().size(); ++j) {
            if (d.y()[j] > 0.0) likes += model + "," + format_double(std::log(d.y()[j])) + "\n";
          }
        }
        run.output("log_likes.csv", likes);
      }
      run.finish();
    } else if (*simcmd) {
      Run run("simulate", sim_out);
      const SynthSpec spec =
          sparse_spec(sim_n, sim_p, sim_nonzero, sim_min_abs, sim_alpha, sim_seed, sim_continuous, sim_intercept);
      run.options() = Json{{"n", sim_n},         {"p", sim_p},         {"nonzero", sim_nonzero},
                           {"min_abs", sim_min_abs}, {"alpha", sim_alpha}, {"intercept", sim_intercept},
                           {"continuous", sim_continuous}, {"standardized", !sim_raw}};
      run.seeds()["generator"] = sim_seed;
      const SynthSample s = generate(spec);
      const Dataset d = sim_raw ? s.data : standardize(s.data);
      run.output("dataset.csv", csv_of(d));
      run.output("dataset.schema.json", dataset_schema(d).dump(2) + "\n");
      Json truth;
      truth["alpha"] = s.truth.alpha;
      truth["beta"] = vector_json(s.truth.beta);
      truth["columns"] = s.data.column_names();
      run.output("truth.json", truth.dump(2) + "\n");
      run.finish();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
