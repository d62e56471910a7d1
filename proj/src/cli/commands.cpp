#include "rcreg/cli/commands.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>

#include "rcreg/cli/io.hpp"

namespace rcreg::cli {

namespace {

namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path.string());
  f << text;
  if (!f) throw InputError("failed writing " + path.string());
}

int cmd_identify(const std::string& spec_path, double tol, std::ostream& out) {
  const SupportSpec spec = support_spec_from_json(read_json_file(spec_path));
  IdentOptions opts;
  opts.rank_tol = tol;
  const IdentReport r = check_identified(spec, opts);
  out << emit_json(to_json(r));
  return r.identified ? 0 : 2;
}

int cmd_bounds(const std::string& blocks_path, double tol, std::ostream& out) {
  const PartialIdBlocks blocks = blocks_from_json(read_json_file(blocks_path));
  out << emit_json(to_json(classify_randomness(blocks, tol)));
  return 0;
}

int cmd_fit(const std::string& data_path, std::optional<double> lambda, bool penalize_b0, const std::string& path_csv,
            std::ostream& out) {
  const Dataset data = read_dataset_csv(data_path);
  json j;
  if (lambda) {
    j = to_json(fit_record(fit_moments(data, *lambda, penalize_b0)));
    j["lambda_selection"] = "FIXED";
    if (!path_csv.empty()) throw InputError("--path needs automatic lambda selection");
  } else {
    const AutoFit a = fit_moments_auto(data, penalize_b0);
    j = to_json(fit_record(a.fit));
    j["lambda_selection"] = "BIC";
    if (!path_csv.empty()) {
      std::ostringstream ss;
      write_path_csv(ss, a.path);
      write_file(path_csv, ss.str());
    }
  }
  out << emit_json(j);
  return 0;
}

json run_one(const SimConfig& cfg, const fs::path& csv_path) {
  const SimReport rep = monte_carlo(cfg);
  std::ostringstream ss;
  write_replications_csv(ss, rep);
  write_file(csv_path, ss.str());
  json row = summary_to_json(rep);
  row["n"] = cfg.n;
  row["p"] = cfg.p;
  row["replications_csv"] = csv_path.filename().string();
  return row;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir, std::optional<std::uint64_t> seed,
                 std::optional<int> replications, std::ostream& out) {
  SimPlan plan = sim_plan_from_json(read_json_file(config_path));
  if (seed) plan.config.seed = *seed;
  if (replications) plan.config.replications = *replications;
  plan.config.validate();

  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create " + out_dir + ": " + ec.message());

  json summary;
  summary["config"] = to_json(plan.config);
  if (plan.sweep_n.empty()) {
    summary["runs"] = json::array({run_one(plan.config, dir / "replications.csv")});
  } else {
    summary["config"]["sweep_n"] = plan.sweep_n;
    json runs = json::array();
    for (int n : plan.sweep_n) {
      SimConfig c = plan.config;
      c.n = n;
      runs.push_back(run_one(c, dir / ("replications_n" + std::to_string(n) + ".csv")));
    }
    summary["runs"] = runs;
  }

  std::ostringstream rows;
  rows << "n,p,lambda_used,replications,failures,successes,sign_recovery_rate,psd_among_success\n";
  for (const auto& r : summary["runs"]) {
    rows << r["n"].get<int>() << "," << r["p"].get<int>() << "," << format_double(r["lambda_used"].get<double>())
         << "," << r["replications"].get<int>() << "," << r["failures"].get<int>() << ","
         << r["successes"].get<int>() << "," << format_double(r["sign_recovery_rate"].get<double>()) << ","
         << r["psd_among_success"].get<int>() << "\n";
  }
  write_file(dir / "summary.csv", rows.str());
  const std::string text = emit_json(summary);
  write_file(dir / "summary.json", text);
  out << text;
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random coefficient regression: identification, estimation and simulation"};
  app.require_subcommand(1);

  std::string spec_path;
  double ident_tol = 1e-10;
  auto* identify = app.add_subcommand("identify", "Check identification of the covariance from covariate supports");
  identify->add_option("--spec", spec_path, "Support spec JSON")->required();
  identify->add_option("--tol", ident_tol, "Relative rank tolerance");

  std::string blocks_path;
  double bounds_tol = 1e-9;
  auto* bounds = app.add_subcommand("bounds", "Sharp bounds for Var(B1) under a binary regressor");
  bounds->add_option("--blocks", blocks_path, "Identified blocks JSON")->required();
  bounds->add_option("--tol", bounds_tol, "Feasibility tolerance");

  std::string data_path;
  std::string path_csv;
  double lambda = 0.0;
  bool automatic = false;
  bool penalize_b0 = false;
  auto* fit = app.add_subcommand("fit", "Estimate coefficient means and covariance");
  fit->add_option("--data", data_path, "Dataset CSV with header y,w1,...")->required();
  auto* lambda_opt = fit->add_option("--lambda", lambda, "Penalty level for the covariance");
  auto* auto_flag = fit->add_flag("--auto", automatic, "Select lambda by BIC (default without --lambda)");
  lambda_opt->excludes(auto_flag);
  fit->add_flag("--penalize-intercept-variance", penalize_b0, "Also penalize Var(B0)");
  fit->add_option("--path", path_csv, "Write the BIC path to this CSV (automatic selection only)");

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int replications = 0;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo sign-recovery study");
  simulate->add_option("--config", config_path, "Simulation config JSON")->required();
  simulate->add_option("--out", out_dir, "Output directory")->required();
  auto* seed_opt = simulate->add_option("--seed", seed, "Override the seed");
  auto* reps_opt = simulate->add_option("--replications", replications, "Override the number of replications");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (identify->parsed()) return cmd_identify(spec_path, ident_tol, out);
    if (bounds->parsed()) return cmd_bounds(blocks_path, bounds_tol, out);
    if (fit->parsed()) {
      return cmd_fit(data_path, lambda_opt->count() ? std::optional<double>(lambda) : std::nullopt, penalize_b0,
                     path_csv, out);
    }
    if (simulate->parsed()) {
      return cmd_simulate(config_path, out_dir, seed_opt->count() ? std::optional<std::uint64_t>(seed) : std::nullopt,
                          reps_opt->count() ? std::optional<int>(replications) : std::nullopt, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace rcreg::cli
