#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "stabilab/audit.hpp"
#include "stabilab/bounds.hpp"
#include "stabilab/convex.hpp"
#include "stabilab/harness.hpp"
#include "stabilab/io_util.hpp"
#include "stabilab/mechanism.hpp"
#include "stabilab/stats_util.hpp"

namespace {

using nlohmann::json;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

void print_config(const json& resolved) {
  std::cerr << "config: " << resolved.dump() << "\n";
}

void maybe_write(const std::optional<std::string>& out_dir,
                 const std::string& filename, const std::string& content) {
  if (!out_dir) return;
  std::filesystem::create_directories(*out_dir);
  stabilab::write_text_file(*out_dir + "/" + filename, content);
}

std::vector<double> parse_value_list(const std::string& csv) {
  std::vector<double> values;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    values.push_back(std::stod(item));
  }
  if (values.empty()) throw std::invalid_argument("empty value list");
  return values;
}

// Shared statistic/distribution flags for audit and mech demos.
struct StatisticFlags {
  std::string statistic = "const";
  std::string family = "quadratic";
  double lambda = 0.1;
  std::size_t pgd_steps = 16;
  std::string base = "one_nn";
  double rr_eps = 0.5;
  double const_value = 0.5;
  std::string dist_json;

  void attach(CLI::App* cmd) {
    cmd->add_option("--statistic", statistic,
                    "statistic kind: const|identity|mean|erm|pgd|rr")
        ->required();
    cmd->add_option("--family", family, "loss family for erm/pgd");
    cmd->add_option("--lambda", lambda, "regularization strength for erm");
    cmd->add_option("--T", pgd_steps, "pgd step count");
    cmd->add_option("--base", base, "base predictor for rr");
    cmd->add_option("--rr-eps", rr_eps, "privacy parameter for rr");
    cmd->add_option("--value", const_value, "value for the const statistic");
    cmd->add_option("--dist", dist_json, "distribution spec as inline JSON");
  }

  json statistic_spec() const {
    if (statistic == "const") return {{"kind", "const"}, {"value", const_value}};
    if (statistic == "identity") return {{"kind", "identity"}};
    if (statistic == "mean") return {{"kind", "mean"}};
    if (statistic == "erm")
      return {{"kind", "erm"}, {"family", family}, {"lambda", lambda}};
    if (statistic == "pgd")
      return {{"kind", "pgd"}, {"family", family}, {"T", pgd_steps}};
    if (statistic == "rr") return {{"kind", "rr"}, {"base", base}, {"eps", rr_eps}};
    throw std::invalid_argument("unknown statistic kind: " + statistic);
  }

  json distribution_spec() const {
    if (!dist_json.empty()) return json::parse(dist_json);
    if (statistic == "rr" || family == "logistic")
      return {{"kind", "labeled_threshold"}, {"k", 4}, {"noise", 0.1}};
    return {{"kind", "two_point"}, {"p", 0.5}, {"z0", 0.0}, {"z1", 1.0}};
  }
};

int run_audit(const StatisticFlags& flags, std::size_t n, std::size_t probes,
              bool exhaustive, std::uint64_t seed,
              const std::optional<std::string>& out_dir) {
  const auto dist_spec = stabilab::parse_distribution_spec(flags.distribution_spec());
  const auto stat_spec = stabilab::parse_statistic_spec(flags.statistic_spec());
  const auto dist = stabilab::make_distribution(dist_spec);
  const auto stat = stabilab::make_statistic(stat_spec, dist);

  stabilab::AuditOptions opts;
  opts.probes = probes;
  opts.seed = seed;
  if (exhaustive) opts.exhaustive_limit = 100000000ULL;

  json resolved = {{"command", "audit"},
                   {"statistic", flags.statistic_spec()},
                   {"distribution", flags.distribution_spec()},
                   {"n", n},
                   {"probes", probes},
                   {"exhaustive_requested", exhaustive},
                   {"seed", seed}};
  print_config(resolved);

  const auto report = stabilab::audit_stability(stat, dist, n, opts);
  if (exhaustive && !report.exhaustive) {
    std::cerr << "error: enumeration space too large for an exhaustive audit\n";
    return kExitUsage;
  }
  const json j = report;
  std::cout << j.dump(2) << "\n";
  maybe_write(out_dir, "audit.json", j.dump(2) + "\n");
  const bool ok = report.gamma_observed <= report.gamma_declared + 1e-9;
  return ok ? kExitPass : kExitFail;
}

int run_sweep_cmd(const std::string& config_path, const std::string& out_dir,
                  std::optional<std::size_t> workers) {
  json parsed;
  try {
    parsed = json::parse(stabilab::read_text_file(config_path));
  } catch (const std::exception& e) {
    throw std::invalid_argument("cannot load config " + config_path + ": " +
                                e.what());
  }
  auto config = stabilab::config_from_json(parsed);
  if (workers) config.workers = *workers;
  print_config(stabilab::config_to_json(config));

  const auto result = stabilab::run_sweep(config);
  std::filesystem::create_directories(out_dir);
  stabilab::write_text_file(out_dir + "/trials.csv",
                            stabilab::trials_csv(result.records));
  const json report = result.report;
  stabilab::write_text_file(out_dir + "/report.json", report.dump(2) + "\n");

  std::cout << "gamma=" << stabilab::format_double(result.report.gamma)
            << " mean_delta=" << stabilab::format_double(result.report.mean_delta)
            << " mean_delta_sq="
            << stabilab::format_double(result.report.mean_delta_sq) << "\n";
  for (const auto& check : result.report.checks)
    std::cout << (check.pass ? "pass " : "FAIL ") << check.name
              << (check.vacuous ? " (vacuous)" : "")
              << (check.constant_parameterized ? " (constant-parameterized)" : "")
              << "\n";
  std::cout << (result.report.all_pass ? "all checks passed" : "some checks failed")
            << "\n";
  return result.report.all_pass ? kExitPass : kExitFail;
}

int run_bounds(double gamma, std::size_t n, double delta, double eps, double c,
               double c1, double c2, const std::optional<std::string>& out_dir) {
  stabilab::BoundInputs inputs;
  inputs.gamma = gamma;
  inputs.n = n;
  inputs.delta = delta;
  inputs.eps = eps;
  inputs.c = c;
  inputs.c1 = c1;
  inputs.c2 = c2;
  print_config({{"command", "bounds"},
                {"gamma", gamma},
                {"n", n},
                {"delta", delta},
                {"eps", eps},
                {"c", c},
                {"c1", c1},
                {"c2", c2}});
  const auto csv = stabilab::catalog_csv(stabilab::evaluate_catalog(inputs));
  std::cout << csv;
  maybe_write(out_dir, "bounds.csv", csv);
  return kExitPass;
}

int run_mech(const std::string& demo, const StatisticFlags& flags,
             const std::string& values_csv, double sensitivity, double eps,
             std::size_t m, std::size_t n, std::size_t trials, std::uint64_t seed,
             bool with_seed, const std::optional<std::string>& out_dir) {
  json out;
  bool pass = true;

  if (demo == "stablemax") {
    const auto values = parse_value_list(values_csv);
    print_config({{"command", "mech"},
                  {"demo", demo},
                  {"values", values},
                  {"eps", eps}});
    const double value = stabilab::stable_max(values, eps);
    const double top = *std::max_element(values.begin(), values.end());
    const double lower =
        top - std::log(static_cast<double>(values.size())) / eps;
    pass = value >= lower - 1e-9 && value <= top + 1e-9;
    out = {{"name", "stablemax"}, {"statistic", value},     {"bound", top},
           {"ci_low", lower},     {"ci_high", top}, {"pass", pass}};
  } else if (demo == "expmech") {
    const auto values = parse_value_list(values_csv);
    print_config({{"command", "mech"},
                  {"demo", demo},
                  {"values", values},
                  {"sensitivity", sensitivity},
                  {"eps", eps},
                  {"seed", seed}});
    stabilab::ScoreVector scores{values, sensitivity};
    const auto mech = stabilab::exp_mechanism(
        scores, eps, with_seed ? std::optional<std::uint64_t>(seed) : std::nullopt);
    const double top = *std::max_element(values.begin(), values.end());
    const double guarantee =
        top - 2.0 * sensitivity / eps * std::log(static_cast<double>(values.size()));
    pass = mech.expected_score >= guarantee - 1e-9;
    out = {{"name", "expmech"},
           {"statistic", mech.expected_score},
           {"bound", guarantee},
           {"ci_low", mech.expected_score},
           {"ci_high", mech.expected_score},
           {"pass", pass},
           {"probabilities", mech.probabilities}};
    if (mech.sampled_index) out["sampled_index"] = *mech.sampled_index;
  } else if (demo == "lemma1" || demo == "lemma4") {
    const auto dist_spec =
        stabilab::parse_distribution_spec(flags.distribution_spec());
    const auto stat_spec = stabilab::parse_statistic_spec(flags.statistic_spec());
    const auto dist = stabilab::make_distribution(dist_spec);
    const auto stat = stabilab::make_statistic(stat_spec, dist);
    print_config({{"command", "mech"},
                  {"demo", demo},
                  {"statistic", flags.statistic_spec()},
                  {"distribution", flags.distribution_spec()},
                  {"m", m},
                  {"n", n},
                  {"eps", eps},
                  {"trials", trials},
                  {"seed", seed}});
    if (demo == "lemma1") {
      auto sampler = [&](stabilab::Rng& rng) {
        const auto s = dist.sample_dataset(n, rng);
        return stabilab::estimation_error(stat, s, dist);
      };
      const auto report = stabilab::max_to_tail_check(sampler, m, trials, seed);
      pass = report.pass;
      out = report;
    } else {
      const auto report =
          stabilab::selector_sandwich_check(stat, dist, m, n, eps, trials, seed);
      pass = report.pass;
      out = report;
    }
  } else {
    throw std::invalid_argument("unknown demo: " + demo);
  }

  std::cout << out.dump(2) << "\n";
  maybe_write(out_dir, demo + ".json", out.dump(2) + "\n");
  return pass ? kExitPass : kExitFail;
}

int run_report(const std::string& in_dir) {
  namespace fs = std::filesystem;
  print_config({{"command", "report"}, {"in", in_dir}});
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(in_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      paths.push_back(entry.path());
  std::sort(paths.begin(), paths.end());

  bool all_pass = true;
  std::size_t loaded = 0;
  std::cout << "| report | statistic | n | trials | gamma | mean delta | mean "
               "delta^2 | beta | checks | status |\n";
  std::cout << "|---|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& path : paths) {
    json j;
    try {
      j = json::parse(stabilab::read_text_file(path.string()));
    } catch (const std::exception&) {
      continue;
    }
    if (!j.is_object() || j.value("kind", "") != "sweep_report") continue;
    ++loaded;
    std::size_t passed = 0;
    const auto& checks = j.at("checks");
    for (const auto& check : checks)
      if (check.at("pass").get<bool>()) ++passed;
    const bool ok = j.at("all_pass").get<bool>();
    all_pass = all_pass && ok;
    std::cout << "| " << path.filename().string() << " | "
              << j.at("config").at("statistic").at("kind").get<std::string>()
              << " | " << j.at("n") << " | " << j.at("trials") << " | "
              << j.at("gamma") << " | " << j.at("mean_delta") << " | "
              << j.at("mean_delta_sq") << " | "
              << (j.at("beta").is_null() ? json("-") : j.at("beta").at("estimate"))
              << " | " << passed << "/" << checks.size() << " | "
              << (ok ? "pass" : "FAIL") << " |\n";
  }
  if (loaded == 0) {
    std::cerr << "error: no sweep reports found in " << in_dir << "\n";
    return kExitUsage;
  }
  return all_pass ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stability-certified learners, bound catalog, and Monte-Carlo "
               "estimation-error checks"};
  app.require_subcommand(1);

  // audit
  auto* audit = app.add_subcommand("audit", "brute-force stability audit");
  StatisticFlags audit_flags;
  audit_flags.attach(audit);
  std::size_t audit_n = 50, audit_probes = 1000;
  std::uint64_t audit_seed = 1;
  bool audit_exhaustive = false;
  std::string audit_out;
  audit->add_option("--n", audit_n, "dataset size")->required();
  audit->add_option("--probes", audit_probes, "randomized probe count");
  audit->add_flag("--exhaustive", audit_exhaustive, "require exhaustive enumeration");
  audit->add_option("--seed", audit_seed, "probe seed");
  audit->add_option("--out", audit_out, "output directory");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Monte-Carlo estimation-error sweep");
  std::string sweep_config, sweep_out = ".";
  std::size_t sweep_workers = 0;
  sweep->add_option("--config", sweep_config, "sweep config JSON file")->required();
  sweep->add_option("--out", sweep_out, "output directory");
  sweep->add_option("--workers", sweep_workers, "worker thread cap");

  // bounds
  auto* bounds = app.add_subcommand("bounds", "evaluate the bound catalog");
  double b_gamma = 0.0, b_delta = 0.1, b_eps = 0.0, b_c = 1.0, b_c1 = 1.0,
         b_c2 = 1.0;
  std::size_t b_n = 100;
  std::string bounds_out;
  bounds->add_option("--gamma", b_gamma, "uniform stability")->required();
  bounds->add_option("--n", b_n, "dataset size")->required();
  bounds->add_option("--delta", b_delta, "tail level")->required();
  bounds->add_option("--eps", b_eps, "privacy parameter for thm5 entries");
  bounds->add_option("--c", b_c, "free constant");
  bounds->add_option("--c1", b_c1, "free constant c1");
  bounds->add_option("--c2", b_c2, "free constant c2");
  bounds->add_option("--out", bounds_out, "output directory");

  // mech
  auto* mech = app.add_subcommand("mech", "mechanism demos and checks");
  std::string mech_demo, mech_values = "0,1", mech_out;
  double mech_sensitivity = 1.0, mech_eps = 1.0;
  std::size_t mech_m = 5, mech_n = 50, mech_trials = 2000;
  std::uint64_t mech_seed = 1;
  StatisticFlags mech_flags;
  mech->add_option("--demo", mech_demo, "stablemax|expmech|lemma1|lemma4")
      ->required();
  mech->add_option("--values", mech_values, "comma-separated score values");
  mech->add_option("--sensitivity", mech_sensitivity, "score sensitivity");
  mech->add_option("--eps", mech_eps, "mechanism privacy parameter");
  mech->add_option("--m", mech_m, "number of scores / sub-datasets");
  mech->add_option("--n", mech_n, "sub-dataset size");
  mech->add_option("--trials", mech_trials, "Monte-Carlo trials");
  bool mech_with_seed = false;
  mech->add_flag("--sample", mech_with_seed, "sample an index (expmech)");
  mech->add_option("--seed", mech_seed, "seed");
  mech->add_option("--out", mech_out, "output directory");
  mech_flags.statistic = "erm";
  mech_flags.lambda = 0.4;
  mech->add_option("--statistic", mech_flags.statistic,
                   "statistic kind for lemma demos");
  mech->add_option("--family", mech_flags.family, "loss family");
  mech->add_option("--lambda", mech_flags.lambda, "erm regularization");
  mech->add_option("--T", mech_flags.pgd_steps, "pgd steps");
  mech->add_option("--base", mech_flags.base, "rr base predictor");
  mech->add_option("--rr-eps", mech_flags.rr_eps, "rr privacy parameter");
  mech->add_option("--value", mech_flags.const_value, "const statistic value");
  mech->add_option("--dist", mech_flags.dist_json, "distribution JSON");

  // report
  auto* report = app.add_subcommand("report", "summarize sweep reports");
  std::string report_in;
  report->add_option("--in", report_in, "directory of report JSON files")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*audit)
      return run_audit(audit_flags, audit_n, audit_probes, audit_exhaustive,
                       audit_seed,
                       audit_out.empty() ? std::nullopt
                                         : std::optional<std::string>(audit_out));
    if (*sweep)
      return run_sweep_cmd(sweep_config, sweep_out,
                           sweep->count("--workers")
                               ? std::optional<std::size_t>(sweep_workers)
                               : std::nullopt);
    if (*bounds)
      return run_bounds(b_gamma, b_n, b_delta, b_eps, b_c, b_c1, b_c2,
                        bounds_out.empty()
                            ? std::nullopt
                            : std::optional<std::string>(bounds_out));
    if (*mech)
      return run_mech(mech_demo, mech_flags, mech_values, mech_sensitivity,
                      mech_eps, mech_m, mech_n, mech_trials, mech_seed,
                      mech_with_seed,
                      mech_out.empty() ? std::nullopt
                                       : std::optional<std::string>(mech_out));
    if (*report) return run_report(report_in);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  }
  return kExitUsage;
}
