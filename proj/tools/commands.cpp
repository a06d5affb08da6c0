#include "commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "config.hpp"
#include "dmlspss/energy.hpp"
#include "dmlspss/error.hpp"

namespace dmlspss::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct Options {
  std::string config;
  std::string out;
  std::string format = "csv";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string input;
  std::string energy_a;
  std::string energy_b;
};

int exit_code_for(const Error& e) {
  switch (category_of(e.code())) {
    case ErrorCategory::Config: return kExitConfig;
    case ErrorCategory::Data: return kExitData;
    case ErrorCategory::Numeric: return kExitNumeric;
  }
  return kExitNumeric;
}

RunConfig load(const Options& opt) {
  RunConfig cfg = opt.config.empty() ? parse_run_config({}) : load_run_config(opt.config);
  if (opt.threads) {
    cfg.threads = *opt.threads;
  } else if (const char* env = std::getenv("DMLSPSS_THREADS"); env != nullptr && *env != '\0') {
    cfg.threads = std::atoi(env);
  }
  if (cfg.threads < 1) throw Error(Errc::InvalidConfig, "thread count must be >= 1");
  if (opt.seed) {
    cfg.split.seed = *opt.seed;
    cfg.simulate.master_seed = *opt.seed;
  }
  return cfg;
}

fs::path input_path(const Options& opt, const RunConfig& cfg) {
  if (!opt.input.empty()) return opt.input;
  if (cfg.data_path) return *cfg.data_path;
  throw Error(Errc::InvalidConfig, "no input CSV given (positional argument or data.path)");
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(Errc::IoError, "cannot write " + path);
  file << text;
}

FoldPlan make_folds(const Dataset& d, const RunConfig& cfg) {
  const auto k = static_cast<std::size_t>(cfg.split.k);
  if (cfg.split.method == "random") return random_kfold(d.n(), k, cfg.split.seed);
  return spss_kfold(d, k, sp_config(cfg.split, cfg.split.seed));
}

int cmd_split(const Options& opt, std::ostream& out) {
  const RunConfig cfg = load(opt);
  const CsvTable table = read_csv_table(input_path(opt, cfg));
  const Dataset d = dataset_from_table(table, cfg.schema);
  const double fraction = cfg.split.test_fraction;
  const std::uint64_t seed = cfg.split.seed;

  const Matrix cloud = standardize(joint_cloud(d, cfg.split.include_outcome)).values;
  SplitResult split;
  if (cfg.split.method == "random") {
    if (!(fraction > 0.0 && fraction < 1.0)) {
      throw Error(Errc::InvalidFraction, "test fraction must lie in (0, 1)");
    }
    const auto n_test = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(d.n())));
    if (n_test < 1 || n_test >= d.n()) throw Error(Errc::InvalidFraction, "split leaves an empty side");
    split.test_idx = random_subset(d.n(), n_test, seed);
    std::vector<bool> in(d.n(), false);
    for (auto i : split.test_idx) in[i] = true;
    for (std::size_t i = 0; i < d.n(); ++i) {
      if (!in[i]) split.train_idx.push_back(i);
    }
  } else {
    split = spss_split(d, fraction, sp_config(cfg.split, seed));
  }

  const IndexList baseline = random_subset(d.n(), split.test_idx.size(), mix_seed(seed, 2));
  const double e_test = energy_two_sample(take_rows(cloud, split.test_idx), cloud);
  const double e_random = energy_two_sample(take_rows(cloud, baseline), cloud);

  const fs::path dir = opt.out.empty() ? fs::path(".") : fs::path(opt.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::IoError, "cannot create output directory " + dir.string());

  auto rows_of = [&](const IndexList& idx) {
    CsvTable part{table.header, {}};
    for (auto i : idx) part.rows.push_back(table.rows[i]);
    return part;
  };
  write_csv_table(dir / "train.csv", rows_of(split.train_idx));
  write_csv_table(dir / "test.csv", rows_of(split.test_idx));

  json j;
  j["method"] = cfg.split.method;
  j["seed"] = seed;
  j["test_fraction"] = fraction;
  j["n_train"] = split.train_idx.size();
  j["n_test"] = split.test_idx.size();
  j["test_idx"] = split.test_idx;
  j["objective_trace"] = split.sp.objective_trace;
  j["iterations"] = split.sp.iterations;
  j["converged"] = split.sp.converged;
  j["energy_test_full"] = e_test;
  j["energy_random_full"] = e_random;
  std::ofstream sidecar(dir / "split.json");
  if (!sidecar) throw Error(Errc::IoError, "cannot write split.json");
  sidecar << j.dump(2) << "\n";

  out << "test " << split.test_idx.size() << " rows, train " << split.train_idx.size()
      << " rows, energy " << e_test << " (random " << e_random << ")\n";
  return kExitOk;
}

int cmd_estimate(const Options& opt, std::ostream& out) {
  const RunConfig cfg = load(opt);
  if (cfg.learner_m.oracle || cfg.learner_ell.oracle) {
    throw Error(Errc::InvalidSpec, "oracle learners are only available to simulate");
  }
  const Dataset d = load_csv(input_path(opt, cfg), cfg.schema);
  const auto start = std::chrono::steady_clock::now();
  const FoldPlan plan = make_folds(d, cfg);
  const DmlEstimate est = estimate_ate(d, plan, cfg.learner_m.spec, cfg.learner_ell.spec,
                                       cfg.dml.score, cfg.dml.algorithm, cfg.dml.alpha);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json j;
  j["beta"] = est.beta;
  j["se"] = est.se();
  j["ci"] = {est.ci.lo, est.ci.hi};
  j["alpha"] = est.ci.alpha;
  j["K"] = est.k;
  j["n"] = est.n_total;
  j["algorithm"] = to_string(est.algorithm);
  j["score"] = to_string(est.score);
  j["splitter"] = cfg.split.method;
  j["seed"] = cfg.split.seed;
  j["learner_m"] = learner_label(cfg.learner_m.spec);
  j["learner_ell"] = learner_label(cfg.learner_ell.spec);
  j["wall_time_s"] = wall;
  write_text(opt.out, j.dump(2) + "\n", out);
  return kExitOk;
}

int cmd_simulate(const Options& opt, std::ostream& out) {
  const RunConfig cfg = load(opt);
  ReportFormat format = ReportFormat::Csv;
  if (opt.format == "json") format = ReportFormat::Json;

  std::vector<SimulationRow> rows;
  for (Scenario scenario : cfg.simulate.scenarios) {
    for (int p : cfg.simulate.p_list) {
      for (int n : cfg.simulate.n_list) {
        for (Splitter splitter : cfg.simulate.splitters) {
          McConfig mc;
          mc.scenario.scenario = scenario;
          mc.scenario.p = p;
          mc.scenario.n = n;
          mc.reps = cfg.simulate.reps;
          mc.k = cfg.split.k;
          mc.splitter = splitter;
          mc.score = cfg.dml.score;
          mc.algorithm = cfg.dml.algorithm;
          mc.alpha = cfg.dml.alpha;
          mc.master_seed = cfg.simulate.master_seed;
          mc.sp = sp_config(cfg.split, 0);
          mc.threads = cfg.threads;
          const std::string cell = std::string(to_string(scenario)) + " p=" + std::to_string(p) +
                                   " n=" + std::to_string(n) + " splitter=" + to_string(splitter);
          try {
            validate(mc.scenario);
            const OracleLearners oracle = oracle_learners(mc.scenario);
            mc.learner_m = cfg.learner_m.oracle ? oracle.m : cfg.learner_m.spec;
            mc.learner_ell = cfg.learner_ell.oracle ? oracle.ell : cfg.learner_ell.spec;
            if (cfg.learner_m.oracle && cfg.learner_ell.oracle) mc.method_label = "oracle";
            rows.push_back(run_monte_carlo(mc));
          } catch (const Error& e) {
            throw Error(e.code(), "cell " + cell + ": " + e.detail());
          }
        }
      }
    }
  }
  write_text(opt.out, emit_report(rows, format), out);
  return kExitOk;
}

int cmd_energy(const Options& opt, std::ostream& out) {
  const Matrix a = table_to_matrix(read_csv_table(opt.energy_a));
  const Matrix b = table_to_matrix(read_csv_table(opt.energy_b));
  std::ostringstream text;
  text << std::setprecision(12) << energy_two_sample(a, b) << "\n";
  write_text(opt.out, text.str(), out);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app{"Double machine learning with support-points sample splitting", "dmlspss"};
  app.require_subcommand(1);

  auto add_common = [&opt](CLI::App* sub) {
    sub->add_option("--config", opt.config, "Config file (sectioned key = value)");
    sub->add_option("--out", opt.out, "Output path");
    sub->add_option("--seed", opt.seed, "Seed overriding the config");
    sub->add_option("--threads", opt.threads, "Worker threads (default: DMLSPSS_THREADS or config)");
    sub->add_option("--format", opt.format, "Report format")->check(CLI::IsMember({"csv", "json"}));
  };

  CLI::App* split = app.add_subcommand("split", "Support-points train/test split of a CSV");
  add_common(split);
  split->add_option("input", opt.input, "Input CSV");
  CLI::App* estimate = app.add_subcommand("estimate", "Cross-fitted DML estimate from a CSV");
  add_common(estimate);
  estimate->add_option("input", opt.input, "Input CSV");
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo study over the config grid");
  add_common(simulate);
  CLI::App* energy = app.add_subcommand("energy", "Two-sample energy distance between two CSVs");
  add_common(energy);
  energy->add_option("a", opt.energy_a, "First CSV")->required();
  energy->add_option("b", opt.energy_b, "Second CSV")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (split->parsed()) return cmd_split(opt, out);
    if (estimate->parsed()) return cmd_estimate(opt, out);
    if (simulate->parsed()) return cmd_simulate(opt, out);
    if (energy->parsed()) return cmd_energy(opt, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitConfig;
}

}  // namespace dmlspss::cli
