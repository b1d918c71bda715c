// reanalyze: batch front end for the reanalysis library.
//
// Exit codes: 0 success (including flagged non-converged rows), 2 bad
// command line or config (nothing written), 3 model or solver error.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "reanalysis/costmodel.hpp"
#include "reanalysis/errors.hpp"
#include "reanalysis/model_io.hpp"
#include "reanalysis/scenario.hpp"

namespace fs = std::filesystem;
using namespace reanalysis;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitModel = 3;

struct Flags {
  std::string config;
  std::string out = ".";
  int repeat = 0;
  double tol = 0.0;
  std::string precision = "table";
};

// Outputs are staged in memory and written once the whole command succeeded.
using Outputs = std::map<std::string, std::string>;

void write_outputs(const fs::path& dir, const Outputs& files) {
  fs::create_directories(dir);
  for (const auto& [name, body] : files) {
    const fs::path path = dir / name;
    std::ofstream out(path, std::ios::binary);
    out << body;
    if (!out) throw Error(ErrorKind::InvalidParameter, "failed writing " + path.string());
    std::cout << path.string() << '\n';
  }
}

// Runs fn(i) for i in [0, count) on up to worker_count() threads.
template <class F>
void parallel_for(std::size_t count, F&& fn) {
  const std::size_t workers = std::min<std::size_t>(worker_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::string number_tag(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::SchemaViolation, what);
}

Outputs cmd_generate(const CampaignConfig& config) {
  require(!config.scenarios.empty(), "config has no scenarios");
  std::vector<std::pair<std::string, std::string>> original(config.scenarios.size());
  std::vector<std::pair<std::string, std::string>> modified(config.scenarios.size());
  parallel_for(config.scenarios.size(), [&](std::size_t i) {
    const auto& s = config.scenarios[i];
    const BuiltScenario built = build_scenario(s);
    original[i] = {s.name + ".model.json", model_to_json(built.original, built.partition).dump(1) + "\n"};
    if (s.modification) {
      modified[i] = {s.name + ".modified.json", model_to_json(built.modified, built.partition).dump(1) + "\n"};
    }
  });
  Outputs files;
  for (auto& f : original) files.insert(std::move(f));
  for (auto& f : modified) {
    if (!f.first.empty()) files.insert(std::move(f));
  }
  return files;
}

Outputs cmd_solve(const CampaignConfig& config, const RunSettings& settings, Precision precision) {
  require(!config.scenarios.empty(), "config has no scenarios");
  std::vector<ScenarioResult> results(config.scenarios.size());
  parallel_for(config.scenarios.size(), [&](std::size_t i) {
    ScenarioConfig s = config.scenarios[i];
    s.methods = {Method::Conventional};
    results[i] = run_scenario(s, RunSettings{1, settings.tol});
  });
  std::ostringstream out;
  write_displacements_csv(out, results, precision);
  return {{"solve_displacements.csv", out.str()}};
}

// Timed runs are serialized so they do not compete for cores.
std::vector<ScenarioResult> run_timed(const CampaignConfig& config, const RunSettings& settings) {
  require(!config.scenarios.empty(), "config has no scenarios");
  std::vector<ScenarioResult> results;
  for (const auto& s : config.scenarios) {
    std::cerr << "running " << s.name << '\n';
    results.push_back(run_scenario(s, settings));
  }
  return results;
}

Outputs cmd_reanalyze(const CampaignConfig& config, const RunSettings& settings, Precision precision) {
  const auto results = run_timed(config, settings);
  std::ostringstream disp;
  std::ostringstream summary;
  write_displacements_csv(disp, results, precision);
  write_summary_csv(summary, results, precision);
  return {{"reanalyze_displacements.csv", disp.str()}, {"reanalyze_summary.csv", summary.str()}};
}

Outputs cmd_bench(const CampaignConfig& config, const RunSettings& settings, Precision precision) {
  const auto results = run_timed(config, settings);
  std::ostringstream summary;
  write_summary_csv(summary, results, precision);
  return {{"bench_summary.csv", summary.str()}};
}

Outputs cmd_flops(const CampaignConfig& config) {
  require(config.flops.has_value(), "config has no 'flops' section");
  const FlopsConfig& f = *config.flops;
  Outputs files;
  std::map<SweepMode, int> seen;
  for (const auto& panel : f.panels) {
    const RatioSweep sweep =
        ratio_sweep(panel.mode, f.n, linear_axis(panel.first, panel.last, panel.points), panel.parameters);
    std::ostringstream out;
    write_csv(out, sweep);
    std::string name = panel.mode == SweepMode::SriVsPcg ? "flops_sri_vs_pcg" : "flops_sri_vs_fdp";
    if (const int k = seen[panel.mode]++; k > 0) name += "_" + std::to_string(k);
    files[name + ".csv"] = out.str();
  }
  if (!f.queries.empty()) {
    std::ostringstream out;
    out << "n,q,k,flops_sri,flops_pcg,flops_fdp\n";
    for (const auto& q : f.queries) {
      out << q.n << ',' << q.q << ',' << q.k << ',' << to_string(flops_sri(q.n, q.q, q.k)) << ','
          << to_string(flops_pcg(q.n, q.k)) << ',' << to_string(flops_fdp(q.n, q.q)) << '\n';
    }
    files["flops_queries.csv"] = out.str();
  }
  return files;
}

Outputs cmd_nonlinear(const CampaignConfig& config, Precision precision) {
  require(config.nonlinear.has_value(), "config has no 'nonlinear' section");
  const NonlinearConfig& c = *config.nonlinear;
  const StructuralModel base = build_model(c.model);
  const auto cases = run_nonlinear_campaign(c, base);
  Outputs files;
  for (const auto& nc : cases) {
    std::ostringstream out;
    write_history_csv(out, base, nc.run, nc.points, precision == Precision::Full);
    files[c.name + "_sy" + number_tag(nc.sigma_y) + "_" + std::string(to_string(nc.backend)) + ".csv"] = out.str();
  }
  std::ostringstream summary;
  write_nonlinear_summary_csv(summary, cases, precision);
  files[c.name + "_summary.csv"] = summary.str();
  return files;
}

bool is_config_error(ErrorKind kind) { return kind == ErrorKind::SchemaViolation; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structural reanalysis benchmarks"};
  app.require_subcommand(1);
  Flags flags;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"generate", "write model JSON for each scenario"},
      {"solve", "conventional solve of each modified structure"},
      {"reanalyze", "run the configured methods; displacements and timing summary"},
      {"bench", "timing summary only"},
      {"flops", "flop ratio sweeps and point queries"},
      {"nonlinear", "Newton-Raphson campaign over yield stresses and backends"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", flags.config, "scenario config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", flags.out, "output directory")->capture_default_str();
    sub->add_option("--repeat", flags.repeat, "timing repeats, overrides the config")->check(CLI::PositiveNumber);
    sub->add_option("--tol", flags.tol, "relative tolerance for iterative methods")->check(CLI::PositiveNumber);
    sub->add_option("--precision", flags.precision, "number format")
        ->check(CLI::IsMember({"table", "full"}))
        ->capture_default_str();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  const Precision precision = flags.precision == "full" ? Precision::Full : Precision::Table;

  CampaignConfig config;
  try {
    config = read_campaign_file(flags.config);
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  RunSettings settings;
  settings.repeat = flags.repeat > 0 ? flags.repeat : config.repeat;
  if (flags.tol > 0.0) settings.tol = flags.tol;

  try {
    Outputs files;
    if (command == "generate") files = cmd_generate(config);
    else if (command == "solve") files = cmd_solve(config, settings, precision);
    else if (command == "reanalyze") files = cmd_reanalyze(config, settings, precision);
    else if (command == "bench") files = cmd_bench(config, settings, precision);
    else if (command == "flops") files = cmd_flops(config);
    else files = cmd_nonlinear(config, precision);
    write_outputs(flags.out, files);
  } catch (const Error& e) {
    std::cerr << (is_config_error(e.kind()) ? "config error: " : "error: ") << e.what() << '\n';
    return is_config_error(e.kind()) ? kExitConfig : kExitModel;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitModel;
  }
  return 0;
}
