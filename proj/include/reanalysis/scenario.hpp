#pragma once

// Campaign configuration (schemas/scenario.schema.json) and the drivers behind
// the reanalyze command line tool.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "reanalysis/costmodel.hpp"
#include "reanalysis/model.hpp"
#include "reanalysis/nonlinear.hpp"
#include "reanalysis/solvers.hpp"

namespace reanalysis {

struct ModelSpec {
  enum class Source { Truss, Frame, File } source = Source::Truss;
  TrussParameters truss{};
  FrameParameters frame{};
  std::string path;  // Source::File
};

struct ModificationSpec {
  double e_lower = 0.0;
  double e_upper = 0.0;
  GradingTarget target = GradingTarget::Youngs;
  std::optional<double> exponent;  // FG power law of the modified structure
};

// A node picked by id or by the grid corner labels "A" / "B".
struct NodeRef {
  std::string label;
  int id = -1;
};

struct ScenarioConfig {
  std::string name;
  ModelSpec model;
  std::optional<ModificationSpec> modification;
  std::optional<PartitionSpec> partition;  // unset: default additional set
  std::vector<Method> methods{Method::Conventional, Method::Pcg, Method::Sri, Method::Fdp};
  double tol = 1e-12;
  int max_iter = 0;
  std::vector<NodeRef> report{{"A", -1}, {"B", -1}};
};

struct FlopPanel {
  SweepMode mode = SweepMode::SriVsPcg;
  double first = 0.05;
  double last = 0.90;
  int points = 86;
  std::vector<double> parameters{0.1, 0.3, 0.5, 0.7};
};

struct FlopsConfig {
  std::uint64_t n = 10000;
  std::vector<FlopPanel> panels;
  std::vector<FlopQuery> queries;
};

struct NonlinearConfig {
  std::string name = "nonlinear";
  ModelSpec model;
  double e0 = 2e5;
  double et = 3e4;
  std::vector<double> sigma_y;
  std::vector<Backend> backends{Backend::Regular, Backend::Reduction, Backend::Sri};
  std::optional<PartitionSpec> partition;
  NonlinearOptions options{};
  std::vector<NodeRef> history_nodes{{"B", -1}};
  int history_dof = 0;
};

struct CampaignConfig {
  int repeat = 5;
  std::vector<ScenarioConfig> scenarios;
  std::optional<FlopsConfig> flops;
  std::optional<NonlinearConfig> nonlinear;
};

// Throws Error(SchemaViolation) with a JSON path on malformed input.
CampaignConfig parse_campaign(const nlohmann::json& doc);
CampaignConfig read_campaign_file(const std::string& path);

struct BuiltScenario {
  StructuralModel original;
  StructuralModel modified;
  PartitionSpec partition;
};

StructuralModel build_model(const ModelSpec& spec);
BuiltScenario build_scenario(const ScenarioConfig& config);
int resolve_node(const StructuralModel& model, const NodeRef& ref);

struct MethodResult {
  Method method = Method::Conventional;
  Vector displacements;
  int iterations = 0;
  FlopCount flops = 0;
  double time = 0.0;        // median over repeats
  double preprocess = 0.0;  // original-structure setup, excluded from time
  bool converged = true;
};

struct ScenarioResult {
  std::string name;
  Eigen::Index n = 0;
  Eigen::Index q = 0;
  // Report node label and its equation numbers (kConstrained where supported).
  std::vector<std::pair<std::string, std::vector<int>>> report_dofs;
  std::vector<MethodResult> methods;
};

struct RunSettings {
  int repeat = 1;
  std::optional<double> tol;  // overrides every scenario's tolerance
};

ScenarioResult run_scenario(const ScenarioConfig& config, const RunSettings& settings);

enum class Precision { Table, Full };

std::string format_value(double value, Precision precision);

// Columns: scenario, method, node, dof, value.
void write_displacements_csv(std::ostream& out, const std::vector<ScenarioResult>& results, Precision precision);
// Columns: scenario, method, n, q, iterations, flops, time_s, preprocess_s, rct, converged.
void write_summary_csv(std::ostream& out, const std::vector<ScenarioResult>& results, Precision precision);

struct NonlinearCase {
  double sigma_y = 0.0;
  Backend backend = Backend::Regular;
  NonlinearRun run;
  std::vector<HistoryPoint> points;
};

std::vector<NonlinearCase> run_nonlinear_campaign(const NonlinearConfig& config, const StructuralModel& base);

// Columns: sigma_y, backend, steps, completed, n_nle, outer_iters, inner_iters, time_s.
void write_nonlinear_summary_csv(std::ostream& out, const std::vector<NonlinearCase>& cases, Precision precision);

// Worker count from REANALYZE_THREADS, else the hardware concurrency.
unsigned worker_count();

}  // namespace reanalysis
