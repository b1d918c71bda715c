#include "reanalysis/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <thread>

#include "reanalysis/errors.hpp"
#include "reanalysis/model_io.hpp"

namespace reanalysis {

using nlohmann::json;

namespace {

// Walks a JSON object, tracking the path for error messages and rejecting
// keys nobody asked for.
class Reader {
public:
  Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) fail(path_, "expected an object");
  }

  ~Reader() = default;
  Reader(const Reader&) = delete;
  Reader& operator=(const Reader&) = delete;

  [[noreturn]] static void fail(const std::string& where, const std::string& what) {
    throw Error(ErrorKind::SchemaViolation, where + ": " + what);
  }

  const std::string& path() const { return path_; }
  std::string at(const std::string& key) const { return path_ + "." + key; }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key);
  }

  const json& get(const std::string& key) {
    if (!has(key)) fail(path_, "missing '" + key + "'");
    return obj_.at(key);
  }

  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }
  double number(const std::string& key) {
    const json& v = get(key);
    if (!v.is_number()) fail(at(key), "expected a number");
    return v.get<double>();
  }

  int integer(const std::string& key, int fallback) { return has(key) ? integer(key) : fallback; }
  int integer(const std::string& key) {
    const json& v = get(key);
    if (!v.is_number_integer()) fail(at(key), "expected an integer");
    return v.get<int>();
  }

  std::string text(const std::string& key, const std::string& fallback) { return has(key) ? text(key) : fallback; }
  std::string text(const std::string& key) {
    const json& v = get(key);
    if (!v.is_string()) fail(at(key), "expected a string");
    return v.get<std::string>();
  }

  const json& array(const std::string& key) {
    const json& v = get(key);
    if (!v.is_array()) fail(at(key), "expected an array");
    return v;
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) fail(path_, "unknown key '" + it.key() + "'");
    }
  }

private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class F>
auto parse_enum(F&& parse, const std::string& value, const std::string& where) {
  try {
    return parse(value);
  } catch (const Error&) {
    Reader::fail(where, "unknown value '" + value + "'");
  }
}

std::vector<double> numbers(const json& arr, const std::string& where) {
  std::vector<double> out;
  for (const auto& v : arr) {
    if (!v.is_number()) Reader::fail(where, "expected numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

ModelSpec parse_model(const json& j, const std::string& where) {
  Reader r(j, where);
  ModelSpec spec;
  const std::string generator = r.text("generator");
  if (generator == "truss") {
    spec.source = ModelSpec::Source::Truss;
    auto& t = spec.truss;
    if (r.has("level") && r.has("n_span")) Reader::fail(where, "give either 'level' or 'n_span'");
    if (r.has("level")) {
      try {
        t.n_span = spans_from_level(r.integer("level"));
      } catch (const Error& e) {
        Reader::fail(r.at("level"), e.what());
      }
    } else {
      t.n_span = r.integer("n_span");
    }
    if (r.has("free_nodes") && r.has("n_floor")) Reader::fail(where, "give either 'free_nodes' or 'n_floor'");
    if (r.has("free_nodes")) {
      const int nodes = r.integer("free_nodes");
      if (t.n_span < 1 || nodes % (t.n_span + 1) != 0) {
        Reader::fail(r.at("free_nodes"), "must be a multiple of n_span + 1");
      }
      t.n_floor = nodes / (t.n_span + 1);
    } else {
      t.n_floor = r.integer("n_floor");
    }
    t.span = r.number("span", t.span);
    t.height = r.number("height", t.height);
    t.area = r.number("area", t.area);
    t.youngs = r.number("youngs", t.youngs);
    t.load = r.number("load", t.load);
  } else if (generator == "frame") {
    spec.source = ModelSpec::Source::Frame;
    auto& f = spec.frame;
    f.n_span = r.integer("n_span");
    f.n_floor = r.integer("n_floor");
    f.n_sb = r.integer("n_sb", f.n_sb);
    f.n_sc = r.integer("n_sc", f.n_sc);
    f.span = r.number("span", f.span);
    f.height = r.number("height", f.height);
    f.width = r.number("width", f.width);
    f.depth = r.number("depth", f.depth);
    f.load = r.number("load", f.load);
    f.kind = parse_enum(element_kind_from_string, r.text("element", "homogeneous_beam"), r.at("element"));
    if (f.kind == ElementKind::TrussBar) Reader::fail(r.at("element"), "frames are built from beams");
    if (f.kind == ElementKind::FgBeam) {
      f.material.graded.e_upper = r.number("e_upper");
      f.material.graded.e_lower = r.number("e_lower");
      f.material.graded.exponent = r.number("exponent", 1.0);
    } else {
      f.material.youngs = r.number("youngs");
    }
  } else if (generator == "file") {
    spec.source = ModelSpec::Source::File;
    spec.path = r.text("path");
  } else {
    Reader::fail(r.at("generator"), "expected truss, frame or file");
  }
  r.finish();
  return spec;
}

std::optional<PartitionSpec> parse_partition(const json& j, const std::string& where) {
  if (j.is_string()) {
    if (j.get<std::string>() != "default") Reader::fail(where, "expected \"default\" or an object");
    return std::nullopt;
  }
  Reader r(j, where);
  PartitionSpec p;
  for (const auto& id : r.array("additional")) {
    if (!id.is_number_integer()) Reader::fail(r.at("additional"), "expected element ids");
    p.additional_ids.insert(id.get<int>());
  }
  r.finish();
  return p;
}

std::vector<NodeRef> parse_nodes(const json& arr, const std::string& where) {
  if (!arr.is_array() || arr.empty()) Reader::fail(where, "expected a non-empty array");
  std::vector<NodeRef> out;
  for (const auto& v : arr) {
    if (v.is_string()) {
      const auto s = v.get<std::string>();
      if (s != "A" && s != "B") Reader::fail(where, "node labels are \"A\" and \"B\"");
      out.push_back(NodeRef{s, -1});
    } else if (v.is_number_integer() && v.get<int>() >= 0) {
      out.push_back(NodeRef{std::to_string(v.get<int>()), v.get<int>()});
    } else {
      Reader::fail(where, "expected \"A\", \"B\" or a node id");
    }
  }
  return out;
}

ScenarioConfig parse_scenario(const json& j, const std::string& where) {
  Reader r(j, where);
  ScenarioConfig s;
  s.name = r.text("name");
  if (s.name.empty() || s.name.find_first_of(",/\\\"\n") != std::string::npos) {
    Reader::fail(r.at("name"), "must be non-empty without separators");
  }
  s.model = parse_model(r.get("model"), r.at("model"));
  if (r.has("modification")) {
    Reader m(r.get("modification"), r.at("modification"));
    ModificationSpec mod;
    mod.e_lower = m.number("e_lower");
    mod.e_upper = m.number("e_upper");
    mod.target = parse_enum(grading_target_from_string, m.text("target", "E"), m.at("target"));
    if (m.has("exponent")) mod.exponent = m.number("exponent");
    m.finish();
    s.modification = mod;
  }
  if (r.has("partition")) s.partition = parse_partition(r.get("partition"), r.at("partition"));
  if (r.has("solver")) {
    Reader v(r.get("solver"), r.at("solver"));
    if (v.has("methods")) {
      s.methods.clear();
      for (const auto& m : v.array("methods")) {
        if (!m.is_string()) Reader::fail(v.at("methods"), "expected method names");
        const Method method = parse_enum(method_from_string, m.get<std::string>(), v.at("methods"));
        if (std::find(s.methods.begin(), s.methods.end(), method) != s.methods.end()) {
          Reader::fail(v.at("methods"), "duplicate method");
        }
        s.methods.push_back(method);
      }
      if (s.methods.empty()) Reader::fail(v.at("methods"), "expected at least one method");
    }
    s.tol = v.number("tol", s.tol);
    if (!(s.tol > 0.0)) Reader::fail(v.at("tol"), "must be positive");
    s.max_iter = v.integer("max_iter", s.max_iter);
    v.finish();
  }
  if (r.has("report")) s.report = parse_nodes(r.get("report"), r.at("report"));
  r.finish();
  return s;
}

FlopPanel default_panel(SweepMode mode) {
  FlopPanel p;
  p.mode = mode;
  if (mode == SweepMode::SriVsFdp) {
    p.first = 0.01;
    p.last = 0.80;
    p.points = 80;
  }
  return p;
}

FlopsConfig parse_flops(const json& j, const std::string& where) {
  Reader r(j, where);
  FlopsConfig f;
  const int n = r.integer("n", 10000);
  if (n < 1) Reader::fail(r.at("n"), "must be positive");
  f.n = static_cast<std::uint64_t>(n);
  if (r.has("panels")) {
    const json& panels = r.array("panels");
    for (std::size_t i = 0; i < panels.size(); ++i) {
      Reader p(panels[i], r.at("panels") + "[" + std::to_string(i) + "]");
      const std::string mode = p.text("mode");
      if (mode != "sri_vs_pcg" && mode != "sri_vs_fdp") Reader::fail(p.at("mode"), "expected sri_vs_pcg or sri_vs_fdp");
      FlopPanel panel = default_panel(mode == "sri_vs_pcg" ? SweepMode::SriVsPcg : SweepMode::SriVsFdp);
      panel.first = p.number("first", panel.first);
      panel.last = p.number("last", panel.last);
      panel.points = p.integer("points", panel.points);
      if (panel.points < 1) Reader::fail(p.at("points"), "must be positive");
      if (p.has("parameters")) panel.parameters = numbers(p.array("parameters"), p.at("parameters"));
      p.finish();
      f.panels.push_back(panel);
    }
  }
  if (r.has("queries")) {
    const json& queries = r.array("queries");
    for (std::size_t i = 0; i < queries.size(); ++i) {
      Reader q(queries[i], r.at("queries") + "[" + std::to_string(i) + "]");
      const int qn = q.integer("n", n);
      const int qq = q.integer("q");
      const int qk = q.integer("k");
      if (qn < 1 || qq < 0 || qk < 0) Reader::fail(q.path(), "n must be positive, q and k non-negative");
      q.finish();
      f.queries.push_back(FlopQuery{static_cast<std::uint64_t>(qn), static_cast<std::uint64_t>(qq),
                                    static_cast<std::uint64_t>(qk)});
    }
  }
  if (f.panels.empty() && f.queries.empty()) {
    f.panels = {default_panel(SweepMode::SriVsPcg), default_panel(SweepMode::SriVsFdp)};
  }
  r.finish();
  return f;
}

NonlinearConfig parse_nonlinear(const json& j, const std::string& where) {
  Reader r(j, where);
  NonlinearConfig c;
  c.name = r.text("name", c.name);
  c.model = parse_model(r.get("model"), r.at("model"));
  if (c.model.source == ModelSpec::Source::Frame) Reader::fail(r.at("model"), "nonlinear runs need a truss");
  c.e0 = r.number("e0", c.e0);
  c.et = r.number("et", c.et);
  c.sigma_y = numbers(r.array("sigma_y"), r.at("sigma_y"));
  if (c.sigma_y.empty()) Reader::fail(r.at("sigma_y"), "expected at least one yield stress");
  if (r.has("backends")) {
    c.backends.clear();
    for (const auto& b : r.array("backends")) {
      if (!b.is_string()) Reader::fail(r.at("backends"), "expected backend names");
      c.backends.push_back(parse_enum(backend_from_string, b.get<std::string>(), r.at("backends")));
    }
  }
  if (r.has("partition")) c.partition = parse_partition(r.get("partition"), r.at("partition"));
  c.options.steps = r.integer("steps", c.options.steps);
  c.options.tol_outer = r.number("tol_outer", c.options.tol_outer);
  c.options.tol_inner = r.number("tol_inner", c.options.tol_inner);
  c.options.max_outer = r.integer("max_outer", c.options.max_outer);
  c.options.max_inner = r.integer("max_inner", c.options.max_inner);
  if (c.options.steps < 1 || c.options.max_outer < 1) Reader::fail(where, "steps and max_outer must be positive");
  if (r.has("history")) {
    Reader h(r.get("history"), r.at("history"));
    if (h.has("nodes")) c.history_nodes = parse_nodes(h.get("nodes"), h.at("nodes"));
    c.history_dof = h.integer("dof", c.history_dof);
    if (c.history_dof < 0 || c.history_dof > 1) Reader::fail(h.at("dof"), "truss dofs are 0 and 1");
    h.finish();
  }
  r.finish();
  return c;
}

void resolve_paths(ModelSpec& spec, const std::filesystem::path& base) {
  if (spec.source == ModelSpec::Source::File && std::filesystem::path(spec.path).is_relative()) {
    spec.path = (base / spec.path).lexically_normal().string();
  }
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

CampaignConfig parse_campaign(const json& doc) {
  Reader r(doc, "$");
  CampaignConfig c;
  c.repeat = r.integer("repeat", c.repeat);
  if (c.repeat < 1) Reader::fail(r.at("repeat"), "must be at least 1");
  if (r.has("scenarios")) {
    const json& list = r.array("scenarios");
    std::set<std::string> names;
    for (std::size_t i = 0; i < list.size(); ++i) {
      c.scenarios.push_back(parse_scenario(list[i], "$.scenarios[" + std::to_string(i) + "]"));
      if (!names.insert(c.scenarios.back().name).second) {
        Reader::fail("$.scenarios[" + std::to_string(i) + "].name", "duplicate scenario name");
      }
    }
  }
  if (r.has("flops")) c.flops = parse_flops(r.get("flops"), "$.flops");
  if (r.has("nonlinear")) c.nonlinear = parse_nonlinear(r.get("nonlinear"), "$.nonlinear");
  r.finish();
  return c;
}

CampaignConfig read_campaign_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::SchemaViolation, "cannot open config '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::SchemaViolation, path + ": " + e.what());
  }
  CampaignConfig c = parse_campaign(doc);
  const auto base = std::filesystem::path(path).parent_path();
  for (auto& s : c.scenarios) resolve_paths(s.model, base);
  if (c.nonlinear) resolve_paths(c.nonlinear->model, base);
  return c;
}

StructuralModel build_model(const ModelSpec& spec) {
  switch (spec.source) {
    case ModelSpec::Source::Truss: return build_truss_grid(spec.truss);
    case ModelSpec::Source::Frame: return build_frame_grid(spec.frame);
    case ModelSpec::Source::File: return read_model_file(spec.path).model;
  }
  throw Error(ErrorKind::InternalError, "unhandled model source");
}

BuiltScenario build_scenario(const ScenarioConfig& config) {
  std::optional<StructuralModel> loaded;
  std::optional<PartitionSpec> from_file;
  if (config.model.source == ModelSpec::Source::File) {
    ModelDocument doc = read_model_file(config.model.path);
    loaded.emplace(std::move(doc.model));
    from_file = std::move(doc.partition);
  }
  StructuralModel original = loaded ? std::move(*loaded) : build_model(config.model);

  StructuralModel modified = original;
  if (const auto& mod = config.modification) {
    StructuralModel base = mod->exponent ? set_fg_exponent(original, *mod->exponent) : original;
    modified = apply_floor_grading(base, mod->e_lower, mod->e_upper, mod->target);
  }
  PartitionSpec partition;
  if (config.partition) {
    partition = *config.partition;
  } else if (from_file) {
    partition = *from_file;
  } else {
    partition = default_additional_set(original);
  }
  return BuiltScenario{std::move(original), std::move(modified), std::move(partition)};
}

int resolve_node(const StructuralModel& model, const NodeRef& ref) {
  if (ref.label == "A") return model.node_a();
  if (ref.label == "B") return model.node_b();
  if (ref.id < 0 || ref.id >= static_cast<int>(model.nodes().size())) {
    throw Error(ErrorKind::InvalidParameter, "report node " + ref.label + " does not exist");
  }
  return ref.id;
}

ScenarioResult run_scenario(const ScenarioConfig& config, const RunSettings& settings) {
  const BuiltScenario built = build_scenario(config);
  const StructuralModel& original = built.original;
  const StructuralModel& modified = built.modified;
  const double tol = settings.tol.value_or(config.tol);
  const int repeat = std::max(1, settings.repeat);

  ScenarioResult result;
  result.name = config.name;
  result.n = modified.free_dof_count();
  for (const auto& ref : config.report) {
    const int node = resolve_node(modified, ref);
    std::vector<int> eqs;
    for (int local = 0; local < modified.dofs_per_node(); ++local) eqs.push_back(modified.dof(node, local));
    result.report_dofs.emplace_back(ref.label, std::move(eqs));
  }

  const Vector r = modified.load_vector();

  // Original-structure setup shared by the reduced methods.
  std::optional<SystemPartition> original_partition;
  double partition_time = 0.0;
  auto need_partition = [&] {
    if (!original_partition) {
      const auto start = Clock::now();
      original_partition.emplace(make_partition(original, built.partition));
      partition_time = seconds_since(start);
    }
    return *original_partition;
  };

  for (const Method method : config.methods) {
    MethodResult m;
    m.method = method;
    std::vector<double> times;
    SolveReport report;
    switch (method) {
      case Method::Conventional:
        for (int i = 0; i < repeat; ++i) {
          const auto start = Clock::now();
          report = solve_conventional(assemble_global(modified), r);
          times.push_back(seconds_since(start));
        }
        break;
      case Method::Pcg: {
        const auto start = Clock::now();
        const StiffnessFactorization k0(assemble_global(original));
        m.preprocess = seconds_since(start);
        for (int i = 0; i < repeat; ++i) {
          const auto t = Clock::now();
          report = solve_pcg_full(assemble_global(modified), r, k0, tol, config.max_iter);
          times.push_back(seconds_since(t));
        }
        break;
      }
      case Method::Sri: {
        const SystemPartition& base = need_partition();
        const auto start = Clock::now();
        const SriPreconditioner precond = build_sri_preconditioner(base);
        m.preprocess = partition_time + seconds_since(start);
        SriOptions options;
        options.tol = tol;
        options.max_iter = config.max_iter;
        for (int i = 0; i < repeat; ++i) {
          const auto t = Clock::now();
          report = solve_sri(reparameterize(base, modified), r, precond, options);
          times.push_back(seconds_since(t));
        }
        break;
      }
      case Method::Fdp: {
        const SystemPartition& base = need_partition();
        m.preprocess = partition_time;
        for (int i = 0; i < repeat; ++i) {
          const auto t = Clock::now();
          report = solve_fdp(reparameterize(base, modified), r);
          times.push_back(seconds_since(t));
        }
        break;
      }
    }
    m.displacements = std::move(report.displacements);
    m.iterations = report.iterations;
    m.flops = report.flops_estimate;
    m.converged = report.converged;
    m.time = median(times);
    result.methods.push_back(std::move(m));
  }
  if (original_partition) {
    result.q = original_partition->q();
  } else {
    for (int id : built.partition.additional_ids) {
      result.q += original.elements().at(static_cast<std::size_t>(id)).kind == ElementKind::TrussBar ? 1 : 3;
    }
  }
  return result;
}

std::string format_value(double value, Precision precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, precision == Precision::Full ? "%.17g" : "%.6e", value);
  return buf;
}

void write_displacements_csv(std::ostream& out, const std::vector<ScenarioResult>& results, Precision precision) {
  out << "scenario,method,node,dof,value\n";
  for (const auto& s : results) {
    for (const auto& m : s.methods) {
      for (const auto& [label, eqs] : s.report_dofs) {
        for (std::size_t dof = 0; dof < eqs.size(); ++dof) {
          const double value = eqs[dof] == kConstrained ? 0.0 : m.displacements[eqs[dof]];
          out << s.name << ',' << to_string(m.method) << ',' << label << ',' << dof << ','
              << format_value(value, precision) << '\n';
        }
      }
    }
  }
}

void write_summary_csv(std::ostream& out, const std::vector<ScenarioResult>& results, Precision precision) {
  out << "scenario,method,n,q,iterations,flops,time_s,preprocess_s,rct,converged\n";
  for (const auto& s : results) {
    std::optional<double> t_conv;
    for (const auto& m : s.methods) {
      if (m.method == Method::Conventional) t_conv = m.time;
    }
    for (const auto& m : s.methods) {
      out << s.name << ',' << to_string(m.method) << ',' << s.n << ',' << s.q << ',' << m.iterations << ',';
      if (m.method != Method::Conventional) out << to_string(m.flops);
      out << ',' << format_value(m.time, precision) << ',' << format_value(m.preprocess, precision) << ',';
      if (t_conv && *t_conv > 0.0) out << format_value(relative_time(m.time, *t_conv), precision);
      out << ',' << (m.converged ? "true" : "false") << '\n';
    }
  }
}

std::vector<NonlinearCase> run_nonlinear_campaign(const NonlinearConfig& config, const StructuralModel& base) {
  std::vector<NonlinearCase> cases;
  const PartitionSpec partition = config.partition.value_or(default_additional_set(base));
  for (const double sigma_y : config.sigma_y) {
    const StructuralModel model = with_bilinear_material(base, BilinearLaw{config.e0, config.et, sigma_y});
    std::vector<HistoryPoint> points;
    for (const auto& ref : config.history_nodes) points.push_back(HistoryPoint{resolve_node(model, ref), config.history_dof});
    for (const Backend backend : config.backends) {
      NonlinearOptions options = config.options;
      options.backend = backend;
      cases.push_back(NonlinearCase{sigma_y, backend, run_newton_raphson(model, model.load_vector(), partition, options),
                                    points});
    }
  }
  return cases;
}

void write_nonlinear_summary_csv(std::ostream& out, const std::vector<NonlinearCase>& cases, Precision precision) {
  out << "sigma_y,backend,steps,completed,n_nle,outer_iters,inner_iters,time_s\n";
  for (const auto& c : cases) {
    int outer = 0;
    int inner = 0;
    for (const auto& s : c.run.steps) {
      outer += s.outer_iterations;
      inner += s.inner_iterations;
    }
    char sigma[64];
    std::snprintf(sigma, sizeof sigma, "%.10g", c.sigma_y);
    out << sigma << ',' << to_string(c.backend) << ',' << c.run.steps.size() << ','
        << (c.run.completed ? "true" : "false") << ',' << c.run.final_n_nle() << ',' << outer << ',' << inner << ','
        << format_value(c.run.wall_time, precision) << '\n';
  }
}

unsigned worker_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("REANALYZE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<unsigned>(std::min<long>(v, hw));
  }
  return hw;
}

}  // namespace reanalysis
