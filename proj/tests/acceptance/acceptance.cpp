// Acceptance checks. Each check prints one line:
//   criterion <id> PASS|FAIL  <summary>
// and the process exits non-zero when any selected check fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "flop_tallies.hpp"
#include "oracles.hpp"
#include "random_models.hpp"
#include "reanalysis/elements.hpp"
#include "reanalysis/errors.hpp"
#include "reanalysis/nonlinear.hpp"
#include "reanalysis/scenario.hpp"
#include "reanalysis/solvers.hpp"

using namespace reanalysis;
using oracle::rel_diff;

namespace {

struct Outcome {
  bool pass = false;
  std::string summary;
};

std::string config(const std::string& name) { return std::string(REANALYSIS_CONFIG_DIR) + "/" + name; }

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

// Reference node displacements, 7 significant digits.
using Reference = std::vector<std::string>;

struct DigitCheck {
  int compared = 0;
  int matched = 0;
  std::vector<std::string> misses;

  void add(const std::string& where, double value, const std::string& expected) {
    ++compared;
    const std::string got = format_value(value, Precision::Table);
    if (got == expected) {
      ++matched;
    } else if (misses.size() < 6) {
      misses.push_back(where + " " + got + " vs " + expected);
    }
  }
};

std::vector<double> report_values(const ScenarioResult& r, const MethodResult& m) {
  std::vector<double> out;
  for (const auto& [label, eqs] : r.report_dofs) {
    for (int eq : eqs) out.push_back(eq == kConstrained ? 0.0 : m.displacements(eq));
  }
  return out;
}

struct Spread {
  double value = 0.0;
  std::string where;

  void merge(const Spread& other) {
    if (other.value > value) *this = other;
  }
};

// Largest pairwise relative difference between the methods' displacement vectors.
Spread cross_method_spread(const ScenarioResult& r) {
  Spread worst;
  for (const auto& a : r.methods) {
    for (const auto& b : r.methods) {
      const double d = rel_diff(a.displacements, b.displacements);
      if (&a < &b && d > worst.value) {
        worst = {d, r.name + " " + std::string(to_string(a.method)) + "/" + std::string(to_string(b.method))};
      }
    }
  }
  return worst;
}

std::vector<ScenarioResult> run_config(const std::string& file) {
  const CampaignConfig campaign = read_campaign_file(config(file));
  std::vector<ScenarioResult> results;
  for (auto s : campaign.scenarios) {
    s.tol = 1e-12;
    results.push_back(run_scenario(s, RunSettings{}));
  }
  return results;
}

Outcome digits_outcome(const DigitCheck& digits, const Spread& spread, double spread_limit,
                       const std::string& extra = "") {
  Outcome o;
  o.pass = digits.matched == digits.compared && spread.value <= spread_limit;
  o.summary = std::to_string(digits.matched) + "/" + std::to_string(digits.compared) +
              " reference values matched, cross-method spread " + sci(spread.value) + " (" + spread.where + ", limit " +
              sci(spread_limit) + ")" + extra;
  for (const auto& m : digits.misses) o.summary += "; " + m;
  return o;
}

Outcome truss_regression() {
  const std::map<std::string, Reference> reference{
      {"truss_2048", {"2.327843e+01", "3.694581e+00", "2.117298e+01", "-6.198756e+00"}},
      {"truss_4096", {"2.485152e+02", "3.272211e+01", "2.462131e+02", "-4.393270e+01"}},
      {"truss_6144", {"1.167079e+03", "1.161943e+02", "1.164704e+03", "-1.418954e+02"}},
  };
  DigitCheck digits;
  Spread spread;
  for (const auto& r : run_config("truss_graded.json")) {
    const Reference& expected = reference.at(r.name);
    for (const auto& m : r.methods) {
      const auto values = report_values(r, m);
      for (std::size_t i = 0; i < expected.size(); ++i) {
        digits.add(r.name + "/" + std::string(to_string(m.method)) + "[" + std::to_string(i) + "]", values[i],
                   expected[i]);
      }
    }
    spread.merge(cross_method_spread(r));
  }
  return digits_outcome(digits, spread, 1e-10);
}

Outcome frame_regression() {
  const Reference expected{"3.444080e+00", "-3.476257e-02", "-1.044827e-04"};
  DigitCheck digits;
  Spread spread;
  std::vector<double> first;
  double across = 0.0;
  for (const auto& r : run_config("frame_graded.json")) {
    for (const auto& m : r.methods) {
      const auto values = report_values(r, m);
      for (std::size_t i = 0; i < expected.size(); ++i) {
        digits.add(r.name + "/" + std::string(to_string(m.method)) + "[" + std::to_string(i) + "]", values[i],
                   expected[i]);
      }
      if (first.empty()) first = values;
      for (std::size_t i = 0; i < values.size(); ++i) across = std::max(across, rel_diff(values[i], first[i]));
    }
    spread.merge(cross_method_spread(r));
  }
  // every n_sb row is checked against the same reference triple, which is the invariance
  Outcome o;
  o.pass = digits.matched == digits.compared;
  o.summary = std::to_string(digits.matched) + "/" + std::to_string(digits.compared) +
              " reference values matched over n_sb 1..4; cross-method spread " + sci(spread.value) +
              ", node B spread over n_sb " + sci(across);
  for (const auto& m : digits.misses) o.summary += "; " + m;
  return o;
}

Outcome graded_frame_regression() {
  const std::map<std::string, Reference> reference{
      {"fg_frame_p0.5", {"2.111726e+00", "-5.859733e-02", "-8.018189e-04"}},
      {"fg_frame_p1", {"1.757305e+00", "-7.509972e-02", "-3.540270e-04"}},
      {"fg_frame_p2", {"1.717977e+00", "-6.925002e-02", "-2.863039e-04"}},
  };
  DigitCheck digits;
  Spread spread_p1;
  int vertical_ratio_hits = 0;
  for (const auto& r : run_config("fg_frame.json")) {
    const Reference& expected = reference.at(r.name);
    for (const auto& m : r.methods) {
      const auto values = report_values(r, m);
      for (std::size_t i = 0; i < expected.size(); ++i) {
        digits.add(r.name + "/" + std::string(to_string(m.method)) + "[" + std::to_string(i) + "]", values[i],
                   expected[i]);
      }
      if (format_value(values[1] * 10.0, Precision::Table) == expected[1]) ++vertical_ratio_hits;
    }
    if (r.name == "fg_frame_p1") spread_p1 = cross_method_spread(r);
  }
  Outcome o = digits_outcome(digits, spread_p1, 1e-10,
                             ", verticals equal to reference/10 in " + std::to_string(vertical_ratio_hits) + " rows");
  return o;
}

Outcome additional_force_identity() {
  oracle::Rng rng(0x5eed0004);
  int cases = 0;
  double worst = 0.0;
  while (cases < 120) {
    const auto c = oracle::random_case(rng, 200);
    const auto original = make_partition(c.original, c.partition);
    if (original.q() == 0) continue;
    const auto modified = reparameterize(original, c.modified);
    const Vector r = c.modified.load_vector();
    const auto sri = solve_sri(modified, r, build_sri_preconditioner(original));
    if (!sri.converged) return {false, c.label + ": SRI did not converge"};
    worst = std::max(worst, rel_diff(*sri.additional_forces, fdp_additional_forces(modified, r)));
    ++cases;
  }
  return {worst <= 1e-8, std::to_string(cases) + " random models, max relative difference " + sci(worst)};
}

Outcome reconstruction_suite() {
  constexpr double kPi = 3.14159265358979323846;
  oracle::Rng rng(0x5eed0005);
  int cases = 0;
  double truss = 0.0, beam = 0.0, graded = 0.0, reduction = 0.0;
  for (int i = 0; i < 400; ++i, ++cases) {
    const double l = rng.log_uniform(1.0, 1e4);
    const double angle = rng.uniform(-kPi, kPi);
    const double e = rng.log_uniform(1e2, 1e6);
    const double a = rng.log_uniform(0.1, 1e3);
    truss = std::max(truss, rel_diff(truss_decomposition(l, angle, e, a).stiffness(),
                                     oracle::truss_stiffness(e, a, l, angle)));
  }
  for (int i = 0; i < 400; ++i, ++cases) {
    const double l = rng.log_uniform(10.0, 2000.0);
    const double angle = rng.uniform(-kPi, kPi);
    const double e = rng.log_uniform(1e3, 1e5);
    const double a = rng.log_uniform(10.0, 1e3);
    const double inertia = rng.log_uniform(10.0, 1e6);
    const Eigen::MatrixXd c = beam_mode_rows(l, angle);
    const Eigen::MatrixXd t = oracle::beam_rotation(angle);
    beam = std::max(beam, rel_diff(c.transpose() * beam_parameter_matrix(e, a, inertia, l) * c,
                                   t.transpose() * oracle::beam_local_stiffness(e, a, inertia, l) * t));
  }
  int graded_cases = 0;
  while (graded_cases < 400) {
    const double b = rng.log_uniform(1.0, 50.0);
    const double h = rng.log_uniform(1.0, 100.0);
    const double l = rng.log_uniform(10.0, 1000.0);
    const double angle = rng.uniform(-kPi, kPi);
    const double p = rng.uniform(0.0, 10.0);
    const double e_lower = rng.log_uniform(1e3, 1e5);
    const double e_upper = e_lower * rng.log_uniform(0.1, 10.0);
    const auto k = fg_section_constants(h, p, e_upper, e_lower);
    if (k.a_e * k.d_e - k.b_e * k.b_e <= 0.01 * k.a_e * k.d_e) continue;
    const Eigen::MatrixXd c = beam_mode_rows(l, angle);
    const Eigen::MatrixXd t = oracle::beam_rotation(angle);
    const Eigen::MatrixXd expected =
        t.transpose() * oracle::coupled_beam_local_stiffness(b, oracle::closed_form_moments(h, p, e_upper, e_lower), l) * t;
    graded = std::max(graded, rel_diff(c.transpose() * fg_beam_parameter_matrix(b, k, l) * c, expected));
    ++graded_cases;
    ++cases;
  }
  for (int i = 0; i < 200; ++i, ++cases) {
    const double b = rng.log_uniform(1.0, 50.0);
    const double h = rng.log_uniform(1.0, 100.0);
    const double l = rng.log_uniform(10.0, 1000.0);
    const double e = rng.log_uniform(1e3, 1e5);
    const double p = rng.uniform(0.0, 10.0);
    reduction = std::max(reduction, rel_diff(fg_beam_parameter_matrix(b, fg_section_constants(h, p, e, e), l),
                                             beam_parameter_matrix(e, b * h, b * h * h * h / 12.0, l)));
  }
  const double worst = std::max({truss, beam, graded, reduction});
  return {worst <= 1e-12, std::to_string(cases) + " cases; truss " + sci(truss) + ", beam " + sci(beam) +
                              ", graded beam " + sci(graded) + ", graded to homogeneous " + sci(reduction)};
}

Outcome section_quadrature() {
  oracle::Rng rng(0x5eed0006);
  double a = 0.0, b = 0.0, d = 0.0;
  const int cases = 1000;
  for (int i = 0; i < cases; ++i) {
    const double h = rng.log_uniform(0.5, 100.0);
    const double p = rng.uniform(0.0, 10.0);
    const double e_lower = rng.log_uniform(1e3, 1e5);
    const double e_upper = e_lower * rng.log_uniform(0.1, 10.0);
    const auto c = fg_section_constants(h, p, e_upper, e_lower);
    const auto m = oracle::integrate_moments(h, p, e_upper, e_lower);
    a = std::max(a, rel_diff(c.a_e, m.a));
    b = std::max(b, rel_diff(c.b_e, m.b));
    d = std::max(d, rel_diff(c.d_e, m.d));
  }
  return {std::max({a, b, d}) <= 1e-10, std::to_string(cases) + " sections; max relative error a_e " + sci(a) +
                                            ", b_e " + sci(b) + ", d_e " + sci(d)};
}

Outcome flop_model() {
  oracle::Rng rng(0x5eed0007);
  int mismatches = 0;
  const int cases = 2000;
  for (int i = 0; i < cases; ++i) {
    const auto n = static_cast<std::uint64_t>(rng.integer(1, 1000000));
    const auto q = static_cast<std::uint64_t>(rng.integer(0, static_cast<int>(n)));
    const auto k = static_cast<std::uint64_t>(rng.integer(0, 20000));
    if (flops_sri(n, q, k) != oracle::sri_total(n, q, k)) ++mismatches;
    if (flops_pcg(n, k) != oracle::pcg_total(n, k)) ++mismatches;
    if (flops_fdp(n, q) != oracle::fdp_total(n, q)) ++mismatches;
  }

  bool shape = true;
  const auto pcg = ratio_sweep(SweepMode::SriVsPcg, 10000, linear_axis(0.05, 0.90, 86), {0.1, 0.3, 0.5, 0.7});
  for (const auto& s : pcg.series) {
    shape = shape && std::is_sorted(s.ratios.begin(), s.ratios.end(), std::less_equal<>());
  }
  const bool pcg_below = pcg.series.front().ratios.front() < 1.0;
  const auto fdp = ratio_sweep(SweepMode::SriVsFdp, 10000, linear_axis(0.01, 0.80, 80), {0.1, 0.3, 0.5, 0.7});
  for (const auto& s : fdp.series) {
    shape = shape && std::is_sorted(s.ratios.begin(), s.ratios.end());
  }
  const bool fdp_below = fdp.series.front().ratios.front() < 1.0;
  const bool pass = mismatches == 0 && shape && pcg_below && fdp_below;
  return {pass, std::to_string(3 * cases) + " tally comparisons, " + std::to_string(mismatches) +
                    " mismatches; sweeps monotone " + (shape ? "yes" : "no") + ", sri/pcg first ratio " +
                    sci(pcg.series.front().ratios.front()) + ", sri/fdp first ratio " + sci(fdp.series.front().ratios.front())};
}

StructuralModel reduced_nonlinear_truss() {
  TrussParameters p;
  p.n_span = 30;
  p.n_floor = 30;
  p.area = 200.0;
  p.load = 500.0;
  p.youngs = 2e5;
  return build_truss_grid(p);
}

Outcome nonlinear_equivalence() {
  const StructuralModel base = reduced_nonlinear_truss();
  const PartitionSpec partition = default_additional_set(base);
  double worst = 0.0;
  std::string nle;
  bool completed = true;
  for (double sigma_y : {45.0, 25.0, 5.0}) {
    const auto model = with_bilinear_material(base, BilinearLaw{2e5, 3e4, sigma_y});
    std::vector<NonlinearRun> runs;
    for (Backend b : {Backend::Regular, Backend::Reduction, Backend::Sri}) {
      NonlinearOptions options;
      options.backend = b;
      runs.push_back(run_newton_raphson(model, model.load_vector(), partition, options));
      completed = completed && runs.back().completed;
    }
    if (!completed) break;
    for (std::size_t s = 0; s < runs[0].steps.size(); ++s) {
      for (std::size_t b = 1; b < runs.size(); ++b) {
        worst = std::max(worst, rel_diff(runs[b].steps[s].displacements, runs[0].steps[s].displacements));
      }
    }
    nle += (nle.empty() ? "" : "/") + std::to_string(runs[0].final_n_nle());
  }
  return {completed && worst <= 1e-6, "30x30 truss, 20 steps, yield stress 45/25/5 with " + nle +
                                          " yielded elements; max backend difference " + sci(worst)};
}

Outcome nonlinear_linear_limit() {
  const auto model = with_bilinear_material(reduced_nonlinear_truss(), BilinearLaw{2e5, 3e4, 1e9});
  const Vector p0 = model.load_vector();
  const Vector d1 = solve_conventional(model).displacements;
  double worst = 0.0;
  bool completed = true;
  for (Backend b : {Backend::Regular, Backend::Reduction, Backend::Sri}) {
    NonlinearOptions options;
    options.backend = b;
    const auto run = run_newton_raphson(model, p0, default_additional_set(model), options);
    completed = completed && run.completed;
    for (const auto& s : run.steps) worst = std::max(worst, rel_diff(s.displacements, s.lambda * d1));
  }
  return {completed && worst <= 1e-10, "yield stress 1e9, max deviation from the linear curve " + sci(worst)};
}

Outcome nonlinear_full_scale() {
  CampaignConfig campaign = read_campaign_file(config("nonlinear_truss.json"));
  NonlinearConfig nl = *campaign.nonlinear;
  nl.backends = {Backend::Regular};
  const auto cases = run_nonlinear_campaign(nl, build_model(nl.model));
  const std::map<double, int> expected{{45.0, 1691}, {25.0, 2567}, {5.0, 9116}};
  bool pass = true;
  std::string got;
  for (const auto& c : cases) {
    pass = pass && c.run.completed && c.run.final_n_nle() == expected.at(c.sigma_y);
    got += (got.empty() ? "" : ", ") + std::to_string(c.run.final_n_nle());
  }
  return {pass, "30x150 truss, yielded elements " + got + " (expected 1691, 2567, 9116)"};
}

Outcome timing_smoke() {
  const CampaignConfig campaign = read_campaign_file(config("fg_frame_timing.json"));
  const auto r = run_scenario(campaign.scenarios.front(), RunSettings{campaign.repeat, std::nullopt});
  double conv = 0.0, sri = 0.0;
  for (const auto& m : r.methods) {
    if (m.method == Method::Conventional) conv = m.time;
    if (m.method == Method::Sri) sri = m.time;
  }
  return {sri < conv, "graded 10x20 frame, n=" + std::to_string(r.n) + " q=" + std::to_string(r.q) +
                          "; SRI " + sci(sri) + " s vs conventional " + sci(conv) + " s"};
}

Outcome preconditioner_exactness() {
  constexpr double tol = 1e-10;
  std::vector<std::pair<std::string, StructuralModel>> models;
  {
    TrussParameters p;
    p.n_span = 31;
    p.n_floor = 64;
    models.emplace_back("truss", build_truss_grid(p));
  }
  {
    FrameParameters p;
    p.n_span = 50;
    p.n_floor = 20;
    p.n_sb = 2;
    p.material.youngs = 20000.0;
    models.emplace_back("frame", build_frame_grid(p));
  }
  {
    FrameParameters p;
    p.n_span = 4;
    p.n_floor = 4;
    p.n_sb = 8;
    p.n_sc = 8;
    p.kind = ElementKind::FgBeam;
    p.material.graded = {36000.0, 20000.0, 1.0};
    models.emplace_back("graded frame", build_frame_grid(p));
  }
  bool pass = true;
  std::string detail;
  for (const auto& [name, model] : models) {
    const auto part = make_partition(model, default_additional_set(model));
    SriOptions options;
    options.tol = tol;
    const auto sri = solve_sri(part, model.load_vector(), build_sri_preconditioner(part), options);
    const StiffnessFactorization k0(assemble_global(model));
    const auto pcg = solve_pcg_full(model, k0, tol);
    pass = pass && sri.iterations == 1 && pcg.iterations == 1;
    detail += (detail.empty() ? "" : "; ") + name + " sri " + std::to_string(sri.iterations) + " (" +
              sci(sri.residual_history.back()) + ") pcg " + std::to_string(pcg.iterations) + " (" +
              sci(pcg.residual_history.back()) + ")";
  }
  return {pass, "tol " + sci(tol) + ": " + detail};
}

struct Entry {
  std::string id;
  std::function<Outcome()> run;
  bool slow = false;
};

const std::vector<Entry>& entries() {
  static const std::vector<Entry> list{
      {"1", truss_regression},
      {"2", frame_regression},
      {"3", graded_frame_regression},
      {"4", additional_force_identity},
      {"5", reconstruction_suite},
      {"6", section_quadrature},
      {"7", flop_model},
      {"8.equivalence", nonlinear_equivalence},
      {"8.linear", nonlinear_linear_limit},
      {"8.nnle", nonlinear_full_scale, true},
      {"8.smoke", timing_smoke},
      {"9", preconditioner_exactness},
  };
  return list;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::vector<std::string> selected;
  bool include_slow = false;
  app.add_option("--criterion,-c", selected, "criterion id, e.g. 3 or 8 or 8.nnle (repeatable)");
  app.add_flag("--slow", include_slow, "include full-scale checks when no criterion is given");
  CLI11_PARSE(app, argc, argv);

  auto wanted = [&](const Entry& e) {
    if (selected.empty()) return include_slow || !e.slow;
    const std::string major = e.id.substr(0, e.id.find('.'));
    return std::any_of(selected.begin(), selected.end(), [&](const std::string& s) { return s == e.id || s == major; });
  };
  for (const auto& s : selected) {
    const bool known = std::any_of(entries().begin(), entries().end(), [&](const Entry& e) {
      return s == e.id || s == e.id.substr(0, e.id.find('.'));
    });
    if (!known) {
      std::cerr << "unknown criterion '" << s << "'\n";
      return 2;
    }
  }

  int failures = 0;
  for (const auto& e : entries()) {
    if (!wanted(e)) continue;
    Outcome o;
    try {
      o = e.run();
    } catch (const std::exception& ex) {
      o = {false, std::string("error: ") + ex.what()};
    }
    if (!o.pass) ++failures;
    std::cout << "criterion " << e.id << ' ' << (o.pass ? "PASS" : "FAIL") << "  " << o.summary << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
