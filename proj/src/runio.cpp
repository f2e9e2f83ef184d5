#include "schrodlab/runio.hpp"

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "schrodlab/accept.hpp"
#include "schrodlab/factor.hpp"

namespace schrodlab {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string utc_now() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

struct RunContext {
  const ScenarioConfig& cfg;
  std::filesystem::path out;
  RunManifest& manifest;

  void write(const std::string& name, const std::string& text) {
    std::ofstream(out / name, std::ios::binary) << text;
    manifest.files.emplace_back(name, text.size());
  }
  void check(const std::string& name, const std::string& status,
             const std::string& detail) {
    manifest.checks.push_back({name, status, detail});
  }
};

LinearOperatorSpec scenario_spec(const ScenarioConfig& cfg) {
  LinearOperatorSpec spec;
  spec.field = scenario_field(cfg);
  if (cfg.b1_strength != 0.0)
    add_schwartz_b1(spec, cfg.grid.dim, cfg.b1_strength);
  return spec;
}

std::vector<double> sweep_or(const ScenarioConfig& cfg,
                             std::initializer_list<double> fallback) {
  return cfg.sweep.empty() ? std::vector<double>(fallback) : cfg.sweep;
}

GridField initial_data(const BoxGrid& g) {
  GridField u = make_field(g, [&g](const Vec& x) {
    return Complex(std::exp(-0.5 * norm2(x, g.dim)), 0.0);
  });
  double a = 0.1 / l2_norm(u);
  for (Complex& v : u.values) v *= a;
  return u;
}

// --- experiments -----------------------------------------------------------

void run_trace(RunContext& rc) {
  CoefficientField f = scenario_field(rc.cfg);
  CounterRng rng(rc.cfg.seed, 11);
  std::vector<PhasePoint> seeds;
  for (int i = 0; i < 32; ++i) {
    Vec x{}, xi{};
    for (int j = 0; j < f.dim; ++j) x[j] = rng.uniform(-2.0, 2.0);
    double n = 0.0;
    while (n < 1e-6) {
      for (int j = 0; j < f.dim; ++j) xi[j] = rng.normal();
      n = norm(xi, f.dim);
    }
    seeds.push_back({x, scale(xi, 1.0 / n, f.dim)});
  }
  auto verdicts = nontrapping_probe(f, seeds, 20.0, 100.0, 1e-8);

  std::ostringstream csv;
  csv << "seed,x0,x1,xi0,xi1,escaped,escape_s,h2_drift\n";
  int undetermined = 0;
  TraceOptions opt;
  std::vector<double> drift(seeds.size(), 0.0);
  parallel_for(seeds.size(), [&](std::size_t i) {
    drift[i] = trace_ray(f, seeds[i], 0.0, 20.0, opt).h2_relative_drift();
  });
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const SeedVerdict& v = verdicts[i];
    undetermined += v.escaped ? 0 : 1;
    csv << i << "," << num(v.seed.x[0]) << "," << num(v.seed.x[1]) << ","
        << num(v.seed.xi[0]) << "," << num(v.seed.xi[1]) << "," << v.escaped
        << "," << num(v.escape_s) << "," << num(drift[i]) << "\n";
  }
  rc.write("trace.csv", csv.str());
  if (undetermined)
    rc.check("trace", "finding",
             std::to_string(undetermined) + "/32 seeds undetermined (trapping)");
  else
    rc.check("trace", "ok", "all 32 seeds escaped");
}

void run_symbol(RunContext& rc) {
  CoefficientField f = scenario_field(rc.cfg);
  Symbol h2 = hamiltonian_symbol(f);
  LatticeSpec xg, kg;
  xg.dim = kg.dim = f.dim;
  for (int j = 0; j < f.dim; ++j) {
    xg.lo[j] = -4.0; xg.hi[j] = 4.0; xg.count[j] = 9;
    kg.lo[j] = -4.0; kg.hi[j] = 4.0; kg.count[j] = 9;
  }
  SymbolTable table = tabulate(h2, xg, kg, rc.cfg.seed);
  save_table(table, (rc.out / "symbol_table.bin").string(),
             (rc.out / "symbol_table.json").string());
  rc.manifest.files.emplace_back(
      "symbol_table.bin",
      std::filesystem::file_size(rc.out / "symbol_table.bin"));
  rc.manifest.files.emplace_back(
      "symbol_table.json",
      std::filesystem::file_size(rc.out / "symbol_table.json"));

  CounterRng rng(rc.cfg.seed, 13);
  std::vector<PhasePoint> probes;
  for (int i = 0; i < 24; ++i) {
    Vec x{}, xi{};
    for (int j = 0; j < f.dim; ++j) {
      x[j] = rng.uniform(-3.0, 3.0);
      xi[j] = rng.uniform(-8.0, 8.0);
    }
    probes.push_back({x, xi});
  }
  std::ostringstream csv;
  csv << "order_j,seminorm\n";
  for (int j = 0; j <= 2; ++j)
    csv << j << "," << num(seminorm_estimate(h2, j, 2.0, probes)) << "\n";
  csv << "interp_probe_error," << num(table.probe_error) << "\n";
  rc.write("symbol.csv", csv.str());
  rc.check("symbol", "ok",
           "table probe error " + num(table.probe_error));
}

void run_evolve(RunContext& rc) {
  const ScenarioConfig& cfg = rc.cfg;
  if (cfg.builtin == "mizohata-constant") {
    BoxGrid g = make_grid(1, 4.0 * M_PI, std::max(cfg.grid.points, 256));
    std::ostringstream csv;
    csv << "lambda,t,growth,reference\n";
    double worst = 0.0;
    for (double lambda : sweep_or(cfg, {8.0, 16.0, 32.0}))
      for (const GrowthRow& r :
           mizohata_blowup_demo(lambda, cfg.evolution.T, g, 4)) {
        worst = std::max(worst, std::abs(r.growth / r.reference - 1.0));
        csv << lambda << "," << num(r.t) << "," << num(r.growth) << ","
            << num(r.reference) << "\n";
      }
    bool within = worst <= 0.15;
    csv << "pass_15pct,," << (within ? 1 : 0) << ",\n";
    rc.write("evolve.csv", csv.str());
    rc.check("evolve", within ? "finding" : "failed",
             "exponential degenerate-direction growth, max deviation from "
             "e^{lambda t}: " + num(worst) +
             (within ? " (within 15%)" : " (exceeds 15%)"));
    return;
  }
  if (cfg.builtin == "quarter-gain") {
    BoxGrid g = make_grid(2, cfg.grid.half_length, cfg.grid.points);
    std::ostringstream csv;
    csv << "variant,freq,ratio_quarter,ratio_half\n";
    std::vector<double> freqs = sweep_or(cfg, {4.0, 8.0, 16.0, 32.0});
    for (auto variant : {GainVariant::Ultrahyperbolic, GainVariant::Elliptic})
      for (const GainRow& r :
           gain_exponent_probe(variant, freqs, cfg.evolution.T, g))
        csv << (variant == GainVariant::Ultrahyperbolic ? "ultrahyperbolic"
                                                        : "elliptic")
            << "," << r.freq << "," << num(r.ratio_quarter) << ","
            << num(r.ratio_half) << "\n";
    rc.write("evolve.csv", csv.str());
    rc.check("evolve", "ok", "gain-exponent sweep written");
    return;
  }

  BoxGrid g = make_grid(cfg.grid.dim, cfg.grid.half_length, cfg.grid.points);
  LinearOperatorSpec spec = scenario_spec(cfg);
  EvolveConfig ec;
  ec.dt = cfg.evolution.dt;
  ec.stride = cfg.evolution.stride;
  EvolutionTrace tr = evolve_linear(initial_data(g), spec, cfg.evolution.T, ec);
  std::ostringstream csv;
  csv << "t,l2,hs,weighted\n";
  for (const NormRecord& r : tr.norm_history)
    csv << num(r.t) << "," << num(r.l2) << "," << num(r.hs) << ","
        << num(r.weighted) << "\n";
  rc.write("evolve.csv", csv.str());
  if (tr.blew_up)
    rc.check("evolve", "finding", "blow-up at t = " + num(tr.blowup_time));
  else
    rc.check("evolve", "ok",
             "final L2 " + num(tr.norm_history.back().l2) +
                 (tr.final_boundary.flagged ? " (boundary mass flagged)" : ""));
}

void run_smooth(RunContext& rc) {
  const ScenarioConfig& cfg = rc.cfg;
  BoxGrid g = make_grid(cfg.grid.dim, cfg.grid.half_length, cfg.grid.points);
  LinearOperatorSpec spec = scenario_spec(cfg);
  EvolveConfig ec;
  ec.dt = cfg.evolution.dt;
  // Keep at least 4 snapshots so the time quadrature is defined.
  double dt = ec.dt > 0.0 ? ec.dt : stable_dt(g, spec);
  long steps = std::max(1L, static_cast<long>(std::ceil(cfg.evolution.T / dt)));
  ec.stride = std::max(1L, std::min<long>(cfg.evolution.stride, steps / 4));
  std::ostringstream csv;
  csv << "lambda,ratio,ratio_weighted,lhs,sup_hs_sq\n";
  bool any_blowup = false;
  for (double lambda : sweep_or(cfg, {4.0, 8.0, 16.0})) {
    EvolutionTrace tr =
        evolve_linear(wave_packet(g, lambda), spec, cfg.evolution.T, ec);
    any_blowup = any_blowup || tr.blew_up;
    SmoothingRecord sm = smoothing_functional(tr, cfg.s_param, 2);
    csv << lambda << "," << num(sm.ratio) << "," << num(sm.ratio_weighted)
        << "," << num(sm.lhs) << "," << num(sm.sup_hs_sq) << "\n";
  }
  rc.write("smooth.csv", csv.str());
  rc.check("smooth", any_blowup ? "finding" : "ok",
           any_blowup ? "blow-up during a packet run" : "smoothing sweep written");
}

void run_nonlinear(RunContext& rc) {
  const ScenarioConfig& cfg = rc.cfg;
  BoxGrid g = make_grid(cfg.grid.dim, cfg.grid.half_length, cfg.grid.points);
  NonlinearProblem p = model_nls_problem(cfg.grid.dim);
  if (is_field_builtin(cfg.builtin)) p.spec.field = scenario_field(cfg);
  SolveResult res =
      solve_nonlinear(p, initial_data(g), cfg.evolution.T, 1e-8, 12);
  rc.write("nonlinear_report.json", contraction_report_json(res.report));
  std::ostringstream csv;
  csv << "iteration,delta\n";
  for (std::size_t i = 0; i < res.report.deltas.size(); ++i)
    csv << i << "," << num(res.report.deltas[i]) << "\n";
  rc.write("nonlinear.csv", csv.str());
  if (res.report.certified)
    rc.check("nonlinear", "ok",
             "certified horizon T = " + num(res.report.certified_T));
  else if (res.report.no_certified_existence)
    rc.check("nonlinear", "finding", "no certified existence horizon");
  else
    rc.check("nonlinear", "finding", "iteration did not certify contraction");
}

void run_verify(RunContext& rc) {
  CsvSink sink = [&rc](const std::string& stem, const std::string& text) {
    rc.write(stem + ".csv", text);
  };
  int failures = 0;
  std::ostringstream detail;
  for (const CriterionResult& r : run_acceptance(Tier::Fast, sink)) {
    failures += r.pass ? 0 : 1;
    if (!r.pass) detail << " " << r.name;
  }
  if (failures)
    rc.check("verify", "failed",
             std::to_string(failures) + " criterion(s) failed:" + detail.str());
  else
    rc.check("verify", "ok", "all 14 criteria passed (fast tier)");
}

}  // namespace

std::string manifest_to_json(const RunManifest& m) {
  nlohmann::json j;
  j["fingerprint"] = m.fingerprint;
  j["version"] = m.version;
  j["started"] = m.started;
  j["finished"] = m.finished;
  j["files"] = nlohmann::json::array();
  for (const auto& [name, bytes] : m.files)
    j["files"].push_back({{"name", name}, {"bytes", bytes}});
  j["checks"] = nlohmann::json::array();
  for (const CheckSummary& c : m.checks)
    j["checks"].push_back(
        {{"name", c.name}, {"status", c.status}, {"detail", c.detail}});
  return j.dump(2);
}

RunOutcome run_scenario(const ScenarioConfig& config, const std::string& out_dir,
                        int workers) {
  if (workers > 0) setenv("LAB_WORKERS", std::to_string(workers).c_str(), 1);
  std::filesystem::create_directories(out_dir);

  RunOutcome outcome;
  outcome.manifest.fingerprint = config_fingerprint(config);
  outcome.manifest.started = utc_now();
  RunContext rc{config, out_dir, outcome.manifest};
  rc.write("config.json", scenario_config_to_json(config));

  for (const std::string& exp : config.experiments) {
    try {
      if (exp == "trace") run_trace(rc);
      else if (exp == "symbol") run_symbol(rc);
      else if (exp == "evolve") run_evolve(rc);
      else if (exp == "smooth") run_smooth(rc);
      else if (exp == "nonlinear") run_nonlinear(rc);
      else if (exp == "verify") run_verify(rc);
    } catch (const TrappingSuspectedError& e) {
      rc.check(exp, "finding", std::string("trapping suspected: ") + e.what());
    } catch (const std::exception& e) {
      rc.check(exp, "failed", e.what());
    }
  }
  for (const CheckSummary& c : outcome.manifest.checks)
    if (c.status == "failed") outcome.verification_failed = true;

  outcome.manifest.finished = utc_now();
  std::ofstream(std::filesystem::path(out_dir) / "manifest.json")
      << manifest_to_json(outcome.manifest);
  return outcome;
}

}  // namespace schrodlab
