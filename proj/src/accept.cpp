#include "schrodlab/accept.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "schrodlab/factor.hpp"
#include "schrodlab/scenario.hpp"

namespace schrodlab {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<PhasePoint> random_seeds(int dim, int count, double x_radius,
                                     std::uint64_t seed) {
  CounterRng rng(seed);
  std::vector<PhasePoint> out;
  out.reserve(count);
  while (static_cast<int>(out.size()) < count) {
    Vec x{}, xi{};
    for (int j = 0; j < dim; ++j) x[j] = rng.uniform(-x_radius, x_radius);
    if (norm(x, dim) > x_radius) continue;
    double n = 0.0;
    while (n < 1e-6) {
      for (int j = 0; j < dim; ++j) xi[j] = rng.normal();
      n = norm(xi, dim);
    }
    out.push_back({x, scale(xi, 1.0 / n, dim)});
  }
  return out;
}

DoiProfiles doi_profiles() {
  DoiProfiles p;
  p.psi = rising_profile(1.0, 4.0);
  p.phi1 = plateau_profile(3.0, 6.0);
  p.phi2 = rising_profile(1.0, 2.0);
  return p;
}

Symbol hyperbolic_test_symbol() {
  // Projected-class bump a(z) = e^{-|z|^2} over the hyperbolic normal form.
  return make_projected_symbol(
      2,
      [](const Vec& z, const Vec&, const Vec&) {
        return Complex(std::exp(-norm2(z, 2)), 0.0);
      },
      Mat::diag(2, {1.0, -1.0}), rising_profile(1.0, 2.0),
      ProjectedVariant::Hyperbolic);
}

GridField band_limited_probe(const BoxGrid& g, std::uint64_t seed, double mod_freq) {
  CounterRng rng(seed);
  int terms = 9;
  std::vector<double> amp(terms), phase(terms);
  for (int m = 0; m < terms; ++m) {
    amp[m] = rng.uniform(-1.0, 1.0);
    phase[m] = rng.uniform(0.0, 2.0 * M_PI);
  }
  double k0 = g.freq_spacing();
  return make_field(g, [&](const Vec& x) {
    double s = 0.0;
    for (int m = 0; m < terms; ++m)
      s += amp[m] * std::cos((m - 4) * k0 * x[0] + phase[m]);
    return std::polar(1.0, mod_freq * x[0]) *
           Complex(s * std::exp(-0.05 * x[0] * x[0]), 0.0);
  });
}

using Clock = std::chrono::steady_clock;

CriterionResult timed(int index, const std::string& name,
                      const std::function<std::pair<bool, std::string>()>& body) {
  CriterionResult r;
  r.index = index;
  r.name = name;
  auto start = Clock::now();
  try {
    auto [pass, detail] = body();
    r.pass = pass;
    r.detail = detail;
  } catch (const std::exception& e) {
    r.pass = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return r;
}

// --------------------------------------------------------------------------
// 1. Bicharacteristic flow conserves h2.
// --------------------------------------------------------------------------
std::pair<bool, std::string> crit_flow_conservation(Tier, const CsvSink& sink) {
  std::ostringstream csv;
  csv << "field,seed,h2_drift\n";
  double worst = 0.0;
  for (const char* name : {"elliptic-bump", "ultrahyperbolic-bump"}) {
    CoefficientField f = builtin_field(name);
    std::vector<PhasePoint> seeds = random_seeds(2, 256, 3.0, 101);
    std::vector<double> drift(seeds.size(), 0.0);
    TraceOptions opt;
    opt.tol = 1e-10;
    parallel_for(seeds.size(), [&](std::size_t i) {
      drift[i] = trace_ray(f, seeds[i], 0.0, 20.0, opt).h2_relative_drift();
    });
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      worst = std::max(worst, drift[i]);
      csv << name << "," << i << "," << csv_num(drift[i]) << "\n";
    }
  }
  if (sink) sink("criterion01_flow_conservation", csv.str());
  return {worst <= 1e-8, "max relative h2 drift " + fmt(worst) + " (tol 1e-8)"};
}

// --------------------------------------------------------------------------
// 2. Constant-coefficient rays are exactly affine.
// --------------------------------------------------------------------------
std::pair<bool, std::string> crit_free_flow(Tier, const CsvSink&) {
  double worst = 0.0;
  for (int variant = 0; variant < 2; ++variant) {
    Mat A0 = variant ? Mat::diag(2, {1.0, -1.0}) : Mat::identity(2);
    CoefficientField f = constant_field(
        2, A0, variant ? 1 : 2, 1.0,
        variant ? FieldKind::Ultrahyperbolic : FieldKind::Elliptic);
    for (const PhasePoint& s : random_seeds(2, 16, 2.0, 7)) {
      PhasePoint end = flow_point(f, s, 10.0);
      Vec want = add(s.x, scale(matvec(A0, s.xi, 2), 20.0, 2), 2);
      worst = std::max(worst, norm(sub(end.x, want, 2), 2));
      worst = std::max(worst, norm(sub(end.xi, s.xi, 2), 2));
    }
  }
  return {worst <= 1e-9, "max endpoint error " + fmt(worst) + " (tol 1e-9)"};
}

// --------------------------------------------------------------------------
// 3. Uniform non-trapping of the truncated family.
// --------------------------------------------------------------------------
std::pair<bool, std::string> crit_nontrapping(Tier tier, const CsvSink& sink) {
  CoefficientField base = builtin_field("ultrahyperbolic-bump");
  int n_seeds = tier == Tier::Full ? 256 : 96;
  double tol = tier == Tier::Full ? 1e-10 : 1e-8;
  std::vector<PhasePoint> seeds = random_seeds(2, n_seeds, 2.0, 31);

  std::ostringstream csv;
  csv << "R,escaped,total,c2_min,c2_max_ratio,dyadic_max\n";
  bool all_escaped = true;
  double dyadic_worst = 0.0;
  std::vector<double> c2_per_R;
  for (double R : {8.0, 16.0, 32.0}) {
    CoefficientField fR = truncate(base, R, plateau_profile(1.0, 2.0));
    auto verdicts = nontrapping_probe(fR, seeds, 50.0, 200.0, tol);
    int escaped = 0;
    for (const auto& v : verdicts) escaped += v.escaped ? 1 : 0;
    all_escaped = all_escaped && escaped == n_seeds;

    double c2_min = 1e300, dy = 0.0;
    TraceOptions opt;
    opt.tol = tol;
    opt.stop_radius = 70.0;
    std::vector<double> c2s(16, 1e300), dys(16, 0.0);
    parallel_for(16, [&](std::size_t i) {
      RayTrajectory traj = trace_ray(fR, seeds[i], 0.0, 60.0, opt);
      auto s_esc = escape_time(fR, traj, 8.0);
      if (s_esc)
        c2s[i] = escape_quadratic_constant(fR, traj, *s_esc, 8.0);
      DyadicOccupation occ = dyadic_occupation(traj, 20.0);
      for (int k = 0; k <= 8; ++k) dys[i] = std::max(dys[i], occ.ratio(k));
    });
    for (int i = 0; i < 16; ++i) {
      if (c2s[i] < 1e299) c2_min = std::min(c2_min, c2s[i]);
      dy = std::max(dy, dys[i]);
    }
    dyadic_worst = std::max(dyadic_worst, dy);
    c2_per_R.push_back(c2_min);
    csv << R << "," << escaped << "," << n_seeds << "," << csv_num(c2_min) << ",,"
        << csv_num(dy) << "\n";
  }
  double c_lo = *std::min_element(c2_per_R.begin(), c2_per_R.end());
  double c_hi = *std::max_element(c2_per_R.begin(), c2_per_R.end());
  bool c_ok = c_lo > 0.0 && c_hi / c_lo <= 2.0;
  bool dy_ok = dyadic_worst <= 5.0;
  if (sink) sink("criterion03_nontrapping", csv.str());
  return {all_escaped && c_ok && dy_ok,
          std::string(all_escaped ? "all seeds escaped" : "TRAPPED SEEDS") +
              ", c2 spread " + fmt(c_hi / c_lo) + " (cap 2), dyadic max " +
              fmt(dyadic_worst) + " (cap 5)"};
}

// --------------------------------------------------------------------------
// 4. Doi escape inequality with a grid-stable constant.
// --------------------------------------------------------------------------
std::pair<bool, std::string> crit_doi(Tier tier, const CsvSink& sink) {
  int d1 = 8, d2 = tier == Tier::Full ? 16 : 12;
  auto build_grid = [](const std::vector<double>& rx, const std::vector<double>& rk,
                       int dirs) {
    std::vector<PhasePoint> g;
    for (double a : rx)
      for (const Vec& xd : sphere_directions(2, dirs))
        for (double b : rk)
          for (const Vec& kd : sphere_directions(2, dirs))
            g.push_back({scale(xd, a, 2), scale(kd, b, 2)});
    return g;
  };
  std::vector<PhasePoint> base = build_grid({0.5, 2.0, 5.0, 8.0}, {2.0, 8.0, 32.0}, d1);
  std::vector<PhasePoint> dense =
      build_grid({0.5, 1.2, 2.0, 3.5, 5.0, 8.0}, {2.0, 4.0, 8.0, 16.0, 32.0}, d2);

  std::ostringstream csv;
  csv << "field,min_slack,fitted_c,fitted_c_dense,c2\n";
  bool ok = true;
  std::string detail;
  for (const char* name : {"elliptic-bump", "ultrahyperbolic-bump"}) {
    CoefficientField f = builtin_field(name);
    ScaledDoiSymbol scaled = doi_symbol_autoscaled(f, 2.0, doi_profiles(), 2, base);
    EscapeReport rep2 = verify_escape_inequality(scaled.p4, f, 2, dense);
    double c1 = scaled.report.fitted_c, c2v = rep2.fitted_c;
    bool slack_ok = scaled.report.min_slack > 0.0;
    bool stable = std::abs(c2v - c1) <= 0.1 * std::max(std::max(c1, c2v), 1.0);
    ok = ok && slack_ok && stable;
    csv << name << "," << csv_num(scaled.report.min_slack) << "," << csv_num(c1)
        << "," << csv_num(c2v) << "," << csv_num(scaled.c2) << "\n";
    detail += std::string(name) + ": slack " + fmt(scaled.report.min_slack) +
              ", c " + fmt(c1) + "->" + fmt(c2v) + "; ";
  }
  if (sink) sink("criterion04_doi_inequality", csv.str());
  return {ok, detail + "(c stability 10%, floor 1)"};
}

// --------------------------------------------------------------------------
// 5. Integrating-factor cancellation per xi-octave.
// --------------------------------------------------------------------------
std::pair<bool, std::string> crit_cancellation(Tier tier, const CsvSink& sink) {
  CoefficientField fR =
      truncate(builtin_field("ultrahyperbolic-bump"), 8.0, plateau_profile(1.0, 2.0));
  Symbol b1;
  b1.dim = 2;
  b1.order_m = 1.0;
  b1.parity = Parity::Odd;
  b1.class_tag = "classical";
  b1.evaluate = [](const Vec& x, const Vec& xi) {
    return Complex(-std::exp(-norm2(x, 2)) * (xi[0] + 0.5 * xi[1]), 0.0);
  };
  IntegratingFactorOptions opt;
  if (tier == Tier::Fast) opt.smooth_steps = 4000;
  IntegratingFactorFamily fam =
      integrating_factor(fR, b1, 0.0, rising_profile(1.0, 2.0), opt);

  std::vector<PhasePoint> probes;
  std::vector<Vec> xs = {vec2(0.0, 0.0), vec2(-0.8, 0.4), vec2(0.6, -0.3),
                         vec2(1.5, 1.0)};
  std::vector<Vec> dirs = {vec2(1.0, 0.0), vec2(0.6, 0.8)};
  for (const Vec& x : xs)
    for (const Vec& d : dirs) probes.push_back({x, d});

  std::vector<double> mags = {4.0, 8.0, 16.0, 32.0};
  auto rows = verify_cancellation(fam, fR, mags, probes);
  std::ostringstream csv;
  csv << "xi_mag,res_p_even,res_k\n";
  bool ok = true;
  std::string detail = "residuals";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    csv << rows[i].xi_mag << "," << csv_num(rows[i].res_p_even) << ","
        << csv_num(rows[i].res_k) << "\n";
    detail += " " + fmt(rows[i].res_p_even);
    if (i > 0) ok = ok && rows[i].res_p_even <= 0.5 * rows[i - 1].res_p_even;
  }
  if (sink) sink("criterion05_cancellation", csv.str());
  return {ok, detail + " (>=2x decay per octave)"};
}

// --------------------------------------------------------------------------
// 6. Operator-norm stability across resolutions.
// --------------------------------------------------------------------------
std::pair<bool, std::string> crit_operator_norm(Tier, const CsvSink& sink) {
  Symbol bh = hyperbolic_test_symbol();
  std::ostringstream csv;
  csv << "N,norm,converged\n";
  double lo = 1e300, hi = 0.0;
  for (int N : {32, 48, 64}) {
    OperatorNormEstimate est =
        operator_norm_estimate(bh, make_grid(2, 20.0, N), 60, 7);
    lo = std::min(lo, est.value);
    hi = std::max(hi, est.value);
    csv << N << "," << csv_num(est.value) << "," << est.converged << "\n";
  }
  if (sink) sink("criterion06_operator_norm", csv.str());
  return {hi / lo <= 1.2,
          "norms in [" + fmt(lo) + ", " + fmt(hi) + "], spread " + fmt(hi / lo) +
              " (cap 1.2)"};
}

// --------------------------------------------------------------------------
// 7. Light-cone lower bound and non-characteristic decay.
// --------------------------------------------------------------------------
std::pair<bool, std::string> crit_light_cone(Tier tier, const CsvSink& sink) {
  BoxGrid g = make_grid(2, 32.0, tier == Tier::Full ? 192 : 128);
  GridField u = make_field(g, [](const Vec& x) {
    return Complex(std::exp(-2.0 * norm2(x, 2)), 0.0);
  });
  GridField v = apply_pdo(hyperbolic_test_symbol(), u);

  double inv = 1.0 / std::sqrt(2.0);
  std::vector<Vec> dirs = {vec2(inv, inv), vec2(inv, -inv), vec2(1.0, 0.0)};
  std::vector<double> radii = {10.0, 10.9, 11.9, 12.8};
  auto probes = decay_probe(v, dirs, radii);

  std::ostringstream csv;
  csv << "direction,radius,magnitude,scaled\n";
  double band_lo = 1e300, band_hi = 0.0;
  for (int d = 0; d < 2; ++d)
    for (const auto& row : probes[d].rows) {
      double s = row.magnitude * row.radius;
      band_lo = std::min(band_lo, s);
      band_hi = std::max(band_hi, s);
      csv << d << "," << row.radius << "," << csv_num(row.magnitude) << ","
          << csv_num(s) << "\n";
    }
  for (const auto& row : probes[2].rows)
    csv << "2," << row.radius << "," << csv_num(row.magnitude) << ",\n";
  double noncha = probes[2].fitted_exponent;
  if (sink) sink("criterion07_light_cone", csv.str());
  bool ok = band_hi / band_lo <= 4.0 && noncha >= 3.0;
  return {ok, "cone band ratio " + fmt(band_hi / band_lo) +
                  " (cap 4), non-characteristic exponent " + fmt(noncha) +
                  " (floor 3)"};
}

// --------------------------------------------------------------------------
// 8. Degenerate-direction exponential growth.
// --------------------------------------------------------------------------
std::pair<bool, std::string> crit_mizohata(Tier, const CsvSink& sink) {
  BoxGrid g = make_grid(1, 4.0 * M_PI, 512);
  std::ostringstream csv;
  csv << "lambda,t,growth,reference,unitary_growth\n";
  bool ok = true;
  double worst_rel = 0.0, worst_unit = 0.0;
  for (double lambda : {8.0, 16.0, 32.0}) {
    auto rows = mizohata_blowup_demo(lambda, 0.5, g, 4);
    auto unit = mizohata_blowup_demo(lambda, 0.5, g, 4, false);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      double rel = std::abs(rows[i].growth - rows[i].reference) / rows[i].reference;
      worst_rel = std::max(worst_rel, rel);
      worst_unit = std::max(worst_unit, std::abs(unit[i].growth - 1.0));
      ok = ok && rel <= 0.15;
      csv << lambda << "," << rows[i].t << "," << csv_num(rows[i].growth) << ","
          << csv_num(rows[i].reference) << "," << csv_num(unit[i].growth) << "\n";
    }
  }
  ok = ok && worst_unit <= 1e-6;
  if (sink) sink("criterion08_mizohata", csv.str());
  return {ok, "max |growth/e^{lt} - 1| = " + fmt(worst_rel) +
                  " (tol 0.15), unitary defect " + fmt(worst_unit) + " (tol 1e-6)"};
}

// --------------------------------------------------------------------------
// 9. Smoothing ratio flat in packet frequency and stable in dt.
// --------------------------------------------------------------------------
std::pair<bool, std::string> crit_smoothing(Tier tier, const CsvSink& sink) {
  std::vector<double> freqs =
      tier == Tier::Full ? std::vector<double>{4.0, 8.0, 16.0, 32.0}
                         : std::vector<double>{4.0, 8.0, 16.0};
  // Frequency-scaled horizon: group speed grows like 2*a*lambda, so a fixed T
  // truncates the slow packets' transit through the <x>^-2 window and lets the
  // fast ones wrap the torus and re-enter it.  T = 1.6/lambda gives every
  // packet the same ~4-unit traversal, well inside the box.
  auto horizon = [](double lambda) { return 1.6 / lambda; };
  // Rays conserve xi^T A xi, so a packet launched at |xi| = lambda inside the
  // bump (a up to 2) exits at |xi| up to lambda*sqrt(2); the grid must hold
  // that band or the outgoing wave is spectrally clipped.  Ratios are
  // grid-converged per lambda, so each lambda runs on the cheapest adequate N.
  auto grid_for = [tier](double lambda) {
    int n = tier == Tier::Full ? (lambda >= 32.0 ? 256 : 192)
                               : (lambda >= 16.0 ? 160 : 128);
    return make_grid(2, 8.0, n);
  };

  std::ostringstream csv;
  csv << "field,lambda,ratio,ratio_half_dt\n";
  bool ok = true;
  std::string detail;
  for (const char* name : {"elliptic-bump", "ultrahyperbolic-bump"}) {
    LinearOperatorSpec spec;
    spec.field = builtin_field(name);
    add_schwartz_b1(spec, 2, 0.15);
    double lo = 1e300, hi = 0.0, worst_dt = 0.0;
    for (double lambda : freqs) {
      BoxGrid g = grid_for(lambda);
      GridField u0 = wave_packet(g, lambda);
      EvolveConfig cfg;
      cfg.stride = 4;
      // Keep the packet's own phase advance per step small: at the stability
      // bound a lambda = 32 mode turns ~0.8 rad/step and RK4's theta^6/72
      // amplitude defect damps it ~50% over the horizon.
      cfg.dt_safety = std::min(1.0, 256.0 / (lambda * lambda));
      double T = horizon(lambda);
      EvolutionTrace tr = evolve_linear(u0, spec, T, cfg);
      double r = smoothing_functional(tr, 0.0, 2).ratio;
      EvolveConfig half = cfg;
      half.dt = tr.dt * 0.5;
      double r2 =
          smoothing_functional(evolve_linear(u0, spec, T, half), 0.0, 2).ratio;
      lo = std::min(lo, r);
      hi = std::max(hi, r);
      worst_dt = std::max(worst_dt, std::abs(r2 - r) / r);
      csv << name << "," << lambda << "," << csv_num(r) << "," << csv_num(r2)
          << "\n";
    }
    ok = ok && hi / lo <= 2.0 && worst_dt <= 0.1;
    detail += std::string(name) + ": spread " + fmt(hi / lo) + ", dt drift " +
              fmt(worst_dt) + "; ";
  }
  if (sink) sink("criterion09_smoothing", csv.str());
  return {ok, detail + "(caps 2 and 0.1)"};
}

// --------------------------------------------------------------------------
// 10. Quarter-gain dichotomy.
// --------------------------------------------------------------------------
std::pair<bool, std::string> crit_quarter_gain(Tier tier, const CsvSink& sink) {
  BoxGrid g = tier == Tier::Full ? make_grid(2, 12.0, 384) : make_grid(2, 12.0, 320);
  std::vector<double> freqs = {4.0, 8.0, 16.0, 32.0};
  auto uh = gain_exponent_probe(GainVariant::Ultrahyperbolic, freqs, 0.25, g, 33);
  auto el = gain_exponent_probe(GainVariant::Elliptic, freqs, 0.25, g, 33);

  std::ostringstream csv;
  csv << "variant,lambda,ratio_quarter,ratio_half\n";
  auto spread = [](const std::vector<GainRow>& rows, bool half) {
    double lo = 1e300, hi = 0.0;
    for (const GainRow& r : rows) {
      double v = half ? r.ratio_half : r.ratio_quarter;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    return hi / lo;
  };
  bool increasing = true;
  for (std::size_t i = 1; i < uh.size(); ++i)
    increasing = increasing && uh[i].ratio_half > uh[i - 1].ratio_half;
  double total = uh.back().ratio_half / uh.front().ratio_half;
  for (const auto& r : uh)
    csv << "ultrahyperbolic," << r.freq << "," << csv_num(r.ratio_quarter) << ","
        << csv_num(r.ratio_half) << "\n";
  for (const auto& r : el)
    csv << "elliptic," << r.freq << "," << csv_num(r.ratio_quarter) << ","
        << csv_num(r.ratio_half) << "\n";
  if (sink) sink("criterion10_quarter_gain", csv.str());
  bool ok = increasing && total >= 2.0 && spread(uh, false) <= 2.0 &&
            spread(el, true) <= 2.0;
  return {ok, "uh half-gain growth " + fmt(total) + " (floor 2, monotone " +
                  (increasing ? "yes" : "NO") + "), uh quarter spread " +
                  fmt(spread(uh, false)) + ", elliptic half spread " +
                  fmt(spread(el, true)) + " (caps 2)"};
}

// --------------------------------------------------------------------------
// 11. Weight-commutator identity is second order in the FD step.
// --------------------------------------------------------------------------
std::pair<bool, std::string> crit_weight_commutator(Tier, const CsvSink& sink) {
  // L = 12 pushes the operator kernel's periodic image below 2e-7, well
  // under the h^2 residuals; smaller boxes leave an h-independent floor
  // that masks the rate.
  BoxGrid g = make_grid(2, 12.0, 96);
  GridField u = make_field(g, [](const Vec& x) {
    return std::polar(std::exp(-norm2(x, 2)), 3.0 * x[0]);
  });
  Symbol p1 = bracket_power_symbol(2, 1.0);
  Symbol p2;
  p2.dim = 2;
  p2.order_m = 1.0;
  p2.parity = Parity::Odd;
  p2.metadata["x-independent"] = "true";
  p2.evaluate = [](const Vec&, const Vec& xi) { return Complex(0.0, xi[0]); };

  std::vector<std::array<int, kMaxDim>> alphas = {
      {1, 0, 0}, {0, 1, 0}, {2, 0, 0}, {1, 1, 0}, {0, 2, 0}};
  std::ostringstream csv;
  csv << "symbol,alpha0,alpha1,residual_h,residual_h2,order\n";
  double min_order = 1e300;
  double h = 0.1;
  int idx = 0;
  for (const Symbol* p : {&p1, &p2}) {
    for (const auto& a : alphas) {
      double r1 = weight_commutator_residual(*p, a, u, h);
      double r2 = weight_commutator_residual(*p, a, u, 0.5 * h);
      // Linear-in-xi symbols satisfy the identity exactly; what remains is
      // the h-independent periodic-image floor (< 1e-7 on this box, two
      // decades under the smallest genuine h^2 residual), which carries no
      // order information.
      double order = (r1 <= 1e-7) ? 2.0 : std::log2(r1 / r2);
      min_order = std::min(min_order, order);
      csv << idx << "," << a[0] << "," << a[1] << "," << csv_num(r1) << ","
          << csv_num(r2) << "," << csv_num(order) << "\n";
    }
    ++idx;
  }
  if (sink) sink("criterion11_weight_commutator", csv.str());
  return {min_order >= 1.9,
          "min measured order " + fmt(min_order) + " (floor 1.9)"};
}

// --------------------------------------------------------------------------
// 12. Picard contraction and dual-method agreement.
// --------------------------------------------------------------------------
std::pair<bool, std::string> crit_picard(Tier, const CsvSink& sink) {
  NonlinearProblem p = model_nls_problem(2);
  BoxGrid g = make_grid(2, 8.0, 64);
  GridField u0 = make_field(g, [](const Vec& x) {
    return Complex(std::exp(-0.5 * norm2(x, 2)), 0.0);
  });
  double a = 0.1 / l2_norm(u0);
  for (Complex& v : u0.values) v *= a;

  SolveResult res = solve_nonlinear(p, u0, 0.1, 1e-8, 12);
  bool certified = res.report.certified && res.report.certified_T > 0.0;
  ComparisonRecord rec =
      crosscheck_direct(p, u0, certified ? res.report.certified_T : 0.1, 1e-8, 20);

  std::ostringstream csv;
  csv << "delta\n";
  for (double d : res.report.deltas) csv << csv_num(d) << "\n";
  if (sink) sink("criterion12_picard", csv.str());
  bool ok = certified && rec.available && rec.dev_final <= 1e-4;
  return {ok, "certified T " + fmt(res.report.certified_T) + ", ratios<=1/2 " +
                  (res.report.certified ? "yes" : "NO") + ", direct deviation " +
                  (rec.available ? fmt(rec.dev_final) : "unavailable") +
                  " (tol 1e-4)"};
}

// --------------------------------------------------------------------------
// 13. Escape survives small perturbations; the trapped control is caught.
// --------------------------------------------------------------------------
std::pair<bool, std::string> crit_perturbation(Tier tier, const CsvSink& sink) {
  ScenarioConfig cfg;
  cfg.builtin = "ultrahyperbolic-bump";
  cfg.epsilon = 0.01;
  CoefficientField pert = scenario_field(cfg);
  int n_seeds = tier == Tier::Full ? 128 : 64;
  auto seeds = random_seeds(2, n_seeds, 2.0, 57);
  auto verdicts = nontrapping_probe(pert, seeds, 20.0, 200.0, 1e-8);
  int escaped = 0;
  for (const auto& v : verdicts) escaped += v.escaped ? 1 : 0;

  // Negative control: gallery orbits seeded tangentially on the well ring.
  CoefficientField gallery = builtin_field("trapped-gallery");
  std::vector<PhasePoint> ring = random_seeds(2, 16, 2.0, 58);
  for (int i = 0; i < 16; ++i) {
    double th = 2.0 * M_PI * i / 16.0;
    ring.push_back({vec2(3.0 * std::cos(th), 3.0 * std::sin(th)),
                    vec2(-std::sin(th), std::cos(th))});
  }
  auto gv = nontrapping_probe(gallery, ring, 20.0, 100.0, 1e-8);
  int undetermined = 0;
  for (const auto& v : gv) undetermined += v.escaped ? 0 : 1;

  std::ostringstream csv;
  csv << "case,escaped,total\n";
  csv << "perturbed," << escaped << "," << n_seeds << "\n";
  csv << "gallery," << (static_cast<int>(gv.size()) - undetermined) << ","
      << gv.size() << "\n";
  if (sink) sink("criterion13_perturbation", csv.str());
  bool ok = escaped == n_seeds && undetermined >= 1;
  return {ok, "perturbed escapes " + std::to_string(escaped) + "/" +
                  std::to_string(n_seeds) + ", gallery undetermined " +
                  std::to_string(undetermined) + " (need >=1)"};
}

// --------------------------------------------------------------------------
// 14. Composition remainders bounded and order-improving.
// --------------------------------------------------------------------------
std::pair<bool, std::string> crit_composition(Tier, const CsvSink& sink) {
  BoxGrid g = make_grid(1, 8.0, 64);
  Symbol b;
  b.dim = 1;
  b.order_m = -0.5;
  b.evaluate = [](const Vec& x, const Vec& xi) {
    return Complex((1.0 + 0.5 * std::exp(-x[0] * x[0])) / std::sqrt(bracket(xi[0])),
                   0.0);
  };
  Symbol b2 = b;
  b2.evaluate = [](const Vec& x, const Vec& xi) {
    return Complex(
        (1.0 + 0.3 * std::exp(-0.5 * x[0] * x[0])) / std::sqrt(bracket(xi[0])), 0.0);
  };
  auto phi = [](const Vec& x) { return Complex(std::exp(-0.5 * x[0] * x[0]), 0.0); };
  std::array<int, kMaxDim> alpha = {1, 0, 0};

  std::ostringstream csv;
  csv << "variant,probe,residual_N1,residual_N2\n";
  const char* names[] = {"left-weight", "right-weight", "adjoint", "product"};
  bool ok = true;
  std::string detail;
  for (int vi = 0; vi < 4; ++vi) {
    auto variant = static_cast<CompositionVariant>(vi);
    double max1 = 0.0, sum1 = 0.0, sum2 = 0.0;
    for (int i = 0; i < 10; ++i) {
      GridField u = band_limited_probe(g, 211 + i, 5.0);
      double r1 = composition_residual(phi, alpha, b, 1, u, variant, &b2);
      double r2 = composition_residual(phi, alpha, b, 2, u, variant, &b2);
      max1 = std::max(max1, r1);
      sum1 += r1;
      sum2 += r2;
      csv << names[vi] << "," << i << "," << csv_num(r1) << "," << csv_num(r2)
          << "\n";
    }
    ok = ok && max1 <= 1.0 && sum2 < sum1;
    detail += std::string(names[vi]) + ": max " + fmt(max1) + ", mean " +
              fmt(sum1 / 10) + "->" + fmt(sum2 / 10) + "; ";
  }
  if (sink) sink("criterion14_composition", csv.str());
  return {ok, detail + "(bound 1, order-2 mean must drop)"};
}

}  // namespace

std::vector<CriterionResult> run_acceptance(Tier tier, const CsvSink& sink,
                                            int only_index) {
  std::vector<CriterionResult> out;
  auto want = [only_index](int k) { return only_index == 0 || only_index == k; };
  if (want(1)) out.push_back(timed(1, "flow-conservation",
                      [&] { return crit_flow_conservation(tier, sink); }));
  if (want(2)) out.push_back(timed(2, "free-flow-exactness", [&] { return crit_free_flow(tier, sink); }));
  if (want(3)) out.push_back(timed(3, "uniform-non-trapping", [&] { return crit_nontrapping(tier, sink); }));
  if (want(4)) out.push_back(timed(4, "doi-inequality", [&] { return crit_doi(tier, sink); }));
  if (want(5)) out.push_back(timed(5, "cancellation-decay", [&] { return crit_cancellation(tier, sink); }));
  if (want(6)) out.push_back(timed(6, "operator-norm-stability",
                      [&] { return crit_operator_norm(tier, sink); }));
  if (want(7)) out.push_back(timed(7, "light-cone-band", [&] { return crit_light_cone(tier, sink); }));
  if (want(8)) out.push_back(timed(8, "degenerate-growth", [&] { return crit_mizohata(tier, sink); }));
  if (want(9)) out.push_back(timed(9, "smoothing-ratio", [&] { return crit_smoothing(tier, sink); }));
  if (want(10)) out.push_back(timed(10, "quarter-gain-dichotomy",
                      [&] { return crit_quarter_gain(tier, sink); }));
  if (want(11)) out.push_back(timed(11, "weight-commutator-order",
                      [&] { return crit_weight_commutator(tier, sink); }));
  if (want(12)) out.push_back(timed(12, "picard-contraction", [&] { return crit_picard(tier, sink); }));
  if (want(13)) out.push_back(timed(13, "perturbation-stability",
                      [&] { return crit_perturbation(tier, sink); }));
  if (want(14)) out.push_back(timed(14, "composition-remainders",
                      [&] { return crit_composition(tier, sink); }));
  return out;
}

std::string format_acceptance_line(const CriterionResult& r) {
  char head[64];
  std::snprintf(head, sizeof(head), "criterion %02d [%s] ", r.index,
                r.pass ? "pass" : "FAIL");
  char tail[32];
  std::snprintf(tail, sizeof(tail), " (%.1fs)", r.seconds);
  return head + r.name + ": " + r.detail + tail;
}

}  // namespace schrodlab
