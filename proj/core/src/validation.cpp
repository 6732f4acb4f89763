#include "nescape/validation.hpp"

#include <algorithm>
#include <cmath>

#include "nescape/asymptotics.hpp"
#include "nescape/geometry.hpp"
#include "nescape/greens.hpp"
#include "nescape/helmholtz.hpp"
#include "nescape/linalg.hpp"
#include "nescape/mcsim.hpp"
#include "nescape/rng.hpp"

namespace nescape::validation {

bool ValidationReport::all_pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.pass; });
}

namespace {

const double kPi = std::acos(-1.0);

// References computed once at high precision from the closed forms.
const double kNetBallCorrected = 11.2395038762973; // unit ball, a = 0.1, D = 1
const double kNetBallLeading = 10.4719755119660;
const double kLambdaRef = 0.0889718986715127; // 1 / corrected

struct Harness {
  Suite suite;
  std::uint64_t seed;
  const ToleranceOverride& ovr;
  std::vector<ReportRow> rows;

  bool quick() const { return suite == Suite::quick; }

  void push(ReportRow r) {
    if (ovr) {
      if (auto t = ovr(r.id)) r.tolerance = *t;
    }
    r.pass = std::abs(r.rel_error) <= r.tolerance;
    rows.push_back(std::move(r));
  }

  // computed vs a nonzero reference, relative convention.
  void relative(const std::string& id, const std::string& prov, double reference,
                double computed, double tol) {
    ReportRow r;
    r.id = id;
    r.provenance = prov;
    r.reference = reference;
    r.computed = computed;
    r.rel_error = (computed - reference) / std::abs(reference);
    r.tolerance = tol;
    push(std::move(r));
  }

  // a residual that should vanish; absolute convention, reference 0.
  void residual(const std::string& id, const std::string& prov, double computed, double tol) {
    ReportRow r;
    r.id = id;
    r.provenance = prov + " (absolute residual)";
    r.computed = computed;
    r.rel_error = computed;
    r.tolerance = tol;
    push(std::move(r));
  }

  // a one-sided constraint; rel_error is the violation, clamped at zero.
  void constraint(const std::string& id, const std::string& prov, double violation) {
    ReportRow r;
    r.id = id;
    r.provenance = prov + " (one-sided constraint)";
    r.computed = violation;
    r.rel_error = std::max(0.0, violation);
    r.tolerance = 0;
    push(std::move(r));
  }
};

void criterion1_patch(Harness& h) {
  const double cases[3][2] = {{1, 1}, {1, 0}, {2, 1}};
  std::vector<double> offsets;
  for (int i = 0; i < 8; ++i) offsets.push_back(1e-4 * std::pow(100.0, i / 7.0));
  for (const auto& c : cases) {
    greens::LogFit fit = greens::patch_log_slope(c[0], c[1], 0.1, offsets);
    h.relative("1-patch-slope-k" + std::to_string(static_cast<int>(c[0])) +
                   std::to_string(static_cast<int>(c[1])),
               "singular-part coefficient (k1+k2)/8pi, closed-form arithmetic",
               (c[0] + c[1]) / (8.0 * kPi), fit.slope, 0.05);
  }
}

void criterion2_ball_neumann(Harness& h) {
  greens::LogFit fit = greens::boundary_log_coefficient_ball(1.0, 64);
  h.relative("2-ball-log-coefficient", "log-layer coefficient 1/(4 pi R), closed-form",
             1.0 / (4.0 * kPi), fit.slope, 0.02);

  // Interior equation: the Laplacian of the kernel away from the source must
  // equal the uniform compensating density 1/|V|. Second-order central
  // differences; the probe separation keeps the difference stencil honest.
  rng::Stream st(h.seed, 901);
  const double R = 1.0, hstep = 5e-4;
  const double target = 1.0 / (4.0 / 3.0 * kPi);
  double worst = 0;
  for (int k = 0; k < 50; ++k) {
    Vec3 x{0, 0, 0}, y{0, 0, 0};
    for (;;) {
      auto draw = [&](rng::Stream& s) {
        for (;;) {
          Vec3 p{2 * s.uniform() - 1, 2 * s.uniform() - 1, 2 * s.uniform() - 1};
          if (norm2(p) < 1.0) return p * 0.75;
        }
      };
      x = draw(st);
      y = draw(st);
      if (norm(x - y) > 0.3) break;
    }
    double lap = -6.0 * greens::neumann_ball(x, y, R, 64);
    for (int ax = 0; ax < 3; ++ax) {
      Vec3 e{0, 0, 0};
      e[ax] = hstep;
      lap += greens::neumann_ball(x, y + e, R, 64) + greens::neumann_ball(x, y - e, R, 64);
    }
    lap /= hstep * hstep;
    worst = std::max(worst, std::abs(lap / target - 1.0));
  }
  h.residual("2-ball-pde-residual",
             "difference-stencil Laplacian against the uniform source density", worst, 1e-3);

  // Reflecting condition: the radial derivative at the sphere vanishes.
  // One-sided three-point stencil from inside.
  double worst_d = 0;
  const double hd = 1e-4;
  for (int k = 0; k < 50; ++k) {
    auto unit = [&] {
      for (;;) {
        Vec3 p{2 * st.uniform() - 1, 2 * st.uniform() - 1, 2 * st.uniform() - 1};
        double n2 = norm2(p);
        if (n2 > 0.01 && n2 < 1.0) return p / std::sqrt(n2);
      }
    };
    Vec3 xhat = unit();
    Vec3 y = unit() * 0.5;
    double n0 = greens::neumann_ball(xhat * R, y, R, 64);
    double n1 = greens::neumann_ball(xhat * (R - hd), y, R, 64);
    double n2 = greens::neumann_ball(xhat * (R - 2 * hd), y, R, 64);
    worst_d = std::max(worst_d, std::abs((3 * n0 - 4 * n1 + n2) / (2 * hd)));
  }
  h.residual("2-ball-boundary-derivative",
             "one-sided radial derivative on the reflecting sphere", worst_d, 1e-4);
}

void criterion3_capacitance(Harness& h) {
  const double cases[3][2] = {{1, 1}, {0.5, 1}, {0.01, 3}};
  const char* names[3] = {"3-capacitance-a1-c1", "3-capacitance-a05-c1", "3-capacitance-a001-c3"};
  for (int i = 0; i < 3; ++i) {
    const double a = cases[i][0], C = cases[i][1];
    helmholtz::DiskSolution sol = helmholtz::solve_disk(a, 0.0, C, 32);
    h.relative(names[i], "flat-disk capacitance, total flux -4 C a exactly", -4.0 * C * a,
               sol.total_flux, 1e-6);
  }
}

void criterion4_solver_net(Harness& h) {
  const double V = 4.0 / 3.0 * kPi;
  const double kappa = 2.0;
  double err[2] = {0, 0};
  const double as[2] = {0.03, 0.01};
  for (int i = 0; i < 2; ++i) {
    const double a = as[i];
    const std::string tag = i == 0 ? "a003" : "a001";
    double net = helmholtz::net_from_solver(V, a, 1.0, kappa, 40);
    h.relative("4-solver-net-" + tag, "two-term closed form for the unit ball",
               asymptotics::net_ball(1.0, a, 1.0).value, net, 0.01);

    const double vc = std::cbrt(V);
    const double a_s = a / vc, kappa_s = kappa * vc;
    const double H = -kappa_s / (8.0 * kPi);
    double f0 = helmholtz::solve_disk(a_s, 0.0, 1.0, 40).total_flux;
    double f1 = helmholtz::solve_disk(a_s, H, 1.0, 40).total_flux;
    double ratio = f1 / f0 - 1.0;
    double ref = helmholtz::analytic_g1_ratio(a_s, kappa_s);
    h.relative("4-flux-ratio-" + tag, "leading curvature correction (k/2pi) a log a",
               ref, ratio, 0.10);
    err[i] = std::abs(ratio - ref) / std::abs(ref);
  }
  h.constraint("4-flux-ratio-improves",
               "perturbation mismatch must shrink as the window shrinks", err[1] - err[0]);
}

struct NetRuns {
  mcsim::RunResult coarse, fine;
  mcsim::SimConfig cfg;
};

NetRuns run_ball_net(Harness& h) {
  NetRuns nr;
  mcsim::SimConfig& cfg = nr.cfg;
  cfg.domain = geometry::DomainDescriptor::ball(1.0);
  cfg.windows.push_back(
      geometry::make_cap_window(cfg.domain, Vec3{0, 0, 1}, 0.1, geometry::WindowRole::escape));
  cfg.diffusion = 1.0;
  cfg.trajectories = h.quick() ? 5000 : 100000;
  cfg.seed = h.seed + 11;
  cfg.allow_coarse_dt = h.quick(); // quick mode trades bias for speed
  cfg.dt = h.quick() ? 2e-4 : 1e-4;
  nr.coarse = mcsim::run_trajectories(cfg);
  cfg.dt *= 0.5;
  nr.fine = mcsim::run_trajectories(cfg);
  return nr;
}

void criterion56_net_mc(Harness& h) {
  NetRuns nr = run_ball_net(h);
  mcsim::EscapeStats sc = mcsim::stats_from_samples(nr.coarse, 1);
  mcsim::EscapeStats sf = mcsim::stats_from_samples(nr.fine, 1);
  mcsim::Extrapolated ex = mcsim::richardson_extrapolate(sc, sf);

  double tol = 0.05;
  if (h.quick()) tol = std::max(tol, 4.0 * ex.std_error / kNetBallCorrected);
  h.relative("5-richardson-net",
             "two-term closed form; step-halved Monte Carlo, sqrt(dt) bias removed",
             kNetBallCorrected, ex.mean, tol);
  h.constraint("5-log-correction-detected",
               "extrapolated mean must sit closer to the corrected value than to the "
               "leading term",
               std::abs(ex.mean - kNetBallCorrected) - std::abs(ex.mean - kNetBallLeading));

  // The decay rate inherits the same sqrt(dt) time-stretch bias as the mean
  // (about -9% at the coarse step here), so the rate gets the identical
  // step-halving treatment: fit both runs, extrapolate the pair.
  auto fit_rate = [](const mcsim::RunResult& run) {
    std::vector<double> times;
    times.reserve(run.samples.size());
    for (const auto& s : run.samples) times.push_back(s.time);
    return mcsim::survival_fit(times, 12.5, 45.0, 10.47);
  };
  mcsim::SurvivalRate rc = fit_rate(nr.coarse);
  mcsim::SurvivalRate rf = fit_rate(nr.fine);
  const double c = 1.0 / (std::sqrt(2.0) - 1.0);
  const double lambda = rf.lambda + c * (rf.lambda - rc.lambda);
  const double lambda_se = std::sqrt((1.0 + c) * (1.0 + c) * rf.std_error * rf.std_error +
                                     c * c * rc.std_error * rc.std_error);
  double tol6 = 0.10;
  if (h.quick()) tol6 = std::max(tol6, 4.0 * lambda_se / kLambdaRef);
  h.relative("6-eigenvalue",
             "reciprocal of the corrected escape time; step-halved survival-decay fits",
             kLambdaRef, lambda, tol6);
}

void criterion7_leakage(Harness& h) {
  // Capture fractions carry an O(sqrt(dt)) deficit (steps hop over the thin
  // absorption shell), about -19% at dt 2e-6 for a 0.02 leak. Driving the
  // bias below the statistical error by step reduction alone is two orders
  // of magnitude in dt away, so both experiments use the coupled-pair
  // extrapolation instead; ratio 4 beats ratio 2 on paired variance because
  // its extrapolation weights are (2, -1) rather than (3.41, -2.41).
  const int ratio = 4;
  mcsim::SimConfig cfg;
  cfg.domain = geometry::DomainDescriptor::box(1.0, 1.0, 1.0);
  cfg.diffusion = 1.0;
  cfg.trajectories = h.quick() ? 4000 : 36000;
  cfg.seed = h.seed + 23;
  cfg.start = mcsim::StartMode::source_surface;
  cfg.source.push_back(geometry::make_face_window(cfg.domain, 2, +1, geometry::WindowRole::escape));
  cfg.windows.push_back(geometry::make_face_window(cfg.domain, 2, -1, geometry::WindowRole::target));
  cfg.dt = h.quick() ? 8e-6 : 2e-6; // fine member; the guard applies to it
  cfg.allow_coarse_dt = h.quick();

  // One leak halfway up a side wall: the sealed problem's density is linear
  // in height, so the capture fraction is 4 eps h.
  const double eps = 0.02;
  {
    mcsim::SimConfig one = cfg;
    one.windows.push_back(geometry::make_cap_window(one.domain, Vec3{0.5, 0, 0}, eps,
                                                    geometry::WindowRole::leak));
    mcsim::LeakageResult res = mcsim::leakage_extrapolated(one, ratio);
    const double f = res.fractions[1], se = res.std_errors[1];
    const double ref = 4.0 * eps * 0.5;
    double tol = h.quick() ? std::max(0.10, 4.0 * se / ref) : std::min(3.0 * se / ref, 0.10);
    h.relative("7-leak-fraction-single",
               "linear sealed-problem density: capture fraction 4 eps h", ref, f, tol);
  }
  // Two leaks at heights 1/4 and 3/4: fractions superpose. The band is 3
  // standard errors of the summed capture, so the paired indicator for
  // "either leak" is reduced directly; summing the per-window errors in
  // quadrature would ignore the (negative) competition covariance.
  {
    mcsim::SimConfig two = cfg;
    two.seed = h.seed + 29;
    two.windows.push_back(geometry::make_cap_window(two.domain, Vec3{0.5, 0, -0.25}, eps,
                                                    geometry::WindowRole::leak));
    two.windows.push_back(geometry::make_cap_window(two.domain, Vec3{-0.5, 0, 0.25}, eps,
                                                    geometry::WindowRole::leak));
    mcsim::CoupledRuns pair = mcsim::run_coupled_trajectories(two, ratio);
    const double c = 1.0 / (std::sqrt(static_cast<double>(ratio)) - 1.0);
    const double n = static_cast<double>(pair.fine.samples.size());
    double sum = 0, sumsq = 0;
    for (std::size_t i = 0; i < pair.fine.samples.size(); ++i) {
      const double y = (1.0 + c) * (pair.fine.samples[i].window >= 1 ? 1.0 : 0.0) -
                       c * (pair.coarse.samples[i].window >= 1 ? 1.0 : 0.0);
      sum += y;
      sumsq += y * y;
    }
    const double f = sum / n;
    const double se = std::sqrt(std::max(0.0, (sumsq - n * f * f) / (n - 1.0)) / n);
    const double ref = 4.0 * eps * (0.25 + 0.75);
    double tol = h.quick() ? std::max(0.10, 4.0 * se / ref) : 3.0 * se / ref;
    h.relative("7-leak-fraction-two",
               "superposed sealed-problem fractions 4 eps (h1 + h2)", ref, f, tol);
  }
}

void criterion8_properties(Harness& h) {
  // Determinism: the merged result may not depend on the worker count.
  {
    mcsim::SimConfig cfg;
    cfg.domain = geometry::DomainDescriptor::ball(1.0);
    cfg.windows.push_back(
        geometry::make_cap_window(cfg.domain, Vec3{0, 0, 1}, 0.1, geometry::WindowRole::escape));
    cfg.trajectories = h.quick() ? 200 : 400;
    cfg.seed = h.seed + 31;
    cfg.dt = 1e-4;
    cfg.workers = 1;
    mcsim::RunResult r1 = mcsim::run_trajectories(cfg);
    double worst = 0;
    for (int w : {4, 16}) {
      cfg.workers = w;
      mcsim::RunResult rw = mcsim::run_trajectories(cfg);
      for (std::size_t i = 0; i < r1.samples.size(); ++i) {
        worst = std::max(worst, std::abs(r1.samples[i].time - rw.samples[i].time));
        worst = std::max(worst,
                         std::abs(static_cast<double>(r1.samples[i].window -
                                                      rw.samples[i].window)));
      }
    }
    h.residual("8-determinism-workers", "bitwise agreement across 1, 4, 16 workers", worst, 0);

    mcsim::EscapeStats st = mcsim::stats_from_samples(r1, 1);
    std::size_t counted = st.censored;
    for (auto c : st.per_window_counts) counted += c;
    h.residual("8-conservation", "window counts plus censored must cover every trajectory",
               std::abs(static_cast<double>(counted) - static_cast<double>(st.n)), 0);
  }
  // Scaling covariance: the escape time is invariant under the length
  // rescaling that fixes the time unit.
  {
    const double s = 2.7;
    double base = asymptotics::net_general(1.0, 0.05, 1.0, 2.0).value;
    double scaled =
        asymptotics::net_general(s * s * s, s * 0.05, s * s * 1.0, 2.0 / s).value;
    h.residual("8-formula-scaling", "exact covariance of the two-term expansion",
               std::abs(scaled / base - 1.0), 1e-12);
  }
  // Solver grid convergence: halving the mesh must gain at least order 1.5.
  {
    double f16 = helmholtz::solve_disk(0.1, -0.3, 1.0, 16).total_flux;
    double f32 = helmholtz::solve_disk(0.1, -0.3, 1.0, 32).total_flux;
    double f64 = helmholtz::solve_disk(0.1, -0.3, 1.0, 64).total_flux;
    double d1 = std::abs(f16 - f32), d2 = std::abs(f32 - f64);
    double order = d2 < 1e-14 * std::abs(f64) ? 10.0 : std::log2(d1 / d2);
    h.constraint("8-grid-convergence", "empirical convergence order of the collocation flux",
                 1.5 - order);
  }
  // Planted log slope: the fitter must recover synthetic coefficients.
  {
    std::vector<double> offs, vals;
    for (int i = 0; i < 6; ++i) {
      double d = 1e-4 * std::pow(10.0, i * 0.6);
      offs.push_back(d);
      vals.push_back(0.37 + 0.81 * std::log(1.0 / d));
    }
    greens::LogFit fit = greens::fit_log_slope(offs, vals);
    h.residual("8-planted-log-slope", "synthetic data with a known slope",
               std::abs(fit.slope - 0.81), 1e-12);
  }
  // Planted exponential: the survival fitter must recover a known rate.
  {
    rng::Stream st(h.seed + 77, 0);
    const std::size_t n = h.quick() ? 8000 : 20000;
    std::vector<double> times;
    times.reserve(n);
    for (std::size_t i = 0; i < n; ++i) times.push_back(-std::log(st.uniform()) / 2.0);
    // The grid stops where hundreds are still alive: log of a near-empty tail
    // bin would tilt the fitted slope.
    mcsim::SurvivalRate sr = mcsim::survival_fit(times, 0.5, 2.0, 0.5);
    h.relative("8-planted-exponential", "synthetic exponential with rate 2", 2.0, sr.lambda,
               std::max(0.05, 4.0 * sr.std_error / 2.0));
  }
}

} // namespace

ValidationReport run_validation(Suite suite, std::uint64_t seed,
                                const ToleranceOverride& override_tol) {
  Harness h{suite, seed, override_tol, {}};
  criterion1_patch(h);
  criterion2_ball_neumann(h);
  criterion3_capacitance(h);
  criterion4_solver_net(h);
  criterion56_net_mc(h);
  criterion7_leakage(h);
  criterion8_properties(h);
  ValidationReport rep;
  rep.suite = suite;
  rep.seed = seed;
  rep.rows = std::move(h.rows);
  return rep;
}

} // namespace nescape::validation
