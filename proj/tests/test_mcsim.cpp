#include "doctest.h"

#include <cmath>
#include <cstddef>
#include <vector>

#include "nescape/errors.hpp"
#include "nescape/geometry.hpp"
#include "nescape/mcsim.hpp"

using namespace nescape;
using namespace nescape::mcsim;

namespace {

SimConfig ball_escape(double a, std::size_t n, std::uint64_t seed) {
  SimConfig cfg;
  cfg.domain = geometry::DomainDescriptor::ball(1.0);
  cfg.windows.push_back(
      geometry::make_cap_window(cfg.domain, Vec3{0, 0, 1}, a, geometry::WindowRole::escape));
  cfg.trajectories = n;
  cfg.seed = seed;
  cfg.workers = 1;
  return cfg;
}

SimConfig box_leakage(std::size_t n, std::uint64_t seed, double leak_radius) {
  SimConfig cfg;
  cfg.domain = geometry::DomainDescriptor::box(1.0, 1.0, 1.0);
  cfg.trajectories = n;
  cfg.seed = seed;
  cfg.workers = 1;
  cfg.start = StartMode::source_surface;
  cfg.source.push_back(
      geometry::make_face_window(cfg.domain, 2, +1, geometry::WindowRole::escape));
  cfg.windows.push_back(
      geometry::make_face_window(cfg.domain, 2, -1, geometry::WindowRole::target));
  cfg.windows.push_back(geometry::make_cap_window(cfg.domain, Vec3{0.5, 0, 0}, leak_radius,
                                                  geometry::WindowRole::leak));
  return cfg;
}

} // namespace

TEST_CASE("trajectories are pure functions of seed and index") {
  SimConfig cfg = ball_escape(0.1, 150, 4242);
  cfg.dt = 1e-4;
  const FirstPassage a = sample_first_passage(cfg, 17);
  const FirstPassage b = sample_first_passage(cfg, 17);
  CHECK(a.time == b.time);
  CHECK(a.window == b.window);

  RunResult base = run_trajectories(cfg);
  for (int workers : {4, 16}) {
    cfg.workers = workers;
    RunResult other = run_trajectories(cfg);
    REQUIRE(other.samples.size() == base.samples.size());
    for (std::size_t i = 0; i < base.samples.size(); ++i) {
      CHECK(other.samples[i].time == base.samples[i].time);
      CHECK(other.samples[i].window == base.samples[i].window);
    }
  }
}

TEST_CASE("counts plus censored cover every trajectory") {
  SimConfig cfg = ball_escape(0.1, 300, 99);
  cfg.dt = 1e-4;
  cfg.max_time = 5.0; // short horizon forces a censored tail
  EscapeStats st = estimate_net(cfg);
  std::size_t covered = st.censored;
  for (std::size_t c : st.per_window_counts) covered += c;
  CHECK(covered == cfg.trajectories);
  CHECK(st.censored > 0);
  CHECK(st.std_error == doctest::Approx(std::sqrt(st.variance / static_cast<double>(
                                                                    cfg.trajectories -
                                                                    st.censored)))
                            .epsilon(1e-12));
}

TEST_CASE("no absorbing window censors everything") {
  SimConfig cfg;
  cfg.domain = geometry::DomainDescriptor::ball(1.0);
  cfg.trajectories = 120;
  cfg.seed = 7;
  cfg.workers = 1;
  cfg.max_time = 0.25;
  RunResult run = run_trajectories(cfg);
  for (const auto& s : run.samples) {
    CHECK(s.window == -1);
    CHECK(s.time == run.max_time_used);
  }
}

TEST_CASE("a start on the window escapes immediately") {
  SimConfig cfg = ball_escape(0.1, 100, 1);
  cfg.start = StartMode::fixed_point;
  cfg.start_point = Vec3{0, 0, 1};
  const FirstPassage fp = sample_first_passage(cfg, 0);
  CHECK(fp.time == 0.0);
  CHECK(fp.window == 0);
}

TEST_CASE("steppers never leave the domain") {
  // verify_interior turns every step into an assertion; any excursion throws.
  SimConfig ball = ball_escape(0.1, 100, 31);
  ball.dt = 1e-4;
  ball.verify_interior = true;
  CHECK_NOTHROW(run_trajectories(ball));

  SimConfig box = box_leakage(100, 32, 0.02);
  box.dt = 4e-6;
  box.allow_coarse_dt = true;
  box.verify_interior = true;
  CHECK_NOTHROW(run_trajectories(box));

  // Implicit ellipsoid x^2/4 + y^2 + z^2 = 1 exercises the generic stepper.
  geometry::Polynomial3 f;
  f.terms = {{2, 0, 0, 0.25}, {0, 2, 0, 1.0}, {0, 0, 2, 1.0}, {0, 0, 0, -1.0}};
  SimConfig gen;
  gen.domain = geometry::DomainDescriptor::implicit(f, Vec3{-2.1, -1.1, -1.1},
                                                    Vec3{2.1, 1.1, 1.1}, std::nullopt);
  gen.trajectories = 100;
  gen.seed = 33;
  gen.workers = 1;
  gen.dt = 1e-4;
  gen.max_time = 0.2;
  gen.verify_interior = true;
  CHECK_NOTHROW(run_trajectories(gen));
}

TEST_CASE("richardson extrapolation removes a planted sqrt(dt) bias") {
  auto fake = [](double dt, double mean, double se) {
    EscapeStats st;
    st.n = 1000;
    st.dt_used = dt;
    st.mean_fpt = mean;
    st.std_error = se;
    return st;
  };
  const double m0 = 10.0, b = 50.0;
  const double dt = 2e-3;
  EscapeStats coarse = fake(dt, m0 + b * std::sqrt(dt), 0.2);
  EscapeStats fine = fake(0.5 * dt, m0 + b * std::sqrt(0.5 * dt), 0.1);
  Extrapolated ex = richardson_extrapolate(coarse, fine);
  CHECK(ex.mean == doctest::Approx(m0).epsilon(1e-10));
  const double c = 1.0 / (std::sqrt(2.0) - 1.0);
  CHECK(ex.std_error ==
        doctest::Approx(std::sqrt((1.0 + c) * (1.0 + c) * 0.01 + c * c * 0.04))
            .epsilon(1e-12));

  EscapeStats wrong_n = fine;
  wrong_n.n = 999;
  CHECK_THROWS_AS(richardson_extrapolate(coarse, wrong_n), InconsistentConfigsError);
  EscapeStats wrong_dt = fine;
  wrong_dt.dt_used = 0.75 * dt;
  CHECK_THROWS_AS(richardson_extrapolate(coarse, wrong_dt), InconsistentConfigsError);
  CHECK_THROWS_AS(richardson_extrapolate(fine, coarse), InconsistentConfigsError);
}

TEST_CASE("escape time scaled by window radius tracks the corrected product") {
  // The product net x a strips the leading 1/a; what remains is the log
  // correction. At the default dt the step bias is a fixed fraction of the
  // mean (sqrt(D dt)/a is constant across a), about +10% here, so each
  // product must land in a band around corrected_value x 1.10. The bands are
  // tight enough to notice a missing log correction at a = 0.2, where it is
  // worth ten percent.
  auto product = [](double a, std::size_t n, std::uint64_t seed) {
    SimConfig cfg = ball_escape(a, n, seed);
    return estimate_net(cfg).mean_fpt * a;
  };
  const double p1 = product(0.1, 2000, 555);
  const double p2 = product(0.2, 2000, 556);
  CHECK(p1 == doctest::Approx(1.1239 * 1.10).epsilon(0.075));
  CHECK(p2 == doctest::Approx(1.1545 * 1.10).epsilon(0.075));
}

TEST_CASE("a coarser step inflates the escape time") {
  // The sqrt(dt) window-shrinkage bias underlies the step-halved
  // extrapolations, so its sign and rough size are load-bearing: quadrupling
  // dt doubles the inflation. Expected gap here is +1.1 against a combined
  // noise of about 0.3.
  SimConfig coarse = ball_escape(0.1, 3000, 717);
  coarse.dt = 2e-4;
  coarse.allow_coarse_dt = true;
  SimConfig fine = ball_escape(0.1, 3000, 718);
  fine.dt = 5e-5;
  const double mc = estimate_net(coarse).mean_fpt;
  const double mf = estimate_net(fine).mean_fpt;
  CHECK(mc > mf);
  CHECK(mc - mf > 0.2);
  CHECK(mc - mf < 2.2);
}

TEST_CASE("a center start runs one correction longer than the mean") {
  // Corrected expansion plus the zero-mean Neumann value at the center:
  // 11.2395 + (4 pi / 3) * 0.0238732 = 11.3395. The default step inflates
  // the simulated time by the usual +10% or so; the band accepts the bias
  // but would catch a wrong correction sign or a broken start mode.
  SimConfig cfg = ball_escape(0.1, 2000, 808);
  cfg.start = StartMode::fixed_point;
  cfg.start_point = Vec3{0, 0, 0};
  const double mean = estimate_net(cfg).mean_fpt;
  const double ref = 11.3395;
  CHECK(mean > ref * 1.00);
  CHECK(mean < ref * 1.22);
}

TEST_CASE("antipodal twin windows split the flux evenly") {
  SimConfig cfg = ball_escape(0.1, 2000, 606);
  cfg.windows.push_back(geometry::make_cap_window(cfg.domain, Vec3{0, 0, -1}, 0.1,
                                                  geometry::WindowRole::escape));
  cfg.dt = 1e-4;
  EscapeStats st = estimate_net(cfg);
  const double f0 = static_cast<double>(st.per_window_counts[0]);
  const double f1 = static_cast<double>(st.per_window_counts[1]);
  CHECK(f0 + f1 + static_cast<double>(st.censored) ==
        static_cast<double>(cfg.trajectories));
  CHECK(f0 / (f0 + f1) == doctest::Approx(0.5).epsilon(0.10));
}

TEST_CASE("a vanishing leak captures almost nothing") {
  SimConfig cfg = box_leakage(2000, 999, 1e-4);
  cfg.dt = 1e-5;
  cfg.allow_coarse_dt = true; // dt guard keys off the 1e-4 leak radius
  LeakageResult res = leakage_experiment(cfg);
  CHECK(res.fractions[0] > 0.95); // target face takes essentially all of it
  CHECK(res.fractions[1] < 1e-3);
  double total = res.censored_fraction;
  for (double f : res.fractions) total += f;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("coupled runs share the stream with a plain run") {
  SimConfig cfg = ball_escape(0.1, 200, 2024);
  cfg.dt = 1e-4;
  RunResult plain = run_trajectories(cfg);
  CoupledRuns cr = run_coupled_trajectories(cfg, 2);
  REQUIRE(cr.fine.samples.size() == plain.samples.size());
  for (std::size_t i = 0; i < plain.samples.size(); ++i) {
    CHECK(cr.fine.samples[i].time == plain.samples[i].time);
    CHECK(cr.fine.samples[i].window == plain.samples[i].window);
  }
  CHECK(cr.coarse.dt_used == doctest::Approx(2.0 * cr.fine.dt_used).epsilon(1e-15));

  // The coarse member follows the same noise, so outcomes mostly agree.
  std::size_t agree = 0;
  for (std::size_t i = 0; i < plain.samples.size(); ++i)
    if (cr.coarse.samples[i].window == cr.fine.samples[i].window) ++agree;
  CHECK(agree > plain.samples.size() * 3 / 4);

  CHECK_THROWS_AS(run_coupled_trajectories(cfg, 1), InvalidInputError);
  CHECK_THROWS_AS(run_coupled_trajectories(cfg, 65), InvalidInputError);
}

TEST_CASE("extrapolated fractions still sum to one") {
  SimConfig cfg = box_leakage(400, 3030, 0.02);
  cfg.dt = 4e-6;
  cfg.allow_coarse_dt = true;
  LeakageResult res = leakage_extrapolated(cfg, 2);
  double total = res.censored_fraction;
  for (double f : res.fractions) total += f;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(res.n == cfg.trajectories);
  // Paired indicators: the standard errors stay close to the single-run
  // binomial scale rather than inflating by the extrapolation coefficients.
  const double binomial =
      std::sqrt(0.04 * 0.96 / static_cast<double>(cfg.trajectories));
  CHECK(res.std_errors[1] < 4.0 * binomial);
}

TEST_CASE("config resolution guards") {
  SimConfig cfg = ball_escape(0.1, 50, 1);
  CHECK_THROWS_AS(resolve(cfg), InvalidInputError); // too few trajectories

  cfg.trajectories = 200;
  cfg.dt = 1e-3; // above 0.01 a^2 / D = 1e-4
  CHECK_THROWS_AS(resolve(cfg), InvalidInputError);
  cfg.allow_coarse_dt = true;
  CHECK_NOTHROW(resolve(cfg));

  cfg.allow_coarse_dt = false;
  cfg.dt = 0;
  ResolvedConfig rc = resolve(cfg);
  CHECK(rc.dt == doctest::Approx(0.005 * 0.01).epsilon(1e-12));
  CHECK(rc.a_min == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(rc.predicted_net > 0);
  CHECK(rc.max_time == doctest::Approx(100.0 * rc.predicted_net).epsilon(1e-12));

  cfg.diffusion = -1.0;
  CHECK_THROWS_AS(resolve(cfg), InvalidInputError);
  cfg.diffusion = 1.0;

  cfg.start = StartMode::source_surface; // no source region attached
  CHECK_THROWS_AS(resolve(cfg), InvalidInputError);
}

TEST_CASE("survival fit guards its window") {
  // Planted exponential with rate 2 from a deterministic xorshift draw;
  // 4000 samples, fit window past the mean.
  std::vector<double> times;
  std::uint64_t state = 88172645463325252ull;
  auto next = [&state]() {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    return static_cast<double>(state >> 11) * 0x1.0p-53;
  };
  for (int i = 0; i < 4000; ++i) times.push_back(-std::log(1.0 - next()) / 2.0);
  SurvivalRate r = survival_fit(times, 0.55, 2.2, 0.5);
  CHECK(r.lambda == doctest::Approx(2.0).epsilon(5.0 * r.std_error / 2.0 + 0.02));
  CHECK(r.std_error > 0.0);

  CHECK_THROWS_AS(survival_fit(times, 0.3, 2.0, 0.5), ModeMixingError);
  CHECK_THROWS_AS(survival_fit(times, 2.0, 1.0, 0.5), InvalidInputError);
  // Far tail: fewer than 100 alive.
  CHECK_THROWS_AS(survival_fit(times, 6.0, 8.0, 0.5), TooFewSurvivorsError);
}

TEST_CASE("leakage preconditions") {
  SimConfig cfg = box_leakage(200, 5, 0.02);
  cfg.dt = 4e-6;
  cfg.allow_coarse_dt = true;

  SimConfig no_leak = cfg;
  no_leak.windows.pop_back(); // only the target remains
  CHECK_THROWS_AS(leakage_experiment(no_leak), InvalidInputError);

  SimConfig wrong_start = cfg;
  wrong_start.start = StartMode::uniform_volume;
  wrong_start.source.clear();
  CHECK_THROWS_AS(leakage_experiment(wrong_start), InvalidInputError);
  CHECK_THROWS_AS(leakage_extrapolated(wrong_start, 2), InvalidInputError);
}
