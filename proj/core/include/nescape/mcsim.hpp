#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nescape/geometry.hpp"

namespace nescape::mcsim {

enum class StartMode { uniform_volume, fixed_point, source_surface };

// One Brownian-dynamics experiment. Zeros in dt and max_time select the
// defaults computed by resolve(): dt = 0.005 a_min^2 / D and max_time = 100x
// the leading-order escape time. The dt guard dt <= 0.01 a_min^2 / D keeps
// steps small against the finest window; allow_coarse_dt overrides it for
// deliberately biased runs (extrapolation studies).
struct SimConfig {
  geometry::DomainDescriptor domain;
  std::vector<geometry::Window> windows;
  double diffusion = 1.0;
  double dt = 0;                 // 0: default
  std::size_t trajectories = 0;
  std::uint64_t seed = 0;
  StartMode start = StartMode::uniform_volume;
  Vec3 start_point{0, 0, 0};     // fixed_point only
  std::vector<geometry::Window> source; // source_surface only; exactly one entry
  double max_time = 0;           // 0: default
  bool allow_coarse_dt = false;
  int workers = 0;               // 0: hardware concurrency
  bool verify_interior = false;  // debug: assert interiority after every step
};

// Defaults and guards applied to a SimConfig. a_min falls back to a tenth of
// the smallest bounding-box half-extent when no circular window bounds it.
struct ResolvedConfig {
  double dt = 0;
  double max_time = 0;
  double a_min = 0;
  double predicted_net = 0; // leading order V / (4 D sum a); 0 if unknown
};
ResolvedConfig resolve(const SimConfig& config);

// Window-placement advisories (not errors): caps closer to each other than
// ten radii violate the well-separated assumption behind the superposition
// formulas.
std::vector<std::string> window_advisories(const SimConfig& config);

// One trajectory outcome. window is the index into config.windows, or -1 for
// a trajectory that ran into max_time (time is then max_time itself).
struct FirstPassage {
  double time = 0;
  int window = -1;
};

// Runs one trajectory as a pure function of (config.seed, trajectory_index):
// the result does not depend on execution order or worker count.
FirstPassage sample_first_passage(const SimConfig& config, std::uint64_t trajectory_index);

// All trajectories, merged in index order.
struct RunResult {
  std::vector<FirstPassage> samples;
  double dt_used = 0;
  double max_time_used = 0;
};
RunResult run_trajectories(const SimConfig& config);

struct EscapeStats {
  std::size_t n = 0;
  double mean_fpt = 0;
  double variance = 0;
  double std_error = 0;
  std::vector<std::size_t> per_window_counts; // indexed like config.windows
  std::size_t censored = 0;
  double dt_used = 0;
};

// Sample statistics of a finished run; mean and variance cover the absorbed
// trajectories only, censored ones are counted separately.
EscapeStats stats_from_samples(const RunResult& run, std::size_t n_windows);

// Mean first-passage time with every window absorbing. Pre: all windows have
// the escape role.
EscapeStats estimate_net(const SimConfig& config);

// Removes the O(sqrt(dt)) boundary-discretization bias from a pair of runs at
// dt and dt/2: m* = m_half + (m_half - m_full) / (sqrt(2) - 1).
struct Extrapolated {
  double mean = 0;
  double std_error = 0;
};
Extrapolated richardson_extrapolate(const EscapeStats& stats_dt,
                                    const EscapeStats& stats_dt_half);

struct SurvivalRate {
  double lambda = 0;
  double std_error = 0;
};

// Least-squares slope of log survival against time on an evenly spaced grid
// over [t_lo, t_hi]. times holds one entry per trajectory (censored ones at
// max_time, still alive for every t below it). Guards: t_lo must sit past the
// predicted mean time (earlier times mix decay modes), and at least 100
// trajectories must still be alive at t_lo.
SurvivalRate survival_fit(const std::vector<double>& times, double t_lo, double t_hi,
                          double predicted_net);

// Runs the simulation and fits the decay rate of the survival fraction.
SurvivalRate estimate_survival_rate(const SimConfig& config, double t_lo, double t_hi);

// Capture fractions for a source-injection experiment. fractions and
// std_errors are indexed like config.windows; censored_fraction is reported
// separately so the fractions sum to 1 - censored_fraction. Absolute fluxes
// are fraction x injected rate, which only the caller knows.
struct LeakageResult {
  std::vector<double> fractions;
  std::vector<double> std_errors;
  double censored_fraction = 0;
  std::size_t n = 0;
};

// Pre: start mode source_surface with exactly one source region, at least one
// target window and at least one leak window.
LeakageResult leakage_experiment(const SimConfig& config);

// A pair of runs driven by one Gaussian stream per trajectory: the fine path
// steps at the resolved dt (so the usual dt guard applies to it), the coarse
// path at ratio x that, assembled from the same increments by summing each
// block of ratio of them. Start point and noise are shared; reflections and
// absorptions resolve independently per path. Outcome differences therefore
// isolate the step-size effect trajectory by trajectory, which is what makes
// step extrapolation of rare fractions affordable. Pure per (seed, index);
// the fine samples coincide with a plain run of the same config.
struct CoupledRuns {
  RunResult fine;
  RunResult coarse;
};
CoupledRuns run_coupled_trajectories(const SimConfig& config, int ratio = 2);

// Capture fractions with the O(sqrt(dt)) window bias removed by a coupled
// pair: per window f* = f_fine + (f_fine - f_coarse) / (sqrt(ratio) - 1), with
// the standard error of the per-trajectory paired indicators. Extrapolated
// fractions are not confined to [0, 1], but fractions plus censored_fraction
// still sum to one exactly. Same preconditions as leakage_experiment.
LeakageResult leakage_extrapolated(const SimConfig& config, int ratio = 2);

} // namespace nescape::mcsim
