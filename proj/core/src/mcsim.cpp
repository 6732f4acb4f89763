#include "nescape/mcsim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "nescape/errors.hpp"
#include "nescape/linalg.hpp"
#include "nescape/rng.hpp"

namespace nescape::mcsim {

namespace {

const double kPi = std::acos(-1.0);

double min_cap_radius(const std::vector<geometry::Window>& windows) {
  double a = 0;
  for (const auto& w : windows) {
    auto r = geometry::window_cap_radius(w);
    if (r && (a == 0 || *r < a)) a = *r;
  }
  return a;
}

double sum_cap_radii(const std::vector<geometry::Window>& windows) {
  double s = 0;
  for (const auto& w : windows) {
    auto r = geometry::window_cap_radius(w);
    if (r) s += *r;
  }
  return s;
}

std::optional<double> try_volume(const geometry::DomainDescriptor& d) {
  try {
    return d.volume();
  } catch (const InvalidInputError&) {
    return std::nullopt;
  }
}

} // namespace

ResolvedConfig resolve(const SimConfig& config) {
  if (!(config.diffusion > 0))
    throw InvalidInputError("mcsim: diffusivity must be positive");
  if (config.trajectories < 100)
    throw InvalidInputError("mcsim: need at least 100 trajectories");
  if (config.start == StartMode::source_surface && config.source.size() != 1)
    throw InvalidInputError("mcsim: source_surface start needs exactly one source region");

  ResolvedConfig rc;
  rc.a_min = min_cap_radius(config.windows);
  if (config.start == StartMode::source_surface && config.source.size() == 1) {
    auto r = geometry::window_cap_radius(config.source.front());
    if (r && (rc.a_min == 0 || *r < rc.a_min)) rc.a_min = *r;
  }
  const Vec3& lo = config.domain.bbox_lo();
  const Vec3& hi = config.domain.bbox_hi();
  const double hmin = 0.5 * std::min({hi.x - lo.x, hi.y - lo.y, hi.z - lo.z});
  if (rc.a_min == 0) rc.a_min = 0.1 * hmin; // no cap bounds the step: face-scale windows

  const double D = config.diffusion;
  rc.dt = config.dt > 0 ? config.dt : 0.005 * rc.a_min * rc.a_min / D;
  if (!(rc.dt > 0)) throw InvalidInputError("mcsim: time step must be positive");
  if (rc.dt > 0.01 * rc.a_min * rc.a_min / D * (1.0 + 1e-12) && !config.allow_coarse_dt)
    throw InvalidInputError("mcsim: dt exceeds 0.01 a_min^2 / D; "
                            "set allow_coarse_dt to run a deliberately biased step");

  auto vol = try_volume(config.domain);
  const double asum = sum_cap_radii(config.windows);
  if (vol && asum > 0) rc.predicted_net = *vol / (4.0 * D * asum);
  if (config.max_time > 0) {
    rc.max_time = config.max_time;
  } else if (rc.predicted_net > 0) {
    rc.max_time = 100.0 * rc.predicted_net;
  } else if (vol) {
    rc.max_time = 100.0 * std::cbrt(*vol * *vol) / D; // diffusion time across the domain
  } else {
    throw InvalidInputError("mcsim: max_time must be given when the volume is unknown");
  }
  return rc;
}

std::vector<std::string> window_advisories(const SimConfig& config) {
  std::vector<std::string> out;
  const auto& ws = config.windows;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    auto* ci = std::get_if<geometry::CircularWindow>(&ws[i]);
    if (!ci) continue;
    for (std::size_t j = i + 1; j < ws.size(); ++j) {
      auto* cj = std::get_if<geometry::CircularWindow>(&ws[j]);
      if (!cj) continue;
      const double sep = norm(ci->center - cj->center);
      const double scale = 10.0 * std::max(ci->radius, cj->radius);
      if (sep < scale)
        out.push_back("windows " + std::to_string(i) + " and " + std::to_string(j) +
                      " are closer than ten radii; superposition formulas degrade");
    }
  }
  return out;
}

namespace {

// Per-trajectory state shared by the kind-specialized steppers.
struct TrajectoryContext {
  const SimConfig& cfg;
  const ResolvedConfig& rc;
  rng::Stream stream;
  double sigma;    // per-axis step scale sqrt(2 D dt)
  double face_tol; // containment slack for face windows
};

int match_window(const SimConfig& cfg, const Vec3& z, double face_tol) {
  for (std::size_t i = 0; i < cfg.windows.size(); ++i)
    if (geometry::window_contains(cfg.windows[i], z, face_tol)) return static_cast<int>(i);
  return -1;
}

Vec3 draw_start(TrajectoryContext& t) {
  const SimConfig& cfg = t.cfg;
  switch (cfg.start) {
    case StartMode::fixed_point:
      return cfg.start_point;
    case StartMode::uniform_volume: {
      const Vec3& lo = cfg.domain.bbox_lo();
      const Vec3& hi = cfg.domain.bbox_hi();
      for (int k = 0; k < 100000; ++k) {
        Vec3 p{lo.x + (hi.x - lo.x) * t.stream.uniform(),
               lo.y + (hi.y - lo.y) * t.stream.uniform(),
               lo.z + (hi.z - lo.z) * t.stream.uniform()};
        if (cfg.domain.inside(p)) return p;
      }
      throw NonConvergenceError("mcsim: rejection sampling failed; "
                                "is the bounding box far larger than the domain?");
    }
    case StartMode::source_surface: {
      const geometry::Window& src = cfg.source.front();
      if (auto* f = std::get_if<geometry::FaceWindow>(&src)) {
        Vec3 p{0, 0, 0};
        p[f->axis] = f->sign * f->half[f->axis];
        const int u = (f->axis + 1) % 3, v = (f->axis + 2) % 3;
        p[u] = f->half[u] * (2.0 * t.stream.uniform() - 1.0);
        p[v] = f->half[v] * (2.0 * t.stream.uniform() - 1.0);
        return p;
      }
      const auto& c = std::get<geometry::CircularWindow>(src);
      // Uniform on the disk, then snapped to the boundary surface.
      const double r = c.radius * std::sqrt(t.stream.uniform());
      const double phi = 2.0 * kPi * t.stream.uniform();
      Vec3 p = c.center + c.tangent1 * (r * std::cos(phi)) + c.tangent2 * (r * std::sin(phi));
      if (cfg.domain.kind() == geometry::DomainKind::box) return p;
      return geometry::project_to_boundary(cfg.domain, p).position;
    }
  }
  throw InvalidInputError("mcsim: unknown start mode");
}

// Absorbing-at-start test: a start point lying on the boundary inside a
// window escapes immediately.
std::optional<FirstPassage> start_absorbed(const TrajectoryContext& t, const Vec3& p) {
  if (std::abs(t.cfg.domain.value(p)) > 1e-9 * t.cfg.domain.f_scale()) return std::nullopt;
  int w = match_window(t.cfg, p, t.face_tol);
  if (w < 0) return std::nullopt;
  return FirstPassage{0.0, w};
}

// One displacement of duration dt applied at elapsed time tnow: p advances in
// place, or the absorption event is returned if the segment exits through a
// window. The proposal is halved on pathological overshoots so reflection
// stays well posed; a spent retry budget stands still for this step.
std::optional<FirstPassage> step_ball(const TrajectoryContext& t, double R, double R2,
                                      Vec3& p, Vec3 d, double tnow, double dt) {
  for (int halve = 0;; ++halve) {
    Vec3 q = p + d;
    const double q2 = norm2(q);
    if (q2 < R2) {
      p = q;
      break;
    }
    // First boundary crossing of the segment: |p + s d|^2 = R^2.
    const double a2 = norm2(d);
    const double b = dot(p, d);
    const double c0 = norm2(p) - R2; // <= 0
    const double disc = b * b - a2 * c0;
    const double s = a2 > 0 ? (-b + std::sqrt(disc)) / a2 : 0.0;
    Vec3 z = p + d * s;
    int w = match_window(t.cfg, z, t.face_tol);
    if (w >= 0) return FirstPassage{tnow + s * dt, w};
    // Specular reflection across the tangent plane at the radial
    // projection of the endpoint.
    const double qn = std::sqrt(q2);
    if (qn < 2.0 * R) {
      p = q * ((2.0 * R - qn) / qn);
      break;
    }
    if (halve >= 8) break; // absurd overshoot: stand still this step
    d = d * 0.5;
  }
  if (t.cfg.verify_interior && !(norm2(p) < R2))
    throw Error("mcsim: interior invariant violated in the ball stepper");
  return std::nullopt;
}

FirstPassage run_ball(TrajectoryContext& t, Vec3 p) {
  const double R = t.cfg.domain.ball_radius();
  const double R2 = R * R;
  const double dt = t.rc.dt;
  const std::size_t max_steps = static_cast<std::size_t>(t.rc.max_time / dt) + 1;
  for (std::size_t k = 0; k < max_steps; ++k) {
    const double tnow = static_cast<double>(k) * dt;
    if (tnow >= t.rc.max_time) break;
    const Vec3 d{t.sigma * t.stream.gaussian(), t.sigma * t.stream.gaussian(),
                 t.sigma * t.stream.gaussian()};
    if (auto hit = step_ball(t, R, R2, p, d, tnow, dt)) return *hit;
  }
  return FirstPassage{t.rc.max_time, -1};
}

std::optional<FirstPassage> step_box(const TrajectoryContext& t, const Vec3& h, Vec3& p,
                                     const Vec3& d, double tnow, double dt) {
  Vec3 q = p + d;
  if (std::abs(q.x) >= h.x || std::abs(q.y) >= h.y || std::abs(q.z) >= h.z) {
    // Earliest face crossing along the segment.
    double s = 2.0;
    for (int ax = 0; ax < 3; ++ax) {
      if (std::abs(q[ax]) < h[ax]) continue;
      const double face = q[ax] > 0 ? h[ax] : -h[ax];
      const double da = d[ax];
      if (da == 0) continue;
      const double sa = (face - p[ax]) / da;
      if (sa >= 0 && sa < s) s = sa;
    }
    if (s <= 1.0) {
      Vec3 z = p + d * s;
      int w = match_window(t.cfg, z, t.face_tol);
      if (w >= 0) return FirstPassage{tnow + s * dt, w};
    }
    // Specular reflection by coordinate folding; exact for a box.
    for (int ax = 0; ax < 3; ++ax) {
      double v = q[ax];
      for (int guard = 0; (v > h[ax] || v < -h[ax]) && guard < 64; ++guard)
        v = v > h[ax] ? 2.0 * h[ax] - v : -2.0 * h[ax] - v;
      q[ax] = v;
    }
  }
  p = q;
  if (t.cfg.verify_interior &&
      (std::abs(p.x) > h.x || std::abs(p.y) > h.y || std::abs(p.z) > h.z))
    throw Error("mcsim: interior invariant violated in the box stepper");
  return std::nullopt;
}

FirstPassage run_box(TrajectoryContext& t, Vec3 p) {
  const Vec3& h = t.cfg.domain.box_half();
  const double dt = t.rc.dt;
  const std::size_t max_steps = static_cast<std::size_t>(t.rc.max_time / dt) + 1;
  for (std::size_t k = 0; k < max_steps; ++k) {
    const double tnow = static_cast<double>(k) * dt;
    if (tnow >= t.rc.max_time) break;
    const Vec3 d{t.sigma * t.stream.gaussian(), t.sigma * t.stream.gaussian(),
                 t.sigma * t.stream.gaussian()};
    if (auto hit = step_box(t, h, p, d, tnow, dt)) return *hit;
  }
  return FirstPassage{t.rc.max_time, -1};
}

std::optional<FirstPassage> step_generic(const TrajectoryContext& t, double tol, Vec3& p,
                                         Vec3 d, double tnow, double dt) {
  const auto& dom = t.cfg.domain;
  for (int halve = 0;; ++halve) {
    Vec3 q = p + d;
    if (dom.value(q) < 0) {
      p = q;
      break;
    }
    // Bisect the segment for the first crossing; F(p) < 0 <= F(q).
    double slo = 0, shi = 1;
    for (int it = 0; it < 60; ++it) {
      const double sm = 0.5 * (slo + shi);
      (dom.value(p + d * sm) < 0 ? slo : shi) = sm;
      if (std::abs(dom.value(p + d * shi)) < tol) break;
    }
    Vec3 z = p + d * shi;
    int w = match_window(t.cfg, z, t.face_tol);
    if (w >= 0) return FirstPassage{tnow + shi * dt, w};
    // Specular reflection across the tangent plane at the projected
    // endpoint, re-verified; shrink the step if it will not land inside.
    bool placed = false;
    Vec3 r = q;
    for (int att = 0; att < 3; ++att) {
      geometry::BoundaryPoint bp = geometry::project_to_boundary(dom, r);
      const double over = dot(r - bp.position, bp.normal);
      r = r - bp.normal * (2.0 * over);
      if (dom.value(r) < 0) {
        placed = true;
        break;
      }
    }
    if (placed) {
      p = r;
      break;
    }
    if (halve >= 8) break; // stand still this step
    d = d * 0.5;
  }
  if (t.cfg.verify_interior && !(dom.value(p) < tol))
    throw Error("mcsim: interior invariant violated in the generic stepper");
  return std::nullopt;
}

FirstPassage run_generic(TrajectoryContext& t, Vec3 p) {
  const double dt = t.rc.dt;
  const double tol = 1e-9 * t.cfg.domain.f_scale();
  const std::size_t max_steps = static_cast<std::size_t>(t.rc.max_time / dt) + 1;
  for (std::size_t k = 0; k < max_steps; ++k) {
    const double tnow = static_cast<double>(k) * dt;
    if (tnow >= t.rc.max_time) break;
    const Vec3 d{t.sigma * t.stream.gaussian(), t.sigma * t.stream.gaussian(),
                 t.sigma * t.stream.gaussian()};
    if (auto hit = step_generic(t, tol, p, d, tnow, dt)) return *hit;
  }
  return FirstPassage{t.rc.max_time, -1};
}

FirstPassage run_one(const SimConfig& cfg, const ResolvedConfig& rc,
                     std::uint64_t trajectory_index) {
  TrajectoryContext t{cfg, rc, rng::Stream(cfg.seed, trajectory_index),
                      std::sqrt(2.0 * cfg.diffusion * rc.dt),
                      1e-7 * cfg.domain.bbox_diagonal()};
  Vec3 p = draw_start(t);
  if (auto hit = start_absorbed(t, p)) return *hit;
  switch (cfg.domain.kind()) {
    case geometry::DomainKind::ball:
      return run_ball(t, p);
    case geometry::DomainKind::box:
      return run_box(t, p);
    default:
      return run_generic(t, p);
  }
}

// Per-domain constants hoisted out of the coupled stepping loop.
struct DomainCache {
  geometry::DomainKind kind;
  double R = 0, R2 = 0; // ball
  Vec3 half{0, 0, 0};   // box
  double tol = 0;       // generic bisection tolerance
};

DomainCache cache_domain(const geometry::DomainDescriptor& d) {
  DomainCache c{d.kind()};
  if (c.kind == geometry::DomainKind::ball) {
    c.R = d.ball_radius();
    c.R2 = c.R * c.R;
  } else if (c.kind == geometry::DomainKind::box) {
    c.half = d.box_half();
  } else {
    c.tol = 1e-9 * d.f_scale();
  }
  return c;
}

std::optional<FirstPassage> advance(const TrajectoryContext& t, const DomainCache& dc,
                                    Vec3& p, const Vec3& d, double tnow, double dt) {
  switch (dc.kind) {
    case geometry::DomainKind::ball:
      return step_ball(t, dc.R, dc.R2, p, d, tnow, dt);
    case geometry::DomainKind::box:
      return step_box(t, dc.half, p, d, tnow, dt);
    default:
      return step_generic(t, dc.tol, p, d, tnow, dt);
  }
}

struct PairOutcome {
  FirstPassage fine;
  FirstPassage coarse;
};

// Both members of the pair read one stream: every substep draws three
// gaussians whether or not either path still needs them, so the coarse sums
// stay aligned and the fine path consumes the stream exactly like a plain
// run (until its absorption the two are bitwise identical).
PairOutcome run_pair(const SimConfig& cfg, const ResolvedConfig& rc, int ratio,
                     std::uint64_t trajectory_index) {
  TrajectoryContext t{cfg, rc, rng::Stream(cfg.seed, trajectory_index),
                      std::sqrt(2.0 * cfg.diffusion * rc.dt),
                      1e-7 * cfg.domain.bbox_diagonal()};
  const DomainCache dc = cache_domain(cfg.domain);
  const Vec3 p0 = draw_start(t);
  if (auto hit = start_absorbed(t, p0)) return {*hit, *hit};

  const double dt_f = rc.dt;
  const double dt_c = ratio * dt_f;
  PairOutcome out{{rc.max_time, -1}, {rc.max_time, -1}};
  Vec3 pf = p0, pc = p0;
  bool fine_alive = true, coarse_alive = true;
  Vec3 gsum{0, 0, 0};
  int filled = 0;
  std::size_t kc = 0;
  // Substep budget covers the coarse path's last step before max_time too.
  const std::size_t coarse_steps = static_cast<std::size_t>(rc.max_time / dt_c) + 1;
  for (std::size_t k = 0; k < coarse_steps * static_cast<std::size_t>(ratio); ++k) {
    if (!fine_alive && !coarse_alive) break;
    const double tf = static_cast<double>(k) * dt_f;
    const Vec3 g{t.stream.gaussian(), t.stream.gaussian(), t.stream.gaussian()};
    if (fine_alive && tf < rc.max_time) {
      if (auto hit = advance(t, dc, pf, g * t.sigma, tf, dt_f)) {
        out.fine = *hit;
        fine_alive = false;
      }
    }
    gsum = gsum + g;
    if (++filled == ratio) {
      // Sum of ratio unit gaussians scaled by sigma_fine: exactly the
      // coarse-step law sqrt(2 D ratio dt) per axis.
      const double tc = static_cast<double>(kc) * dt_c;
      if (coarse_alive && tc < rc.max_time) {
        if (auto hit = advance(t, dc, pc, gsum * t.sigma, tc, dt_c)) {
          out.coarse = *hit;
          coarse_alive = false;
        }
      }
      ++kc;
      filled = 0;
      gsum = Vec3{0, 0, 0};
    }
  }
  return out;
}

// Runs body(i) for i in [0, trajectories), claiming fixed-size index blocks
// from a shared counter; results written by index stay independent of
// scheduling. body must be safe to call concurrently on distinct indices.
template <class Body>
void for_each_index(const SimConfig& config, Body&& body) {
  int workers = config.workers > 0 ? config.workers
                                   : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  const std::size_t n = config.trajectories;

  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  const std::size_t block = 64;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int wk = 0; wk < workers; ++wk) {
    pool.emplace_back([&, wk] {
      try {
        for (;;) {
          const std::size_t base = next.fetch_add(block);
          if (base >= n) return;
          const std::size_t end = std::min(base + block, n);
          for (std::size_t i = base; i < end; ++i) body(i);
        }
      } catch (...) {
        errors[static_cast<std::size_t>(wk)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

} // namespace

FirstPassage sample_first_passage(const SimConfig& config, std::uint64_t trajectory_index) {
  ResolvedConfig rc = resolve(config);
  return run_one(config, rc, trajectory_index);
}

RunResult run_trajectories(const SimConfig& config) {
  ResolvedConfig rc = resolve(config);
  RunResult out;
  out.dt_used = rc.dt;
  out.max_time_used = rc.max_time;
  out.samples.resize(config.trajectories);
  for_each_index(config, [&](std::size_t i) { out.samples[i] = run_one(config, rc, i); });
  return out;
}

CoupledRuns run_coupled_trajectories(const SimConfig& config, int ratio) {
  if (ratio < 2 || ratio > 64)
    throw InvalidInputError("run_coupled_trajectories: ratio must lie in [2, 64]");
  ResolvedConfig rc = resolve(config);
  CoupledRuns out;
  out.fine.dt_used = rc.dt;
  out.fine.max_time_used = rc.max_time;
  out.coarse.dt_used = ratio * rc.dt;
  out.coarse.max_time_used = rc.max_time;
  out.fine.samples.resize(config.trajectories);
  out.coarse.samples.resize(config.trajectories);
  for_each_index(config, [&](std::size_t i) {
    PairOutcome po = run_pair(config, rc, ratio, i);
    out.fine.samples[i] = po.fine;
    out.coarse.samples[i] = po.coarse;
  });
  return out;
}

EscapeStats stats_from_samples(const RunResult& run, std::size_t n_windows) {
  EscapeStats st;
  st.n = run.samples.size();
  st.dt_used = run.dt_used;
  st.per_window_counts.assign(n_windows, 0);
  double sum = 0;
  std::size_t absorbed = 0;
  for (const auto& s : run.samples) {
    if (s.window < 0) {
      ++st.censored;
      continue;
    }
    ++st.per_window_counts[static_cast<std::size_t>(s.window)];
    sum += s.time;
    ++absorbed;
  }
  if (absorbed > 0) {
    st.mean_fpt = sum / static_cast<double>(absorbed);
    double ss = 0;
    for (const auto& s : run.samples)
      if (s.window >= 0) ss += (s.time - st.mean_fpt) * (s.time - st.mean_fpt);
    st.variance = absorbed > 1 ? ss / static_cast<double>(absorbed - 1) : 0.0;
    st.std_error = std::sqrt(st.variance / static_cast<double>(absorbed));
  }
  return st;
}

EscapeStats estimate_net(const SimConfig& config) {
  for (const auto& w : config.windows)
    if (geometry::window_role(w) != geometry::WindowRole::escape)
      throw InvalidInputError("estimate_net: all windows must have the escape role");
  return stats_from_samples(run_trajectories(config), config.windows.size());
}

Extrapolated richardson_extrapolate(const EscapeStats& stats_dt,
                                    const EscapeStats& stats_dt_half) {
  if (stats_dt.n != stats_dt_half.n)
    throw InconsistentConfigsError("richardson_extrapolate: sample counts differ");
  if (!(stats_dt.dt_used > 0) || !(stats_dt_half.dt_used > 0) ||
      std::abs(stats_dt.dt_used - 2.0 * stats_dt_half.dt_used) > 1e-9 * stats_dt.dt_used)
    throw InconsistentConfigsError("richardson_extrapolate: steps must halve, coarse first");
  // First-order elimination of the sqrt(dt) bias: with c = 1/(sqrt 2 - 1),
  // m* = (1 + c) m_half - c m_full.
  const double c = 1.0 / (std::sqrt(2.0) - 1.0);
  Extrapolated e;
  e.mean = (1.0 + c) * stats_dt_half.mean_fpt - c * stats_dt.mean_fpt;
  e.std_error = std::sqrt((1.0 + c) * (1.0 + c) * stats_dt_half.std_error * stats_dt_half.std_error +
                          c * c * stats_dt.std_error * stats_dt.std_error);
  return e;
}

SurvivalRate survival_fit(const std::vector<double>& times, double t_lo, double t_hi,
                          double predicted_net) {
  if (!(t_hi > t_lo) || !(t_lo >= 0))
    throw InvalidInputError("survival_fit: need 0 <= t_lo < t_hi");
  if (t_lo < predicted_net)
    throw ModeMixingError("survival_fit: fit window starts before one mean escape time; "
                          "faster modes have not decayed");
  const std::size_t n = times.size();
  if (n == 0) throw InvalidInputError("survival_fit: no samples");

  std::vector<double> sorted(times);
  std::sort(sorted.begin(), sorted.end());
  auto alive_at = [&](double tq) {
    // Count of times strictly greater than tq.
    return static_cast<std::size_t>(sorted.end() -
                                    std::upper_bound(sorted.begin(), sorted.end(), tq));
  };
  if (alive_at(t_lo) < 100)
    throw TooFewSurvivorsError("survival_fit: fewer than 100 trajectories alive at t_lo");

  const int grid = 24;
  std::vector<double> xs, ys;
  for (int i = 0; i < grid; ++i) {
    const double tq = t_lo + (t_hi - t_lo) * i / (grid - 1);
    const std::size_t alive = alive_at(tq);
    if (alive == 0) break;
    xs.push_back(tq);
    ys.push_back(std::log(static_cast<double>(alive) / static_cast<double>(n)));
  }
  if (xs.size() < 4)
    throw TooFewSurvivorsError("survival_fit: survival empties before the fit window ends");
  linalg::LineFit f = linalg::fit_line(xs, ys);
  SurvivalRate out;
  out.lambda = -f.slope;
  // The grid points share trajectories, so the usual OLS slope error is
  // optimistic; the number of deaths inside the window sets the real
  // information content.
  const double deaths =
      static_cast<double>(alive_at(t_lo)) - static_cast<double>(alive_at(t_hi));
  out.std_error = out.lambda / std::sqrt(std::max(1.0, deaths));
  return out;
}

SurvivalRate estimate_survival_rate(const SimConfig& config, double t_lo, double t_hi) {
  ResolvedConfig rc = resolve(config);
  RunResult run = run_trajectories(config);
  std::vector<double> times;
  times.reserve(run.samples.size());
  for (const auto& s : run.samples) times.push_back(s.time);
  return survival_fit(times, t_lo, t_hi, rc.predicted_net);
}

namespace {

void check_leakage_roles(const SimConfig& config, const char* who) {
  if (config.start != StartMode::source_surface)
    throw InvalidInputError(std::string(who) + ": start mode must be source_surface");
  bool has_target = false, has_leak = false;
  for (const auto& w : config.windows) {
    if (geometry::window_role(w) == geometry::WindowRole::target) has_target = true;
    if (geometry::window_role(w) == geometry::WindowRole::leak) has_leak = true;
  }
  if (!has_target || !has_leak)
    throw InvalidInputError(std::string(who) + ": need at least one target and one leak window");
}

} // namespace

LeakageResult leakage_experiment(const SimConfig& config) {
  check_leakage_roles(config, "leakage_experiment");

  RunResult run = run_trajectories(config);
  EscapeStats st = stats_from_samples(run, config.windows.size());
  LeakageResult out;
  out.n = st.n;
  const double n = static_cast<double>(st.n);
  out.censored_fraction = static_cast<double>(st.censored) / n;
  for (std::size_t i = 0; i < config.windows.size(); ++i) {
    const double f = static_cast<double>(st.per_window_counts[i]) / n;
    out.fractions.push_back(f);
    out.std_errors.push_back(std::sqrt(std::max(0.0, f * (1.0 - f)) / n));
  }
  return out;
}

LeakageResult leakage_extrapolated(const SimConfig& config, int ratio) {
  check_leakage_roles(config, "leakage_extrapolated");

  CoupledRuns runs = run_coupled_trajectories(config, ratio);
  const double c = 1.0 / (std::sqrt(static_cast<double>(ratio)) - 1.0);
  const double n = static_cast<double>(config.trajectories);
  LeakageResult out;
  out.n = config.trajectories;
  for (std::size_t w = 0; w < config.windows.size(); ++w) {
    // Mean and spread of the per-trajectory paired indicator
    // (1 + c) [fine hits w] - c [coarse hits w]: the shared increments make
    // the two outcomes agree for most trajectories, so despite the large
    // coefficients the spread stays near the plain single-run binomial one.
    double sum = 0, sumsq = 0;
    const int iw = static_cast<int>(w);
    for (std::size_t i = 0; i < runs.fine.samples.size(); ++i) {
      const double yf = runs.fine.samples[i].window == iw ? 1.0 : 0.0;
      const double yc = runs.coarse.samples[i].window == iw ? 1.0 : 0.0;
      const double y = (1.0 + c) * yf - c * yc;
      sum += y;
      sumsq += y * y;
    }
    const double mean = sum / n;
    const double var = std::max(0.0, (sumsq - n * mean * mean) / (n - 1.0));
    out.fractions.push_back(mean);
    out.std_errors.push_back(std::sqrt(var / n));
  }
  double cens_fine = 0, cens_coarse = 0;
  for (const auto& s : runs.fine.samples) cens_fine += s.window < 0 ? 1.0 : 0.0;
  for (const auto& s : runs.coarse.samples) cens_coarse += s.window < 0 ? 1.0 : 0.0;
  out.censored_fraction = ((1.0 + c) * cens_fine - c * cens_coarse) / n;
  return out;
}

} // namespace nescape::mcsim
