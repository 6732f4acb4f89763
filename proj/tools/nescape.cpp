// nescape: closed-form evaluators, disk-integral-equation solver, and Brownian
// Monte Carlo for narrow-escape experiments, with a cross-validation harness.
//
// Every CSV this tool writes starts with one comment line carrying the format
// version, an FNV-1a hash of the resolved run configuration, and the
// configuration itself as key=value pairs, so a result file identifies the run
// that produced it. Numbers are full-precision scientific, no locale.
//
// Exit codes: 0 success, 2 usage error, 3 validation failure, 4 numerical
// failure.

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "nescape/asymptotics.hpp"
#include "nescape/errors.hpp"
#include "nescape/geometry.hpp"
#include "nescape/greens.hpp"
#include "nescape/helmholtz.hpp"
#include "nescape/mcsim.hpp"
#include "nescape/validation.hpp"

namespace {

using nescape::Vec3;
namespace geometry = nescape::geometry;
namespace mcsim = nescape::mcsim;

constexpr const char* kFormatVersion = "nescape-csv v1";
constexpr std::uint64_t kDefaultSeed = 12345;

std::string sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17e", v);
  return buf;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// The resolved configuration of a run: ordered key=value pairs, serialized
// into the CSV comment line and hashed so outputs are self-identifying.
struct Record {
  std::vector<std::pair<std::string, std::string>> kv;
  void add(const std::string& k, const std::string& v) { kv.emplace_back(k, v); }
  void add(const std::string& k, double v) { kv.emplace_back(k, sci(v)); }
  void add(const std::string& k, std::uint64_t v) { kv.emplace_back(k, std::to_string(v)); }
  std::string serialize() const {
    std::string s;
    for (const auto& [k, v] : kv) {
      if (!s.empty()) s += ' ';
      s += k;
      s += '=';
      s += v;
    }
    return s;
  }
};

struct Csv {
  std::FILE* f = nullptr;
  explicit Csv(const std::string& path, const Record& rec) {
    f = std::fopen(path.c_str(), "w");
    if (!f) throw nescape::InvalidInputError("cannot open output file: " + path);
    const std::string cfg = rec.serialize();
    std::fprintf(f, "# %s hash=%016" PRIx64 " %s\n", kFormatVersion, fnv1a(cfg), cfg.c_str());
  }
  ~Csv() {
    if (f) std::fclose(f);
  }
  Csv(const Csv&) = delete;
  Csv& operator=(const Csv&) = delete;
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i)
      std::fprintf(f, "%s%s", i ? "," : "", cells[i].c_str());
    std::fprintf(f, "\n");
  }
  void comment(const std::string& s) { std::fprintf(f, "# %s\n", s.c_str()); }
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_num(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw nescape::InvalidInputError("cannot parse number '" + s + "' in " + what);
  }
}

// Domain grammar: ball:R=<r> | box:<lx>,<ly>,<lz> | implicit:<path>.
geometry::DomainDescriptor parse_domain(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos)
    throw nescape::InvalidInputError("domain spec needs a kind prefix: " + spec);
  const std::string kind = spec.substr(0, colon);
  const std::string rest = spec.substr(colon + 1);
  if (kind == "ball") {
    if (rest.rfind("R=", 0) != 0)
      throw nescape::InvalidInputError("ball domain expects ball:R=<r>, got " + spec);
    return geometry::DomainDescriptor::ball(parse_num(rest.substr(2), "domain"));
  }
  if (kind == "box") {
    const auto parts = split(rest, ',');
    if (parts.size() != 3)
      throw nescape::InvalidInputError("box domain expects box:<lx>,<ly>,<lz>, got " + spec);
    return geometry::DomainDescriptor::box(parse_num(parts[0], "domain"),
                                           parse_num(parts[1], "domain"),
                                           parse_num(parts[2], "domain"));
  }
  if (kind == "implicit") return geometry::DomainDescriptor::implicit_from_file(rest);
  throw nescape::InvalidInputError("unknown domain kind '" + kind + "'");
}

geometry::WindowRole parse_role(const std::string& s) {
  if (s == "escape") return geometry::WindowRole::escape;
  if (s == "leak") return geometry::WindowRole::leak;
  if (s == "target") return geometry::WindowRole::target;
  throw nescape::InvalidInputError("unknown window role '" + s + "'");
}

// Window grammar: cap:role=<role>,center=<x,y,z>,a=<r> | face:role=<role>,face=<+z|-z|...>.
// The center value spans three comma-separated fields.
geometry::Window parse_window(const geometry::DomainDescriptor& d, const std::string& spec,
                              std::vector<std::string>* warnings) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos)
    throw nescape::InvalidInputError("window spec needs a kind prefix: " + spec);
  const std::string kind = spec.substr(0, colon);
  const auto tok = split(spec.substr(colon + 1), ',');
  if (kind == "cap") {
    std::optional<geometry::WindowRole> role;
    std::optional<Vec3> center;
    std::optional<double> radius;
    for (std::size_t i = 0; i < tok.size(); ++i) {
      if (tok[i].rfind("role=", 0) == 0) {
        role = parse_role(tok[i].substr(5));
      } else if (tok[i].rfind("center=", 0) == 0) {
        if (i + 2 >= tok.size())
          throw nescape::InvalidInputError("window center needs three components: " + spec);
        center = Vec3{parse_num(tok[i].substr(7), "window"), parse_num(tok[i + 1], "window"),
                      parse_num(tok[i + 2], "window")};
        i += 2;
      } else if (tok[i].rfind("a=", 0) == 0) {
        radius = parse_num(tok[i].substr(2), "window");
      } else {
        throw nescape::InvalidInputError("unknown window field '" + tok[i] + "' in " + spec);
      }
    }
    if (!role) throw nescape::InvalidInputError("window spec missing role= : " + spec);
    if (!center) throw nescape::InvalidInputError("window spec missing center= : " + spec);
    if (!radius) throw nescape::InvalidInputError("window spec missing a= : " + spec);
    return geometry::make_cap_window(d, *center, *radius, *role, warnings);
  }
  if (kind == "face") {
    std::optional<geometry::WindowRole> role;
    std::optional<std::pair<int, int>> face; // axis, sign
    for (const auto& t : tok) {
      if (t.rfind("role=", 0) == 0) {
        role = parse_role(t.substr(5));
      } else if (t.rfind("face=", 0) == 0) {
        const std::string v = t.substr(5);
        if (v.size() != 2 || (v[0] != '+' && v[0] != '-') || v[1] < 'x' || v[1] > 'z')
          throw nescape::InvalidInputError("face must be one of +x,-x,+y,-y,+z,-z: " + spec);
        face = {v[1] - 'x', v[0] == '+' ? 1 : -1};
      } else {
        throw nescape::InvalidInputError("unknown window field '" + t + "' in " + spec);
      }
    }
    if (!role) throw nescape::InvalidInputError("window spec missing role= : " + spec);
    if (!face) throw nescape::InvalidInputError("window spec missing face= : " + spec);
    return geometry::make_face_window(d, face->first, face->second, *role);
  }
  throw nescape::InvalidInputError("unknown window kind '" + kind + "'");
}

const char* role_name(geometry::WindowRole r) {
  switch (r) {
    case geometry::WindowRole::escape: return "escape";
    case geometry::WindowRole::leak: return "leak";
    case geometry::WindowRole::target: return "target";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// asymptotics

struct AsymptoticsOpts {
  std::string formula;
  std::string output = "asymptotics.csv";
  double volume = 0, a = 0, D = 1, kappa_sum = 0, R = 0, distance = 0;
  std::vector<double> density;
};

void require_flag(bool present, const char* flag) {
  if (!present) throw nescape::InvalidInputError(std::string("missing required flag ") + flag);
}

int run_asymptotics(const AsymptoticsOpts& o) {
  namespace asym = nescape::asymptotics;
  Record rec;
  rec.add("cmd", std::string("asymptotics"));
  rec.add("formula", o.formula);

  std::vector<std::string> head{"formula"};
  std::vector<std::string> cells{o.formula};
  auto col = [&](const char* name, double v) {
    head.emplace_back(name);
    cells.push_back(sci(v));
    rec.add(name, v);
  };

  // The positivity checks ran at parse time, so zero means the flag is absent.
  asym::NetExpansion e;
  if (o.formula == "net" || o.formula == "eigenvalue") {
    require_flag(o.volume != 0, "--volume");
    require_flag(o.a != 0, "--a");
    col("volume", o.volume);
    col("a", o.a);
    col("D", o.D);
    col("kappa_sum", o.kappa_sum);
    e = o.formula == "net" ? asym::net_general(o.volume, o.a, o.D, o.kappa_sum)
                           : asym::eigenvalue_small_window(o.volume, o.a, o.D, o.kappa_sum);
  } else if (o.formula == "net-ball") {
    require_flag(o.R != 0, "--R");
    require_flag(o.a != 0, "--a");
    col("R", o.R);
    col("a", o.a);
    col("D", o.D);
    e = asym::net_ball(o.R, o.a, o.D);
  } else if (o.formula == "leak" || o.formula == "leak-multi") {
    require_flag(o.a != 0, "--a");
    require_flag(!o.density.empty(), "--density");
    if (o.formula == "leak" && o.density.size() != 1)
      throw nescape::InvalidInputError("formula leak takes exactly one --density");
    col("a", o.a);
    col("D", o.D);
    std::string dens;
    std::vector<asym::LeakSpec> leaks;
    for (double p : o.density) {
      if (!dens.empty()) dens += ';';
      dens += sci(p);
      leaks.push_back({o.a, p});
    }
    head.emplace_back("density");
    cells.push_back(csv_quote(dens));
    rec.add("density", dens);
    const double flux = o.formula == "leak" ? asym::leakage_flux(leaks[0], o.D)
                                            : asym::leakage_flux_multi(leaks, o.D);
    e.leading = flux;
    e.log_correction = 0;
    e.value = flux;
    e.regime_ok = true;
  } else if (o.formula == "singular") {
    require_flag(o.distance != 0, "--distance");
    col("distance", o.distance);
    col("kappa_sum", o.kappa_sum);
    const double total = asym::neumann_singular_part(o.distance, o.kappa_sum);
    e.leading = 1.0 / (2.0 * M_PI * o.distance);
    e.log_correction = total - e.leading;
    e.value = total;
    e.regime_ok = true;
  } else {
    throw nescape::InvalidInputError("unknown formula '" + o.formula + "'");
  }

  Csv csv(o.output, rec);
  head.insert(head.end(), {"leading", "log_correction", "value", "regime_ok"});
  cells.insert(cells.end(),
               {sci(e.leading), sci(e.log_correction), sci(e.value), e.regime_ok ? "1" : "0"});
  csv.row(head);
  csv.row(cells);
  std::printf("%s: value %.12g  (leading %.12g, log correction %.12g, regime %s)\n",
              o.formula.c_str(), e.value, e.leading, e.log_correction,
              e.regime_ok ? "ok" : "stretched");
  std::printf("wrote %s\n", o.output.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// patch-v0 and ball-log-slope

struct PatchOpts {
  double kappa1 = 0, kappa2 = 0, patch_radius = 0;
  std::vector<double> offsets;
  std::string output = "patch-v0.csv";
};

int run_patch(const PatchOpts& o) {
  namespace greens = nescape::greens;
  std::vector<double> offsets = o.offsets;
  if (offsets.empty()) {
    // Two decades below the patch radius, well inside the log layer.
    for (int i = 0; i < 8; ++i)
      offsets.push_back(o.patch_radius * 1e-3 * std::pow(100.0, i / 7.0));
  }
  Record rec;
  rec.add("cmd", std::string("patch-v0"));
  rec.add("kappa1", o.kappa1);
  rec.add("kappa2", o.kappa2);
  rec.add("patch_radius", o.patch_radius);
  for (double d : offsets) rec.add("offset", d);

  std::vector<double> values;
  for (double d : offsets) values.push_back(greens::patch_v0(o.kappa1, o.kappa2, o.patch_radius, d));
  greens::LogFit fit = greens::fit_log_slope(offsets, values);
  const double expected = (o.kappa1 + o.kappa2) / (8.0 * M_PI);
  const double rel = expected != 0 ? (fit.slope - expected) / expected : fit.slope;

  Csv csv(o.output, rec);
  csv.row({"offset", "value"});
  for (std::size_t i = 0; i < offsets.size(); ++i) csv.row({sci(offsets[i]), sci(values[i])});
  csv.comment("slope=" + sci(fit.slope) + " expected=" + sci(expected) +
              " relative_error=" + sci(rel));
  std::printf("slope %.12g  expected (k1+k2)/8pi %.12g  relative error %.3e\n", fit.slope,
              expected, rel);
  std::printf("wrote %s\n", o.output.c_str());
  return 0;
}

struct BallSlopeOpts {
  double R = 1;
  int truncation = 64;
  std::string output = "ball-log-slope.csv";
};

int run_ball_slope(const BallSlopeOpts& o) {
  namespace greens = nescape::greens;
  // Same probe ladder the library uses for its default fit.
  std::vector<double> offsets;
  for (int i = 0; i < 12; ++i) offsets.push_back(o.R * 1e-4 * std::pow(100.0, i / 11.0));
  Record rec;
  rec.add("cmd", std::string("ball-log-slope"));
  rec.add("R", o.R);
  rec.add("truncation", std::to_string(o.truncation));

  bool raised = false;
  greens::LogFit fit = greens::boundary_log_coefficient_ball(o.R, o.truncation, offsets, &raised);
  const double expected = 1.0 / (4.0 * M_PI);
  const double rel = (fit.slope - expected) / expected;

  Csv csv(o.output, rec);
  csv.row({"offset", "value"});
  const Vec3 e{0, 0, 1};
  for (double delta : offsets) {
    const double t = (o.R - delta) / o.R;
    const int deg = std::max(greens::series_degree_needed(t), o.truncation);
    const double val =
        greens::neumann_ball(e * o.R, e * (o.R - delta), o.R, deg) - 1.0 / (2.0 * M_PI * delta);
    csv.row({sci(delta), sci(val)});
  }
  csv.comment("slope=" + sci(fit.slope) + " expected=" + sci(expected) +
              " relative_error=" + sci(rel));
  if (raised)
    std::fprintf(stderr, "advisory: series degree raised above --truncation for deep probes\n");
  std::printf("slope %.12g  expected 1/4pi %.12g  relative error %.3e\n", fit.slope, expected,
              rel);
  std::printf("wrote %s\n", o.output.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// helmholtz

struct HelmholtzOpts {
  double a = 0, kappa_sum = 0, volume = 0, D = 1;
  int nodes = 32;
  std::string output = "helmholtz.csv";
};

int run_helmholtz(const HelmholtzOpts& o) {
  namespace helmholtz = nescape::helmholtz;
  namespace asym = nescape::asymptotics;
  const double vcbrt = std::cbrt(o.volume);
  const double a_s = o.a / vcbrt;
  const double H = -(o.kappa_sum * vcbrt) / (8.0 * M_PI);
  helmholtz::DiskSolution sol = helmholtz::solve_disk(a_s, H, 1.0, o.nodes);
  const double net = helmholtz::net_from_solver(o.volume, o.a, o.D, o.kappa_sum, o.nodes);
  const double reference = asym::net_general(o.volume, o.a, o.D, o.kappa_sum).value;
  const double rel = (net - reference) / reference;

  Record rec;
  rec.add("cmd", std::string("helmholtz"));
  rec.add("a", o.a);
  rec.add("kappa_sum", o.kappa_sum);
  rec.add("volume", o.volume);
  rec.add("D", o.D);
  rec.add("nodes", std::to_string(o.nodes));
  rec.add("scaled_a", a_s);
  rec.add("H", H);

  Csv csv(o.output, rec);
  csv.row({"r", "ghat", "g"});
  for (int i = 0; i < sol.n; ++i)
    csv.row({sci(sol.r[i]), sci(sol.ghat[i]), sci(sol.density(sol.r[i]))});
  csv.comment("C=" + sci(sol.C) + " total_flux=" + sci(sol.total_flux) +
              " reference_net=" + sci(reference) + " relative_error=" + sci(rel));
  std::printf("C %.12g  total flux %.12g  rcond %.3e\n", sol.C, sol.total_flux, sol.rcond);
  std::printf("net from solver %.12g  closed form %.12g  relative error %.3e\n", net, reference,
              rel);
  std::printf("wrote %s\n", o.output.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// Monte Carlo subcommands

struct McOpts {
  std::string domain;
  std::vector<std::string> windows;
  std::string source;          // leakage-mc only
  std::string start = "uniform";
  double dt = 0, max_time = 0, D = 1;
  std::uint64_t trajectories = 10000;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool allow_coarse = false;
  int workers = 0;
  double t_lo = 0, t_hi = 0;   // survival-mc only
  std::string output;
  std::string dump;            // escape-mc: optional per-trajectory CSV
};

std::uint64_t default_seed() {
  const char* env = std::getenv("NE_SEED");
  if (!env || !*env) return kDefaultSeed;
  char* end = nullptr;
  const std::uint64_t v = std::strtoull(env, &end, 10);
  if (!end || *end != '\0')
    throw nescape::InvalidInputError(std::string("NE_SEED is not an integer: ") + env);
  return v;
}

mcsim::SimConfig build_sim_config(const McOpts& o, Record& rec, bool leakage) {
  mcsim::SimConfig cfg;
  cfg.domain = parse_domain(o.domain);
  std::vector<std::string> warnings;
  for (const auto& w : o.windows) cfg.windows.push_back(parse_window(cfg.domain, w, &warnings));
  cfg.diffusion = o.D;
  cfg.dt = o.dt;
  cfg.trajectories = o.trajectories;
  cfg.seed = o.seed_given ? o.seed : default_seed();
  cfg.max_time = o.max_time;
  cfg.allow_coarse_dt = o.allow_coarse;
  cfg.workers = o.workers;
  if (leakage) {
    cfg.start = mcsim::StartMode::source_surface;
    cfg.source.push_back(parse_window(cfg.domain, o.source, &warnings));
  } else if (o.start == "uniform") {
    cfg.start = mcsim::StartMode::uniform_volume;
  } else if (o.start.rfind("point:", 0) == 0) {
    const auto parts = split(o.start.substr(6), ',');
    if (parts.size() != 3)
      throw nescape::InvalidInputError("start point expects point:<x,y,z>: " + o.start);
    cfg.start = mcsim::StartMode::fixed_point;
    cfg.start_point = Vec3{parse_num(parts[0], "start"), parse_num(parts[1], "start"),
                           parse_num(parts[2], "start")};
  } else {
    throw nescape::InvalidInputError("unknown start mode '" + o.start +
                                     "' (uniform | point:<x,y,z>)");
  }
  for (const auto& w : warnings) std::fprintf(stderr, "advisory: %s\n", w.c_str());
  for (const auto& w : mcsim::window_advisories(cfg))
    std::fprintf(stderr, "advisory: %s\n", w.c_str());

  rec.add("domain", o.domain);
  for (const auto& w : o.windows) rec.add("window", w);
  if (leakage) rec.add("source", o.source);
  rec.add("start", leakage ? std::string("source") : o.start);
  rec.add("D", o.D);
  rec.add("trajectories", static_cast<std::uint64_t>(cfg.trajectories));
  rec.add("seed", cfg.seed);
  mcsim::ResolvedConfig rc = mcsim::resolve(cfg);
  rec.add("dt", rc.dt);
  rec.add("max_time", rc.max_time);
  rec.add("workers", static_cast<std::uint64_t>(cfg.workers));
  return cfg;
}

int run_escape(const McOpts& o) {
  Record rec;
  rec.add("cmd", std::string("escape-mc"));
  mcsim::SimConfig cfg = build_sim_config(o, rec, false);
  mcsim::RunResult rr = mcsim::run_trajectories(cfg);
  mcsim::EscapeStats st = mcsim::stats_from_samples(rr, cfg.windows.size());

  Csv csv(o.output.empty() ? "escape-mc.csv" : o.output, rec);
  std::vector<std::string> head{"n",        "absorbed", "mean_fpt", "variance",
                                "std_error", "censored", "dt",       "max_time"};
  std::size_t absorbed = st.n - st.censored;
  std::vector<std::string> cells{std::to_string(st.n),        std::to_string(absorbed),
                                 sci(st.mean_fpt),            sci(st.variance),
                                 sci(st.std_error),           std::to_string(st.censored),
                                 sci(rr.dt_used),             sci(rr.max_time_used)};
  for (std::size_t i = 0; i < st.per_window_counts.size(); ++i) {
    head.push_back("count_" + std::to_string(i));
    cells.push_back(std::to_string(st.per_window_counts[i]));
  }
  csv.row(head);
  csv.row(cells);

  if (!o.dump.empty()) {
    Csv dump(o.dump, rec);
    dump.row({"index", "fpt", "window_id"});
    for (std::size_t i = 0; i < rr.samples.size(); ++i)
      dump.row({std::to_string(i), sci(rr.samples[i].time),
                std::to_string(rr.samples[i].window)});
  }
  std::printf("n %zu  mean fpt %.6g  std error %.3g  censored %zu  (dt %.3e)\n", st.n,
              st.mean_fpt, st.std_error, st.censored, rr.dt_used);
  std::printf("wrote %s\n", o.output.empty() ? "escape-mc.csv" : o.output.c_str());
  return 0;
}

int run_survival(const McOpts& o) {
  Record rec;
  rec.add("cmd", std::string("survival-mc"));
  mcsim::SimConfig cfg = build_sim_config(o, rec, false);
  rec.add("t_lo", o.t_lo);
  rec.add("t_hi", o.t_hi);
  mcsim::RunResult rr = mcsim::run_trajectories(cfg);
  std::vector<double> times;
  times.reserve(rr.samples.size());
  for (const auto& s : rr.samples) times.push_back(s.time);
  mcsim::ResolvedConfig rc = mcsim::resolve(cfg);
  mcsim::SurvivalRate sr = mcsim::survival_fit(times, o.t_lo, o.t_hi, rc.predicted_net);

  Csv csv(o.output.empty() ? "survival-mc.csv" : o.output, rec);
  csv.row({"lambda", "std_error", "t_lo", "t_hi", "n", "dt"});
  csv.row({sci(sr.lambda), sci(sr.std_error), sci(o.t_lo), sci(o.t_hi),
           std::to_string(rr.samples.size()), sci(rr.dt_used)});
  std::printf("lambda %.6g  std error %.3g  (window [%g, %g], n %zu)\n", sr.lambda, sr.std_error,
              o.t_lo, o.t_hi, rr.samples.size());
  std::printf("wrote %s\n", o.output.empty() ? "survival-mc.csv" : o.output.c_str());
  return 0;
}

int run_leakage(const McOpts& o) {
  Record rec;
  rec.add("cmd", std::string("leakage-mc"));
  mcsim::SimConfig cfg = build_sim_config(o, rec, true);
  mcsim::LeakageResult lr = mcsim::leakage_experiment(cfg);

  Csv csv(o.output.empty() ? "leakage-mc.csv" : o.output, rec);
  csv.row({"window_id", "role", "fraction", "std_error"});
  for (std::size_t i = 0; i < lr.fractions.size(); ++i)
    csv.row({std::to_string(i), role_name(geometry::window_role(cfg.windows[i])),
             sci(lr.fractions[i]), sci(lr.std_errors[i])});
  csv.row({"-1", "censored", sci(lr.censored_fraction), sci(0.0)});
  std::printf("n %zu  censored fraction %.4g\n", lr.n, lr.censored_fraction);
  for (std::size_t i = 0; i < lr.fractions.size(); ++i)
    std::printf("  window %zu (%s): fraction %.6g  std error %.3g\n", i,
                role_name(geometry::window_role(cfg.windows[i])), lr.fractions[i],
                lr.std_errors[i]);
  std::printf("wrote %s\n", o.output.empty() ? "leakage-mc.csv" : o.output.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// validate

struct ValidateOpts {
  std::string suite = "quick";
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::vector<std::string> tol;
  std::string output = "validation.csv";
};

int run_validate(const ValidateOpts& o) {
  namespace validation = nescape::validation;
  const auto suite =
      o.suite == "full" ? validation::Suite::full : validation::Suite::quick;
  if (o.suite != "full" && o.suite != "quick")
    throw nescape::InvalidInputError("unknown suite '" + o.suite + "' (quick | full)");
  const std::uint64_t seed = o.seed_given ? o.seed : default_seed();

  std::vector<std::pair<std::string, double>> overrides;
  for (const auto& t : o.tol) {
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw nescape::InvalidInputError("tolerance override expects <id>=<value>: " + t);
    overrides.emplace_back(t.substr(0, eq), parse_num(t.substr(eq + 1), "tolerance override"));
  }
  validation::ToleranceOverride ov;
  if (!overrides.empty())
    ov = [&overrides](const std::string& id) -> std::optional<double> {
      for (const auto& [pat, v] : overrides)
        if (pat == "*" || pat == id) return v;
      return std::nullopt;
    };

  validation::ValidationReport rep = validation::run_validation(suite, seed, ov);

  Record rec;
  rec.add("cmd", std::string("validate"));
  rec.add("suite", o.suite);
  rec.add("seed", seed);
  for (const auto& t : o.tol) rec.add("tol", t);
  Csv csv(o.output, rec);
  csv.row({"id", "reference", "provenance", "computed", "rel_error", "tolerance", "pass"});
  std::size_t passed = 0;
  for (const auto& r : rep.rows) {
    csv.row({r.id, sci(r.reference), csv_quote(r.provenance), sci(r.computed), sci(r.rel_error),
             sci(r.tolerance), r.pass ? "1" : "0"});
    passed += r.pass;
    std::printf("%-4s %-28s computed %14.6g  reference %14.6g  rel %10.3e  tol %9.3e\n",
                r.pass ? "ok" : "FAIL", r.id.c_str(), r.computed, r.reference, r.rel_error,
                r.tolerance);
  }
  std::printf("suite %s seed %" PRIu64 ": %zu/%zu rows pass\n", o.suite.c_str(), seed, passed,
              rep.rows.size());
  std::printf("wrote %s\n", o.output.c_str());
  return rep.all_pass() ? 0 : 3;
}

void add_config(CLI::App* sub) {
  // Documentation only: apply_config() consumes --config before CLI11 runs.
  std::string dummy;
  sub->add_option("--config", dummy,
                  "flat key=value file mirroring the long flags; flags override the file");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

// Flat key=value config support. Each entry becomes a --key=value token
// appended after the command line; a key whose flag already appears on the
// command line is dropped wholesale, so flags override the file. Unknown keys
// surface as unknown flags from the parser.
std::vector<std::string> apply_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw nescape::InvalidInputError("--config needs a path");
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw nescape::InvalidInputError("cannot open config file: " + path);
  std::string line;
  std::vector<std::string> extra;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || trim(line.substr(0, eq)).empty())
      throw nescape::InvalidInputError(path + ":" + std::to_string(lineno) +
                                       ": expected key=value");
    const std::string flag = "--" + trim(line.substr(0, eq));
    const bool overridden = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (!overridden) extra.push_back(flag + "=" + trim(line.substr(eq + 1)));
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

void add_mc_flags(CLI::App* sub, McOpts& o, bool leakage) {
  sub->add_option("--domain", o.domain, "ball:R=<r> | box:<lx>,<ly>,<lz> | implicit:<path>")
      ->required();
  sub->add_option("--window", o.windows,
                  "cap:role=<escape|leak|target>,center=<x,y,z>,a=<r> or "
                  "face:role=...,face=<+z|-z|...>; repeatable");
  if (leakage)
    sub->add_option("--source", o.source, "injection window, same grammar as --window")
        ->required();
  else
    sub->add_option("--start", o.start, "uniform | point:<x,y,z>");
  sub->add_option("--dt", o.dt, "time step; 0 selects the guarded default")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--trajectories", o.trajectories, "number of trajectories")
      ->check(CLI::PositiveNumber);
  sub->add_option("--seed", o.seed, "base RNG seed (default: NE_SEED or 12345)");
  sub->add_option("--max-time", o.max_time, "censoring horizon; 0 selects the default")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--D", o.D, "diffusivity")->check(CLI::PositiveNumber);
  sub->add_flag("--allow-coarse-dt", o.allow_coarse, "lift the dt <= 0.01 a_min^2/D guard");
  sub->add_option("--workers", o.workers, "worker threads; 0 = hardware concurrency")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--output", o.output, "summary CSV path");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"narrow-escape toolkit: closed forms, disk solver, Brownian Monte Carlo"};
  app.require_subcommand(1);

  AsymptoticsOpts ao;
  CLI::App* asym = app.add_subcommand("asymptotics", "evaluate a closed-form expression");
  asym->add_option("--formula", ao.formula,
                   "net | net-ball | eigenvalue | leak | leak-multi | singular")
      ->required();
  asym->add_option("--volume", ao.volume, "domain volume")->check(CLI::PositiveNumber);
  asym->add_option("--a", ao.a, "window or leak radius")->check(CLI::PositiveNumber);
  asym->add_option("--D", ao.D, "diffusivity")->check(CLI::PositiveNumber);
  asym->add_option("--kappa-sum", ao.kappa_sum, "sum of principal curvatures at the window");
  asym->add_option("--R", ao.R, "ball radius")->check(CLI::PositiveNumber);
  asym->add_option("--density", ao.density, "reduced density at a leak; repeatable");
  asym->add_option("--distance", ao.distance, "boundary distance for the singular part")
      ->check(CLI::PositiveNumber);
  asym->add_option("--output", ao.output, "output CSV path");
  add_config(asym);

  PatchOpts po;
  CLI::App* patch = app.add_subcommand("patch-v0", "curved-patch potential and its log slope");
  patch->add_option("--kappa1", po.kappa1, "first principal curvature")->required();
  patch->add_option("--kappa2", po.kappa2, "second principal curvature")->required();
  patch->add_option("--patch-radius", po.patch_radius, "patch radius")
      ->required()
      ->check(CLI::PositiveNumber);
  patch->add_option("--offsets", po.offsets, "probe offsets; default spans two decades");
  patch->add_option("--output", po.output, "output CSV path");
  add_config(patch);

  BallSlopeOpts bo;
  CLI::App* ball = app.add_subcommand("ball-log-slope", "boundary log coefficient for the ball");
  ball->add_option("--R", bo.R, "ball radius")->check(CLI::PositiveNumber);
  ball->add_option("--truncation", bo.truncation, "series truncation floor")
      ->check(CLI::PositiveNumber);
  ball->add_option("--output", bo.output, "output CSV path");
  add_config(ball);

  HelmholtzOpts ho;
  CLI::App* helm = app.add_subcommand("helmholtz", "disk integral equation and solver-based net");
  helm->add_option("--a", ho.a, "window radius")->required()->check(CLI::PositiveNumber);
  helm->add_option("--kappa-sum", ho.kappa_sum, "sum of principal curvatures");
  helm->add_option("--volume", ho.volume, "domain volume")
      ->required()
      ->check(CLI::PositiveNumber);
  helm->add_option("--D", ho.D, "diffusivity")->check(CLI::PositiveNumber);
  helm->add_option("--nodes", ho.nodes, "collocation nodes")->check(CLI::PositiveNumber);
  helm->add_option("--output", ho.output, "output CSV path");
  add_config(helm);

  McOpts eo;
  eo.output = "escape-mc.csv";
  CLI::App* esc = app.add_subcommand("escape-mc", "first-passage Monte Carlo");
  add_mc_flags(esc, eo, false);
  esc->add_option("--dump-trajectories", eo.dump, "optional per-trajectory CSV path");
  add_config(esc);

  McOpts so;
  so.output = "survival-mc.csv";
  CLI::App* sur = app.add_subcommand("survival-mc", "survival-decay rate fit");
  add_mc_flags(sur, so, false);
  sur->add_option("--t-lo", so.t_lo, "fit window start")->required()->check(CLI::PositiveNumber);
  sur->add_option("--t-hi", so.t_hi, "fit window end")->required()->check(CLI::PositiveNumber);
  add_config(sur);

  McOpts lo;
  lo.output = "leakage-mc.csv";
  CLI::App* leak = app.add_subcommand("leakage-mc", "source-injection capture fractions");
  add_mc_flags(leak, lo, true);
  add_config(leak);

  ValidateOpts vo;
  CLI::App* val = app.add_subcommand("validate", "cross-validation harness");
  val->add_option("--suite", vo.suite, "quick | full");
  val->add_option("--seed", vo.seed, "harness seed (default: NE_SEED or 12345)");
  val->add_option("--tol", vo.tol, "override a row tolerance, <id>=<value> or *=<value>");
  val->add_option("--output", vo.output, "report CSV path");
  add_config(val);

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = apply_config(std::move(args));
  } catch (const nescape::InvalidInputError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  }
  std::reverse(args.begin(), args.end());
  try {
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  eo.seed_given = esc->count("--seed") > 0;
  so.seed_given = sur->count("--seed") > 0;
  lo.seed_given = leak->count("--seed") > 0;
  vo.seed_given = val->count("--seed") > 0;

  try {
    if (*asym) return run_asymptotics(ao);
    if (*patch) return run_patch(po);
    if (*ball) return run_ball_slope(bo);
    if (*helm) return run_helmholtz(ho);
    if (*esc) return run_escape(eo);
    if (*sur) return run_survival(so);
    if (*leak) return run_leakage(lo);
    if (*val) return run_validate(vo);
  } catch (const nescape::InvalidInputError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const nescape::Error& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
  return 2;
}
