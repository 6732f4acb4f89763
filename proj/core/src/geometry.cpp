#include "nescape/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace nescape::geometry {

namespace {

double ipow(double x, int n) {
  double r = 1;
  for (int k = 0; k < n; ++k) r *= x;
  return r;
}

const double kPi = std::acos(-1.0);

} // namespace

double Polynomial3::eval(const Vec3& p) const {
  double s = 0;
  for (const Term& t : terms) s += t.c * ipow(p.x, t.i) * ipow(p.y, t.j) * ipow(p.z, t.k);
  return s;
}

Polynomial3 Polynomial3::derivative(int axis) const {
  Polynomial3 d;
  for (const Term& t : terms) {
    Term dt = t;
    int& e = axis == 0 ? dt.i : (axis == 1 ? dt.j : dt.k);
    if (e == 0) continue;
    dt.c *= e;
    e -= 1;
    d.terms.push_back(dt);
  }
  return d;
}

namespace {

// f_scale = max |F| over bbox corners and center. The center is included
// because for a box F vanishes at every corner.
double compute_f_scale(const DomainDescriptor& d) {
  const Vec3 lo = d.bbox_lo(), hi = d.bbox_hi();
  double s = 0;
  for (int m = 0; m < 8; ++m) {
    Vec3 c{m & 1 ? hi.x : lo.x, m & 2 ? hi.y : lo.y, m & 4 ? hi.z : lo.z};
    s = std::max(s, std::abs(d.value(c)));
  }
  s = std::max(s, std::abs(d.value((lo + hi) * 0.5)));
  if (s == 0) throw InvalidInputError("domain level set vanishes on the whole probe set");
  return s;
}

} // namespace

DomainDescriptor DomainDescriptor::ball(double radius) {
  if (!(radius > 0)) throw InvalidInputError("ball: radius must be positive");
  DomainDescriptor d;
  d.kind_ = DomainKind::ball;
  d.radius_ = radius;
  d.bbox_lo_ = {-radius, -radius, -radius};
  d.bbox_hi_ = {radius, radius, radius};
  d.volume_ = 4.0 / 3.0 * kPi * radius * radius * radius;
  d.f_scale_ = compute_f_scale(d);
  return d;
}

DomainDescriptor DomainDescriptor::box(double lx, double ly, double lz) {
  if (!(lx > 0) || !(ly > 0) || !(lz > 0))
    throw InvalidInputError("box: edge lengths must be positive");
  DomainDescriptor d;
  d.kind_ = DomainKind::box;
  d.half_ = {0.5 * lx, 0.5 * ly, 0.5 * lz};
  d.bbox_lo_ = -d.half_;
  d.bbox_hi_ = d.half_;
  d.volume_ = lx * ly * lz;
  d.f_scale_ = compute_f_scale(d);
  return d;
}

DomainDescriptor DomainDescriptor::implicit(Polynomial3 f, Vec3 bbox_lo, Vec3 bbox_hi,
                                            std::optional<double> volume) {
  if (!(bbox_lo.x < bbox_hi.x && bbox_lo.y < bbox_hi.y && bbox_lo.z < bbox_hi.z))
    throw InvalidInputError("implicit: bounding box is empty");
  if (volume && !(*volume > 0)) throw InvalidInputError("implicit: volume must be positive");
  DomainDescriptor d;
  d.kind_ = DomainKind::implicit;
  d.poly_ = std::move(f);
  d.poly_dx_ = d.poly_.derivative(0);
  d.poly_dy_ = d.poly_.derivative(1);
  d.poly_dz_ = d.poly_.derivative(2);
  d.poly_dxx_ = d.poly_dx_.derivative(0);
  d.poly_dyy_ = d.poly_dy_.derivative(1);
  d.poly_dzz_ = d.poly_dz_.derivative(2);
  d.poly_dxy_ = d.poly_dx_.derivative(1);
  d.poly_dxz_ = d.poly_dx_.derivative(2);
  d.poly_dyz_ = d.poly_dy_.derivative(2);
  d.bbox_lo_ = bbox_lo;
  d.bbox_hi_ = bbox_hi;
  d.volume_ = volume;
  d.f_scale_ = compute_f_scale(d);
  return d;
}

DomainDescriptor DomainDescriptor::custom(CustomDomain c) {
  if (!c.value || !c.gradient)
    throw InvalidInputError("custom: value and gradient callables are required");
  if (!(c.bbox_lo.x < c.bbox_hi.x && c.bbox_lo.y < c.bbox_hi.y && c.bbox_lo.z < c.bbox_hi.z))
    throw InvalidInputError("custom: bounding box is empty");
  DomainDescriptor d;
  d.kind_ = DomainKind::custom;
  d.bbox_lo_ = c.bbox_lo;
  d.bbox_hi_ = c.bbox_hi;
  d.volume_ = c.volume;
  d.custom_ = std::move(c);
  d.f_scale_ = compute_f_scale(d);
  return d;
}

DomainDescriptor DomainDescriptor::implicit_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open level-set file: " + path);
  std::string line;
  int lineno = 0;
  bool have_version = false, have_bbox = false;
  Polynomial3 poly;
  Vec3 lo{}, hi{};
  std::optional<double> volume;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word) || word[0] == '#') continue;
    auto fail = [&](const std::string& why) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": " + why);
    };
    if (word == "version") {
      int v = 0;
      if (!(ls >> v) || v != 1) fail("unsupported version (expected 1)");
      have_version = true;
    } else if (!have_version) {
      fail("first directive must be 'version 1'");
    } else if (word == "bbox") {
      if (!(ls >> lo.x >> lo.y >> lo.z >> hi.x >> hi.y >> hi.z)) fail("bbox needs six numbers");
      have_bbox = true;
    } else if (word == "volume") {
      double v = 0;
      if (!(ls >> v)) fail("volume needs one number");
      volume = v;
    } else if (word == "term") {
      Polynomial3::Term t;
      if (!(ls >> t.i >> t.j >> t.k >> t.c)) fail("term needs 'i j k c'");
      if (t.i < 0 || t.j < 0 || t.k < 0) fail("term exponents must be nonnegative");
      poly.terms.push_back(t);
    } else {
      fail("unknown directive '" + word + "'");
    }
  }
  if (!have_version) throw FormatError(path + ": missing 'version 1' directive");
  if (!have_bbox) throw FormatError(path + ": missing 'bbox' directive");
  if (poly.terms.empty()) throw FormatError(path + ": no 'term' directives");
  return implicit(std::move(poly), lo, hi, volume);
}

double DomainDescriptor::value(const Vec3& p) const {
  switch (kind_) {
    case DomainKind::ball:
      return dot(p, p) - radius_ * radius_;
    case DomainKind::box:
      return std::max({std::abs(p.x) - half_.x, std::abs(p.y) - half_.y,
                       std::abs(p.z) - half_.z});
    case DomainKind::implicit:
      return poly_.eval(p);
    case DomainKind::custom:
      return custom_.value(p);
  }
  return 0;
}

Vec3 DomainDescriptor::gradient(const Vec3& p) const {
  switch (kind_) {
    case DomainKind::ball:
      return p * 2.0;
    case DomainKind::box: {
      // Subgradient at edges and corners: the first maximal face wins, which
      // keeps the projection deterministic.
      double vx = std::abs(p.x) - half_.x;
      double vy = std::abs(p.y) - half_.y;
      double vz = std::abs(p.z) - half_.z;
      if (vx >= vy && vx >= vz) return {p.x >= 0 ? 1.0 : -1.0, 0, 0};
      if (vy >= vz) return {0, p.y >= 0 ? 1.0 : -1.0, 0};
      return {0, 0, p.z >= 0 ? 1.0 : -1.0};
    }
    case DomainKind::implicit:
      return {poly_dx_.eval(p), poly_dy_.eval(p), poly_dz_.eval(p)};
    case DomainKind::custom:
      return custom_.gradient(p);
  }
  return {};
}

bool DomainDescriptor::has_analytic_hessian() const {
  switch (kind_) {
    case DomainKind::custom:
      return static_cast<bool>(custom_.hessian);
    default:
      return true;
  }
}

Mat3 DomainDescriptor::hessian(const Vec3& p) const {
  Mat3 h;
  switch (kind_) {
    case DomainKind::ball:
      h(0, 0) = h(1, 1) = h(2, 2) = 2.0;
      return h;
    case DomainKind::box:
      return h; // faces are flat
    case DomainKind::implicit:
      h(0, 0) = poly_dxx_.eval(p);
      h(1, 1) = poly_dyy_.eval(p);
      h(2, 2) = poly_dzz_.eval(p);
      h(0, 1) = h(1, 0) = poly_dxy_.eval(p);
      h(0, 2) = h(2, 0) = poly_dxz_.eval(p);
      h(1, 2) = h(2, 1) = poly_dyz_.eval(p);
      return h;
    case DomainKind::custom:
      break;
  }
  if (custom_.hessian) return custom_.hessian(p);
  // Central differences of the gradient, then symmetrization.
  const double step = 1e-4 * bbox_diagonal();
  for (int i = 0; i < 3; ++i) {
    Vec3 pp = p, pm = p;
    pp[i] += step;
    pm[i] -= step;
    Vec3 gp = custom_.gradient(pp), gm = custom_.gradient(pm);
    for (int j = 0; j < 3; ++j) h(i, j) = (gp[j] - gm[j]) / (2.0 * step);
  }
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      double s = 0.5 * (h(i, j) + h(j, i));
      h(i, j) = h(j, i) = s;
    }
  return h;
}

double DomainDescriptor::volume() const {
  if (!volume_) throw InvalidInputError("domain volume is not known");
  return *volume_;
}

double DomainDescriptor::bbox_diagonal() const { return norm(bbox_hi_ - bbox_lo_); }

double DomainDescriptor::ball_radius() const {
  if (kind_ != DomainKind::ball) throw InvalidInputError("ball_radius: domain is not a ball");
  return radius_;
}

const Vec3& DomainDescriptor::box_half() const {
  if (kind_ != DomainKind::box) throw InvalidInputError("box_half: domain is not a box");
  return half_;
}

BoundaryPoint project_to_boundary(const DomainDescriptor& d, const Vec3& x) {
  const double tol = 1e-9 * d.f_scale();
  const double grad_tol = 1e-12 * d.f_scale() / d.bbox_diagonal();
  Vec3 p = x;
  for (int it = 0; it < 50; ++it) {
    double f = d.value(p);
    Vec3 g = d.gradient(p);
    double g2 = norm2(g);
    if (g2 < grad_tol * grad_tol)
      throw DegenerateGradientError("project_to_boundary: vanishing gradient");
    if (std::abs(f) <= tol) return {p, g / std::sqrt(g2)};
    p -= g * (f / g2);
  }
  throw ProjectionFailureError("project_to_boundary: no convergence in 50 iterations");
}

namespace {

// Orthonormal tangent frame for a unit normal: seed with the coordinate axis
// least aligned with n.
void tangent_frame(const Vec3& n, Vec3& t1, Vec3& t2) {
  Vec3 seed = std::abs(n.x) <= std::abs(n.y)
                  ? (std::abs(n.x) <= std::abs(n.z) ? Vec3{1, 0, 0} : Vec3{0, 0, 1})
                  : (std::abs(n.y) <= std::abs(n.z) ? Vec3{0, 1, 0} : Vec3{0, 0, 1});
  t1 = normalized(cross(seed, n));
  t2 = cross(n, t1);
}

} // namespace

Curvatures principal_curvatures(const DomainDescriptor& d, const Vec3& z) {
  Vec3 g = d.gradient(z);
  double gn = norm(g);
  const double grad_tol = 1e-12 * d.f_scale() / d.bbox_diagonal();
  if (gn < grad_tol)
    throw DegenerateGradientError("principal_curvatures: vanishing gradient");
  Vec3 n = g / gn, t1, t2;
  tangent_frame(n, t1, t2);
  Mat3 h = d.hessian(z);
  double m11 = dot(t1, mul(h, t1)) / gn;
  double m22 = dot(t2, mul(h, t2)) / gn;
  double m12 = dot(t1, mul(h, t2)) / gn;
  double mean = 0.5 * (m11 + m22);
  double disc = std::sqrt(0.25 * (m11 - m22) * (m11 - m22) + m12 * m12);
  return {mean + disc, mean - disc};
}

CircularWindow make_cap_window(const DomainDescriptor& d, const Vec3& center, double radius,
                               WindowRole role, std::vector<std::string>* warnings) {
  if (!(radius > 0)) throw InvalidInputError("cap window: radius must be positive");
  BoundaryPoint bp = project_to_boundary(d, center);

  if (d.kind() == DomainKind::ball && radius > d.ball_radius())
    throw InvalidInputError("cap window: radius exceeds the ball radius");

  if (d.kind() == DomainKind::box) {
    // The cap must sit inside one face: hard error if it would cross an edge,
    // soft warning within five radii of one.
    const Vec3& h = d.box_half();
    Vec3 g = d.gradient(bp.position);
    int axis = std::abs(g.x) > 0.5 ? 0 : (std::abs(g.y) > 0.5 ? 1 : 2);
    double edge = std::numeric_limits<double>::infinity();
    for (int b = 0; b < 3; ++b) {
      if (b == axis) continue;
      edge = std::min(edge, h[b] - std::abs(bp.position[b]));
    }
    if (edge < radius)
      throw InvalidInputError("cap window: cap of this radius crosses a face edge");
    if (edge < 5 * radius && warnings)
      warnings->push_back("cap window lies within five radii of a face edge; "
                          "boundary statistics near the edge may be distorted");
  }

  if (d.kind() != DomainKind::box) {
    Curvatures k = principal_curvatures(d, bp.position);
    double kmax = std::max(std::abs(k.kappa1), std::abs(k.kappa2));
    // Advisory only: the flat-disk picture needs a rolling ball of radius >= 10a.
    if (kmax * radius > 0.1 && warnings)
      warnings->push_back("cap window radius exceeds a tenth of the local curvature "
                          "radius; the flat-disk approximation degrades");
  }

  CircularWindow w;
  w.center = bp.position;
  w.radius = radius;
  w.normal = bp.normal;
  tangent_frame(w.normal, w.tangent1, w.tangent2);
  w.role = role;
  return w;
}

FaceWindow make_face_window(const DomainDescriptor& d, int axis, int sign, WindowRole role) {
  if (d.kind() != DomainKind::box)
    throw InvalidInputError("face window: domain is not a box");
  if (axis < 0 || axis > 2 || (sign != 1 && sign != -1))
    throw InvalidInputError("face window: bad axis or sign");
  FaceWindow w;
  w.axis = axis;
  w.sign = sign;
  w.half = d.box_half();
  w.role = role;
  return w;
}

bool window_contains(const CircularWindow& w, const Vec3& z) {
  Vec3 dvec = z - w.center;
  if (norm2(dvec) > 2.25 * w.radius * w.radius) return false;
  double u = dot(dvec, w.tangent1), v = dot(dvec, w.tangent2);
  return u * u + v * v <= w.radius * w.radius;
}

bool window_contains(const FaceWindow& w, const Vec3& z, double face_tol) {
  if (std::abs(z[w.axis] - w.sign * w.half[w.axis]) > face_tol) return false;
  for (int b = 0; b < 3; ++b) {
    if (b == w.axis) continue;
    if (std::abs(z[b]) > w.half[b]) return false;
  }
  return true;
}

bool window_contains(const Window& w, const Vec3& z, double face_tol) {
  if (const auto* c = std::get_if<CircularWindow>(&w)) return window_contains(*c, z);
  return window_contains(std::get<FaceWindow>(w), z, face_tol);
}

WindowRole window_role(const Window& w) {
  if (const auto* c = std::get_if<CircularWindow>(&w)) return c->role;
  return std::get<FaceWindow>(w).role;
}

std::optional<double> window_cap_radius(const Window& w) {
  if (const auto* c = std::get_if<CircularWindow>(&w)) return c->radius;
  return std::nullopt;
}

} // namespace nescape::geometry
