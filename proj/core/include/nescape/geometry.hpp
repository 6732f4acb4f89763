#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nescape/errors.hpp"
#include "nescape/vec.hpp"

namespace nescape::geometry {

// Sparse trivariate polynomial sum c * x^i y^j z^k. Derivative polynomials
// are materialized on demand so gradients and Hessians stay analytic.
struct Polynomial3 {
  struct Term {
    int i = 0, j = 0, k = 0;
    double c = 0;
  };
  std::vector<Term> terms;

  double eval(const Vec3& p) const;
  Polynomial3 derivative(int axis) const;
};

enum class DomainKind { ball, box, implicit, custom };

struct CustomDomain {
  std::function<double(const Vec3&)> value;
  std::function<Vec3(const Vec3&)> gradient;
  std::function<Mat3(const Vec3&)> hessian; // may be empty: finite differences
  Vec3 bbox_lo, bbox_hi;
  std::optional<double> volume;
};

// Bounded domain given by a level set F < 0 with grad F pointing outward on
// the boundary. Ball and box carry exact fast paths; implicit polynomials get
// analytic derivatives; custom callables fall back to finite differences for
// the Hessian when none is supplied.
class DomainDescriptor {
public:
  static DomainDescriptor ball(double radius);
  static DomainDescriptor box(double lx, double ly, double lz);
  static DomainDescriptor implicit(Polynomial3 f, Vec3 bbox_lo, Vec3 bbox_hi,
                                   std::optional<double> volume);
  // Parses the level-set file format (see README); throws FormatError.
  static DomainDescriptor implicit_from_file(const std::string& path);
  static DomainDescriptor custom(CustomDomain d);

  DomainKind kind() const { return kind_; }
  double value(const Vec3& p) const;
  Vec3 gradient(const Vec3& p) const;
  // Analytic where available, otherwise central differences of the gradient
  // with step 1e-4 * bbox diagonal.
  Mat3 hessian(const Vec3& p) const;
  bool has_analytic_hessian() const;

  bool inside(const Vec3& p) const { return value(p) < 0; }
  double volume() const; // throws InvalidInputError when not known

  const Vec3& bbox_lo() const { return bbox_lo_; }
  const Vec3& bbox_hi() const { return bbox_hi_; }
  double bbox_diagonal() const;
  // max |F| over the bounding-box corners; the natural scale for F tolerances.
  double f_scale() const { return f_scale_; }

  double ball_radius() const;      // kind() == ball
  const Vec3& box_half() const;    // kind() == box

  // Placeholder (a radius-zero ball) so configs can be built field by field;
  // assign a factory result before use.
  DomainDescriptor() = default;

private:
  DomainKind kind_ = DomainKind::ball;
  double radius_ = 0;
  Vec3 half_{};
  Polynomial3 poly_, poly_dx_, poly_dy_, poly_dz_;
  Polynomial3 poly_dxx_, poly_dyy_, poly_dzz_, poly_dxy_, poly_dxz_, poly_dyz_;
  CustomDomain custom_{};
  Vec3 bbox_lo_{}, bbox_hi_{};
  std::optional<double> volume_;
  double f_scale_ = 1;
};

struct BoundaryPoint {
  Vec3 position;
  Vec3 normal; // outward unit normal
};

// Newton iteration along grad F from a point near the boundary. Converges
// when |F| <= 1e-9 * f_scale; at most 50 steps. Throws ProjectionFailureError
// on budget exhaustion, DegenerateGradientError where grad F vanishes.
BoundaryPoint project_to_boundary(const DomainDescriptor& d, const Vec3& x);

struct Curvatures {
  double kappa1 = 0; // kappa1 >= kappa2; positive where the domain is convex
  double kappa2 = 0;
  double sum() const { return kappa1 + kappa2; }
  double mean() const { return 0.5 * (kappa1 + kappa2); }
};

// Principal curvatures at a boundary point via the shape operator
// (t_i' H t_j) / |grad F| on an orthonormal tangent frame.
Curvatures principal_curvatures(const DomainDescriptor& d, const Vec3& boundary_point);

enum class WindowRole { escape, leak, target };

// Spherical-cap style absorbing window: a disk of radius `radius` in the
// tangent frame at `center`, which lies on the boundary.
struct CircularWindow {
  Vec3 center;
  double radius = 0;
  Vec3 normal, tangent1, tangent2;
  WindowRole role = WindowRole::escape;
};

// Entire face of a box domain as an absorbing window.
struct FaceWindow {
  int axis = 0;  // 0,1,2
  int sign = 1;  // +1 or -1
  Vec3 half;     // box half extents, copied at construction
  WindowRole role = WindowRole::escape;
};

using Window = std::variant<CircularWindow, FaceWindow>;

// Projects `center` onto the boundary, builds the tangent frame, and runs the
// placement checks: the radius must fit the local geometry (hard error), and
// any soft concerns (window within 5 radii of a box face edge, window radius
// above a tenth of the local curvature radius) are appended to `warnings`.
CircularWindow make_cap_window(const DomainDescriptor& d, const Vec3& center, double radius,
                               WindowRole role, std::vector<std::string>* warnings = nullptr);

FaceWindow make_face_window(const DomainDescriptor& d, int axis, int sign, WindowRole role);

// Containment test used at boundary hits. For caps: tangential distance at
// most the radius, with a transverse guard |z - center| <= 1.5 * radius that
// rejects far-side points whose tangential projection happens to be small.
bool window_contains(const CircularWindow& w, const Vec3& z);
bool window_contains(const FaceWindow& w, const Vec3& z, double face_tol);
bool window_contains(const Window& w, const Vec3& z, double face_tol);

WindowRole window_role(const Window& w);
// Cap radius when the window is circular; face windows have none.
std::optional<double> window_cap_radius(const Window& w);

} // namespace nescape::geometry
