#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "conoflow/phase_space.hpp"

namespace conoflow {

class MetricModel;

/// Sobolev class of V in the normal variable. Ordered by regularity.
enum class Regularity { Jump = 0, W11 = 1, W21 = 2, Smooth = 3 };

enum class SmoothKind { Zero, Poly, CosY };

/// Singular catalog in x, each multiplied by c(y) = c + c1 y + c2 y^2.
///   step     1_{x>0}          Jump
///   kink     |x|              W11
///   xlog     x log|x|         W11
///   powkink  x|x|             W21
///   power    |x|^{1+alpha}    W21, 0 < alpha < 1
enum class SingularKind { None, Step, Kink, PowKink, Power, XLog };

std::string_view to_string(Regularity tag);
std::string_view to_string(SmoothKind kind);
std::string_view to_string(SingularKind kind);
SmoothKind parse_smooth_kind(std::string_view name);
SingularKind parse_singular_kind(std::string_view name);
const std::vector<std::string>& smooth_catalog();
const std::vector<std::string>& singular_catalog();

/// Named smooth parts:
///   zero   0
///   poly   v0 + v1 x + v2 x^2 + vy y + vyy y^2 + vxy x y
///   cosy   v0 + v1 x + v2 x^2 + a cos(k y)
struct SmoothPart {
  SmoothKind kind = SmoothKind::Zero;
  double v0 = 0.0, v1 = 0.0, v2 = 0.0;
  double vy = 0.0, vyy = 0.0, vxy = 0.0;
  double a = 0.0, k = 0.0;

  static SmoothPart zero() { return {}; }
  static SmoothPart poly(double v0, double v1 = 0.0, double v2 = 0.0, double vy = 0.0,
                         double vyy = 0.0, double vxy = 0.0);
  static SmoothPart cosy(double v0, double v1, double v2, double a, double k);

  double eval(double x, double y, int dx, int dy) const;

  friend bool operator==(const SmoothPart&, const SmoothPart&) = default;
};

struct SingularPart {
  SingularKind kind = SingularKind::None;
  double c = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double alpha = 0.5;
  /// Mollification width; 0 means the raw singular profile.
  double epsilon = 0.0;

  static SingularPart none() { return {}; }
  static SingularPart step(double c) { return {SingularKind::Step, c}; }
  static SingularPart kink(double c) { return {SingularKind::Kink, c}; }
  static SingularPart powkink(double c) { return {SingularKind::PowKink, c}; }
  static SingularPart power(double c, double alpha) {
    return {SingularKind::Power, c, 0.0, 0.0, alpha};
  }
  static SingularPart xlog(double c) { return {SingularKind::XLog, c}; }

  SingularPart with_y(double slope, double curvature) const {
    SingularPart out = *this;
    out.c1 = slope;
    out.c2 = curvature;
    return out;
  }

  double coefficient(double y, int dy) const;

  friend bool operator==(const SingularPart&, const SingularPart&) = default;
};

/// V(x, y) = smooth(x, y) + c(y) S(x).
///
/// Derivatives in x are the classical ones for x != 0. At x = 0 an a.e.
/// derivative takes its one-sided limit (right limit unless asked
/// otherwise); a derivative that blows up at 0 raises SingularPoint.
/// Supported x-orders: Jump 0, W11 <= 1, W21 and Smooth <= 2.
class ConormalPotential {
 public:
  ConormalPotential() = default;
  ConormalPotential(SmoothPart smooth, SingularPart singular);

  Regularity regularity() const { return regularity_; }
  const SmoothPart& smooth() const { return smooth_; }
  const SingularPart& singular() const { return singular_; }
  bool mollified() const { return singular_.epsilon > 0.0; }

  double eval(double x, double y, int dx_order, int dy_order, Side side = Side::Right) const;
  double value(double x, double y = 0.0) const { return eval(x, y, 0, 0); }

  /// Highest x-derivative order admitted by the regularity tag.
  int max_dx_order() const;

  std::string describe() const;

  friend bool operator==(const ConormalPotential&, const ConormalPotential&) = default;

 private:
  double profile(double x, int dx, Side side) const;
  double mollified_profile(double x, int dx) const;

  SmoothPart smooth_;
  SingularPart singular_;
  Regularity regularity_ = Regularity::Smooth;
};

/// r = -V - h^{ij} eta_i eta_j; in d = 1 just -V.
double r_symbol(const ConormalPotential& V, const MetricModel& m, double x, double y, double eta);

/// Convolution of the singular part in x with phi_eps(s) = phi(s/eps)/eps.
/// The result is Smooth-tagged; a Smooth input is returned unchanged.
ConormalPotential mollify(const ConormalPotential& V, double epsilon);

/// The mollifier bump phi(u) = exp(-1/(1-u^2)) / Z on (-1, 1), or its
/// first/second derivative. Even, nonnegative, unit mass.
double mollifier(double u, int derivative = 0);

}  // namespace conoflow
