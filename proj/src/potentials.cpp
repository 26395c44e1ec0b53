#include "conoflow/potentials.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "conoflow/error.hpp"
#include "conoflow/geometry.hpp"

namespace conoflow {

namespace {

using Rule = boost::math::quadrature::gauss<double, 64>;

[[noreturn]] void unsupported(const ConormalPotential& V, int dx) {
  throw Error(ErrorCode::UnsupportedRegularity,
              "x-derivative of order " + std::to_string(dx) + " is not available for " +
                  std::string(to_string(V.regularity())) + " potential (" + V.describe() + ")");
}

[[noreturn]] void singular_point(std::string_view what, int dx) {
  throw Error(ErrorCode::SingularPoint, std::string(what) + " x-derivative of order " +
                                            std::to_string(dx) + " is infinite at x = 0");
}

double bump(double u) { return std::exp(-1.0 / (1.0 - u * u)); }

double bump_derivative(double u, int derivative) {
  if (std::abs(u) >= 1.0) return 0.0;
  const double q = 1.0 - u * u;
  const double b = bump(u);
  const double g1 = -2.0 * u / (q * q);
  switch (derivative) {
    case 0: return b;
    case 1: return b * g1;
    default: return b * (g1 * g1 - 2.0 * (1.0 + 3.0 * u * u) / (q * q * q));
  }
}

double bump_mass() {
  static const double mass = Rule::integrate([](double u) { return bump(u); }, -1.0, 1.0);
  return mass;
}

}  // namespace

std::string_view to_string(Regularity tag) {
  switch (tag) {
    case Regularity::Jump: return "Jump";
    case Regularity::W11: return "W11";
    case Regularity::W21: return "W21";
    case Regularity::Smooth: return "Smooth";
  }
  return "?";
}

std::string_view to_string(SmoothKind kind) {
  switch (kind) {
    case SmoothKind::Zero: return "zero";
    case SmoothKind::Poly: return "poly";
    case SmoothKind::CosY: return "cosy";
  }
  return "?";
}

std::string_view to_string(SingularKind kind) {
  switch (kind) {
    case SingularKind::None: return "none";
    case SingularKind::Step: return "step";
    case SingularKind::Kink: return "kink";
    case SingularKind::PowKink: return "powkink";
    case SingularKind::Power: return "power";
    case SingularKind::XLog: return "xlog";
  }
  return "?";
}

const std::vector<std::string>& smooth_catalog() {
  static const std::vector<std::string> names{"zero", "poly", "cosy"};
  return names;
}

const std::vector<std::string>& singular_catalog() {
  static const std::vector<std::string> names{"none", "step", "kink", "powkink", "power", "xlog"};
  return names;
}

SmoothKind parse_smooth_kind(std::string_view name) {
  for (auto kind : {SmoothKind::Zero, SmoothKind::Poly, SmoothKind::CosY})
    if (to_string(kind) == name) return kind;
  throw Error(ErrorCode::Config, "unknown smooth part '" + std::string(name) +
                                     "'; catalog: zero, poly, cosy");
}

SingularKind parse_singular_kind(std::string_view name) {
  for (auto kind : {SingularKind::None, SingularKind::Step, SingularKind::Kink,
                    SingularKind::PowKink, SingularKind::Power, SingularKind::XLog})
    if (to_string(kind) == name) return kind;
  throw Error(ErrorCode::Config, "unknown singular part '" + std::string(name) +
                                     "'; catalog: none, step, kink, powkink, power, xlog");
}

SmoothPart SmoothPart::poly(double v0, double v1, double v2, double vy, double vyy, double vxy) {
  SmoothPart s;
  s.kind = SmoothKind::Poly;
  s.v0 = v0;
  s.v1 = v1;
  s.v2 = v2;
  s.vy = vy;
  s.vyy = vyy;
  s.vxy = vxy;
  return s;
}

SmoothPart SmoothPart::cosy(double v0, double v1, double v2, double a, double k) {
  SmoothPart s;
  s.kind = SmoothKind::CosY;
  s.v0 = v0;
  s.v1 = v1;
  s.v2 = v2;
  s.a = a;
  s.k = k;
  return s;
}

double SmoothPart::eval(double x, double y, int dx, int dy) const {
  if (kind == SmoothKind::Zero) return 0.0;

  // Shared x-polynomial v0 + v1 x + v2 x^2.
  auto xpoly = [&](int order) {
    switch (order) {
      case 0: return v0 + v1 * x + v2 * x * x;
      case 1: return v1 + 2.0 * v2 * x;
      case 2: return 2.0 * v2;
      default: return 0.0;
    }
  };

  if (kind == SmoothKind::Poly) {
    if (dy == 0) {
      const double mixed = dx == 0 ? vxy * x * y : (dx == 1 ? vxy * y : 0.0);
      const double ypart = dx == 0 ? vy * y + vyy * y * y : 0.0;
      return xpoly(dx) + mixed + ypart;
    }
    if (dy == 1) {
      if (dx == 0) return vy + 2.0 * vyy * y + vxy * x;
      return dx == 1 ? vxy : 0.0;
    }
    return (dy == 2 && dx == 0) ? 2.0 * vyy : 0.0;
  }

  // cosy
  if (dy == 0) return xpoly(dx) + (dx == 0 ? a * std::cos(k * y) : 0.0);
  if (dx != 0) return 0.0;
  switch (dy % 4) {
    case 1: return -a * k * std::sin(k * y);
    case 2: return -a * k * k * std::cos(k * y);
    case 3: return a * k * k * k * std::sin(k * y);
    default: return a * std::pow(k, dy) * std::cos(k * y);
  }
}

double SingularPart::coefficient(double y, int dy) const {
  switch (dy) {
    case 0: return c + c1 * y + c2 * y * y;
    case 1: return c1 + 2.0 * c2 * y;
    case 2: return 2.0 * c2;
    default: return 0.0;
  }
}

ConormalPotential::ConormalPotential(SmoothPart smooth, SingularPart singular)
    : smooth_(smooth), singular_(singular) {
  if (singular_.kind == SingularKind::Power &&
      !(singular_.alpha > 0.0 && singular_.alpha < 1.0))
    throw Error(ErrorCode::Config, "power singular part needs 0 < alpha < 1");
  if (singular_.epsilon < 0.0 || !std::isfinite(singular_.epsilon))
    throw Error(ErrorCode::Config, "mollification width must be finite and >= 0");

  if (singular_.kind == SingularKind::None || singular_.epsilon > 0.0) {
    regularity_ = Regularity::Smooth;
    return;
  }
  switch (singular_.kind) {
    case SingularKind::Step: regularity_ = Regularity::Jump; break;
    case SingularKind::Kink:
    case SingularKind::XLog: regularity_ = Regularity::W11; break;
    default: regularity_ = Regularity::W21; break;
  }
}

int ConormalPotential::max_dx_order() const {
  switch (regularity_) {
    case Regularity::Jump: return 0;
    case Regularity::W11: return 1;
    default: return 2;
  }
}

std::string ConormalPotential::describe() const {
  std::ostringstream os;
  os << to_string(smooth_.kind) << " + " << to_string(singular_.kind);
  if (singular_.kind != SingularKind::None) os << "(c=" << singular_.c << ")";
  if (singular_.epsilon > 0.0) os << " mollified eps=" << singular_.epsilon;
  return os.str();
}

double ConormalPotential::profile(double x, int dx, Side side) const {
  const double s = x == 0.0 ? sign_of(side) : (x > 0.0 ? 1.0 : -1.0);
  const double ax = std::abs(x);
  switch (singular_.kind) {
    case SingularKind::None: return 0.0;
    case SingularKind::Step:
      if (dx > 0) return 0.0;
      return s > 0.0 ? 1.0 : 0.0;
    case SingularKind::Kink:
      return dx == 0 ? ax : (dx == 1 ? s : 0.0);
    case SingularKind::PowKink:
      if (dx == 0) return x * ax;
      return dx == 1 ? 2.0 * ax : 2.0 * s;
    case SingularKind::Power: {
      const double p = 1.0 + singular_.alpha;
      if (dx == 0) return std::pow(ax, p);
      if (dx == 1) return ax == 0.0 ? 0.0 : p * s * std::pow(ax, singular_.alpha);
      if (ax == 0.0) singular_point("power", dx);
      return p * singular_.alpha * std::pow(ax, singular_.alpha - 1.0);
    }
    case SingularKind::XLog:
      if (dx == 0) return ax == 0.0 ? 0.0 : x * std::log(ax);
      if (ax == 0.0) singular_point("xlog", dx);
      return std::log(ax) + 1.0;
  }
  return 0.0;
}

// (S * phi_eps)^{(k)}(x). When the support misses x = 0 the derivative moves
// onto S; otherwise eps^{-k} int S(x - eps u) phi^{(k)}(u) du on panels split
// where the argument of S crosses 0. Both are normalised by the discrete
// mass on the same nodes.
double ConormalPotential::mollified_profile(double x, int dx) const {
  const double eps = singular_.epsilon;
  const double split = x / eps;
  auto mass = [](double u) { return bump(u); };

  if (split <= -1.0 || split >= 1.0) {
    const Side side = side_of(x);
    auto integrand = [&](double u) { return profile(x - eps * u, dx, side) * bump(u); };
    return Rule::integrate(integrand, -1.0, 1.0) / bump_mass();
  }

  auto integrand = [&](double u) {
    return profile(x - eps * u, 0, Side::Right) * bump_derivative(u, dx);
  };
  auto panels = [](const auto& f, double a, double b) {
    constexpr int n = 4;
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
      sum += Rule::integrate(f, a + (b - a) * i / n, a + (b - a) * (i + 1) / n);
    return sum;
  };
  const double integral = panels(integrand, -1.0, split) + panels(integrand, split, 1.0);
  const double norm = panels(mass, -1.0, split) + panels(mass, split, 1.0);
  return integral / (norm * std::pow(eps, dx));
}

double ConormalPotential::eval(double x, double y, int dx_order, int dy_order, Side side) const {
  if (dx_order < 0 || dx_order > 2 || dy_order < 0 || dy_order > 2)
    throw Error(ErrorCode::Precondition, "derivative orders must lie in {0, 1, 2}");
  if (dx_order > max_dx_order()) unsupported(*this, dx_order);

  double value = smooth_.eval(x, y, dx_order, dy_order);
  if (singular_.kind == SingularKind::None) return value;

  const double coeff = singular_.coefficient(y, dy_order);
  if (coeff == 0.0) return value;
  const double shape =
      singular_.epsilon > 0.0 ? mollified_profile(x, dx_order) : profile(x, dx_order, side);
  return value + coeff * shape;
}

double r_symbol(const ConormalPotential& V, const MetricModel& m, double x, double y, double eta) {
  if (m.dimension() == 1) return -V.eval(x, 0.0, 0, 0);
  return -V.eval(x, y, 0, 0) - m.inverse_jet(x, y).h * eta * eta;
}

ConormalPotential mollify(const ConormalPotential& V, double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw Error(ErrorCode::Precondition, "mollification width must be positive");
  if (V.regularity() == Regularity::Smooth) return V;
  SingularPart singular = V.singular();
  singular.epsilon = epsilon;
  return {V.smooth(), singular};
}

double mollifier(double u, int derivative) {
  return bump_derivative(u, derivative) / bump_mass();
}

}  // namespace conoflow
