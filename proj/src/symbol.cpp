#include <cmath>
#include <limits>

#include "conoflow/error.hpp"
#include "conoflow/flow.hpp"

namespace conoflow {

namespace {

// d_x d_y^k V. A Jump part is piecewise constant, so off the interface only
// the smooth part contributes.
double vx(const ConormalPotential& V, double x, double y, int dy, Side side) {
  if (V.regularity() != Regularity::Jump) return V.eval(x, y, 1, dy, side);
  if (x == 0.0)
    throw Error(ErrorCode::UnsupportedRegularity, "d_x V does not exist on the jump at x = 0");
  return V.smooth().eval(x, y, 1, dy);
}

}  // namespace

Symbol::Symbol(ConormalPotential V, MetricModel m)
    : potential_(std::move(V)), metric_(std::move(m)) {}

double Symbol::r(double x, double y, double eta, Side side) const {
  if (dimension() == 1) return -potential_.eval(x, 0.0, 0, 0, side);
  return -potential_.eval(x, y, 0, 0, side) - metric_.inverse_jet(x, y).h * eta * eta;
}

double Symbol::p(const PhasePoint& rho) const {
  return rho.xi * rho.xi - r(rho.x, rho.y, rho.eta);
}

Symbol::Jet Symbol::first(double x, double y, double eta, Side side) const {
  Jet j;
  if (dimension() == 1) {
    j.r = -potential_.eval(x, 0.0, 0, 0, side);
    j.dx = -vx(potential_, x, 0.0, 0, side);
    return j;
  }
  const MetricJet g = metric_.inverse_jet(x, y);
  const double e2 = eta * eta;
  j.r = -potential_.eval(x, y, 0, 0, side) - g.h * e2;
  j.dx = -vx(potential_, x, y, 0, side) - g.hx * e2;
  j.dy = -potential_.eval(x, y, 0, 1, side) - g.hy * e2;
  j.deta = -2.0 * g.h * eta;
  return j;
}

Symbol::Jet Symbol::tangential(double x, double y, double eta, Side side) const {
  Jet j;
  j.dx = std::numeric_limits<double>::quiet_NaN();
  if (dimension() == 1) {
    j.r = -potential_.eval(x, 0.0, 0, 0, side);
    return j;
  }
  const MetricJet g = metric_.inverse_jet(x, y);
  const double e2 = eta * eta;
  j.r = -potential_.eval(x, y, 0, 0, side) - g.h * e2;
  j.dy = -potential_.eval(x, y, 0, 1, side) - g.hy * e2;
  j.deta = -2.0 * g.h * eta;
  return j;
}

Symbol::Jet Symbol::second(double x, double y, double eta, Side side) const {
  Jet j = first(x, y, eta, side);
  if (dimension() == 1) return j;
  const MetricJet g = metric_.inverse_jet(x, y);
  const double e2 = eta * eta;
  j.dxy = -vx(potential_, x, y, 1, side) - g.hxy * e2;
  j.dxeta = -2.0 * g.hx * eta;
  j.dyy = -potential_.eval(x, y, 0, 2, side) - g.hyy * e2;
  j.dyeta = -2.0 * g.hy * eta;
  j.detaeta = -2.0 * g.h;
  if (potential_.max_dx_order() >= 2 && x != 0.0)
    j.dxx = -potential_.eval(x, y, 2, 0, side) - g.hxx * e2;
  else
    j.dxx = std::numeric_limits<double>::quiet_NaN();
  return j;
}

PhasePoint Symbol::field(const PhasePoint& rho, Side side) const {
  const Jet j = first(rho.x, rho.y, rho.eta, side);
  return {2.0 * rho.xi, j.dx, -j.deta, j.dy};
}

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::Smooth: return "smooth";
    case Regime::HyperbolicCrossing: return "hyperbolic-crossing";
    case Regime::Glancing: return "glancing";
  }
  return "?";
}

std::string_view to_string(PointClass tag) {
  switch (tag) {
    case PointClass::Interior: return "Interior";
    case PointClass::Hyperbolic: return "Hyperbolic";
    case PointClass::Glancing2: return "Glancing2";
    case PointClass::Degenerate: return "Degenerate";
    case PointClass::OffShell: return "OffShell";
  }
  return "?";
}

std::string_view to_string(TrajectoryStatus status) {
  switch (status) {
    case TrajectoryStatus::Complete: return "complete";
    case TrajectoryStatus::EndedDegenerate: return "ended-degenerate";
    case TrajectoryStatus::EndedNearGlancing: return "ended-near-glancing";
  }
  return "?";
}

double p(const ConormalPotential& V, const MetricModel& m, const PhasePoint& rho) {
  return Symbol(V, m).p(rho);
}

double hp_f(const ConormalPotential&, const MetricModel&, const PhasePoint& rho) {
  return 2.0 * rho.xi;
}

Hp2f hp2_f(const ConormalPotential& V, const MetricModel& m, const PhasePoint& rho) {
  if (rho.x == 0.0 && V.regularity() == Regularity::Jump)
    throw Error(ErrorCode::UnsupportedRegularity,
                "H_p^2 x is undefined on the interface for a Jump potential");
  const Symbol symbol(V, m);
  const Symbol::Jet j = symbol.first(rho.x, rho.y, rho.eta, Side::Right);
  return {2.0 * j.dx, rho.x == 0.0 && V.regularity() == Regularity::W11};
}

Classification classify(const ConormalPotential& V, const MetricModel& m, const PhasePoint& rho,
                        double tol) {
  if (!(tol > 0.0)) throw Error(ErrorCode::Precondition, "classify needs tol > 0");
  Classification c;
  c.p = p(V, m, rho);
  c.f = rho.x;
  c.hp_f = 2.0 * rho.xi;
  try {
    c.hp2_f = hp2_f(V, m, rho).value;
  } catch (const Error&) {
    // Left as NaN: no a.e. derivative (Jump) or an infinite one (xlog at 0).
  }

  if (std::abs(c.p) > tol)
    c.tag = PointClass::OffShell;
  else if (std::abs(c.f) > tol)
    c.tag = PointClass::Interior;
  else if (std::abs(c.hp_f) > tol)
    c.tag = PointClass::Hyperbolic;
  else if (std::isfinite(c.hp2_f) && std::abs(c.hp2_f) > tol)
    c.tag = PointClass::Glancing2;
  else
    c.tag = PointClass::Degenerate;
  return c;
}

}  // namespace conoflow
