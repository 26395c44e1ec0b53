#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "conoflow/error.hpp"
#include "conoflow/flow.hpp"
#include "detail/flow_internal.hpp"

namespace conoflow {

using detail::Vec4;

namespace detail {

void picard_advance(const Symbol& symbol, Vec4& y, double& t, double span, double tol,
                    double initial_step, std::vector<Sample>& out) {
  if (span == 0.0) return;
  const double dir = span > 0.0 ? 1.0 : -1.0;
  const double target = t + span;
  const double atol = tol * 1e-2, rtol = tol * 1e-2;
  auto f = [&](const Vec4& z) { return free_field(symbol, z, dir); };

  double h = dir * std::min(std::abs(initial_step), std::abs(span));
  while (dir * (target - t) > 0.0) {
    const bool last = std::abs(h) >= std::abs(target - t);
    if (last) h = target - t;

    Vec4 full{}, half{}, twice{};
    const bool converged = gauss_legendre_panel<4>(f, y, h, full, atol).converged &&
                           gauss_legendre_panel<4>(f, y, 0.5 * h, half, atol).converged &&
                           gauss_legendre_panel<4>(f, half, 0.5 * h, twice, atol).converged;
    double error = INFINITY;
    if (converged) {
      error = 0.0;
      for (std::size_t i = 0; i < 4; ++i) {
        const double scale = atol + rtol * std::max(std::abs(y[i]), std::abs(twice[i]));
        error = std::max(error, std::abs(twice[i] - full[i]) / scale);
      }
    }
    if (error <= 1.0) {
      y = twice;
      t = last ? target : t + h;
      out.push_back({t, to_point(y)});
      h *= error == 0.0 ? 4.0 : std::clamp(0.9 * std::pow(error, -1.0 / 7.0), 0.2, 4.0);
    } else {
      h *= converged ? std::clamp(0.9 * std::pow(error, -1.0 / 7.0), 0.1, 0.9) : 0.25;
    }
    if (std::abs(h) < 1e-15 * (1.0 + std::abs(t)))
      throw Error(ErrorCode::Diagnostic, "collocation stepper: step size underflow");
  }
}

namespace {

// Jet-based expansion about rho0, valid for |t| << 1:
//   x   = x0 + 2 xi0 t + a t^2 + (t^3/3) xi''
//   xi  = xi0 + a t + (t^2/2) xi''
// with a = d_x r(rho0); the y/eta lines carry their own second-order terms.
struct Expansion {
  PhasePoint rho0;
  Symbol::Jet j;
  double xi2 = 0.0, y2 = 0.0, eta2 = 0.0;

  Expansion(const Symbol& symbol, const PhasePoint& rho) : rho0(rho) {
    j = symbol.second(rho.x, rho.y, rho.eta, Side::Right);
    if (symbol.dimension() == 2) {
      xi2 = j.dxy * (-j.deta) + j.dxeta * j.dy;
      y2 = -2.0 * rho.xi * j.dxeta + j.dyeta * j.deta - j.detaeta * j.dy;
      eta2 = 2.0 * rho.xi * j.dxy + j.dyeta * j.dy - j.dyy * j.deta;
    }
  }

  PhasePoint at(double t) const {
    const double t2 = t * t;
    PhasePoint q;
    q.x = rho0.x + 2.0 * rho0.xi * t + j.dx * t2 + xi2 * t2 * t / 3.0;
    q.xi = rho0.xi + j.dx * t + 0.5 * xi2 * t2;
    q.y = rho0.y - j.deta * t + 0.5 * y2 * t2;
    q.eta = rho0.eta + j.dy * t + 0.5 * eta2 * t2;
    return q;
  }

  double lead(double t) const { return rho0.x + 2.0 * rho0.xi * t + j.dx * t * t; }
};

}  // namespace

GlancingSegment glancing_segment(const Symbol& symbol, const PhasePoint& rho0, double t_span,
                                 const FlowOptions& options) {
  const ConormalPotential& V = symbol.potential();
  if (V.regularity() < Regularity::W21)
    throw Error(ErrorCode::UnsupportedRegularity,
                "glancing continuation needs V in W^{2,1} in x");
  const double threshold = std::sqrt(options.tol);
  const Expansion expansion(symbol, rho0);
  if (!(std::abs(2.0 * expansion.j.dx) > threshold))
    throw Error(ErrorCode::Precondition, "degenerate glancing point: H_p^2 x vanishes");

  GlancingSegment out;
  TrajectoryBuilder builder(0.0, rho0);
  if (t_span != 0.0) {
    const double r1 = R1(V, symbol.metric(), rho0, std::abs(t_span), options.window);
    if (!(r1 < options.r1_threshold)) {
      std::ostringstream msg;
      msg << "glancing span too long: R1(" << std::abs(t_span) << ") = " << r1
          << " exceeds " << options.r1_threshold;
      throw Error(ErrorCode::Precondition, msg.str());
    }

    const double dir = t_span > 0.0 ? 1.0 : -1.0;
    const double inner = std::min(options.t_inner, std::abs(t_span));
    for (double frac : {0.125, 0.25, 0.5, 1.0})
      builder.add(dir * inner * frac, expansion.at(dir * inner * frac), Regime::Glancing);

    if (std::abs(t_span) > inner) {
      Vec4 y = to_vec(expansion.at(dir * inner));
      double t = dir * inner;
      std::vector<Sample> tail;
      picard_advance(symbol, y, t, t_span - t, options.tol, inner, tail);
      for (const auto& s : tail) builder.add(s.t, s.rho, Regime::Glancing);
    }
  }
  out.trajectory = builder.finish(symbol, options.tol, t_span);

  for (const auto& s : out.trajectory.samples) {
    if (s.t == 0.0) continue;
    const double r1 = R1(V, symbol.metric(), rho0, std::abs(s.t), options.window);
    const double ratio = std::abs(s.rho.x - expansion.lead(s.t)) / (s.t * s.t * r1);
    out.residual_profile.emplace_back(s.t, ratio);
    out.constant = std::max(out.constant, ratio);
  }
  if (!(out.constant <= options.glancing_constant_limit)) {
    std::ostringstream msg;
    msg << "glancing expansion check failed: C = " << out.constant << "; profile (t, ratio):";
    for (const auto& [t, ratio] : out.residual_profile) msg << " (" << t << ", " << ratio << ")";
    throw Error(ErrorCode::Diagnostic, msg.str());
  }
  return out;
}

}  // namespace detail

double R1(const ConormalPotential& V, const MetricModel& m, const PhasePoint& rho0, double t,
          double window) {
  if (V.regularity() < Regularity::W21)
    throw Error(ErrorCode::UnsupportedRegularity, "R1 needs V in W^{2,1} in x");
  if (!(t >= 0.0) || !std::isfinite(t)) throw Error(ErrorCode::Precondition, "R1 needs t > 0");
  if (t == 0.0) return 0.0;

  const Symbol symbol(V, m);
  const double a = 2.0 * std::abs(symbol.first(rho0.x, rho0.y, rho0.eta).dx) * t * t;
  if (a == 0.0) return t;

  std::vector<std::pair<double, double>> window_points;
  if (m.dimension() == 1) {
    window_points.emplace_back(0.0, 0.0);
  } else {
    for (int i = -2; i <= 2; ++i)
      for (int k = -2; k <= 2; ++k)
        window_points.emplace_back(rho0.y + 0.5 * window * i, rho0.eta + 0.5 * window * k);
  }

  auto sup_dxx = [&](double s) {
    if (s == 0.0) s = std::numeric_limits<double>::min();
    const Side side = side_of(s);
    double best = 0.0;
    for (const auto& [y, eta] : window_points) {
      double v = -V.eval(s, y, 2, 0, side);
      if (m.dimension() == 2) v -= m.inverse_jet(s, y).hxx * eta * eta;
      best = std::max(best, std::abs(v));
    }
    return best;
  };

  boost::math::quadrature::tanh_sinh<double> quad;
  const double left = quad.integrate(sup_dxx, -a, 0.0);
  const double right = quad.integrate(sup_dxx, 0.0, a);
  return left + right + t;
}

GlancingSegment step_glancing(const ConormalPotential& V, const MetricModel& m,
                              const PhasePoint& rho0, double t_span,
                              const FlowOptions& options) {
  if (V.regularity() < Regularity::W21)
    throw Error(ErrorCode::UnsupportedRegularity,
                "glancing continuation needs V in W^{2,1} in x");
  const Symbol symbol(V, m);
  const double threshold = std::sqrt(options.tol);
  if (std::abs(symbol.p(rho0)) > threshold || std::abs(rho0.x) > threshold ||
      std::abs(2.0 * rho0.xi) > threshold)
    throw Error(ErrorCode::Precondition,
                "step_glancing needs a characteristic point over x = 0 with xi = 0");
  return detail::glancing_segment(symbol, rho0, t_span, options);
}

}  // namespace conoflow
