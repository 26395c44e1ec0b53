#include <cmath>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "conoflow/error.hpp"
#include "conoflow/flow.hpp"
#include "detail/flow_internal.hpp"

namespace conoflow {

using detail::Vec4;

// State in the x-parametrisation: (x, t, y, eta). xi is not integrated; it
// follows from the conserved symbol, xi^2 = p(entry) + r(x, y, eta).
Crossing cross_hyperbolic(const ConormalPotential& V, const MetricModel& m, const PhasePoint& rho,
                          double x_exit, double tol, const CrossingOptions& options) {
  if (V.regularity() == Regularity::Jump)
    throw Error(ErrorCode::UnsupportedRegularity,
                "crossing needs V in W^{1,1} in x; the step potential has a jump");
  if (options.direction != 1 && options.direction != -1)
    throw Error(ErrorCode::Precondition, "crossing direction must be +1 or -1");
  if (!(tol > 0.0) || !rho.finite() || !std::isfinite(x_exit))
    throw Error(ErrorCode::Precondition, "crossing needs finite input and tol > 0");

  const double s = detail::sgn(rho.xi);
  const double dir = options.direction;
  if (s == 0.0 || detail::sgn(x_exit - rho.x) != s * dir)
    throw Error(ErrorCode::Precondition,
                "sign(x_exit - x) must match sign(xi) times the time direction");
  if (std::abs(rho.xi) < options.xi_min)
    throw Error(ErrorCode::NearGlancing,
                "|xi| = " + std::to_string(std::abs(rho.xi)) + " is below xi_min; reclassify");

  const Symbol symbol(V, m);
  const double p0 = symbol.p(rho);
  const double floor2 = options.xi_min * options.xi_min;
  const bool d1 = m.dimension() == 1;

  auto xi_at = [&](double x, double y, double eta, Side side) {
    const double q = p0 + symbol.r(x, y, eta, side);
    if (!(q >= floor2))
      throw Error(ErrorCode::NearGlancing,
                  "|xi| fell below xi_min at x = " + std::to_string(x) + "; reclassify");
    return s * std::sqrt(q);
  };

  const double atol = tol * 1e-2, rtol = tol * 1e-2;
  const double t_limit = std::abs(options.t_limit);

  Crossing out;
  Vec4 z{rho.x, 0.0, rho.y, rho.eta};

  auto finish = [&](const Vec4& w, Side side) {
    out.rho = {w[0], xi_at(w[0], w[2], w[3], side), d1 ? 0.0 : w[2], d1 ? 0.0 : w[3]};
    out.t_elapsed = w[1];
    return out;
  };

  // Split at x = 0 so each piece sees a field that is smooth up to its ends.
  std::vector<double> breaks;
  if (detail::sgn(rho.x) * detail::sgn(x_exit) < 0.0) breaks.push_back(0.0);
  breaks.push_back(x_exit);

  for (double target : breaks) {
    const double span = target - z[0];
    if (span == 0.0) continue;
    const Side side = side_of(0.5 * (z[0] + target));
    auto f = [&](const Vec4& w) -> Vec4 {
      const double xi = xi_at(w[0], w[2], w[3], side);
      const double inv = 1.0 / (2.0 * xi);
      if (d1) return {1.0, inv, 0.0, 0.0};
      const Symbol::Jet j = symbol.tangential(w[0], w[2], w[3], side);
      return {1.0, inv, -j.deta * inv, j.dy * inv};
    };

    double h = span / 16.0;
    while (detail::sgn(target - z[0]) * detail::sgn(span) > 0.0) {
      const double rest = target - z[0];
      const bool last = std::abs(h) >= std::abs(rest);
      if (last) h = rest;
      const auto step = detail::dopri5<4>(f, z, h, atol, rtol);
      if (!(step.error <= 1.0)) {
        h = detail::next_step(h, std::isfinite(step.error) ? step.error : 1e10, 4);
        if (std::abs(h) < 1e-15 * (1.0 + std::abs(z[0])))
          throw Error(ErrorCode::Diagnostic, "crossing: step size underflow");
        continue;
      }
      if (std::abs(step.y[1]) >= t_limit) {
        const Vec4 from = z;
        auto gt = [&](double s) {
          return s == 0.0 ? std::abs(from[1]) - t_limit
                          : std::abs(detail::dopri5<4>(f, from, s * h, atol, rtol).y[1]) - t_limit;
        };
        boost::uintmax_t iterations = 100;
        const auto bracket = boost::math::tools::toms748_solve(
            gt, 0.0, 1.0, gt(0.0), std::abs(step.y[1]) - t_limit,
            boost::math::tools::eps_tolerance<double>(52), iterations);
        const double dx = h * 0.5 * (bracket.first + bracket.second);
        Vec4 w = detail::dopri5<4>(f, from, dx, atol, rtol).y;
        w[1] = dir * t_limit;
        out.time_limited = true;
        finish(w, side);
        out.samples.push_back({out.t_elapsed, out.rho});
        return out;
      }
      z = step.y;
      if (last) z[0] = target;
      out.samples.push_back({z[1], {z[0], xi_at(z[0], z[2], z[3], side),
                                    d1 ? 0.0 : z[2], d1 ? 0.0 : z[3]}});
      h = detail::next_step(h, step.error, 4);
    }
  }
  return finish(z, side_of(x_exit));
}

}  // namespace conoflow
