#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "conoflow/flow.hpp"
#include "detail/integrators.hpp"

namespace conoflow::detail {

using Vec4 = Vec<4>;

inline Vec4 to_vec(const PhasePoint& rho) { return {rho.x, rho.xi, rho.y, rho.eta}; }
inline PhasePoint to_point(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }
inline Vec4 to_vec4(const PhasePoint& f) { return {f.x, f.xi, f.y, f.eta}; }

inline double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

/// Vector field confined to one side of x = 0: a state that strays across
/// is evaluated just inside the locked side and `strayed` is raised.
inline Vec4 locked_field(const Symbol& symbol, const Vec4& z, Side lock, bool& strayed) {
  PhasePoint rho = to_point(z);
  const double s = sign_of(lock);
  if (s * rho.x < 0.0) {
    strayed = true;
    rho.x = s * std::numeric_limits<double>::min();
  }
  return to_vec4(symbol.field(rho, lock));
}

/// Two-sided field; at x = 0 the limit is taken from the side being entered.
inline Vec4 free_field(const Symbol& symbol, const Vec4& z, double direction) {
  const PhasePoint rho = to_point(z);
  const Side side = rho.x != 0.0 ? side_of(rho.x) : side_of(direction * rho.xi);
  return to_vec4(symbol.field(rho, side));
}

/// Adaptive Gauss-Legendre collocation (Picard) stepping over `span`.
/// Used where the field is continuous but not smooth across x = 0.
void picard_advance(const Symbol& symbol, Vec4& y, double& t, double span, double tol,
                    double initial_step, std::vector<Sample>& out);

/// step_glancing without the on-shell check: integrate() also meets
/// glancing points on energy levels other than p = 0.
GlancingSegment glancing_segment(const Symbol& symbol, const PhasePoint& rho0, double t_span,
                                 const FlowOptions& options);

/// Incremental Trajectory assembly with merged regime segments.
class TrajectoryBuilder {
 public:
  TrajectoryBuilder(double t0, const PhasePoint& rho0) {
    trajectory_.samples.push_back({t0, rho0});
  }

  void add(double t, const PhasePoint& rho, Regime regime) {
    const double t_prev = trajectory_.samples.back().t;
    if (t == t_prev) {
      trajectory_.samples.back().rho = rho;
      return;
    }
    trajectory_.samples.push_back({t, rho});
    auto& segs = trajectory_.segments;
    if (!segs.empty() && segs.back().regime == regime && segs.back().t1 == t_prev)
      segs.back().t1 = t;
    else
      segs.push_back({t_prev, t, regime});
  }

  Trajectory finish(const Symbol& symbol, double tol, double T) {
    const double p0 = symbol.p(trajectory_.samples.front().rho);
    double drift = 0.0;
    for (const auto& s : trajectory_.samples)
      drift = std::max(drift, std::abs(symbol.p(s.rho) - p0));
    trajectory_.energy_drift = drift;
    trajectory_.drift_tolerance = tol * (1.0 + std::abs(T));
    return std::move(trajectory_);
  }

  Trajectory& raw() { return trajectory_; }

 private:
  Trajectory trajectory_;
};

}  // namespace conoflow::detail
