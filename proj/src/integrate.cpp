#include <algorithm>
#include <cmath>
#include <optional>

#include "conoflow/error.hpp"
#include "conoflow/flow.hpp"
#include "detail/flow_internal.hpp"

namespace conoflow {

using detail::Vec4;

namespace {

class FlowIntegrator {
 public:
  FlowIntegrator(const ConormalPotential& V, const MetricModel& m, const PhasePoint& rho0,
                 double T, const FlowOptions& options)
      : V_(V),
        m_(m),
        symbol_(V, m),
        options_(options),
        T_(T),
        dir_(T >= 0.0 ? 1.0 : -1.0),
        threshold_(std::sqrt(options.tol)),
        smooth_(V.regularity() == Regularity::Smooth),
        builder_(0.0, rho0),
        y_(detail::to_vec(rho0)) {}

  Trajectory run() {
    const double atol = options_.tol * 1e-2, rtol = atol;
    double h = dir_ * std::min(std::abs(T_), 1e-2);
    while (dir_ * (T_ - t_) > 0.0 && !ended_) {
      if (!smooth_ && y_[0] == 0.0) {
        on_interface();
        continue;
      }
      const bool last = std::abs(h) >= std::abs(T_ - t_);
      if (last) h = T_ - t_;

      const Side lock = side_of(y_[0]);
      bool strayed = false;
      const auto step =
          smooth_ ? detail::dopri5<4>(
                        [&](const Vec4& z) { return detail::free_field(symbol_, z, dir_); }, y_, h,
                        atol, rtol)
                  : detail::dopri5<4>(
                        [&](const Vec4& z) {
                          return detail::locked_field(symbol_, z, lock, strayed);
                        },
                        y_, h, atol, rtol);
      const bool crossed = !smooth_ && (strayed || sign_of(lock) * step.y[0] <= 0.0);
      if (crossed) {
        h = approach(h);
      } else if (!(step.error <= 1.0)) {
        h = detail::next_step(h, std::isfinite(step.error) ? step.error : 1e10, 4);
      } else {
        y_ = step.y;
        t_ = last ? T_ : t_ + h;
        builder_.add(t_, detail::to_point(y_), Regime::Smooth);
        h = detail::next_step(h, step.error, 4);
      }
      if (!ended_ && std::abs(h) < 1e-13 * (1.0 + std::abs(t_))) {
        if (V_.regularity() == Regularity::W11)
          end(TrajectoryStatus::EndedNearGlancing,
              "trajectory stalls against the interface with |xi| < xi_min; "
              "W^{1,1} potentials admit no glancing continuation");
        else
          throw Error(ErrorCode::Diagnostic, "integrate: step size underflow");
      }
    }
    Trajectory out = builder_.finish(symbol_, options_.tol, T_);
    out.status = status_;
    out.diagnostic = diagnostic_;
    return out;
  }

 private:
  void end(TrajectoryStatus status, std::string message) {
    ended_ = true;
    status_ = status;
    diagnostic_ = std::move(message);
  }

  void reject_jump() const {
    if (V_.regularity() == Regularity::Jump)
      throw Error(ErrorCode::UnsupportedRegularity,
                  "trajectory meets the interface of a Jump potential");
  }

  // Hyperbolic passage out to the exit band, narrowing the band when the
  // orbit turns back before reaching it.
  bool try_cross(double xi_min) {
    const PhasePoint rho = detail::to_point(y_);
    const double target_side = detail::sgn(rho.xi) * dir_;
    CrossingOptions co;
    co.xi_min = xi_min;
    co.direction = static_cast<int>(dir_);
    co.t_limit = T_ - t_;
    for (double band = options_.exit_band; band >= options_.exit_band / 64.0; band /= 4.0) {
      try {
        const Crossing c = cross_hyperbolic(V_, m_, rho, target_side * band, options_.tol, co);
        for (const auto& s : c.samples)
          builder_.add(c.time_limited && &s == &c.samples.back() ? T_ : t_ + s.t, s.rho,
                       Regime::HyperbolicCrossing);
        y_ = detail::to_vec(c.rho);
        t_ = c.time_limited ? T_ : t_ + c.t_elapsed;
        if (!c.samples.empty()) builder_.raw().samples.back().rho = c.rho;
        return true;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NearGlancing) throw;
      }
    }
    return false;
  }

  void collocate(double span) {
    std::vector<Sample> out;
    double t = t_;
    detail::picard_advance(symbol_, y_, t, span, options_.tol, std::abs(span) / 8.0, out);
    for (const auto& s : out) builder_.add(s.t, s.rho, Regime::Glancing);
    t_ = t;
  }

  // A time step from y_ would reach or pass x = 0. Returns the next step size.
  double approach(double h) {
    // Moving away from x = 0: the step overshot a turning point.
    if (detail::sgn(y_[0]) * detail::sgn(y_[1]) * dir_ >= 0.0) return 0.5 * h;
    reject_jump();
    if (std::abs(y_[1]) >= options_.xi_min && try_cross(options_.xi_min)) return h;
    if (V_.regularity() >= Regularity::W21) {
      const double remaining = T_ - t_;
      collocate(dir_ * std::min(std::abs(h), std::abs(remaining)));
      return h;
    }
    return 0.5 * h;
  }

  void on_interface() {
    reject_jump();
    const PhasePoint rho = detail::to_point(y_);
    if (std::abs(2.0 * rho.xi) > threshold_) {
      if (try_cross(std::min(options_.xi_min, 0.5 * std::abs(rho.xi)))) return;
      if (V_.regularity() >= Regularity::W21) {
        collocate(dir_ * std::min(options_.glancing_span, std::abs(T_ - t_)));
        return;
      }
      end(TrajectoryStatus::EndedNearGlancing,
          "crossing from the interface degenerated before reaching the exit band");
      return;
    }

    double hp2 = 0.0;
    try {
      hp2 = 2.0 * symbol_.first(rho.x, rho.y, rho.eta, Side::Right).dx;
    } catch (const Error&) {
      hp2 = INFINITY;
    }
    if (V_.regularity() < Regularity::W21) {
      end(TrajectoryStatus::EndedNearGlancing,
          "glancing encounter needs V in W^{2,1}; trajectory ended");
      return;
    }
    if (!(std::abs(hp2) > threshold_)) {
      end(TrajectoryStatus::EndedDegenerate, "degenerate point on the interface: H_p^2 x = 0");
      return;
    }
    double span = std::min(options_.glancing_span, std::abs(T_ - t_));
    while (R1(V_, m_, rho, span, options_.window) >= options_.r1_threshold) span *= 0.5;
    const GlancingSegment seg = detail::glancing_segment(symbol_, rho, dir_ * span, options_);
    const bool reaches_end = std::abs(T_ - t_) <= span;
    for (const auto& s : seg.trajectory.samples) {
      if (s.t == 0.0) continue;
      const bool final = &s == &seg.trajectory.samples.back();
      builder_.add(final && reaches_end ? T_ : t_ + s.t, s.rho, Regime::Glancing);
    }
    y_ = detail::to_vec(seg.trajectory.final_point());
    t_ = reaches_end ? T_ : t_ + seg.trajectory.back().t;
  }

  const ConormalPotential& V_;
  const MetricModel& m_;
  Symbol symbol_;
  FlowOptions options_;
  double T_;
  double dir_;
  double threshold_;
  bool smooth_;
  detail::TrajectoryBuilder builder_;
  Vec4 y_;
  double t_ = 0.0;
  bool ended_ = false;
  TrajectoryStatus status_ = TrajectoryStatus::Complete;
  std::string diagnostic_;
};

}  // namespace

Trajectory integrate(const ConormalPotential& V, const MetricModel& m, const PhasePoint& rho0,
                     double T, const FlowOptions& options) {
  if (!rho0.finite() || !std::isfinite(T) || !(options.tol > 0.0))
    throw Error(ErrorCode::Precondition, "integrate needs finite rho0, T and tol > 0");
  PhasePoint start = rho0;
  if (m.dimension() == 1) start.y = start.eta = 0.0;
  return FlowIntegrator(V, m, start, T, options).run();
}

}  // namespace conoflow
