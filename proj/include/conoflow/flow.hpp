#pragma once

#include <limits>
#include <string>
#include <vector>

#include "conoflow/geometry.hpp"
#include "conoflow/phase_space.hpp"
#include "conoflow/potentials.hpp"

namespace conoflow {

/// p = xi^2 - r with r = -V - h^{11} eta^2, and the Hamilton vector field
///   x' = 2 xi,  xi' = d_x r,  y' = -d_eta r,  eta' = d_y r.
class Symbol {
 public:
  Symbol(ConormalPotential V, MetricModel m);

  int dimension() const { return metric_.dimension(); }
  const ConormalPotential& potential() const { return potential_; }
  const MetricModel& metric() const { return metric_; }

  double r(double x, double y, double eta, Side side = Side::Right) const;
  double p(const PhasePoint& rho) const;

  struct Jet {
    double r = 0.0;
    double dx = 0.0, dy = 0.0, deta = 0.0;
    double dxx = 0.0, dxy = 0.0, dxeta = 0.0;
    double dyy = 0.0, dyeta = 0.0, detaeta = 0.0;
  };

  /// First derivatives of r. d_x r is taken one-sided at x = 0.
  Jet first(double x, double y, double eta, Side side = Side::Right) const;
  /// r, d_y r and d_eta r only; d_x r is left NaN. Never touches d_x V.
  Jet tangential(double x, double y, double eta, Side side = Side::Right) const;
  /// Full second-order jet (requires an x-order-2 capable potential for dxx).
  Jet second(double x, double y, double eta, Side side = Side::Right) const;

  /// Hamilton vector field at rho, one-sided in x at the interface.
  PhasePoint field(const PhasePoint& rho, Side side) const;

 private:
  ConormalPotential potential_;
  MetricModel metric_;
};

enum class Regime { Smooth, HyperbolicCrossing, Glancing };
enum class PointClass { Interior, Hyperbolic, Glancing2, Degenerate, OffShell };

std::string_view to_string(Regime regime);
std::string_view to_string(PointClass tag);

struct Sample {
  double t = 0.0;
  PhasePoint rho;
};

struct Segment {
  double t0 = 0.0;
  double t1 = 0.0;
  Regime regime = Regime::Smooth;
};

enum class TrajectoryStatus { Complete, EndedDegenerate, EndedNearGlancing };
std::string_view to_string(TrajectoryStatus status);

/// Time-stamped phase points with regime labels and conservation diagnostics.
struct Trajectory {
  std::vector<Sample> samples;
  std::vector<Segment> segments;
  double energy_drift = 0.0;
  /// Bound the drift is held to: tol * (1 + |T|).
  double drift_tolerance = 0.0;
  TrajectoryStatus status = TrajectoryStatus::Complete;
  std::string diagnostic;

  const Sample& back() const { return samples.back(); }
  const PhasePoint& final_point() const { return samples.back().rho; }
};

struct Hp2f {
  double value = 0.0;
  /// Set when the a.e. derivative was taken as a one-sided limit at x = 0.
  bool one_sided = false;
};

struct Classification {
  PointClass tag = PointClass::OffShell;
  double p = 0.0;
  double f = 0.0;
  double hp_f = 0.0;
  /// NaN when d_x r is not available at the point.
  double hp2_f = std::numeric_limits<double>::quiet_NaN();
};

struct FlowOptions {
  double tol = 1e-8;
  /// Crossings refuse below this |xi|; (2 xi)^{-1} is too stiff there.
  double xi_min = 1e-3;
  /// Length of the expansion-seeded launch interval at a glancing point.
  double t_inner = 1e-4;
  /// Half-width of the (y, eta) window for the sup inside R1.
  double window = 0.5;
  /// Longest glancing segment integrate() takes before handing back to RK.
  double glancing_span = 1e-2;
  /// step_glancing refuses spans with R1(|t|) above this.
  double r1_threshold = 1.0;
  /// |x| at which a hyperbolic crossing hands back to time stepping.
  double exit_band = 0.05;
  /// Measured glancing constant above this is reported as a failure.
  double glancing_constant_limit = 1e6;

  friend bool operator==(const FlowOptions&, const FlowOptions&) = default;
};

double p(const ConormalPotential& V, const MetricModel& m, const PhasePoint& rho);
double hp_f(const ConormalPotential& V, const MetricModel& m, const PhasePoint& rho);
Hp2f hp2_f(const ConormalPotential& V, const MetricModel& m, const PhasePoint& rho);
Classification classify(const ConormalPotential& V, const MetricModel& m, const PhasePoint& rho,
                        double tol);

struct SmoothStep {
  PhasePoint rho;
  double t_advanced = 0.0;
  /// The step stopped on x = 0 before covering dt.
  bool interface_hit = false;
};

/// Adaptive Dormand-Prince integration over dt (either sign). For
/// non-smooth V it stops exactly on x = 0 and reports the hit time.
SmoothStep step_smooth(const ConormalPotential& V, const MetricModel& m, const PhasePoint& rho,
                       double dt, double tol);

struct CrossingOptions {
  double xi_min = 1e-3;
  /// +1 forward in time, -1 backward.
  int direction = 1;
  /// Stop early once |t| reaches |t_limit|.
  double t_limit = std::numeric_limits<double>::infinity();
};

struct Crossing {
  PhasePoint rho;
  double t_elapsed = 0.0;
  bool time_limited = false;
  /// Accepted x-steps, times relative to the entry.
  std::vector<Sample> samples;
};

/// Transverse passage through x = 0 with x as the independent variable.
/// xi is recovered from xi^2 = p(entry) + r(x, y, eta), so d_x V is never
/// sampled; (t, y, eta) are integrated in x.
Crossing cross_hyperbolic(const ConormalPotential& V, const MetricModel& m, const PhasePoint& rho,
                          double x_exit, double tol, const CrossingOptions& options = {});

/// R1(t) = int_{-a}^{a} sup_{(y,eta)} |d_x^2 r(s, y, eta)| ds + |t|,
/// a = 2 |d_x r(rho0)| t^2, the sup over the (y, eta) window around rho0.
double R1(const ConormalPotential& V, const MetricModel& m, const PhasePoint& rho0, double t,
          double window = 0.5);

struct GlancingSegment {
  Trajectory trajectory;
  /// max |x(t) - x_lead(t)| / (t^2 R1(|t|)) over the samples.
  double constant = 0.0;
  /// (t, ratio) pairs behind the constant.
  std::vector<std::pair<double, double>> residual_profile;
};

/// Continuation through a second-order glancing point: a-priori expansion
/// on [0, t_inner], then Picard iteration (Gauss-Legendre collocation
/// panels) up to t_span.
GlancingSegment step_glancing(const ConormalPotential& V, const MetricModel& m,
                              const PhasePoint& rho0, double t_span,
                              const FlowOptions& options = {});

/// The flow map phi_t on [0, T] (either sign), dispatching on the regime at
/// every interface encounter.
Trajectory integrate(const ConormalPotential& V, const MetricModel& m, const PhasePoint& rho0,
                     double T, const FlowOptions& options = {});

struct FlowBox {
  std::vector<PhasePoint> samples;
  std::vector<PhasePoint> images;
  std::vector<bool> ok;
  std::vector<std::size_t> failures;
  std::vector<std::string> failure_messages;
  /// inf over B x [0, T] of |H_p x| + |x|.
  double hypothesis_infimum = 0.0;
  /// Same with |H_p^2 x| added.
  double corollary_infimum = 0.0;
  bool hypothesis_holds = false;
  bool corollary_holds = false;

  /// Bounding box of the successfully transported samples.
  PhaseSpaceBox image_bounds(int dimension) const;
};

/// Grid of n points per phase-space axis over B (endpoints included),
/// each transported to time T.
FlowBox flow_box(const ConormalPotential& V, const MetricModel& m, const PhaseSpaceBox& B,
                 double T, const FlowOptions& options = {}, int n_per_axis = 20);

}  // namespace conoflow
