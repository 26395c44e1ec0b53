#include <algorithm>
#include <cmath>
#include <thread>

#include <boost/math/tools/roots.hpp>

#include "conoflow/error.hpp"
#include "conoflow/flow.hpp"
#include "detail/flow_internal.hpp"

namespace conoflow {

using detail::Vec4;

SmoothStep step_smooth(const ConormalPotential& V, const MetricModel& m, const PhasePoint& rho,
                       double dt, double tol) {
  if (!(tol > 0.0) || !std::isfinite(dt) || !rho.finite())
    throw Error(ErrorCode::Precondition, "step_smooth needs finite rho, dt and tol > 0");
  if (dt == 0.0) return {rho, 0.0, false};

  const Symbol symbol(V, m);
  const bool smooth = V.regularity() == Regularity::Smooth;
  if (!smooth && rho.x == 0.0)
    throw Error(ErrorCode::Precondition, "step_smooth cannot start on x = 0 for non-smooth V");

  const double atol = tol * 1e-2, rtol = tol * 1e-2;
  const double dir = dt > 0.0 ? 1.0 : -1.0;
  const Side lock = side_of(rho.x);
  Vec4 y = detail::to_vec(rho);
  double t = 0.0;
  double h = dir * std::min(std::abs(dt), 1e-2);

  auto attempt = [&](const Vec4& from, double step, bool& strayed) {
    if (smooth)
      return detail::dopri5<4>([&](const Vec4& z) { return detail::free_field(symbol, z, dir); },
                               from, step, atol, rtol);
    return detail::dopri5<4>(
        [&](const Vec4& z) { return detail::locked_field(symbol, z, lock, strayed); }, from, step,
        atol, rtol);
  };

  while (dir * (dt - t) > 0.0) {
    h = dir * std::min(std::abs(h), std::abs(dt - t));
    bool strayed = false;
    const auto step = attempt(y, h, strayed);
    if (!(step.error <= 1.0)) {
      h = detail::next_step(h, std::isfinite(step.error) ? step.error : 1e10, 4);
    } else if (!smooth && sign_of(lock) * step.y[0] <= 0.0) {
      // Endpoint reached the interface: find the sub-step that lands on x = 0.
      const double x0 = y[0];
      // Root in the step fraction s in [0, 1].
      auto gx = [&](double s) {
        bool ignored = false;
        return s == 0.0 ? x0 : attempt(y, s * h, ignored).y[0];
      };
      boost::uintmax_t iterations = 100;
      const auto bracket = boost::math::tools::toms748_solve(
          gx, 0.0, 1.0, x0, step.y[0], boost::math::tools::eps_tolerance<double>(52), iterations);
      // Take the end of the bracket that sits on the locked side (or on 0).
      const double tau =
          h * (sign_of(lock) * gx(bracket.first) >= 0.0 ? bracket.first : bracket.second);
      bool ignored = false;
      Vec4 hit = attempt(y, tau, ignored).y;
      hit[0] = 0.0;
      return {detail::to_point(hit), t + tau, true};
    } else if (strayed) {
      h *= 0.5;
    } else {
      y = step.y;
      t += h;
      h = detail::next_step(h, step.error, 4);
    }
    if (std::abs(h) < 1e-14 * (1.0 + std::abs(t)))
      throw Error(ErrorCode::Diagnostic, "step_smooth: step size underflow");
  }
  return {detail::to_point(y), dt, false};
}

PhaseSpaceBox FlowBox::image_bounds(int dimension) const {
  PhaseSpaceBox box;
  bool first = true;
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (!ok[i]) continue;
    const PhasePoint& q = images[i];
    if (first) {
      box = {{q.x, q.x}, {q.xi, q.xi}, {q.y, q.y}, {q.eta, q.eta}};
      first = false;
      continue;
    }
    box.x = {std::min(box.x.lo, q.x), std::max(box.x.hi, q.x)};
    box.xi = {std::min(box.xi.lo, q.xi), std::max(box.xi.hi, q.xi)};
    box.y = {std::min(box.y.lo, q.y), std::max(box.y.hi, q.y)};
    box.eta = {std::min(box.eta.lo, q.eta), std::max(box.eta.hi, q.eta)};
  }
  if (dimension == 1) box.y = box.eta = {0.0, 0.0};
  return box;
}

namespace {

std::vector<double> axis_samples(const Interval& iv, int n) {
  if (iv.width() == 0.0 || n == 1) return {iv.mid()};
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = iv.lo + iv.width() * i / (n - 1);
  out.back() = iv.hi;
  return out;
}

double interval_abs_inf(const Interval& iv) { return std::abs(iv.clamp(0.0)); }

}  // namespace

FlowBox flow_box(const ConormalPotential& V, const MetricModel& m, const PhaseSpaceBox& B,
                 double T, const FlowOptions& options, int n_per_axis) {
  const int d = m.dimension();
  if (n_per_axis < 1) throw Error(ErrorCode::Precondition, "flow_box needs n_per_axis >= 1");
  auto ordered = [](const Interval& iv) { return iv.lo <= iv.hi; };
  if (!ordered(B.x) || !ordered(B.xi) || (d == 2 && (!ordered(B.y) || !ordered(B.eta))))
    throw Error(ErrorCode::Precondition, "flow_box: box intervals must satisfy lo <= hi");

  FlowBox out;
  const auto xs = axis_samples(B.x, n_per_axis);
  const auto xis = axis_samples(B.xi, n_per_axis);
  const auto ys = d == 2 ? axis_samples(B.y, n_per_axis) : std::vector<double>{0.0};
  const auto etas = d == 2 ? axis_samples(B.eta, n_per_axis) : std::vector<double>{0.0};
  for (double x : xs)
    for (double xi : xis)
      for (double y : ys)
        for (double eta : etas) out.samples.push_back({x, xi, y, eta});

  const std::size_t n = out.samples.size();
  out.images.resize(n);
  out.ok.assign(n, false);
  std::vector<std::string> messages(n);
  std::vector<double> hyp(n, INFINITY), cor(n, INFINITY);

  const Symbol symbol(V, m);
  auto work = [&](std::size_t i) {
    const PhasePoint& rho = out.samples[i];
    try {
      const Trajectory traj = integrate(V, m, rho, T, options);
      out.images[i] = traj.final_point();
      out.ok[i] = traj.status == TrajectoryStatus::Complete;
      if (!out.ok[i]) messages[i] = std::string(to_string(traj.status)) + ": " + traj.diagnostic;
      for (const auto& s : traj.samples) {
        const double base = std::abs(s.rho.x) + std::abs(2.0 * s.rho.xi);
        hyp[i] = std::min(hyp[i], base);
        double second = INFINITY;
        try {
          second = std::abs(2.0 * symbol.first(s.rho.x, s.rho.y, s.rho.eta).dx);
        } catch (const Error&) {
        }
        cor[i] = std::min(cor[i], base + second);
      }
    } catch (const Error& e) {
      out.images[i] = rho;
      messages[i] = std::string(to_string(e.code())) + ": " + e.what();
    } catch (const std::exception& e) {
      out.images[i] = rho;
      messages[i] = std::string("internal: ") + e.what();
    }
  };

  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), n));
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) work(i);
    });
  for (auto& th : pool) th.join();

  for (std::size_t i = 0; i < n; ++i) {
    if (!out.ok[i]) {
      out.failures.push_back(i);
      out.failure_messages.push_back(messages[i]);
    }
  }

  // Exact infimum over the initial box, then over the sampled orbits.
  double hyp_inf = interval_abs_inf(B.x) + 2.0 * interval_abs_inf(B.xi);
  double cor_inf = INFINITY;
  for (std::size_t i = 0; i < n; ++i) {
    hyp_inf = std::min(hyp_inf, hyp[i]);
    cor_inf = std::min(cor_inf, cor[i]);
  }
  const double threshold = std::sqrt(options.tol);
  out.hypothesis_infimum = hyp_inf;
  out.corollary_infimum = cor_inf;
  out.hypothesis_holds = hyp_inf > threshold;
  out.corollary_holds = cor_inf > threshold;
  return out;
}

}  // namespace conoflow
