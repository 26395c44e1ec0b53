#include "conoflow/measure.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <thread>

#include "conoflow/error.hpp"
#include "detail/fft.hpp"

namespace conoflow {

using cplx = std::complex<double>;

namespace {

double resolve_sigma(double h, double sigma) {
  const double sh = std::sqrt(h);
  if (sigma <= 0.0) return sh;
  if (sigma < 0.25 * sh * (1 - 1e-12) || sigma > 4.0 * sh * (1 + 1e-12)) {
    std::ostringstream msg;
    msg << "Husimi window sigma = " << sigma << " outside [sqrt(h)/4, 4 sqrt(h)]";
    throw Error(ErrorCode::Precondition, msg.str());
  }
  return sigma;
}

// Integral over [lo, hi] of the unit hat function centred at c with half-width d.
double hat_weight(double lo, double hi, double c, double d) {
  auto cumulative = [](double s) {
    if (s <= -1.0) return 0.0;
    if (s <= 0.0) return 0.5 * (s + 1.0) * (s + 1.0);
    if (s <= 1.0) return 1.0 - 0.5 * (1.0 - s) * (1.0 - s);
    return 1.0;
  };
  if (!(hi > lo)) return 0.0;
  return d * (cumulative((hi - c) / d) - cumulative((lo - c) / d));
}

struct Centre {
  double qx, qy;
  /// Hat-function weight of the node over the requested region, in units of dq^d.
  double weight;
};

// Husimi density on a lattice of position nodes, one zero-padded windowed FFT
// per node. Position and momentum lattices are anchored at 0 and integrated
// with piecewise-linear (hat) weights, which are nonnegative and additive in
// the region.
class HusimiScanner {
 public:
  HusimiScanner(const WaveState& u, double sigma, int resolution)
      : u_(u), grid_(u.grid), dim_(u.grid.dimension), sigma_(resolve_sigma(u.h, sigma)) {
    if (resolution < 8) {
      std::ostringstream msg;
      msg << "Husimi resolution " << resolution << " is below 8 points per sqrt(h)";
      throw Error(ErrorCode::Config, msg.str());
    }
    const double step = std::sqrt(u.h) / resolution;
    dq_ = step;
    for (int a = 0; a < 2; ++a) {
      if (a == 1 && dim_ == 1) {
        window_[a] = 1;
        bins_[a] = 1;
        dp_[a] = 1.0;
        continue;
      }
      const std::size_t n = grid_.points[a];
      const double dx = grid_.spacing(a);
      window_[a] = std::min(n, static_cast<std::size_t>(std::floor(12.0 * sigma_ / dx)) + 1);
      const auto need = static_cast<std::size_t>(
          std::ceil(2.0 * std::numbers::pi * u.h / (step * dx)));
      bins_[a] = std::bit_ceil(std::max(window_[a], need));
      dp_[a] = 2.0 * std::numbers::pi * u.h / (static_cast<double>(bins_[a]) * dx);
    }
    norm_ = std::pow(std::numbers::pi * sigma_ * sigma_, -0.5 * dim_) *
            std::pow(grid_.cell_volume(), 2) / std::pow(2.0 * std::numbers::pi * u.h, dim_);
    const std::size_t nx = grid_.points[0], ny = grid_.points[1];
    prefix_.assign((nx + 1) * (ny + 1), 0.0);
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t j = 0; j < ny; ++j)
        prefix_[(i + 1) * (ny + 1) + j + 1] = std::norm(u.psi[i * ny + j]) +
                                               prefix_[i * (ny + 1) + j + 1] +
                                               prefix_[(i + 1) * (ny + 1) + j] -
                                               prefix_[i * (ny + 1) + j];
    total_ = prefix_.back() * grid_.cell_volume();
  }

  double dq() const { return dq_; }
  std::size_t bins(int axis) const { return bins_[axis]; }
  double dp(int axis) const { return dp_[axis]; }
  double momentum(int axis, std::size_t k) const {
    const std::size_t M = bins_[axis];
    const double m = k < M / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(M);
    return m * dp_[axis];
  }
  /// Largest |p| represented on the grid.
  double nyquist(int axis) const {
    return std::numbers::pi * u_.h / grid_.spacing(axis);
  }

  /// Hat-weight of each momentum node over p (length units).
  std::vector<double> momentum_weights(int axis, const Interval& p) const {
    std::vector<double> w(bins_[axis], 1.0);
    if (axis == 1 && dim_ == 1) return w;
    for (std::size_t k = 0; k < w.size(); ++k) w[k] = hat_weight(p.lo, p.hi, momentum(axis, k), dp_[axis]);
    return w;
  }

  /// Position nodes whose hats meet qx x qy (clipped to the grid).
  std::vector<Centre> centres(Interval qx, Interval qy) const {
    std::vector<Centre> out;
    auto axis_cells = [&](Interval q, int axis) {
      std::vector<std::pair<double, double>> cells;
      q.lo = std::max(q.lo, grid_.lower(axis));
      q.hi = std::min(q.hi, grid_.upper(axis));
      if (!(q.hi > q.lo)) return cells;
      const auto j0 = static_cast<long long>(std::floor(q.lo / dq_));
      const auto j1 = static_cast<long long>(std::ceil(q.hi / dq_));
      for (long long j = j0; j <= j1; ++j) {
        const double c = static_cast<double>(j) * dq_;
        const double w = hat_weight(q.lo, q.hi, c, dq_) / dq_;
        if (w > 0.0) cells.emplace_back(c, w);
      }
      return cells;
    };
    const auto xs = axis_cells(qx, 0);
    if (dim_ == 1) {
      for (const auto& [x, w] : xs) out.push_back({x, 0.0, w});
      return out;
    }
    const auto ys = axis_cells(qy, 1);
    for (const auto& [x, wx] : xs)
      for (const auto& [y, wy] : ys) out.push_back({x, y, wx * wy});
    return out;
  }

  /// Sum over centres of weight * dq^d * f(centre, H), where H holds the
  /// Husimi density per momentum bin (row-major, y fastest) and f returns the
  /// momentum integral of H against its own weights.
  template <class F>
  double integrate(const std::vector<Centre>& cs, F&& f) const {
    std::vector<double> parts(cs.size(), 0.0);
    const detail::FftPlan fft(dim_ == 1 ? std::vector<int>{static_cast<int>(bins_[0])}
                                        : std::vector<int>{static_cast<int>(bins_[0]),
                                                           static_cast<int>(bins_[1])});
    auto work = [&](std::size_t first, std::size_t stride) {
      std::vector<cplx> buffer(bins_[0] * bins_[1]);
      std::vector<double> H(buffer.size());
      std::vector<double> g(window_[0] + window_[1]);
      for (std::size_t c = first; c < cs.size(); c += stride) {
        if (!load(cs[c], buffer, g)) continue;
        fft.forward(buffer.data());
        for (std::size_t k = 0; k < buffer.size(); ++k) H[k] = norm_ * std::norm(buffer[k]);
        parts[c] = cs[c].weight * f(cs[c], H);
      }
    };
    const std::size_t threads =
        cs.size() < 64 ? 1 : std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 16);
    if (threads == 1) {
      work(0, 1);
    } else {
      std::vector<std::thread> pool;
      for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
      for (auto& t : pool) t.join();
    }
    double sum = 0.0;
    for (double p : parts) sum += p;
    return sum * std::pow(dq_, dim_);
  }

 private:
  // Windowed amplitudes e^{-|z - q|^2 / (2 sigma^2)} u around the centre,
  // zero-padded. Returns false when the window carries no mass.
  bool load(const Centre& c, std::vector<cplx>& buffer, std::vector<double>& g) const {
    const double q[2] = {c.qx, c.qy};
    std::size_t first[2] = {0, 0};
    for (int a = 0; a < dim_; ++a) {
      const double dx = grid_.spacing(a);
      const double half = 0.5 * static_cast<double>(window_[a] - 1) * dx;
      const auto start = static_cast<long long>(std::ceil((q[a] - half - grid_.lower(a)) / dx));
      const auto n = static_cast<long long>(grid_.points[a]);
      first[a] = static_cast<std::size_t>(((start % n) + n) % n);
      // Gaussian factors along the axis, evaluated at the unwrapped positions.
      for (std::size_t m = 0; m < window_[a]; ++m) {
        const double z = grid_.lower(a) + static_cast<double>(start + static_cast<long long>(m)) * dx;
        g[a * window_[0] + m] = std::exp(-(z - q[a]) * (z - q[a]) / (2.0 * sigma_ * sigma_));
      }
    }
    if (window_mass(first[0], first[1]) <= 1e-14 * total_) return false;
    std::fill(buffer.begin(), buffer.end(), cplx{});
    const std::size_t nx = grid_.points[0], ny = grid_.points[1];
    for (std::size_t m = 0; m < window_[0]; ++m) {
      const std::size_t i = (first[0] + m) % nx;
      const double gx = g[m];
      for (std::size_t l = 0; l < window_[1]; ++l) {
        const double gy = dim_ == 2 ? g[window_[0] + l] : 1.0;
        buffer[m * bins_[1] + l] = gx * gy * u_.psi[i * ny + (first[1] + l) % ny];
      }
    }
    return true;
  }

  // Sum of |psi|^2 cell_volume over the periodic window starting at (i0, j0).
  double window_mass(std::size_t i0, std::size_t j0) const {
    const std::size_t nx = grid_.points[0], ny = grid_.points[1];
    auto rect = [&](std::size_t a0, std::size_t a1, std::size_t b0, std::size_t b1) {
      auto P = [&](std::size_t a, std::size_t b) { return prefix_[a * (ny + 1) + b]; };
      return P(a1, b1) - P(a0, b1) - P(a1, b0) + P(a0, b0);
    };
    auto spans = [](std::size_t s, std::size_t len, std::size_t n) {
      std::vector<std::pair<std::size_t, std::size_t>> out;
      if (s + len <= n) {
        out.emplace_back(s, s + len);
      } else {
        out.emplace_back(s, n);
        out.emplace_back(0, s + len - n);
      }
      return out;
    };
    double sum = 0.0;
    for (const auto& [a0, a1] : spans(i0, window_[0], nx))
      for (const auto& [b0, b1] : spans(j0, window_[1], ny)) sum += rect(a0, a1, b0, b1);
    return sum * grid_.cell_volume();
  }

  const WaveState& u_;
  const Grid& grid_;
  int dim_;
  double sigma_;
  double dq_ = 0.0;
  std::size_t window_[2]{1, 1};
  std::size_t bins_[2]{1, 1};
  double dp_[2]{1.0, 1.0};
  double norm_ = 1.0;
  double total_ = 0.0;
  /// Summed-area table of |psi|^2, (nx + 1) x (ny + 1).
  std::vector<double> prefix_;
};

}  // namespace

double husimi(const WaveState& u, const PhasePoint& rho, double sigma) {
  sigma = resolve_sigma(u.h, sigma);
  const Grid& g = u.grid;
  const std::size_t ny = g.points[1];
  const double inv = 1.0 / (2.0 * sigma * sigma);
  auto wrap = [&](double d, int axis) {
    const double L = g.extent[axis];
    return d - L * std::floor(d / L + 0.5);
  };
  cplx sum{};
  for (std::size_t i = 0; i < g.points[0]; ++i) {
    const double dx = wrap(g.coordinate(0, i) - rho.x, 0);
    for (std::size_t j = 0; j < ny; ++j) {
      const double dy = g.dimension == 2 ? wrap(g.coordinate(1, j) - rho.y, 1) : 0.0;
      const double phase = (rho.xi * dx + (g.dimension == 2 ? rho.eta * dy : 0.0)) / u.h;
      sum += std::polar(std::exp(-(dx * dx + dy * dy) * inv), -phase) * u.psi[i * ny + j];
    }
  }
  const int d = g.dimension;
  return std::pow(std::numbers::pi * sigma * sigma, -0.5 * d) * std::norm(sum * g.cell_volume()) /
         std::pow(2.0 * std::numbers::pi * u.h, d);
}

double box_mass(const WaveState& u, const PhaseSpaceBox& B, double sigma, int resolution) {
  const HusimiScanner scan(u, sigma, resolution);
  const std::vector<double> wx = scan.momentum_weights(0, B.xi);
  const std::vector<double> wy = scan.momentum_weights(1, B.eta);
  const std::size_t my = scan.bins(1);
  return scan.integrate(scan.centres(B.x, B.y), [&](const Centre&, const std::vector<double>& H) {
    double s = 0.0;
    for (std::size_t kx = 0; kx < wx.size(); ++kx) {
      if (wx[kx] == 0.0) continue;
      double row = 0.0;
      for (std::size_t ky = 0; ky < my; ++ky) row += H[kx * my + ky] * wy[ky];
      s += wx[kx] * row;
    }
    return s;
  });
}

MeasureEstimate estimate(const WaveState& u, const std::vector<PhaseSpaceBox>& boxes,
                         double sigma, int resolution) {
  MeasureEstimate out;
  out.h = u.h;
  out.sigma = resolve_sigma(u.h, sigma);
  out.resolution = resolution;
  const Grid& g = u.grid;
  PhaseSpaceBox window;
  const double px = 2.0 * std::numbers::pi * u.h / g.spacing(0);
  window.x = {g.lower(0), g.upper(0)};
  window.xi = {-px, px};
  if (g.dimension == 2) {
    const double py = 2.0 * std::numbers::pi * u.h / g.spacing(1);
    window.y = {g.lower(1), g.upper(1)};
    window.eta = {-py, py};
  }
  out.total = box_mass(u, window, out.sigma, resolution);
  for (const PhaseSpaceBox& B : boxes)
    out.masses.emplace_back(B, box_mass(u, B, out.sigma, resolution));
  return out;
}

InvarianceResult invariance_defect(const WaveState& u0, const WaveState& uT,
                                   const PhaseSpaceBox& B, const FlowBox& flow,
                                   bool use_corollary, double sigma, int resolution) {
  if (!(u0.grid == uT.grid) || u0.h != uT.h)
    throw Error(ErrorCode::Precondition, "invariance_defect needs states on the same grid and h");
  const double infimum = use_corollary ? flow.corollary_infimum : flow.hypothesis_infimum;
  const bool holds = use_corollary ? flow.corollary_holds : flow.hypothesis_holds;
  if (!holds) {
    std::ostringstream msg;
    msg << (use_corollary ? "glancing non-degeneracy" : "transversality")
        << " hypothesis fails on the box: infimum " << infimum;
    throw Error(ErrorCode::HypothesisViolation, msg.str());
  }
  const int d = u0.grid.dimension;
  const double margin = 3.0 * std::sqrt(u0.h);
  InvarianceResult out;
  out.box = B;
  out.image_box = flow.image_bounds(d);
  out.mass_before = box_mass(u0, B.inflated(margin), sigma, resolution);
  out.mass_after = box_mass(uT, out.image_box.inflated(margin), sigma, resolution);
  out.defect = std::abs(out.mass_after - out.mass_before);
  out.hypothesis_infimum = infimum;
  return out;
}

double shell_concentration(const WaveState& u, const ConormalPotential& V, double E,
                           double delta, double sigma, int resolution,
                           const std::optional<PhaseSpaceBox>& window) {
  if (!(delta > 0.0)) throw Error(ErrorCode::Precondition, "shell width delta must be positive");
  const HusimiScanner scan(u, sigma, resolution);
  const Grid& g = u.grid;
  const int d = g.dimension;
  const double dpx = scan.dp(0);
  const std::size_t mx = scan.bins(0), my = scan.bins(1);
  const double dp2 = d == 2 ? scan.dp(1) : 1.0;
  Interval xs{g.lower(0), g.upper(0)}, ys{g.lower(1), g.upper(1)};
  if (window) {
    xs = window->x;
    if (d == 2) ys = window->y;
  }
  return scan.integrate(scan.centres(xs, ys), [&](const Centre& c, const std::vector<double>& H) {
    const double v = V.eval(c.qx, c.qy, 0, 0, Side::Right);
    double s = 0.0;
    if (d == 1) {
      // Shell slice in xi: sqrt(max(a,0)) < |xi| < sqrt(b).
      const double a = E - v - delta, b = E - v + delta;
      const double outer = b > 0.0 ? std::sqrt(b) : 0.0;
      const double inner = a > 0.0 ? std::sqrt(a) : 0.0;
      const Interval left{-outer, -inner}, right{inner, outer};
      for (std::size_t k = 0; k < mx; ++k) {
        const double p = scan.momentum(0, k);
        const double in = hat_weight(left.lo, left.hi, p, dpx) + hat_weight(right.lo, right.hi, p, dpx);
        s += H[k] * (dpx - in);
      }
      return s;
    }
    for (std::size_t kx = 0; kx < mx; ++kx) {
      const double px = scan.momentum(0, kx);
      for (std::size_t ky = 0; ky < my; ++ky) {
        const double py = scan.momentum(1, ky);
        if (std::abs(px * px + py * py + v - E) >= delta) s += H[kx * my + ky];
      }
    }
    return s * dpx * dp2;
  });
}

}  // namespace conoflow
