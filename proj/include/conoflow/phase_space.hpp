#pragma once

#include <array>
#include <cmath>

namespace conoflow {

/// Which side of the interface {x = 0} a one-sided limit is taken from.
enum class Side { Right, Left };

constexpr Side side_of(double value) { return value < 0.0 ? Side::Left : Side::Right; }
constexpr double sign_of(Side side) { return side == Side::Right ? 1.0 : -1.0; }

/// A point (x, xi, y, eta) of T*R^d in Fermi coordinates relative to Y = {x = 0}.
///
/// The tangential pair (y, eta) is present for d = 2. In d = 1 it is pinned
/// to zero and ignored by every consumer.
struct PhasePoint {
  double x = 0.0;
  double xi = 0.0;
  double y = 0.0;
  double eta = 0.0;

  bool finite() const {
    return std::isfinite(x) && std::isfinite(xi) && std::isfinite(y) && std::isfinite(eta);
  }

  friend bool operator==(const PhasePoint&, const PhasePoint&) = default;
};

inline double distance(const PhasePoint& a, const PhasePoint& b) {
  return std::hypot(a.x - b.x, a.xi - b.xi, std::hypot(a.y - b.y, a.eta - b.eta));
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  bool contains(double v) const { return lo <= v && v <= hi; }
  double clamp(double v) const { return v < lo ? lo : (v > hi ? hi : v); }

  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Closed box in phase space. For d = 1 only x and xi are used.
struct PhaseSpaceBox {
  Interval x;
  Interval xi;
  Interval y;
  Interval eta;

  /// Every used interval has nonempty interior and finite ends.
  bool valid(int dimension) const {
    auto ok = [](const Interval& iv) {
      return std::isfinite(iv.lo) && std::isfinite(iv.hi) && iv.lo < iv.hi;
    };
    return ok(x) && ok(xi) && (dimension == 1 || (ok(y) && ok(eta)));
  }

  PhaseSpaceBox inflated(double margin) const {
    return {{x.lo - margin, x.hi + margin},
            {xi.lo - margin, xi.hi + margin},
            {y.lo - margin, y.hi + margin},
            {eta.lo - margin, eta.hi + margin}};
  }

  friend bool operator==(const PhaseSpaceBox&, const PhaseSpaceBox&) = default;
};

}  // namespace conoflow
