#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "conoflow/error.hpp"
#include "conoflow/flow.hpp"
#include "conoflow/geometry.hpp"
#include "conoflow/potentials.hpp"

using namespace conoflow;

namespace {

MetricModel one_plus_x2() {
  return MetricModel::custom(
      [](double x, double) {
        MetricJet j;
        j.h = 1.0 + x * x;
        j.hx = 2.0 * x;
        j.hxx = 2.0;
        return j;
      },
      "1+x^2");
}

// x -> -x applied to a metric: h'(x, y) = h(-x, y).
MetricModel reflected(const MetricModel& m) {
  return MetricModel::custom(
      [m](double x, double y) {
        MetricJet j = m.jet(-x, y);
        j.hx = -j.hx;
        j.hxy = -j.hxy;
        return j;
      },
      "reflected " + m.name());
}

// -(1/2) d_x h / h at x = 0 from central differences of h alone.
double fd_curvature(const MetricModel& m, double y) {
  const double d = 1e-5;
  const double hx = (m.jet(d, y).h - m.jet(-d, y).h) / (2.0 * d);
  return -0.5 * hx / m.jet(0.0, y).h;
}

// Scan of <grad V - 2 V II(v, v), N> over the unit tangents v = +-h^{-1/2} d_y,
// with II computed from finite differences of h.
bool tangent_scan(const MetricModel& m, const ConormalPotential& V, double y, Side side) {
  const double v0 = V.eval(0.0, y, 0, 0, side);
  if (v0 >= 0.0) return true;
  const double dv = V.eval(0.0, y, 1, 0, side);
  double worst = INFINITY;
  for (double sgn : {-1.0, 1.0}) {
    const double ii = sgn * sgn * fd_curvature(m, y);
    worst = std::min(worst, std::abs(dv - 2.0 * v0 * ii));
  }
  return worst > 1e-9;
}

}  // namespace

TEST_CASE("dual_metric examples") {
  const auto flat = dual_metric(MetricModel::flat(), 0.7, -0.3);
  CHECK(flat.rows() == 1);
  CHECK(flat(0, 0) == 1.0);
  CHECK(dual_metric(one_plus_x2(), 1.0, 0.0)(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  // h = e^{2x} is exp(k = -1).
  const double hinv = dual_metric(MetricModel::exponential(-1.0), 0.3, 0.0)(0, 0);
  CHECK(hinv == doctest::Approx(std::exp(-0.6)).epsilon(1e-14));
  CHECK(hinv * std::exp(0.6) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(dual_metric(MetricModel::flat(1), 0.0, 0.0).size() == 0);
}

TEST_CASE("dual_metric inverts h at sampled points") {
  const std::vector<MetricModel> models = {MetricModel::flat(), MetricModel::power(2.0),
                                           MetricModel::power(-0.7),
                                           MetricModel::exponential(0.4, 0.3), one_plus_x2()};
  for (const auto& m : models)
    for (double x : {-0.5, -0.1, 0.0, 0.2, 0.9})
      for (double y : {-1.0, 0.0, 0.4, 2.0}) {
        const double h = m.jet(x, y).h;
        CHECK(std::abs(dual_metric(m, x, y)(0, 0) * h - 1.0) <= 1e-12);
        CHECK(std::abs(m.inverse_jet(x, y).h * h - 1.0) <= 1e-12);
      }
}

TEST_CASE("non-positive h is a configuration error") {
  const auto bad = MetricModel::custom([](double x, double) { return MetricJet{x, 1, 0, 0, 0, 0}; },
                                       "h=x");
  CHECK_THROWS_AS(dual_metric(bad, -1.0, 0.0), Error);
  try {
    dual_metric(bad, 0.0, 0.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
  }
  CHECK_THROWS_AS(MetricModel::power(2.0).jet(-1.5, 0.0), Error);
}

TEST_CASE("principal curvature examples") {
  CHECK(principal_curvatures(MetricModel::flat(), 0.0) == std::vector<double>{0.0});
  CHECK(principal_curvatures(MetricModel::flat(1), 0.0).empty());

  const auto k_pow = principal_curvatures(MetricModel::power(2.0), 0.0);
  REQUIRE(k_pow.size() == 1);
  CHECK(k_pow[0] == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(k_pow[0] == doctest::Approx(fd_curvature(MetricModel::power(2.0), 0.0)).epsilon(1e-8));

  for (double k : {-0.8, 0.25, 1.5}) {
    const auto m = MetricModel::exponential(k);
    const auto ks = principal_curvatures(m, 0.3);
    REQUIRE(ks.size() == 1);
    CHECK(ks[0] == doctest::Approx(k).epsilon(1e-14));
    CHECK(ks[0] == doctest::Approx(fd_curvature(m, 0.3)).epsilon(1e-8));
  }
  // y-dependent curvature k + b sin y.
  const auto m = MetricModel::exponential(0.5, 0.2);
  CHECK(principal_curvatures(m, 1.0)[0] == doctest::Approx(0.5 + 0.2 * std::sin(1.0)));
}

TEST_CASE("curvature_condition examples") {
  const ConormalPotential linear(SmoothPart::poly(-1.0, 1.0), SingularPart::none());
  CHECK(curvature_condition(MetricModel::flat(1), linear, 0.0, Side::Right).holds);
  CHECK(curvature_condition(MetricModel::flat(), linear, 0.0, Side::Right).holds);
  CHECK_FALSE(curvature_condition(MetricModel::flat(), linear, 0.0, Side::Right).vacuous);

  const ConormalPotential half(SmoothPart::poly(-0.5), SingularPart::none());
  CHECK(curvature_condition(MetricModel::power(2.0), half, 0.0, Side::Right).holds);
  const ConormalPotential half_slope(SmoothPart::poly(-0.5, 0.5), SingularPart::none());
  CHECK(curvature_condition(MetricModel::power(2.0), half_slope, 0.0, Side::Right).holds);

  // Flat interface and constant V: H_p^2 x = 0 on the glancing shell.
  const ConormalPotential constant(SmoothPart::poly(-1.0), SingularPart::none());
  CHECK_FALSE(curvature_condition(MetricModel::flat(), constant, 0.0, Side::Right).holds);
  // d_x V = 2 V k exactly: k = 1 (exp), V(0) = -1, d_x V = -2.
  const ConormalPotential tuned(SmoothPart::poly(-1.0, -2.0), SingularPart::none());
  CHECK_FALSE(curvature_condition(MetricModel::exponential(1.0), tuned, 0.0, Side::Right).holds);
}

TEST_CASE("curvature_condition vacuity and errors") {
  const ConormalPotential positive(SmoothPart::poly(0.5, 1.0), SingularPart::none());
  const auto c = curvature_condition(MetricModel::flat(), positive, 0.0, Side::Right);
  CHECK(c.holds);
  CHECK(c.vacuous);

  const ConormalPotential step(SmoothPart::poly(-1.0), SingularPart::step(1.0));
  try {
    curvature_condition(MetricModel::flat(), step, 0.0, Side::Right);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnsupportedRegularity);
  }
}

TEST_CASE("one-sided derivatives pick the side") {
  // V = -1 + x - |x|: d_x V(0+) = 0, d_x V(0-) = 2.
  const ConormalPotential V(SmoothPart::poly(-1.0, 1.0), SingularPart::kink(-1.0));
  CHECK_FALSE(curvature_condition(MetricModel::flat(1), V, 0.0, Side::Right).holds);
  CHECK(curvature_condition(MetricModel::flat(1), V, 0.0, Side::Left).holds);
}

TEST_CASE("orientation flip negates curvatures and preserves the condition") {
  const std::vector<MetricModel> models = {MetricModel::power(2.0), MetricModel::exponential(0.7),
                                           MetricModel::exponential(-0.3, 0.4), one_plus_x2()};
  const std::vector<std::pair<SmoothPart, SingularPart>> parts = {
      {SmoothPart::poly(-1.0, 0.3), SingularPart::none()},
      {SmoothPart::poly(-0.5, -1.0), SingularPart::kink(0.4)},
      {SmoothPart::poly(-2.0, 1.4), SingularPart::powkink(1.0)},
      {SmoothPart::poly(-1.0, -1.4), SingularPart::none()},
  };
  for (const auto& m : models) {
    const auto mr = reflected(m);
    for (double y : {-0.6, 0.0, 1.1}) {
      const auto k = principal_curvatures(m, y);
      const auto kr = principal_curvatures(mr, y);
      CHECK(kr[0] == doctest::Approx(-k[0]).epsilon(1e-14));
      for (const auto& [s, g] : parts) {
        const ConormalPotential V(s, g);
        // V(-x): odd coefficients of the smooth part flip; |x| is even, x|x| odd.
        SmoothPart sr = s;
        sr.v1 = -s.v1;
        SingularPart gr = g;
        if (g.kind == SingularKind::PowKink) gr.c = -g.c;
        const ConormalPotential Vr(sr, gr);
        for (Side side : {Side::Right, Side::Left}) {
          const Side opposite = side == Side::Right ? Side::Left : Side::Right;
          CHECK(curvature_condition(m, V, y, side).holds ==
                curvature_condition(mr, Vr, y, opposite).holds);
        }
      }
    }
  }
}

TEST_CASE("curvature_condition matches the tangent scan") {
  const std::vector<MetricModel> models = {MetricModel::flat(), MetricModel::power(2.0),
                                           MetricModel::power(-1.0),
                                           MetricModel::exponential(0.5, 0.3), one_plus_x2()};
  int disagreements = 0, falses = 0;
  for (const auto& m : models)
    for (double v0 : {-1.5, -1.0, -0.5, 0.3})
      for (double v1 : {-2.0, -1.0, -0.3, 0.0, 0.5, 1.0, 2.0})
        for (double y : {0.0, 0.8}) {
          const ConormalPotential V(SmoothPart::poly(v0, v1), SingularPart::none());
          const bool got = curvature_condition(m, V, y, Side::Right).holds;
          disagreements += got != tangent_scan(m, V, y, Side::Right);
          falses += !got;
        }
  CHECK(disagreements == 0);
  CHECK(falses > 0);
}

TEST_CASE("curvature_condition equals H_p^2 x != 0 on the glancing shell") {
  // At x = xi = 0 with h^{11} eta^2 = -V the point is glancing; 2 d_x r is
  // computed by the flow module from the metric jet, independently.
  const std::vector<MetricModel> models = {MetricModel::power(2.0), MetricModel::exponential(0.5),
                                           MetricModel::exponential(-1.0, 0.4), one_plus_x2()};
  for (const auto& m : models)
    for (double v0 : {-1.5, -0.5})
      for (double v1 : {-2.0, -1.0, 0.0, 0.5, 1.0})
        for (double y : {0.0, 0.8}) {
          const ConormalPotential V(SmoothPart::poly(v0, v1), SingularPart::none());
          const double eta = std::sqrt(-v0 * m.jet(0.0, y).h);
          const PhasePoint rho{0.0, 0.0, y, eta};
          CHECK(std::abs(p(V, m, rho)) < 1e-14);
          const double hp2 = hp2_f(V, m, rho).value;
          const bool nondegenerate = std::abs(hp2) > 1e-9;
          CHECK(curvature_condition(m, V, y, Side::Right).holds == nondegenerate);
        }
}
