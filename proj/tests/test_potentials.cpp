#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "conoflow/error.hpp"
#include "conoflow/geometry.hpp"
#include "conoflow/potentials.hpp"

using namespace conoflow;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Usage;
}

std::vector<ConormalPotential> non_jump_catalog() {
  const SmoothPart s = SmoothPart::poly(-1.0, 0.3, 0.2, 0.1, -0.05, 0.15);
  return {
      {s, SingularPart::none()},
      {s, SingularPart::kink(1.2).with_y(0.3, -0.1)},
      {s, SingularPart::xlog(0.7).with_y(-0.2, 0.0)},
      {s, SingularPart::powkink(-0.8).with_y(0.1, 0.2)},
      {s, SingularPart::power(1.0, 0.5).with_y(0.0, 0.3)},
      {s, SingularPart::power(0.6, 0.25)},
      {SmoothPart::cosy(-1.0, 0.5, 0.0, 0.3, 2.0), SingularPart::kink(1.0)},
  };
}

// Integral of eval(., dx_order) over [a, b], split at 0. Double-exponential
// quadrature copes with the integrable endpoint singularities (log, |x|^{a-1}).
double integrate_dx(const ConormalPotential& V, double a, double b, double y, int order) {
  boost::math::quadrature::tanh_sinh<double> quad;
  auto f = [&](double x) {
    if (x == 0.0) x = a < 0.0 ? -1e-300 : 1e-300;
    return V.eval(x, y, order, 0, side_of(x));
  };
  if (a < 0.0 && b > 0.0) return quad.integrate(f, a, 0.0) + quad.integrate(f, 0.0, b);
  return quad.integrate(f, a, b);
}

}  // namespace

TEST_CASE("eval examples") {
  const ConormalPotential kink(SmoothPart::poly(-2.0), SingularPart::kink(1.0));
  CHECK(kink.eval(-1.0, 0.0, 0, 0) == -1.0);
  CHECK(kink.eval(0.5, 0.0, 1, 0) == 1.0);
  const ConormalPotential power(SmoothPart::zero(), SingularPart::power(1.0, 0.5));
  CHECK(power.eval(0.25, 0.0, 2, 0) == doctest::Approx(1.5).epsilon(1e-15));
  const double d = 1e-4;
  const double fd = (power.value(0.25 + d) - 2.0 * power.value(0.25) + power.value(0.25 - d)) / (d * d);
  CHECK(fd == doctest::Approx(1.5).epsilon(1e-6));
}

TEST_CASE("regularity tags follow the singular part") {
  const SmoothPart s = SmoothPart::poly(-1.0);
  CHECK(ConormalPotential(s, SingularPart::step(1.0)).regularity() == Regularity::Jump);
  CHECK(ConormalPotential(s, SingularPart::kink(1.0)).regularity() == Regularity::W11);
  CHECK(ConormalPotential(s, SingularPart::xlog(1.0)).regularity() == Regularity::W11);
  CHECK(ConormalPotential(s, SingularPart::powkink(1.0)).regularity() == Regularity::W21);
  CHECK(ConormalPotential(s, SingularPart::power(1.0, 0.3)).regularity() == Regularity::W21);
  CHECK(ConormalPotential(s, SingularPart::none()).regularity() == Regularity::Smooth);
  CHECK(mollify(ConormalPotential(s, SingularPart::step(1.0)), 0.1).regularity() ==
        Regularity::Smooth);
}

TEST_CASE("eval errors") {
  const SmoothPart s = SmoothPart::poly(-1.0);
  const ConormalPotential step(s, SingularPart::step(1.0));
  const ConormalPotential kink(s, SingularPart::kink(1.0));
  const ConormalPotential xlog(s, SingularPart::xlog(1.0));
  const ConormalPotential power(s, SingularPart::power(1.0, 0.5));
  CHECK(code_of([&] { step.eval(0.3, 0.0, 1, 0); }) == ErrorCode::UnsupportedRegularity);
  CHECK(code_of([&] { kink.eval(0.3, 0.0, 2, 0); }) == ErrorCode::UnsupportedRegularity);
  CHECK(code_of([&] { xlog.eval(0.0, 0.0, 1, 0); }) == ErrorCode::SingularPoint);
  CHECK(code_of([&] { power.eval(0.0, 0.0, 2, 0); }) == ErrorCode::SingularPoint);
  CHECK(code_of([&] { kink.eval(0.3, 0.0, 3, 0); }) == ErrorCode::Precondition);
  CHECK(code_of([&] { ConormalPotential(s, SingularPart::power(1.0, 1.0)); }) ==
        ErrorCode::Config);
  CHECK(code_of([] { parse_singular_kind("wedge"); }) == ErrorCode::Config);
  CHECK(code_of([] { parse_smooth_kind("gaussian"); }) == ErrorCode::Config);
}

TEST_CASE("values at x = 0 take the right limit") {
  const SmoothPart s = SmoothPart::poly(-1.0);
  CHECK(ConormalPotential(s, SingularPart::step(1.0)).eval(0.0, 0.0, 0, 0) == 0.0);
  CHECK(ConormalPotential(s, SingularPart::kink(1.0)).eval(0.0, 0.0, 1, 0) == 1.0);
  CHECK(ConormalPotential(s, SingularPart::kink(1.0)).eval(0.0, 0.0, 1, 0, Side::Left) == -1.0);
  CHECK(ConormalPotential(s, SingularPart::powkink(1.0)).eval(0.0, 0.0, 2, 0) == 2.0);
  CHECK(ConormalPotential(s, SingularPart::xlog(1.0)).eval(0.0, 0.0, 0, 0) == -1.0);
}

TEST_CASE("r_symbol examples") {
  const ConormalPotential kink(SmoothPart::poly(-2.0), SingularPart::kink(1.0));
  CHECK(r_symbol(kink, MetricModel::flat(1), -1.0, 0.0, 0.0) == 1.0);
  const ConormalPotential minus_one(SmoothPart::poly(-1.0), SingularPart::none());
  CHECK(r_symbol(minus_one, MetricModel::flat(), 0.3, 0.2, 1.0) == 0.0);
  // h = 1 + x^2 at x = 1 gives h^{11} = 0.5.
  const auto m = MetricModel::custom(
      [](double x, double) { return MetricJet{1.0 + x * x, 2.0 * x, 0, 2.0, 0, 0}; }, "1+x^2");
  const ConormalPotential minus_two(SmoothPart::poly(-2.0), SingularPart::none());
  CHECK(r_symbol(minus_two, m, 1.0, 0.0, 2.0) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("absolute continuity: V(b) - V(a) = integral of d_x V") {
  for (const auto& V : non_jump_catalog())
    for (auto [a, b] : {std::pair{-0.7, 0.9}, std::pair{-1.3, -0.2}, std::pair{0.05, 1.1}})
      for (double y : {-0.5, 0.4}) {
        const double lhs = V.value(b, y) - V.value(a, y);
        CHECK(std::abs(integrate_dx(V, a, b, y, 1) - lhs) <= 1e-10);
      }
}

TEST_CASE("W21 tags: d_x V is absolutely continuous") {
  for (const auto& V : non_jump_catalog()) {
    if (V.regularity() < Regularity::W21) continue;
    for (auto [a, b] : {std::pair{-0.7, 0.9}, std::pair{0.05, 1.1}}) {
      const double lhs = V.eval(b, 0.3, 1, 0) - V.eval(a, 0.3, 1, 0);
      CHECK(std::abs(integrate_dx(V, a, b, 0.3, 2) - lhs) <= 1e-10);
    }
  }
}

TEST_CASE("y-derivatives: central differences converge at second order") {
  for (const auto& V : non_jump_catalog())
    for (double x : {-0.6, 0.0, 0.35}) {
      const double y = 0.4;
      const double exact = V.eval(x, y, 0, 1);
      double previous = 0.0;
      for (double d : {1e-2, 5e-3}) {
        const double fd = (V.value(x, y + d) - V.value(x, y - d)) / (2.0 * d);
        const double err = std::abs(fd - exact);
        if (previous > 1e-12) CHECK(err <= previous / 3.5);
        previous = err;
      }
      const double d = 1e-4;
      const double fd2 = (V.value(x, y + d) - 2.0 * V.value(x, y) + V.value(x, y - d)) / (d * d);
      CHECK(fd2 == doctest::Approx(V.eval(x, y, 0, 2)).epsilon(1e-5));
    }
}

TEST_CASE("mollifier is even, nonnegative, unit mass") {
  using boost::math::quadrature::gauss_kronrod;
  const double mass =
      gauss_kronrod<double, 61>::integrate([](double u) { return mollifier(u); }, -1.0, 1.0, 15,
                                           1e-14);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
  for (double u : {0.1, 0.5, 0.93}) {
    CHECK(mollifier(u) == mollifier(-u));
    CHECK(mollifier(u) > 0.0);
    CHECK(mollifier(u, 1) == doctest::Approx(-mollifier(-u, 1)));
  }
  CHECK(mollifier(1.0) == 0.0);
  CHECK(mollifier(-1.5) == 0.0);
}

TEST_CASE("mollify examples") {
  const ConormalPotential smooth(SmoothPart::poly(-1.0, 0.5), SingularPart::none());
  CHECK(mollify(smooth, 0.1) == smooth);

  const ConormalPotential step(SmoothPart::zero(), SingularPart::step(1.0));
  CHECK(mollify(step, 0.1).value(0.0) == doctest::Approx(0.5).epsilon(1e-14));

  // Kink: int |s| phi_eps(s) ds = eps * int |u| phi(u) du, in (0, eps).
  using boost::math::quadrature::gauss_kronrod;
  const double moment = 2.0 * gauss_kronrod<double, 61>::integrate(
                                  [](double u) { return u * mollifier(u); }, 0.0, 1.0, 15, 1e-14);
  const ConormalPotential kink(SmoothPart::zero(), SingularPart::kink(1.0));
  for (double eps : {0.1, 0.01}) {
    const double v = mollify(kink, eps).value(0.0);
    CHECK(v > 0.0);
    CHECK(v <= eps);
    CHECK(v == doctest::Approx(eps * moment).epsilon(1e-10));
  }
  // Away from the support the kink is untouched and so is its derivative.
  CHECK(mollify(kink, 0.1).value(0.5) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(mollify(kink, 0.1).eval(-0.5, 0.0, 1, 0) == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(code_of([&] { mollify(kink, 0.0); }) == ErrorCode::Precondition);
}

TEST_CASE("mollified derivatives match finite differences") {
  for (const auto& base : non_jump_catalog()) {
    const auto V = mollify(base, 0.05);
    for (double x : {-0.03, 0.0, 0.02, 0.2}) {
      const double d = 1e-5;
      const double fd1 = (V.value(x + d, 0.2) - V.value(x - d, 0.2)) / (2.0 * d);
      CHECK(V.eval(x, 0.2, 1, 0) == doctest::Approx(fd1).epsilon(1e-6));
    }
  }
}

TEST_CASE("sup-distance to the mollified potential shrinks with eps") {
  for (const auto& V : non_jump_catalog()) {
    if (V.regularity() == Regularity::Smooth) continue;
    double previous = INFINITY;
    for (double eps : {0.2, 0.1, 0.05, 0.025}) {
      const auto Ve = mollify(V, eps);
      double sup = 0.0;
      for (int i = -40; i <= 40; ++i) {
        const double x = 0.01 * i;
        sup = std::max(sup, std::abs(Ve.value(x, 0.3) - V.value(x, 0.3)));
      }
      CHECK(sup < previous);
      previous = sup;
    }
    CHECK(previous < 0.05);
  }
}
