#include "conoflow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "conoflow/error.hpp"
#include "conoflow/potentials.hpp"

namespace conoflow {

namespace {

void check_dimension(int dimension) {
  if (dimension != 1 && dimension != 2)
    throw Error(ErrorCode::Config, "dimension must be 1 or 2, got " + std::to_string(dimension));
}

}  // namespace

MetricModel MetricModel::flat(int dimension) {
  check_dimension(dimension);
  return {MetricKind::Flat, dimension};
}

MetricModel MetricModel::power(double a, int dimension) {
  check_dimension(dimension);
  MetricModel m(MetricKind::Power, dimension);
  m.a_ = a;
  return m;
}

MetricModel MetricModel::exponential(double k, double b, int dimension) {
  check_dimension(dimension);
  MetricModel m(MetricKind::Exp, dimension);
  m.k_ = k;
  m.b_ = b;
  return m;
}

MetricModel MetricModel::custom(JetFn jet, std::string label, int dimension) {
  check_dimension(dimension);
  MetricModel m(MetricKind::Custom, dimension);
  m.custom_ = std::move(jet);
  m.label_ = std::move(label);
  return m;
}

std::string MetricModel::name() const {
  std::ostringstream os;
  switch (kind_) {
    case MetricKind::Flat: os << "flat"; break;
    case MetricKind::Power: os << "power(" << a_ << ")"; break;
    case MetricKind::Exp: os << "exp(" << k_ << ", " << b_ << ")"; break;
    case MetricKind::Custom: os << label_; break;
  }
  return os.str();
}

MetricJet MetricModel::jet(double x, double y) const {
  MetricJet j;
  if (dimension_ == 1) return j;
  switch (kind_) {
    case MetricKind::Flat: break;
    case MetricKind::Power: {
      const double base = 1.0 + x;
      if (!(base > 0.0))
        throw Error(ErrorCode::Config, "power metric is only defined on the collar x > -1");
      j.h = std::pow(base, a_);
      j.hx = a_ * std::pow(base, a_ - 1.0);
      j.hxx = a_ * (a_ - 1.0) * std::pow(base, a_ - 2.0);
      break;
    }
    case MetricKind::Exp: {
      const double kappa = k_ + b_ * std::sin(y);
      const double dkappa = b_ * std::cos(y);
      const double ddkappa = -b_ * std::sin(y);
      const double gx = -2.0 * kappa;
      const double gy = -2.0 * dkappa * x;
      j.h = std::exp(-2.0 * kappa * x);
      j.hx = gx * j.h;
      j.hy = gy * j.h;
      j.hxx = gx * gx * j.h;
      j.hxy = (-2.0 * dkappa + gx * gy) * j.h;
      j.hyy = (-2.0 * ddkappa * x + gy * gy) * j.h;
      break;
    }
    case MetricKind::Custom: j = custom_(x, y); break;
  }
  if (!(j.h > 0.0) || !std::isfinite(j.h))
    throw Error(ErrorCode::Config, "metric " + name() + " is not positive definite at (" +
                                       std::to_string(x) + ", " + std::to_string(y) + ")");
  return j;
}

MetricJet MetricModel::inverse_jet(double x, double y) const {
  const MetricJet j = jet(x, y);
  const double g = 1.0 / j.h;
  const double g2 = g * g;
  const double g3 = g2 * g;
  MetricJet inv;
  inv.h = g;
  inv.hx = -j.hx * g2;
  inv.hy = -j.hy * g2;
  inv.hxx = 2.0 * j.hx * j.hx * g3 - j.hxx * g2;
  inv.hxy = 2.0 * j.hx * j.hy * g3 - j.hxy * g2;
  inv.hyy = 2.0 * j.hy * j.hy * g3 - j.hyy * g2;
  return inv;
}

Eigen::MatrixXd dual_metric(const MetricModel& m, double x, double y) {
  const int n = m.dimension() - 1;
  Eigen::MatrixXd out(n, n);
  if (n == 1) out(0, 0) = m.inverse_jet(x, y).h;
  return out;
}

std::vector<double> principal_curvatures(const MetricModel& m, double y) {
  if (m.dimension() == 1) return {};
  const MetricJet j = m.jet(0.0, y);
  Eigen::MatrixXd h(1, 1);
  Eigen::MatrixXd second(1, 1);
  h(0, 0) = j.h;
  second(0, 0) = -0.5 * j.hx;
  // Shape operator h^{-1} II is self-adjoint for h; solve II v = k h v.
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(second, h);
  std::vector<double> ks(solver.eigenvalues().data(),
                         solver.eigenvalues().data() + solver.eigenvalues().size());
  std::sort(ks.begin(), ks.end());
  return ks;
}

CurvatureCheck curvature_condition(const MetricModel& m, const ConormalPotential& V, double y,
                                   Side side) {
  if (V.regularity() == Regularity::Jump)
    throw Error(ErrorCode::UnsupportedRegularity,
                "curvature condition needs a one-sided x-derivative; Jump potentials have none");
  const double yy = m.dimension() == 1 ? 0.0 : y;
  const double v0 = V.eval(0.0, yy, 0, 0, side);
  if (v0 >= 0.0) return {true, true};

  const double dv = V.eval(0.0, yy, 1, 0, side);
  const std::vector<double> ks = principal_curvatures(m, yy);
  if (ks.empty()) return {dv != 0.0, false};

  // conv{2 V k_j} is the interval spanned by the extreme curvatures.
  const double a = 2.0 * v0 * ks.front();
  const double b = 2.0 * v0 * ks.back();
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  return {dv < lo || dv > hi, false};
}

}  // namespace conoflow
