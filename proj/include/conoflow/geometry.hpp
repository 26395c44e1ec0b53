#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "conoflow/phase_space.hpp"

namespace conoflow {

class ConormalPotential;

/// Tangential metric coefficient h(x, y) of g = dx^2 + h dy^2 and its
/// derivatives up to second order. In d = 1 the tangential block is empty
/// and the jet is the constant 1.
struct MetricJet {
  double h = 1.0;
  double hx = 0.0;
  double hy = 0.0;
  double hxx = 0.0;
  double hxy = 0.0;
  double hyy = 0.0;
};

enum class MetricKind { Flat, Power, Exp, Custom };

/// Fermi-collar metric model with defining function f = x.
///
/// Catalog:
///   flat          h = 1
///   power(a)      h = (1 + x)^a           collar x > -1
///   exp(k, b)     h = exp(-2 (k + b sin y) x)
class MetricModel {
 public:
  using JetFn = std::function<MetricJet(double, double)>;

  static MetricModel flat(int dimension = 2);
  static MetricModel power(double a, int dimension = 2);
  static MetricModel exponential(double k, double b = 0.0, int dimension = 2);
  static MetricModel custom(JetFn jet, std::string label, int dimension = 2);

  int dimension() const { return dimension_; }
  MetricKind kind() const { return kind_; }
  double a() const { return a_; }
  double k() const { return k_; }
  double b() const { return b_; }
  std::string name() const;

  /// Throws ErrorCode::Config when h <= 0 at the queried point.
  MetricJet jet(double x, double y) const;

  /// Jet of the inverse coefficient h^{11} = 1/h.
  MetricJet inverse_jet(double x, double y) const;

 private:
  MetricModel(MetricKind kind, int dimension) : kind_(kind), dimension_(dimension) {}

  MetricKind kind_;
  int dimension_;
  double a_ = 0.0;
  double k_ = 0.0;
  double b_ = 0.0;
  JetFn custom_;
  std::string label_;
};

/// h^{ij}(x, y) as a (d-1)x(d-1) matrix.
Eigen::MatrixXd dual_metric(const MetricModel& m, double x, double y);

/// Eigenvalues of the shape operator of Y at (0, y), ascending.
/// Shape operator: h^{ik} (-(1/2) d_x h_kj)(0, y), normal N = d_x.
std::vector<double> principal_curvatures(const MetricModel& m, double y);

struct CurvatureCheck {
  bool holds = true;
  bool vacuous = false;
};

/// Glancing non-degeneracy over (0, y): d_xV(0±, y) must avoid the hull
/// conv(2 V k_1, ..., 2 V k_{d-1}). Equivalent to H_p^2 x != 0 on the
/// glancing part of the energy shell. Vacuous (true) when V(0, y) >= 0.
CurvatureCheck curvature_condition(const MetricModel& m, const ConormalPotential& V,
                                   double y, Side side);

}  // namespace conoflow
