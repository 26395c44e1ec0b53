#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "conoflow/phase_space.hpp"
#include "conoflow/potentials.hpp"

namespace conoflow {

/// Periodic box [-L/2, L/2) per axis with a power-of-two number of nodes,
/// so x = 0 is always the node n/2. For d = 1 the y axis is a single point.
struct Grid {
  int dimension = 1;
  std::array<double, 2> extent{16.0, 1.0};
  std::array<std::size_t, 2> points{1024, 1};

  static Grid line(double extent, std::size_t points);
  static Grid plane(double extent_x, std::size_t nx, double extent_y, std::size_t ny);

  std::size_t size() const { return points[0] * points[1]; }
  double spacing(int axis) const { return extent[axis] / static_cast<double>(points[axis]); }
  double lower(int axis) const { return -0.5 * extent[axis]; }
  double upper(int axis) const { return 0.5 * extent[axis]; }
  double coordinate(int axis, std::size_t i) const {
    return lower(axis) + static_cast<double>(i) * spacing(axis);
  }
  /// Angular wavenumber of FFT bin i (negative frequencies in the upper half).
  double wavenumber(int axis, std::size_t i) const;
  double cell_volume() const { return spacing(0) * (dimension == 2 ? spacing(1) : 1.0); }

  friend bool operator==(const Grid&, const Grid&) = default;
};

/// Amplitudes on a Grid, row-major with y fastest: psi[i * ny + j].
struct WaveState {
  Grid grid;
  std::vector<std::complex<double>> psi;
  double h = 0.01;
  double t = 0.0;
  /// Norm recorded by the operation that produced the state.
  double recorded_norm = 0.0;

  /// Discrete L^2 norm (the trapezoid rule on a periodic grid).
  double norm() const;
  bool consistent() const;
};

/// (pi sigma^2)^{-d/4} e^{i xi0 (x - x0)/h} e^{-|z - z0|^2 / (2 sigma^2)},
/// normalised on the grid. Requires sigma in [sqrt(h)/4, 4 sqrt(h)] and 5 sigma
/// clearance from the box edges (ErrorCode::Config otherwise).
WaveState coherent_state(const Grid& grid, double h, const PhasePoint& rho0, double sigma);

/// V sampled at the nodes (right limit on x = 0).
std::vector<double> sample_potential(const Grid& grid, const ConormalPotential& V);

/// Strang-split evolution of i h psi_t = (-h^2 Lap + V) psi over time T.
/// dt <= 0 selects h / 20. The step is shrunk so an integer number of steps
/// covers T. Norm drift above 1e-6 raises NumericalInstability.
WaveState propagate(const WaveState& psi, const ConormalPotential& V, double T, double dt = 0.0);

/// ||(-h^2 Lap + V - E) psi|| / ||psi|| with the spectral Laplacian.
double residual(const WaveState& psi, const ConormalPotential& V, double E);

/// (<x>, <h k>) and, for d = 2, (<y>, <h k_y>): the centre of the Husimi density.
PhasePoint husimi_center(const WaveState& psi);

/// Husimi mass on the incident side with reversed momentum. Raises
/// ErrorCode::Diagnostic while |psi|^2 still has more than 1e-3 of its mass
/// within 5 sqrt(h) of the interface. sigma <= 0 selects sqrt(h).
double reflected_mass(const WaveState& psi, Side incident_side, double incident_sign,
                      double sigma = 0.0, int resolution = 8);
/// Husimi mass beyond the interface, any momentum.
double transmitted_mass(const WaveState& psi, Side incident_side, double sigma = 0.0,
                        int resolution = 8);

/// Wave-packet scattering set-up for reflection scans. sigma = sigma_factor sqrt(h).
struct ScatteringSetup {
  ConormalPotential potential;
  PhasePoint rho0{-3.0, 1.0};
  double sigma_factor = 1.0;
  double T = 4.0;
  double extent = 16.0;
  std::size_t points = 1u << 14;
  /// dt = dt_factor * h.
  double dt_factor = 0.05;
  int resolution = 8;
};

struct ScanRow {
  double h = 0.0;
  double reflected_mass = 0.0;
  double transmitted_mass = 0.0;
  double norm_drift = 0.0;
  /// Empty on success; otherwise "<error-code>: <message>".
  std::string error;
};

/// One independent run per h; rows keep the order of h_list. A failing h is
/// recorded in its row and the sweep continues.
std::vector<ScanRow> h_sweep(const std::vector<double>& h_list,
                             const std::function<ScanRow(double)>& run_one);

ScanRow scatter(const ScatteringSetup& setup, double h);

/// Flat binary snapshot:
///   char[8]   "CFSNAP01"
///   uint32    dims
///   uint32    reserved (0)
///   uint64    points[2]   (points[1] = 1 for d = 1)
///   float64   extents[2]
///   float64   h, t
///   float64   (Re psi, Im psi) per node, row-major, y fastest
/// All little-endian. Written to a temporary file and renamed into place.
void write_snapshot(const std::string& path, const WaveState& psi);
WaveState read_snapshot(const std::string& path);

}  // namespace conoflow
