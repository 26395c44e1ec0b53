#include "conoflow/quantum.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

#include "conoflow/error.hpp"
#include "conoflow/measure.hpp"
#include "detail/atomic_file.hpp"
#include "detail/fft.hpp"

namespace conoflow {

using cplx = std::complex<double>;

namespace {

void check_axis(double extent, std::size_t n, const char* axis) {
  if (!(extent > 0.0) || !std::isfinite(extent))
    throw Error(ErrorCode::Config, std::string("grid extent along ") + axis + " must be positive");
  if (n < 2 || !std::has_single_bit(n))
    throw Error(ErrorCode::Config,
                std::string("grid points along ") + axis + " must be a power of two >= 2");
}

std::vector<int> fft_shape(const Grid& grid) {
  if (grid.dimension == 1) return {static_cast<int>(grid.points[0])};
  return {static_cast<int>(grid.points[0]), static_cast<int>(grid.points[1])};
}

double k2_at(const Grid& grid, std::size_t index) {
  const std::size_t ny = grid.points[1];
  const double kx = grid.wavenumber(0, index / ny);
  const double ky = grid.dimension == 2 ? grid.wavenumber(1, index % ny) : 0.0;
  return kx * kx + ky * ky;
}

}  // namespace

Grid Grid::line(double extent, std::size_t points) {
  check_axis(extent, points, "x");
  Grid g;
  g.dimension = 1;
  g.extent = {extent, 1.0};
  g.points = {points, 1};
  return g;
}

Grid Grid::plane(double extent_x, std::size_t nx, double extent_y, std::size_t ny) {
  check_axis(extent_x, nx, "x");
  check_axis(extent_y, ny, "y");
  Grid g;
  g.dimension = 2;
  g.extent = {extent_x, extent_y};
  g.points = {nx, ny};
  return g;
}

double Grid::wavenumber(int axis, std::size_t i) const {
  const std::size_t n = points[axis];
  const double m = i < n / 2 ? static_cast<double>(i) : static_cast<double>(i) - static_cast<double>(n);
  return 2.0 * std::numbers::pi * m / extent[axis];
}

double WaveState::norm() const {
  double sum = 0.0;
  for (const cplx& a : psi) sum += std::norm(a);
  return std::sqrt(sum * grid.cell_volume());
}

bool WaveState::consistent() const { return std::abs(norm() - recorded_norm) <= 1e-12; }

WaveState coherent_state(const Grid& grid, double h, const PhasePoint& rho0, double sigma) {
  if (!(h > 0.0)) throw Error(ErrorCode::Config, "h must be positive");
  const double sh = std::sqrt(h);
  if (!(sigma >= 0.25 * sh * (1 - 1e-12) && sigma <= 4.0 * sh * (1 + 1e-12))) {
    std::ostringstream msg;
    msg << "coherent state width sigma = " << sigma << " outside [sqrt(h)/4, 4 sqrt(h)] = ["
        << 0.25 * sh << ", " << 4.0 * sh << "]";
    throw Error(ErrorCode::Config, msg.str());
  }
  const double clearance = 5.0 * sigma;
  auto check = [&](double c, int axis, const char* name) {
    if (c - clearance < grid.lower(axis) || c + clearance > grid.upper(axis)) {
      std::ostringstream msg;
      msg << "coherent state centre " << name << " = " << c << " needs 5 sigma = " << clearance
          << " clearance inside [" << grid.lower(axis) << ", " << grid.upper(axis) << ")";
      throw Error(ErrorCode::Config, msg.str());
    }
  };
  check(rho0.x, 0, "x");
  if (grid.dimension == 2) check(rho0.y, 1, "y");

  WaveState out;
  out.grid = grid;
  out.h = h;
  out.psi.resize(grid.size());
  const std::size_t ny = grid.points[1];
  const double amp = std::pow(std::numbers::pi * sigma * sigma, -0.25 * grid.dimension);
  for (std::size_t i = 0; i < grid.points[0]; ++i) {
    const double dx = grid.coordinate(0, i) - rho0.x;
    for (std::size_t j = 0; j < ny; ++j) {
      const double dy = grid.dimension == 2 ? grid.coordinate(1, j) - rho0.y : 0.0;
      const double phase = (rho0.xi * dx + (grid.dimension == 2 ? rho0.eta * dy : 0.0)) / h;
      const double env = amp * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
      out.psi[i * ny + j] = std::polar(env, phase);
    }
  }
  const double n = out.norm();
  for (cplx& a : out.psi) a /= n;
  out.recorded_norm = out.norm();
  return out;
}

std::vector<double> sample_potential(const Grid& grid, const ConormalPotential& V) {
  std::vector<double> v(grid.size());
  const std::size_t ny = grid.points[1];
  for (std::size_t i = 0; i < grid.points[0]; ++i)
    for (std::size_t j = 0; j < ny; ++j) {
      const double y = grid.dimension == 2 ? grid.coordinate(1, j) : 0.0;
      v[i * ny + j] = V.eval(grid.coordinate(0, i), y, 0, 0, Side::Right);
    }
  return v;
}

WaveState propagate(const WaveState& psi, const ConormalPotential& V, double T, double dt) {
  const double h = psi.h;
  if (dt <= 0.0) dt = h / 20.0;
  if (!std::isfinite(T)) throw Error(ErrorCode::Precondition, "propagate needs a finite T");
  if (dt > h) throw Error(ErrorCode::Precondition, "propagate needs dt <= h");
  WaveState out = psi;
  if (T == 0.0) return out;

  const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(std::abs(T) / dt - 1e-9)));
  const double tau = T / static_cast<double>(steps);
  const Grid& grid = psi.grid;
  const std::size_t n = grid.size();

  const std::vector<double> v = sample_potential(grid, V);
  std::vector<cplx> half(n), full(n), drift(n);
  for (std::size_t i = 0; i < n; ++i) {
    half[i] = std::polar(1.0, -0.5 * tau * v[i] / h);
    full[i] = half[i] * half[i];
    drift[i] = std::polar(1.0 / static_cast<double>(n), -tau * h * k2_at(grid, i));
  }

  const detail::FftPlan fft(fft_shape(grid));
  auto& a = out.psi;
  for (std::size_t i = 0; i < n; ++i) a[i] *= half[i];
  for (std::size_t s = 0; s < steps; ++s) {
    fft.forward(a.data());
    for (std::size_t i = 0; i < n; ++i) a[i] *= drift[i];
    fft.backward(a.data());
    const auto& kick = s + 1 < steps ? full : half;
    for (std::size_t i = 0; i < n; ++i) a[i] *= kick[i];
  }
  out.t = psi.t + T;
  out.recorded_norm = out.norm();
  const double drift_norm = std::abs(out.recorded_norm - psi.norm());
  if (!(drift_norm <= 1e-6)) {
    std::ostringstream msg;
    msg << "norm drift " << drift_norm << " exceeds 1e-6 during propagation";
    throw Error(ErrorCode::NumericalInstability, msg.str());
  }
  return out;
}

double residual(const WaveState& psi, const ConormalPotential& V, double E) {
  const Grid& grid = psi.grid;
  const std::size_t n = grid.size();
  std::vector<cplx> lap = psi.psi;
  const detail::FftPlan fft(fft_shape(grid));
  fft.forward(lap.data());
  const double h2 = psi.h * psi.h;
  for (std::size_t i = 0; i < n; ++i) lap[i] *= h2 * k2_at(grid, i) / static_cast<double>(n);
  fft.backward(lap.data());
  const std::vector<double> v = sample_potential(grid, V);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num += std::norm(lap[i] + (v[i] - E) * psi.psi[i]);
    den += std::norm(psi.psi[i]);
  }
  return den == 0.0 ? 0.0 : std::sqrt(num / den);
}

PhasePoint husimi_center(const WaveState& psi) {
  const Grid& grid = psi.grid;
  const std::size_t ny = grid.points[1];
  double mass = 0.0, mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < grid.points[0]; ++i)
    for (std::size_t j = 0; j < ny; ++j) {
      const double w = std::norm(psi.psi[i * ny + j]);
      mass += w;
      mx += w * grid.coordinate(0, i);
      if (grid.dimension == 2) my += w * grid.coordinate(1, j);
    }
  std::vector<cplx> hat = psi.psi;
  const detail::FftPlan fft(fft_shape(grid));
  fft.forward(hat.data());
  double pmass = 0.0, px = 0.0, py = 0.0;
  for (std::size_t i = 0; i < grid.points[0]; ++i)
    for (std::size_t j = 0; j < ny; ++j) {
      const double w = std::norm(hat[i * ny + j]);
      pmass += w;
      px += w * psi.h * grid.wavenumber(0, i);
      if (grid.dimension == 2) py += w * psi.h * grid.wavenumber(1, j);
    }
  PhasePoint c{mx / mass, px / pmass};
  if (grid.dimension == 2) {
    c.y = my / mass;
    c.eta = py / pmass;
  }
  return c;
}

namespace {

void require_cleared(const WaveState& psi) {
  const Grid& grid = psi.grid;
  const std::size_t ny = grid.points[1];
  const double band = 5.0 * std::sqrt(psi.h);
  double near = 0.0, total = 0.0;
  for (std::size_t i = 0; i < grid.points[0]; ++i) {
    const bool inside = std::abs(grid.coordinate(0, i)) < band;
    for (std::size_t j = 0; j < ny; ++j) {
      const double w = std::norm(psi.psi[i * ny + j]);
      total += w;
      if (inside) near += w;
    }
  }
  if (total > 0.0 && near > 1e-3 * total) {
    std::ostringstream msg;
    msg << "packet has not cleared the interface: fraction " << near / total
        << " of |psi|^2 lies within 5 sqrt(h) of x = 0";
    throw Error(ErrorCode::Diagnostic, msg.str());
  }
}

// Phase-space box covering one x half-line and the momentum range of the grid.
PhaseSpaceBox half_space(const WaveState& psi, Side side, Interval xi) {
  const Grid& grid = psi.grid;
  const double pmax = 2.0 * std::numbers::pi * psi.h / grid.spacing(0);
  PhaseSpaceBox B;
  B.x = side == Side::Left ? Interval{grid.lower(0), 0.0} : Interval{0.0, grid.upper(0)};
  B.xi = {std::max(xi.lo, -pmax), std::min(xi.hi, pmax)};
  if (grid.dimension == 2) {
    const double qmax = 2.0 * std::numbers::pi * psi.h / grid.spacing(1);
    B.y = {grid.lower(1), grid.upper(1)};
    B.eta = {-qmax, qmax};
  }
  return B;
}

}  // namespace

double reflected_mass(const WaveState& psi, Side incident_side, double incident_sign, double sigma,
                      int resolution) {
  require_cleared(psi);
  const Interval xi = incident_sign > 0.0 ? Interval{-INFINITY, 0.0} : Interval{0.0, INFINITY};
  return box_mass(psi, half_space(psi, incident_side, xi), sigma, resolution);
}

double transmitted_mass(const WaveState& psi, Side incident_side, double sigma, int resolution) {
  require_cleared(psi);
  const Side far = incident_side == Side::Left ? Side::Right : Side::Left;
  return box_mass(psi, half_space(psi, far, {-INFINITY, INFINITY}), sigma, resolution);
}

std::vector<ScanRow> h_sweep(const std::vector<double>& h_list,
                             const std::function<ScanRow(double)>& run_one) {
  std::vector<ScanRow> rows(h_list.size());
  auto work = [&](std::size_t i) {
    try {
      rows[i] = run_one(h_list[i]);
      rows[i].h = h_list[i];
    } catch (const Error& e) {
      rows[i] = ScanRow{h_list[i], NAN, NAN, NAN, std::string(to_string(e.code())) + ": " + e.what()};
    } catch (const std::exception& e) {
      rows[i] = ScanRow{h_list[i], NAN, NAN, NAN, std::string("internal: ") + e.what()};
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < h_list.size(); ++i) pool.emplace_back(work, i);
  for (auto& t : pool) t.join();
  return rows;
}

ScanRow scatter(const ScatteringSetup& setup, double h) {
  const Grid grid = Grid::line(setup.extent, setup.points);
  const WaveState u0 = coherent_state(grid, h, setup.rho0, setup.sigma_factor * std::sqrt(h));
  const WaveState uT = propagate(u0, setup.potential, setup.T, setup.dt_factor * h);
  const Side incident = side_of(setup.rho0.x);
  const double sign = setup.rho0.xi >= 0.0 ? 1.0 : -1.0;
  ScanRow row;
  row.h = h;
  row.reflected_mass = reflected_mass(uT, incident, sign, 0.0, setup.resolution);
  row.transmitted_mass = transmitted_mass(uT, incident, 0.0, setup.resolution);
  row.norm_drift = std::abs(uT.norm() - u0.norm());
  return row;
}

namespace {

template <class T>
void put(std::string& out, const T& value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.append(bytes, sizeof(T));
}

template <class T>
T take(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw Error(ErrorCode::Parse, "snapshot truncated");
  return value;
}

constexpr char kMagic[9] = "CFSNAP01";

}  // namespace

void write_snapshot(const std::string& path, const WaveState& psi) {
  static_assert(std::endian::native == std::endian::little, "snapshot layout is little-endian");
  std::string bytes;
  bytes.reserve(64 + psi.psi.size() * 16);
  bytes.append(kMagic, 8);
  put<std::uint32_t>(bytes, static_cast<std::uint32_t>(psi.grid.dimension));
  put<std::uint32_t>(bytes, 0);
  put<std::uint64_t>(bytes, psi.grid.points[0]);
  put<std::uint64_t>(bytes, psi.grid.points[1]);
  put<double>(bytes, psi.grid.extent[0]);
  put<double>(bytes, psi.grid.extent[1]);
  put<double>(bytes, psi.h);
  put<double>(bytes, psi.t);
  for (const cplx& a : psi.psi) {
    put<double>(bytes, a.real());
    put<double>(bytes, a.imag());
  }
  detail::write_atomic(path, bytes);
}

WaveState read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Config, "cannot open snapshot " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw Error(ErrorCode::Parse, path + " is not a snapshot file");
  WaveState out;
  out.grid.dimension = static_cast<int>(take<std::uint32_t>(in));
  take<std::uint32_t>(in);
  out.grid.points[0] = take<std::uint64_t>(in);
  out.grid.points[1] = take<std::uint64_t>(in);
  out.grid.extent[0] = take<double>(in);
  out.grid.extent[1] = take<double>(in);
  out.h = take<double>(in);
  out.t = take<double>(in);
  out.psi.resize(out.grid.size());
  for (cplx& a : out.psi) {
    const double re = take<double>(in);
    a = {re, take<double>(in)};
  }
  out.recorded_norm = out.norm();
  return out;
}

}  // namespace conoflow
