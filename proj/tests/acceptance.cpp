#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "conoflow/cli.hpp"
#include "conoflow/error.hpp"
#include "conoflow/flow.hpp"
#include "conoflow/geometry.hpp"
#include "conoflow/measure.hpp"
#include "conoflow/quantum.hpp"

using namespace conoflow;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

const fs::path kConfigs = CONOFLOW_CONFIG_DIR;
const double kT1 = std::sqrt(2.0) - 1.0 + 0.5;
const PhasePoint kEnd1{1.164213562373095, 0.914213562373095};

ConormalPotential kink() { return {SmoothPart::poly(-2.0), SingularPart::kink(1.0)}; }
ConormalPotential powkink() { return {SmoothPart::poly(-1.0, 1.0), SingularPart::powkink(1.0)}; }

Report run_config(const std::string& name, const fs::path& out) {
  fs::remove_all(out);
  return run(validate(slurp(kConfigs / name)), out.string());
}

// Rows (h, reflected_mass) of a reflect-scan CSV.
std::vector<std::pair<double, double>> scan_rows(const fs::path& csv) {
  std::istringstream in(slurp(csv));
  std::string line;
  std::getline(in, line);
  std::vector<std::pair<double, double>> rows;
  while (std::getline(in, line)) {
    std::istringstream cells(line);
    std::string h, r;
    std::getline(cells, h, ',');
    std::getline(cells, r, ',');
    rows.emplace_back(std::stod(h), std::stod(r));
  }
  return rows;
}

Outcome c1(const fs::path& out) {
  const Report r = run_config("kink_flow.cfg", out);
  const std::string csv = slurp(out / "trajectory.csv");
  std::string last = csv.substr(csv.rfind('\n', csv.size() - 2) + 1);
  double t, x, xi, drift;
  std::sscanf(last.c_str(), "%lf,%lf,%lf,%lf", &t, &x, &xi, &drift);
  const double err = std::max(std::abs(x - kEnd1.x), std::abs(xi - kEnd1.xi));
  return {r.exit_code() == 0 && err <= 1e-8 && std::abs(drift) <= 1e-10,
          fmt("endpoint error %.2e, drift %.2e", err, drift)};
}

Outcome c2() {
  const ConormalPotential V = powkink();
  const MetricModel m = MetricModel::flat();
  const PhasePoint rho0{0.0, 0.0, 0.0, 1.0};
  const double dxr = -V.eval(0.0, 0.0, 1, 0);
  double worst_ratio = 0.0, worst_r1 = 0.0;
  for (double t : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const double x = step_glancing(V, m, rho0, t).trajectory.final_point().x;
    const double r1 = R1(V, m, rho0, t);
    worst_ratio = std::max(worst_ratio, std::abs(x - dxr * t * t) / (t * t * r1));
    worst_r1 = std::max(worst_r1, std::abs(r1 - (8.0 * t * t + t)));
  }
  return {worst_ratio <= 1.0 && worst_r1 <= 1e-10,
          fmt("max ratio %.3e (bound 1), max R1 error %.2e", worst_ratio, worst_r1)};
}

Outcome c3() {
  const MetricModel m = MetricModel::flat();
  const PhasePoint a{0.0, 0.0, 0.0, 1.0 + 1e-6}, b{0.0, 0.0, 0.0, 1.0 - 1e-6};
  const double sep = distance(integrate(powkink(), m, a, 0.1).final_point(),
                              integrate(powkink(), m, b, 0.1).final_point());
  return {sep <= 1e-4, fmt("separation %.3e", sep)};
}

Outcome c4() {
  const MetricModel flat1 = MetricModel::flat(1), flat2 = MetricModel::flat();
  const PhasePoint k0{-1.0, 1.0};
  const PhasePoint k1 = integrate(kink(), flat1, k0, kT1).final_point();
  const double e1 = distance(integrate(kink(), flat1, k1, -kT1).final_point(), k0);
  const PhasePoint g0{0.0, 0.0, 0.0, 1.0};
  const PhasePoint g1 = integrate(powkink(), flat2, g0, 0.1).final_point();
  const double e2 = distance(integrate(powkink(), flat2, g1, -0.1).final_point(), g0);
  return {e1 <= 1e-7 && e2 <= 1e-7, fmt("kink %.2e, glancing %.2e", e1, e2)};
}

Outcome c5(const fs::path& out) {
  const Report r = run_config("step_reflect.cfg", out);
  const auto rows = scan_rows(out / "reflect_scan.csv");
  const double R = rows.back().second;
  const double rel = std::abs(R - 1.0 / 9.0) * 9.0;
  return {r.exit_code() == 0 && rows.back().first == 0.0025 && rel <= 0.1,
          fmt("R(h=%.4g) = %.5f, relative error %.3f", rows.back().first, R, rel)};
}

Outcome c6(const fs::path& out) {
  const Report r = run_config("kink_reflect.cfg", out);
  const auto rows = scan_rows(out / "reflect_scan.csv");
  // Trend: a least-squares slope of R against log h must be positive.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [h, R] : rows) {
    sx += std::log(h), sy += R, sxx += std::log(h) * std::log(h), sxy += std::log(h) * R;
  }
  const double n = static_cast<double>(rows.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double last = rows.back().second;
  return {r.exit_code() == 0 && slope >= 0.0 && last <= rows.front().second && last <= 0.05,
          fmt("R(h=0.02) = %.3e, R(h=0.0025) = %.3e", rows.front().second, last)};
}

Outcome c7(const fs::path& out) {
  const Report r = run_config("kink_invariance.cfg", out);
  const double defect = r.observables.at("defect");
  const double inf = r.observables.at("hypothesis_infimum");
  return {r.exit_code() == 0 && defect <= 0.05 && inf > 0.0,
          fmt("defect %.3e, hypothesis infimum %.3f", defect, inf)};
}

Outcome c8() {
  const Grid g = Grid::line(16.0, 1u << 14);
  std::vector<double> off;
  for (double h : {0.02, 0.01, 0.005})
    off.push_back(shell_concentration(coherent_state(g, h, {-2.0, 0.0}, std::sqrt(h)), kink(),
                                      0.0, 0.25));
  return {off[1] < off[0] && off[2] < off[1] && off[2] <= 0.05,
          fmt("off-shell mass %.3e, %.3e, %.3e", off[0], off[1], off[2])};
}

// Brute force: at every glancing point (0, 0, y, eta) over the tangent
// directions eta = +-sqrt(-V h), d_x r from one-sided differences of r in x.
bool tangent_scan(const MetricModel& m, const ConormalPotential& V, double y, Side side) {
  const double v0 = V.eval(0.0, y, 0, 0, side);
  if (v0 >= 0.0) return true;
  const double s = sign_of(side), d = 1e-3;
  for (double dir : {-1.0, 1.0}) {
    const double eta = dir * std::sqrt(-v0 * m.jet(0.0, y).h);
    auto r = [&](double x) { return -V.eval(x, y, 0, 0, side) - eta * eta / m.jet(x, y).h; };
    auto diff = [&](double d) { return s * (-3.0 * r(0.0) + 4.0 * r(s * d) - r(2.0 * s * d)) / (2.0 * d); };
    // Aitken extrapolation removes the C d^alpha error of |x|^{1+alpha} terms.
    const double f1 = diff(d), f2 = diff(0.1 * d), f3 = diff(0.01 * d);
    const double den = f1 + f3 - 2.0 * f2;
    const double dxr = std::abs(f1 - f2) < 1e-9 ? f3 : (f1 * f3 - f2 * f2) / den;
    if (std::abs(dxr) <= 1e-6) return false;
  }
  return true;
}

Outcome c9() {
  std::vector<MetricModel> metrics = {MetricModel::flat(), MetricModel::power(2.0),
                                      MetricModel::power(-1.0), MetricModel::power(0.5),
                                      MetricModel::exponential(0.5, 0.3),
                                      MetricModel::exponential(-0.8, 1.2)};
  std::vector<SmoothPart> smooth = {SmoothPart::zero(),
                                    SmoothPart::poly(-1.0),
                                    SmoothPart::poly(-1.0, 1.0),
                                    SmoothPart::poly(-0.5, -0.6, 0.3, 0.4, -0.2, 0.1),
                                    SmoothPart::cosy(-1.0, 0.5, 0.0, 0.8, 2.0)};
  std::vector<SingularPart> singular = {SingularPart::none(), SingularPart::kink(1.0),
                                        SingularPart::kink(-0.7).with_y(0.3, 0.0),
                                        SingularPart::powkink(1.0),
                                        SingularPart::power(0.6, 0.5)};
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> uy(-3.0, 3.0);
  std::vector<double> ys(100);
  for (double& y : ys) y = uy(rng);

  const auto start = std::chrono::steady_clock::now();
  long checks = 0, mismatches = 0, falses = 0;
  for (const auto& m : metrics)
    for (const auto& sm : smooth)
      for (const auto& sg : singular) {
        const ConormalPotential V(sm, sg);
        for (double y : ys)
          for (Side side : {Side::Right, Side::Left}) {
            const bool got = curvature_condition(m, V, y, side).holds;
            mismatches += got != tangent_scan(m, V, y, side);
            falses += !got;
            ++checks;
          }
      }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {mismatches == 0 && falses > 0 && secs < 1.0,
          fmt("%ld checks, %ld mismatches, %ld violations found, %.2f s", checks, mismatches,
              falses, secs)};
}

Outcome c10() {
  const MetricModel m = MetricModel::flat(1);
  std::vector<double> err;
  for (double eps : {1e-1, 1e-2, 1e-3})
    err.push_back(distance(integrate(mollify(kink(), eps), m, {-1.0, 1.0}, kT1).final_point(), kEnd1));
  return {err[1] < err[0] && err[2] < err[1] && err[2] <= 1e-3,
          fmt("endpoint errors %.3e, %.3e, %.3e", err[0], err[1], err[2])};
}

}  // namespace

int main() {
  const fs::path out = fs::temp_directory_path() / "conoflow_acceptance";
  struct Criterion {
    int id;
    double budget_s;
    std::function<Outcome()> fn;
  };
  const std::vector<Criterion> criteria = {
      {1, 1.0, [&] { return c1(out / "c1"); }},
      {2, 5.0, c2},
      {3, 5.0, c3},
      {4, 0.0, c4},
      {5, 120.0, [&] { return c5(out / "c5"); }},
      {6, 120.0, [&] { return c6(out / "c6"); }},
      {7, 120.0, [&] { return c7(out / "c7"); }},
      {8, 0.0, c8},
      {9, 1.0, c9},
      {10, 0.0, c10},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0.0 && secs > c.budget_s) {
      o.pass = false;
      o.detail += fmt("; over the %.0f s budget", c.budget_s);
    }
    failed += !o.pass;
    std::printf("criterion %d: %s (%s; %.2f s)\n", c.id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  fs::remove_all(out);
  return failed == 0 ? 0 : 1;
}
