#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "conoflow/cli.hpp"
#include "conoflow/measure.hpp"
#include "conoflow/quantum.hpp"
#include "detail/atomic_file.hpp"

namespace conoflow {

namespace fs = std::filesystem;
using nlohmann::json;

int Report::exit_code() const {
  if (status == "ok") return 0;
  if (status == "refused") return 2;
  return 1;
}

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

json interval_json(const Interval& iv) { return json::array({iv.lo, iv.hi}); }

json box_json(const PhaseSpaceBox& B, int d) {
  json j = {{"x", interval_json(B.x)}, {"xi", interval_json(B.xi)}};
  if (d == 2) {
    j["y"] = interval_json(B.y);
    j["eta"] = interval_json(B.eta);
  }
  return j;
}

std::string_view regime_at(const Trajectory& traj, double t) {
  for (const Segment& s : traj.segments)
    if (std::min(s.t0, s.t1) <= t && t <= std::max(s.t0, s.t1)) return to_string(s.regime);
  return to_string(Regime::Smooth);
}

std::string csv_header(int d) {
  return d == 2 ? "t,x,xi,y,eta,p_drift,regime\n" : "t,x,xi,p_drift,regime\n";
}

std::string csv_row(const Sample& s, int d, double p_drift, std::string_view regime) {
  std::string row = num(s.t) + "," + num(s.rho.x) + "," + num(s.rho.xi) + ",";
  if (d == 2) row += num(s.rho.y) + "," + num(s.rho.eta) + ",";
  return row + num(p_drift) + "," + std::string(regime) + "\n";
}

std::string trajectory_csv(const Symbol& symbol, const Trajectory& traj, int d) {
  std::string out = csv_header(d);
  const double p0 = symbol.p(traj.samples.front().rho);
  for (const Sample& s : traj.samples) out += csv_row(s, d, symbol.p(s.rho) - p0, regime_at(traj, s.t));
  return out;
}

Grid wave_grid(const ExperimentConfig& c) {
  const QuantumSpec& q = c.quantum;
  return c.dimension == 1 ? Grid::line(q.extent, q.points)
                          : Grid::plane(q.extent, q.points, q.extent_y, q.points_y);
}

class Runner {
 public:
  Runner(const ExperimentConfig& c, fs::path out, Report& report)
      : c_(c), out_(std::move(out)), report_(report), V_(c.potential()), m_(c.metric_model()),
        d_(c.dimension) {}

  void run() {
    switch (c_.kind) {
      case ExperimentKind::Flow: flow(); break;
      case ExperimentKind::Glancing: glancing(); break;
      case ExperimentKind::Crossing: crossing(); break;
      case ExperimentKind::ReflectScan: reflect_scan(); break;
      case ExperimentKind::Invariance: invariance(); break;
      case ExperimentKind::CurvatureCheck: curvature(); break;
      case ExperimentKind::Evolve: evolve(); break;
    }
  }

 private:
  void artifact(const std::string& name, std::string_view bytes) {
    detail::write_atomic((out_ / name).string(), bytes);
    report_.artifacts.push_back(name);
  }

  void fail(std::string code, std::string message) {
    if (report_.status != "ok") return;
    report_.status = "error";
    report_.error_code = std::move(code);
    report_.message = std::move(message);
  }

  void endpoint(const PhasePoint& rho) {
    report_.observables["x_final"] = rho.x;
    report_.observables["xi_final"] = rho.xi;
    if (d_ == 2) {
      report_.observables["y_final"] = rho.y;
      report_.observables["eta_final"] = rho.eta;
    }
  }

  void flow() {
    const Trajectory traj = integrate(V_, m_, *c_.rho0, *c_.T, c_.flow);
    artifact("trajectory.csv", trajectory_csv(Symbol(V_, m_), traj, d_));
    endpoint(traj.final_point());
    report_.observables["energy_drift"] = traj.energy_drift;
    report_.observables["drift_tolerance"] = traj.drift_tolerance;
    report_.observables["samples"] = static_cast<double>(traj.samples.size());
    report_.notes["trajectory_status"] = std::string(to_string(traj.status));
    if (traj.status != TrajectoryStatus::Complete)
      fail(std::string(to_string(traj.status)), traj.diagnostic);
  }

  void glancing() {
    const Symbol symbol(V_, m_);
    const PhasePoint& rho0 = *c_.rho0;
    const GlancingSegment seg = step_glancing(V_, m_, rho0, *c_.T, c_.flow);
    artifact("trajectory.csv", trajectory_csv(symbol, seg.trajectory, d_));
    endpoint(seg.trajectory.final_point());
    report_.observables["glancing_constant"] = seg.constant;

    const double a = symbol.first(rho0.x, rho0.y, rho0.eta).dx;
    std::string law = "t,x,x_lead,R1,ratio\n";
    double worst = 0.0;
    for (double t : c_.t_list) {
      double x = NAN, r1 = NAN, ratio = NAN;
      const double lead = rho0.x + 2.0 * rho0.xi * t + a * t * t;
      try {
        x = step_glancing(V_, m_, rho0, t, c_.flow).trajectory.final_point().x;
        r1 = R1(V_, m_, rho0, t, c_.flow.window);
        ratio = std::abs(x - lead) / (t * t * r1);
        worst = std::max(worst, ratio);
      } catch (const Error& e) {
        report_.notes["t=" + num(t)] = std::string(to_string(e.code())) + ": " + e.what();
        fail(std::string(to_string(e.code())), e.what());
      }
      law += num(t) + "," + num(x) + "," + num(lead) + "," + num(r1) + "," + num(ratio) + "\n";
    }
    artifact("glancing_law.csv", law);
    report_.observables["max_ratio"] = worst;
  }

  void crossing() {
    const Symbol symbol(V_, m_);
    CrossingOptions opts;
    opts.xi_min = c_.flow.xi_min;
    opts.direction = c_.rho0->xi >= 0.0 ? 1 : -1;
    if (c_.T) opts.t_limit = *c_.T;
    const Crossing cr = cross_hyperbolic(V_, m_, *c_.rho0, *c_.x_exit, c_.flow.tol, opts);
    std::string csv = csv_header(d_);
    const double p0 = symbol.p(*c_.rho0);
    csv += csv_row({0.0, *c_.rho0}, d_, 0.0, to_string(Regime::HyperbolicCrossing));
    for (const Sample& s : cr.samples)
      csv += csv_row(s, d_, symbol.p(s.rho) - p0, to_string(Regime::HyperbolicCrossing));
    artifact("crossing.csv", csv);
    endpoint(cr.rho);
    report_.observables["t_elapsed"] = cr.t_elapsed;
    report_.observables["time_limited"] = cr.time_limited ? 1.0 : 0.0;
    report_.observables["p_drift"] = symbol.p(cr.rho) - p0;
  }

  void reflect_scan() {
    ScatteringSetup setup;
    setup.potential = V_;
    setup.rho0 = *c_.rho0;
    setup.sigma_factor = c_.quantum.sigma_factor;
    setup.T = *c_.T;
    setup.extent = c_.quantum.extent;
    setup.points = c_.quantum.points;
    setup.dt_factor = c_.quantum.dt_factor;
    setup.resolution = c_.quantum.resolution;
    const auto rows = h_sweep(c_.quantum.h_list, [&](double h) { return scatter(setup, h); });
    std::string csv = "h,reflected_mass,transmitted_mass,norm_drift\n";
    for (const ScanRow& r : rows) {
      csv += num(r.h) + "," + num(r.reflected_mass) + "," + num(r.transmitted_mass) + "," +
             num(r.norm_drift) + "\n";
      if (!r.error.empty()) {
        report_.notes["h=" + num(r.h)] = r.error;
        const auto colon = r.error.find(':');
        fail(r.error.substr(0, colon), r.error);
      }
    }
    artifact("reflect_scan.csv", csv);
    const ScanRow& last = rows.back();
    report_.observables["reflected_mass_smallest_h"] = last.reflected_mass;
    report_.observables["transmitted_mass_smallest_h"] = last.transmitted_mass;
  }

  void invariance() {
    const double h = *c_.quantum.h, T = *c_.T;
    const PhaseSpaceBox& B = *c_.box;
    const FlowBox fb = flow_box(V_, m_, B, T, c_.flow, c_.samples);
    report_.observables["hypothesis_infimum"] =
        c_.use_corollary ? fb.corollary_infimum : fb.hypothesis_infimum;
    report_.observables["flow_failures"] = static_cast<double>(fb.failures.size());
    const WaveState u0 = coherent_state(wave_grid(c_), h, *c_.rho0, c_.quantum.sigma_factor * std::sqrt(h));
    // Hypothesis check ahead of propagation.
    if (!(c_.use_corollary ? fb.corollary_holds : fb.hypothesis_holds))
      invariance_defect(u0, u0, B, fb, c_.use_corollary);
    if (!fb.failures.empty())
      throw Error(ErrorCode::Diagnostic, std::to_string(fb.failures.size()) +
                                             " box samples failed to flow; first: " +
                                             fb.failure_messages.front());
    const WaveState uT = propagate(u0, V_, T, c_.quantum.dt_factor * h);
    const InvarianceResult r =
        invariance_defect(u0, uT, B, fb, c_.use_corollary, 0.0, c_.quantum.resolution);
    const json j = {{"h", h},
                    {"T", T},
                    {"box", box_json(r.box, d_)},
                    {"image_box", box_json(r.image_box, d_)},
                    {"mass_before", r.mass_before},
                    {"mass_after", r.mass_after},
                    {"defect", r.defect},
                    {"hypothesis_infimum", r.hypothesis_infimum}};
    artifact("invariance.json", j.dump(2) + "\n");
    report_.observables["defect"] = r.defect;
    report_.observables["mass_before"] = r.mass_before;
    report_.observables["mass_after"] = r.mass_after;
  }

  void curvature() {
    const CurvatureCheck cc = curvature_condition(m_, V_, c_.curvature_y, c_.curvature_side);
    const json j = {{"condition", cc.holds}, {"vacuous", cc.vacuous}};
    artifact("curvature.json", j.dump(2) + "\n");
    report_.observables["condition"] = cc.holds ? 1.0 : 0.0;
    report_.observables["vacuous"] = cc.vacuous ? 1.0 : 0.0;
    report_.notes["metric"] = m_.name();
  }

  void evolve() {
    const double h = *c_.quantum.h;
    WaveState u = coherent_state(wave_grid(c_), h, *c_.rho0, c_.quantum.sigma_factor * std::sqrt(h));
    const double initial = u.norm();
    double t = 0.0;
    std::string table = "index,t,file,norm_drift,center_x,center_xi\n";
    for (std::size_t i = 0; i < c_.quantum.times.size(); ++i) {
      const double target = c_.quantum.times[i];
      u = propagate(u, V_, target - t, c_.quantum.dt_factor * h);
      u.t = t = target;
      char name[32];
      std::snprintf(name, sizeof name, "snapshot_%03zu.bin", i);
      write_snapshot((out_ / name).string(), u);
      report_.artifacts.push_back(name);
      const PhasePoint centre = husimi_center(u);
      table += std::to_string(i) + "," + num(t) + "," + name + "," + num(std::abs(u.norm() - initial)) +
               "," + num(centre.x) + "," + num(centre.xi) + "\n";
    }
    artifact("snapshots.csv", table);
    report_.observables["norm_drift"] = std::abs(u.norm() - initial);
  }

  const ExperimentConfig& c_;
  fs::path out_;
  Report& report_;
  ConormalPotential V_;
  MetricModel m_;
  int d_;
};

std::string report_json(const Report& r) {
  json j;
  j["kind"] = std::string(to_string(r.config.kind));
  j["status"] = r.status;
  j["exit_code"] = r.exit_code();
  if (r.status != "ok") j["error"] = {{"code", r.error_code}, {"message", r.message}};
  j["observables"] = json::object();
  for (const auto& [k, v] : r.observables) j["observables"][k] = std::isfinite(v) ? json(v) : json(nullptr);
  j["notes"] = r.notes;
  j["artifacts"] = r.artifacts;
  j["wall_clock_s"] = r.wall_clock_s;
  j["config"] = serialize(r.config);
  return j.dump(2) + "\n";
}

}  // namespace

Report run(const ExperimentConfig& config, const std::string& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  Report report;
  report.config = config;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::Config, "cannot create output directory " + out_dir + ": " + ec.message());
  try {
    Runner(config, out_dir, report).run();
  } catch (const Error& e) {
    report.status = e.code() == ErrorCode::HypothesisViolation ? "refused" : "error";
    report.error_code = std::string(to_string(e.code()));
    report.message = e.what();
  } catch (const std::exception& e) {
    report.status = "error";
    report.error_code = "internal";
    report.message = e.what();
  }
  report.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  detail::write_atomic((fs::path(out_dir) / "report.json").string(), report_json(report));
  return report;
}

}  // namespace conoflow
