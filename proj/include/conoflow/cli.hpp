#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "conoflow/error.hpp"
#include "conoflow/flow.hpp"
#include "conoflow/geometry.hpp"
#include "conoflow/phase_space.hpp"
#include "conoflow/potentials.hpp"

namespace conoflow {

enum class ExperimentKind { Flow, Glancing, Crossing, ReflectScan, Invariance, CurvatureCheck, Evolve };

std::string_view to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_experiment_kind(std::string_view name);
const std::vector<std::string>& experiment_kinds();

struct MetricSpec {
  MetricKind kind = MetricKind::Flat;
  double a = 0.0;
  double k = 0.0;
  double b = 0.0;

  MetricModel build(int dimension) const;
  friend bool operator==(const MetricSpec&, const MetricSpec&) = default;
};

struct QuantumSpec {
  std::optional<double> h;
  std::vector<double> h_list;
  double sigma_factor = 1.0;
  double extent = 16.0;
  std::size_t points = 1u << 14;
  double extent_y = 8.0;
  std::size_t points_y = 256;
  double dt_factor = 0.05;
  int resolution = 8;
  /// Snapshot times for evolve.
  std::vector<double> times;

  friend bool operator==(const QuantumSpec&, const QuantumSpec&) = default;
};

/// A fully resolved experiment. See README.md for the text schema.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Flow;
  int dimension = 1;
  std::optional<double> T;
  SmoothPart smooth;
  SingularPart singular;
  MetricSpec metric;
  std::optional<PhasePoint> rho0;
  std::optional<PhaseSpaceBox> box;
  FlowOptions flow;
  /// Samples per phase-space axis for the transported box.
  int samples = 20;
  std::optional<double> x_exit;
  std::vector<double> t_list{1e-1, 1e-2, 1e-3, 1e-4};
  QuantumSpec quantum;
  bool use_corollary = false;
  double curvature_y = 0.0;
  Side curvature_side = Side::Right;

  ConormalPotential potential() const { return {smooth, singular}; }
  MetricModel metric_model() const { return metric.build(dimension); }

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Raised by validate(): code Parse for unreadable text, Config for schema
/// violations. violations() lists every problem found, each prefixed by its
/// field path or line.
class ConfigError : public Error {
 public:
  ConfigError(ErrorCode code, std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// Parses and checks config text, filling defaults. A subcommand may supply
/// the kind; it must then agree with any `kind` key in the text.
ExperimentConfig validate(std::string_view text,
                          std::optional<ExperimentKind> kind = std::nullopt);

/// Canonical text form; validate(serialize(c)) == c.
std::string serialize(const ExperimentConfig& config);

struct Report {
  ExperimentConfig config;
  /// "ok", "refused" (hypothesis violation) or "error".
  std::string status = "ok";
  std::string error_code;
  std::string message;
  std::map<std::string, double> observables;
  std::map<std::string, std::string> notes;
  std::vector<std::string> artifacts;
  double wall_clock_s = 0.0;

  /// 0 on success, 2 on a hypothesis refusal, 1 otherwise.
  int exit_code() const;
};

/// Runs the experiment, writing artifacts and report.json into out_dir.
/// Module errors are captured in the report rather than thrown.
Report run(const ExperimentConfig& config, const std::string& out_dir);

}  // namespace conoflow
