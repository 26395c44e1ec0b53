#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "conoflow/cli.hpp"
#include "conoflow/quantum.hpp"

using namespace conoflow;
namespace fs = std::filesystem;

namespace {

const char* kKinkFlow = R"(
kind = "flow"
T = 0.9142135623730951
potential = { smooth = "poly", v0 = -2.0, singular = "kink", c = 1.0 }
[rho0]
x = -1.0
xi = 1.0
)";

std::vector<std::string> violations_of(std::string_view text) {
  try {
    validate(text);
  } catch (const ConfigError& e) {
    return e.violations();
  }
  FAIL("expected a config error");
  return {};
}

bool mentions(const std::vector<std::string>& vs, std::string_view what) {
  for (const auto& v : vs)
    if (v.find(what) != std::string::npos) return true;
  return false;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("conoflow_cli_test_" + name);
  fs::remove_all(dir);
  return dir;
}

// Last data row of a CSV as numbers (non-numeric cells become NaN).
std::vector<double> last_row(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, last;
  while (std::getline(in, line))
    if (!line.empty()) last = line;
  std::vector<double> out;
  std::istringstream cells(last);
  std::string cell;
  while (std::getline(cells, cell, ',')) {
    try {
      out.push_back(std::stod(cell));
    } catch (...) {
      out.push_back(NAN);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("minimal flow config gets defaults") {
  const ExperimentConfig c = validate(kKinkFlow);
  CHECK(c.kind == ExperimentKind::Flow);
  CHECK(c.dimension == 1);
  CHECK(c.flow.tol == 1e-8);
  CHECK(c.samples == 20);
  CHECK(c.singular.kind == SingularKind::Kink);
  CHECK(c.smooth.v0 == -2.0);
  REQUIRE(c.rho0);
  CHECK(c.rho0->x == -1.0);
  CHECK(c.metric.kind == MetricKind::Flat);
}

TEST_CASE("dimension is inferred from tangential content") {
  CHECK(validate("kind = \"flow\"\nT = 1\nrho0 = { x = 0.5, xi = 1, eta = 0.2 }").dimension == 2);
  CHECK(validate("kind = \"flow\"\nT = 1\nrho0 = { x = 0.5, xi = 1 }\nmetric = { name = \"power\", a = 1 }")
            .dimension == 2);
  CHECK(validate("kind = \"curvature-check\"").dimension == 2);
  CHECK(validate("kind = \"flow\"\nT = 1\ndimension = 2\nrho0 = { x = 0.5, xi = 1 }").dimension == 2);
}

TEST_CASE("every violation is listed") {
  const auto vs = violations_of(R"(
kind = "reflect-scan"
potential = { singular = "spike" }
metric = { name = "flat" }
flow = { tol = -1 }
[quantum]
h_list = [0.01, 0.02]
points = 1000
mystery = 3
)");
  CHECK(mentions(vs, "quantum.h_list: must be strictly decreasing"));
  CHECK(mentions(vs, "potential.singular: unknown singular part 'spike'; catalog: none, step, kink"));
  CHECK(mentions(vs, "flow.tol: must be positive"));
  CHECK(mentions(vs, "quantum.points: must be a power of two"));
  CHECK(mentions(vs, "quantum.mystery: unknown key (line 9)"));
  CHECK(mentions(vs, "rho0: required for kind = reflect-scan"));
  CHECK(mentions(vs, "T: required"));
  CHECK(vs.size() >= 7);
}

TEST_CASE("schema checks") {
  CHECK(mentions(violations_of("T = 1"), "kind: required"));
  CHECK(mentions(violations_of("kind = \"fly\""), "unknown kind 'fly'"));
  CHECK(mentions(violations_of("kind = \"flow\"\nT = \"long\"\nrho0 = { x = 1, xi = 1 }"),
                 "T: expected a number"));
  CHECK(mentions(violations_of("kind = \"invariance\"\nT = 1\nquantum = { h = 0.01 }\nbox = { x = [1, 0], xi = [0, 1] }"),
                 "box.x: expected [lo, hi]"));
  CHECK(mentions(violations_of("kind = \"flow\"\nT = 1\ndimension = 1\nrho0 = { x = 1, xi = 1, eta = 2 }"),
                 "rho0: y and eta must be 0"));
  CHECK(mentions(violations_of("kind = \"flow\"\nT = 1\nrho0 = { x = 1, xi = 1 }\npotential = { smooth = \"zero\", v0 = 1 }"),
                 "potential.v0: not a coefficient"));
  CHECK(mentions(violations_of("kind = \"evolve\"\nrho0 = { x = 1, xi = 1 }\nquantum = { h = 0.01 }\nmetric = { name = \"exp\", k = 1 }"),
                 "flat metric only"));
  try {
    validate(kKinkFlow, ExperimentKind::Glancing);
    FAIL("expected a kind mismatch");
  } catch (const ConfigError& e) {
    CHECK(mentions(e.violations(), "but the subcommand is 'glancing'"));
  }
  CHECK(validate("T = 1\nrho0 = { x = 1, xi = 1 }", ExperimentKind::Flow).kind == ExperimentKind::Flow);
}

TEST_CASE("syntax errors carry locations") {
  try {
    validate("kind = \"flow\"\nT = 1..5\nrho0 = { x = 1, xi = 1\n[flow\n");
    FAIL("expected a parse error");
  } catch (const ConfigError& e) {
    CHECK(e.code() == ErrorCode::Parse);
    REQUIRE(e.violations().size() == 3);
    CHECK(mentions(e.violations(), "line 2, column 5: cannot read value '1..5'"));
    CHECK(mentions(e.violations(), "line 3"));
    CHECK(mentions(e.violations(), "line 4"));
  }
  try {
    validate("kind = \"flow\"\nkind = \"flow\"");
    FAIL("expected a parse error");
  } catch (const ConfigError& e) {
    CHECK(mentions(e.violations(), "duplicate key 'kind'"));
  }
}

TEST_CASE("comments, sections and inline tables agree") {
  const ExperimentConfig a = validate(kKinkFlow);
  const ExperimentConfig b = validate(R"(
# same experiment, spelled with sections
kind = "flow"   # trailing comment
T = 0.9142135623730951
[potential]
smooth = "poly"
v0 = -2
singular = "kink"
[rho0]
x = -1
xi = +1
)");
  CHECK(a == b);
}

TEST_CASE("serialize round trip") {
  for (const auto& entry : fs::directory_iterator(CONOFLOW_CONFIG_DIR)) {
    CAPTURE(entry.path().string());
    const ExperimentConfig c = validate(slurp(entry.path()));
    CHECK(validate(serialize(c)) == c);
    CHECK(serialize(validate(serialize(c))) == serialize(c));
  }
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    ExperimentConfig c;
    c.kind = ExperimentKind::Flow;
    c.dimension = trial % 2 + 1;
    c.T = u(rng);
    c.smooth = SmoothPart::poly(u(rng), u(rng), u(rng));
    c.singular = SingularPart::power(u(rng), 0.1 + 0.8 * std::abs(u(rng)) / 3.0);
    c.singular.epsilon = std::abs(u(rng)) * 1e-3;
    c.rho0 = PhasePoint{u(rng), u(rng), c.dimension == 2 ? u(rng) : 0.0, c.dimension == 2 ? u(rng) : 0.0};
    c.flow.tol = std::pow(10.0, -3.0 - std::abs(u(rng)));
    c.quantum.h_list = {0.1, 0.05 + 1e-3 * u(rng)};
    c.quantum.times = {0.5, 1.0 + std::abs(u(rng))};
    c.t_list = {0.3, 1e-7 * (4.0 + u(rng))};
    if (trial % 3 == 0) c.metric = {MetricKind::Exp, 0.0, u(rng), u(rng)};
    if (c.metric.kind != MetricKind::Flat) c.dimension = 2;
    if (c.dimension == 1) c.rho0->y = c.rho0->eta = 0.0;
    c.use_corollary = trial % 4 == 0;
    c.curvature_side = trial % 5 == 0 ? Side::Left : Side::Right;
    CHECK(validate(serialize(c)) == c);
  }
}

TEST_CASE("run flow matches the closed-form endpoint") {
  const fs::path out = scratch("flow");
  const Report r = run(validate(kKinkFlow), out.string());
  CHECK(r.exit_code() == 0);
  REQUIRE(fs::exists(out / "trajectory.csv"));
  REQUIRE(fs::exists(out / "report.json"));
  const std::string csv = slurp(out / "trajectory.csv");
  CHECK(csv.rfind("t,x,xi,p_drift,regime\n", 0) == 0);
  const auto row = last_row(csv);
  CHECK(std::abs(row[1] - 1.164213562) < 1e-8);
  CHECK(std::abs(row[2] - 0.914213562) < 1e-8);
  CHECK(std::abs(row[3]) <= 1e-10);

  const auto report = nlohmann::json::parse(slurp(out / "report.json"));
  CHECK(report["status"] == "ok");
  CHECK(report["exit_code"] == 0);
  CHECK(validate(report["config"].get<std::string>()) == r.config);
  for (const auto& name : report["artifacts"]) CHECK(fs::exists(out / name.get<std::string>()));
  fs::remove_all(out);
}

TEST_CASE("run curvature-check on a flat metric") {
  const fs::path out = scratch("curv");
  const Report r = run(validate(R"(
kind = "curvature-check"
potential = { smooth = "poly", v0 = -1, v1 = 1 }
)"),
                       out.string());
  CHECK(r.exit_code() == 0);
  const auto j = nlohmann::json::parse(slurp(out / "curvature.json"));
  CHECK(j == nlohmann::json{{"condition", true}, {"vacuous", false}});
  fs::remove_all(out);
}

TEST_CASE("run reflect-scan with no potential") {
  const fs::path out = scratch("scan");
  const Report r = run(validate(R"(
kind = "reflect-scan"
T = 4
rho0 = { x = -3, xi = 1 }
quantum = { h_list = [0.02, 0.01], points = 4096 }
)"),
                       out.string());
  CHECK(r.exit_code() == 0);
  const std::string csv = slurp(out / "reflect_scan.csv");
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "h,reflected_mass,transmitted_mass,norm_drift");
  int rows = 0;
  while (std::getline(in, line)) {
    std::istringstream cells(line);
    std::string h, refl;
    std::getline(cells, h, ',');
    std::getline(cells, refl, ',');
    CHECK(std::stod(refl) <= 1e-6);
    ++rows;
  }
  CHECK(rows == 2);
  fs::remove_all(out);
}

TEST_CASE("per-row failures surface in the report") {
  const fs::path out = scratch("scanfail");
  // The packet at h = 0.02 needs a width the grid edge cannot clear.
  const Report r = run(validate(R"(
kind = "reflect-scan"
T = 0.5
rho0 = { x = -7.2, xi = 1 }
quantum = { h_list = [0.02, 0.001], points = 4096, sigma_factor = 4 }
)"),
                       out.string());
  CHECK(r.exit_code() == 1);
  CHECK(r.error_code == "config");
  CHECK(r.notes.count("h=0.02") == 1);
  CHECK(fs::exists(out / "reflect_scan.csv"));
  fs::remove_all(out);
}

TEST_CASE("invariance refuses without transversality") {
  const fs::path out = scratch("refuse");
  const Report r = run(validate(R"(
kind = "invariance"
T = 0.1
potential = { smooth = "poly", v0 = -2, singular = "kink" }
box = { x = [-0.1, 0.1], xi = [-0.1, 0.1] }
quantum = { h = 0.01, points = 2048 }
flow = { samples = 5 }
)"),
                       out.string());
  CHECK(r.status == "refused");
  CHECK(r.exit_code() == 2);
  CHECK(r.error_code == "hypothesis-violation");
  CHECK(r.observables.at("hypothesis_infimum") == 0.0);
  const auto report = nlohmann::json::parse(slurp(out / "report.json"));
  CHECK(report["exit_code"] == 2);
  fs::remove_all(out);
}

TEST_CASE("outputs are deterministic") {
  const char* text = R"(
kind = "evolve"
potential = { smooth = "poly", v0 = -2, singular = "kink" }
rho0 = { x = -1, xi = 1 }
quantum = { h = 0.02, points = 2048, times = [0.3, 0.6] }
)";
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const Report ra = run(validate(text), a.string());
  const Report rb = run(validate(text), b.string());
  REQUIRE(ra.exit_code() == 0);
  CHECK(ra.artifacts == rb.artifacts);
  for (const auto& name : ra.artifacts) CHECK(slurp(a / name) == slurp(b / name));
  const WaveState s = read_snapshot((a / "snapshot_001.bin").string());
  CHECK(s.t == 0.6);
  CHECK(s.h == 0.02);
  fs::remove_all(a);
  fs::remove_all(b);
}
