#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "conoflow/cli.hpp"

namespace conoflow {

namespace {

constexpr ExperimentKind kKinds[] = {ExperimentKind::Flow,        ExperimentKind::Glancing,
                                     ExperimentKind::Crossing,    ExperimentKind::ReflectScan,
                                     ExperimentKind::Invariance,  ExperimentKind::CurvatureCheck,
                                     ExperimentKind::Evolve};

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

// ---- flat key = value text ----

struct Value {
  enum class Type { Number, String, Bool, Array } type = Type::Number;
  double number = 0.0;
  std::string text;
  bool flag = false;
  std::vector<Value> items;
  int line = 0;
};

using Table = std::map<std::string, Value>;

bool is_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
}

class LineParser {
 public:
  LineParser(std::string_view s, int line, std::size_t offset)
      : s_(s), line_(line), offset_(offset) {}

  std::string where(std::size_t i) const {
    return "line " + std::to_string(line_) + ", column " + std::to_string(offset_ + i + 1);
  }

  void skip() {
    while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\t')) ++i_;
  }
  bool done() {
    skip();
    return i_ >= s_.size();
  }

  std::string key() {
    skip();
    const std::size_t start = i_;
    while (i_ < s_.size() && is_key_char(s_[i_])) ++i_;
    if (i_ == start) fail("expected a key");
    const std::string k(s_.substr(start, i_ - start));
    if (k.front() == '.' || k.back() == '.' || k.find("..") != std::string::npos)
      fail_at(start, "malformed key '" + k + "'");
    return k;
  }

  void expect(char c) {
    skip();
    if (i_ >= s_.size() || s_[i_] != c) fail(std::string("expected '") + c + "'");
    ++i_;
  }

  // Parses one value; inline tables are flattened into `out` under `prefix`.
  void value(const std::string& prefix, Table& out) {
    skip();
    if (i_ < s_.size() && s_[i_] == '{') {
      ++i_;
      if (done()) fail("unterminated inline table");
      if (s_[i_] == '}') {
        ++i_;
        return;
      }
      while (true) {
        const std::string k = key();
        expect('=');
        value(prefix + "." + k, out);
        skip();
        if (i_ < s_.size() && s_[i_] == ',') {
          ++i_;
          continue;
        }
        expect('}');
        return;
      }
    }
    Value v = scalar_or_array();
    if (out.count(prefix)) fail("duplicate key '" + prefix + "'");
    out.emplace(prefix, std::move(v));
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { fail_at(i_, msg); }
  [[noreturn]] void fail_at(std::size_t i, const std::string& msg) const {
    throw std::invalid_argument(where(i) + ": " + msg);
  }

  Value scalar_or_array() {
    skip();
    if (i_ >= s_.size()) fail("expected a value");
    Value v;
    v.line = line_;
    const char c = s_[i_];
    if (c == '[') {
      ++i_;
      v.type = Value::Type::Array;
      skip();
      if (i_ < s_.size() && s_[i_] == ']') {
        ++i_;
        return v;
      }
      while (true) {
        v.items.push_back(scalar_or_array());
        skip();
        if (i_ < s_.size() && s_[i_] == ',') {
          ++i_;
          continue;
        }
        expect(']');
        return v;
      }
    }
    if (c == '"') {
      ++i_;
      v.type = Value::Type::String;
      while (i_ < s_.size() && s_[i_] != '"') {
        if (s_[i_] == '\\' && i_ + 1 < s_.size()) {
          const char e = s_[++i_];
          v.text += e == 'n' ? '\n' : e == 't' ? '\t' : e;
        } else {
          v.text += s_[i_];
        }
        ++i_;
      }
      if (i_ >= s_.size()) fail("unterminated string");
      ++i_;
      return v;
    }
    const std::size_t start = i_;
    while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '.' ||
                              s_[i_] == '-' || s_[i_] == '+' || s_[i_] == '_'))
      ++i_;
    const std::string_view token = s_.substr(start, i_ - start);
    if (token == "true" || token == "false") {
      v.type = Value::Type::Bool;
      v.flag = token == "true";
      return v;
    }
    std::string_view digits = token;
    if (!digits.empty() && digits.front() == '+') digits.remove_prefix(1);
    const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v.number);
    if (token.empty() || ec != std::errc() || end != digits.data() + digits.size() ||
        !std::isfinite(v.number))
      fail_at(start, "cannot read value '" + std::string(token) + "'");
    return v;
  }

  std::string_view s_;
  int line_;
  std::size_t offset_;
  std::size_t i_ = 0;
};

// Strips a trailing comment, leaving '#' inside strings alone.
std::string_view strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

Table parse_text(std::string_view text) {
  Table table;
  std::vector<std::string> errors;
  std::string section;
  int number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = strip_comment(text.substr(pos, eol - pos));
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++number;
    pos = eol + 1;
    LineParser p(line, number, 0);
    if (p.done()) continue;
    try {
      const std::size_t first = line.find_first_not_of(" \t");
      if (line[first] == '[') {
        LineParser h(line.substr(first + 1), number, first + 1);
        section = h.key();
        h.expect(']');
        if (!h.done()) throw std::invalid_argument(h.where(0) + ": trailing text after section");
        continue;
      }
      const std::string k = p.key();
      p.expect('=');
      p.value(section.empty() ? k : section + "." + k, table);
      if (!p.done()) throw std::invalid_argument(p.where(0) + ": trailing text after value");
    } catch (const std::invalid_argument& e) {
      errors.push_back(e.what());
    }
  }
  if (!errors.empty()) throw ConfigError(ErrorCode::Parse, errors);
  return table;
}

// ---- schema ----

class Reader {
 public:
  explicit Reader(Table t) : table_(std::move(t)) {}

  std::vector<std::string> violations;

  bool has(const std::string& key) const { return table_.count(key) > 0; }
  void bad(const std::string& key, const std::string& msg) {
    violations.push_back(key + ": " + msg);
  }

  std::optional<double> number(const std::string& key) {
    const Value* v = take(key);
    if (!v) return std::nullopt;
    if (v->type != Value::Type::Number) {
      bad(key, "expected a number");
      return std::nullopt;
    }
    return v->number;
  }
  double number(const std::string& key, double fallback) { return number(key).value_or(fallback); }

  std::optional<long long> integer(const std::string& key) {
    const auto x = number(key);
    if (!x) return std::nullopt;
    if (*x != std::floor(*x) || std::abs(*x) > 9e15) {
      bad(key, "expected an integer");
      return std::nullopt;
    }
    return static_cast<long long>(*x);
  }

  std::optional<std::string> string(const std::string& key) {
    const Value* v = take(key);
    if (!v) return std::nullopt;
    if (v->type != Value::Type::String) {
      bad(key, "expected a quoted string");
      return std::nullopt;
    }
    return v->text;
  }

  std::optional<std::vector<double>> numbers(const std::string& key) {
    const Value* v = take(key);
    if (!v) return std::nullopt;
    std::vector<double> out;
    bool ok = v->type == Value::Type::Array;
    if (ok)
      for (const Value& item : v->items) {
        if (item.type != Value::Type::Number) ok = false;
        out.push_back(item.number);
      }
    if (!ok) {
      bad(key, "expected an array of numbers");
      return std::nullopt;
    }
    return out;
  }

  std::optional<Interval> interval(const std::string& key) {
    const auto xs = numbers(key);
    if (!xs) return std::nullopt;
    if (xs->size() != 2 || !((*xs)[0] < (*xs)[1])) {
      bad(key, "expected [lo, hi] with lo < hi");
      return std::nullopt;
    }
    return Interval{(*xs)[0], (*xs)[1]};
  }

  void unknown_keys() {
    for (const auto& [key, v] : table_)
      if (!used_.count(key)) bad(key, "unknown key (line " + std::to_string(v.line) + ")");
  }

 private:
  const Value* take(const std::string& key) {
    const auto it = table_.find(key);
    if (it == table_.end()) return nullptr;
    used_.insert(key);
    return &it->second;
  }

  Table table_;
  std::set<std::string> used_;
};

void require_positive(Reader& r, const std::string& key, double value) {
  if (!(value > 0.0)) r.bad(key, "must be positive");
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Flow: return "flow";
    case ExperimentKind::Glancing: return "glancing";
    case ExperimentKind::Crossing: return "crossing";
    case ExperimentKind::ReflectScan: return "reflect-scan";
    case ExperimentKind::Invariance: return "invariance";
    case ExperimentKind::CurvatureCheck: return "curvature-check";
    case ExperimentKind::Evolve: return "evolve";
  }
  return "unknown";
}

std::optional<ExperimentKind> parse_experiment_kind(std::string_view name) {
  for (ExperimentKind k : kKinds)
    if (to_string(k) == name) return k;
  return std::nullopt;
}

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (ExperimentKind k : kKinds) out.emplace_back(to_string(k));
    return out;
  }();
  return names;
}

MetricModel MetricSpec::build(int dimension) const {
  switch (kind) {
    case MetricKind::Power: return MetricModel::power(a, dimension);
    case MetricKind::Exp: return MetricModel::exponential(k, b, dimension);
    default: return MetricModel::flat(dimension);
  }
}

ConfigError::ConfigError(ErrorCode code, std::vector<std::string> violations)
    : Error(code, (code == ErrorCode::Parse ? "unparseable config:\n  " : "invalid config:\n  ") +
                      [&] {
                        std::string s;
                        for (const auto& v : violations) s += (s.empty() ? "" : "\n  ") + v;
                        return s;
                      }()),
      violations_(std::move(violations)) {}

ExperimentConfig validate(std::string_view text, std::optional<ExperimentKind> kind) {
  Reader r(parse_text(text));
  ExperimentConfig c;

  const auto kind_text = r.string("kind");
  if (kind_text) {
    const auto parsed = parse_experiment_kind(*kind_text);
    if (!parsed)
      r.bad("kind", "unknown kind '" + *kind_text + "'; expected one of " + join(experiment_kinds()));
    else if (kind && *kind != *parsed)
      r.bad("kind", "config says '" + *kind_text + "' but the subcommand is '" +
                        std::string(to_string(*kind)) + "'");
    else
      c.kind = *parsed;
  } else if (kind) {
    c.kind = *kind;
  } else if (!r.has("kind")) {
    r.bad("kind", "required; expected one of " + join(experiment_kinds()));
  }
  const ExperimentKind K = c.kind;

  c.T = r.number("T");
  if (c.T && !std::isfinite(*c.T)) r.bad("T", "must be finite");

  // potential
  bool y_dependent = false;
  if (const auto s = r.string("potential.smooth")) {
    try {
      c.smooth.kind = parse_smooth_kind(*s);
    } catch (const Error& e) {
      r.bad("potential.smooth", e.what());
    }
  }
  {
    SmoothPart& s = c.smooth;
    const bool poly = s.kind == SmoothKind::Poly, cosy = s.kind == SmoothKind::CosY;
    const struct {
      const char* key;
      double* field;
      bool allowed;
    } coeffs[] = {{"v0", &s.v0, poly || cosy}, {"v1", &s.v1, poly || cosy},
                  {"v2", &s.v2, poly || cosy}, {"vy", &s.vy, poly},
                  {"vyy", &s.vyy, poly},       {"vxy", &s.vxy, poly},
                  {"a", &s.a, cosy},           {"k", &s.k, cosy}};
    for (const auto& co : coeffs) {
      const std::string key = std::string("potential.") + co.key;
      if (const auto v = r.number(key)) {
        if (!co.allowed && *v != 0.0)
          r.bad(key, "not a coefficient of smooth = \"" + std::string(to_string(s.kind)) + "\"");
        else
          *co.field = *v;
      }
    }
    y_dependent = s.vy != 0.0 || s.vyy != 0.0 || s.vxy != 0.0 || s.a != 0.0;
  }
  if (const auto s = r.string("potential.singular")) {
    try {
      c.singular.kind = parse_singular_kind(*s);
    } catch (const Error& e) {
      r.bad("potential.singular", e.what());
    }
  }
  {
    SingularPart& s = c.singular;
    const bool none = s.kind == SingularKind::None;
    s.c = r.number("potential.c", none ? 0.0 : 1.0);
    s.c1 = r.number("potential.c1", 0.0);
    s.c2 = r.number("potential.c2", 0.0);
    s.alpha = r.number("potential.alpha", 0.5);
    s.epsilon = r.number("potential.epsilon", 0.0);
    if (none && (s.c != 0.0 || s.c1 != 0.0 || s.c2 != 0.0))
      r.bad("potential.c", "coefficients need a singular part");
    if (s.kind == SingularKind::Power && !(s.alpha > 0.0 && s.alpha < 1.0))
      r.bad("potential.alpha", "must lie in (0, 1)");
    if (s.epsilon < 0.0) r.bad("potential.epsilon", "must be >= 0");
    if (none && s.epsilon > 0.0) r.bad("potential.epsilon", "nothing to mollify without a singular part");
    y_dependent = y_dependent || s.c1 != 0.0 || s.c2 != 0.0;
  }

  // metric
  if (const auto name = r.string("metric.name")) {
    if (*name == "flat") c.metric.kind = MetricKind::Flat;
    else if (*name == "power") c.metric.kind = MetricKind::Power;
    else if (*name == "exp") c.metric.kind = MetricKind::Exp;
    else r.bad("metric.name", "unknown metric '" + *name + "'; catalog: flat, power, exp");
  }
  c.metric.a = r.number("metric.a", 0.0);
  c.metric.k = r.number("metric.k", 0.0);
  c.metric.b = r.number("metric.b", 0.0);
  if (c.metric.kind == MetricKind::Flat && (c.metric.a != 0.0 || c.metric.k != 0.0 || c.metric.b != 0.0))
    r.bad("metric", "the flat metric takes no parameters");
  if (c.metric.kind == MetricKind::Power && (c.metric.k != 0.0 || c.metric.b != 0.0))
    r.bad("metric", "power(a) takes only a");
  if (c.metric.kind == MetricKind::Exp && c.metric.a != 0.0) r.bad("metric.a", "exp takes k and b");

  // rho0 and box
  const bool tangential_keys = r.has("rho0.y") || r.has("rho0.eta") || r.has("box.y") || r.has("box.eta");
  if (r.has("rho0.x") || r.has("rho0.xi") || r.has("rho0.y") || r.has("rho0.eta")) {
    PhasePoint p;
    const auto x = r.number("rho0.x"), xi = r.number("rho0.xi");
    if (!x) r.bad("rho0.x", "required when rho0 is given");
    if (!xi) r.bad("rho0.xi", "required when rho0 is given");
    p.x = x.value_or(0.0);
    p.xi = xi.value_or(0.0);
    p.y = r.number("rho0.y", 0.0);
    p.eta = r.number("rho0.eta", 0.0);
    c.rho0 = p;
  }
  if (r.has("box.x") || r.has("box.xi") || r.has("box.y") || r.has("box.eta")) {
    PhaseSpaceBox B;
    const auto x = r.interval("box.x"), xi = r.interval("box.xi");
    if (!x && !r.has("box.x")) r.bad("box.x", "required when box is given");
    if (!xi && !r.has("box.xi")) r.bad("box.xi", "required when box is given");
    B.x = x.value_or(Interval{});
    B.xi = xi.value_or(Interval{});
    B.y = r.interval("box.y").value_or(Interval{});
    B.eta = r.interval("box.eta").value_or(Interval{});
    c.box = B;
  }

  // dimension
  if (const auto d = r.integer("dimension")) {
    if (*d != 1 && *d != 2) r.bad("dimension", "must be 1 or 2");
    else c.dimension = static_cast<int>(*d);
  } else {
    c.dimension = (tangential_keys || y_dependent || c.metric.kind != MetricKind::Flat ||
                   K == ExperimentKind::CurvatureCheck)
                      ? 2
                      : 1;
  }
  if (c.dimension == 1) {
    if (c.rho0 && (c.rho0->y != 0.0 || c.rho0->eta != 0.0))
      r.bad("rho0", "y and eta must be 0 when dimension = 1");
    if (c.box && (c.box->y != Interval{} || c.box->eta != Interval{}))
      r.bad("box", "y and eta intervals need dimension = 2");
    if (y_dependent) r.bad("potential", "y-dependent potential needs dimension = 2");
  } else if (c.box && (!(c.box->y.lo < c.box->y.hi) || !(c.box->eta.lo < c.box->eta.hi))) {
    r.bad("box", "dimension = 2 needs box.y and box.eta");
  }

  // flow options
  FlowOptions& f = c.flow;
  const struct {
    const char* key;
    double* field;
  } opts[] = {{"flow.tol", &f.tol},
              {"flow.xi_min", &f.xi_min},
              {"flow.t_inner", &f.t_inner},
              {"flow.window", &f.window},
              {"flow.glancing_span", &f.glancing_span},
              {"flow.r1_threshold", &f.r1_threshold},
              {"flow.exit_band", &f.exit_band},
              {"flow.glancing_constant_limit", &f.glancing_constant_limit}};
  for (const auto& o : opts) {
    *o.field = r.number(o.key, *o.field);
    require_positive(r, o.key, *o.field);
  }
  if (const auto n = r.integer("flow.samples")) {
    if (*n < 2 || *n > 1000) r.bad("flow.samples", "must lie in [2, 1000]");
    else c.samples = static_cast<int>(*n);
  }
  c.x_exit = r.number("crossing.x_exit");
  if (const auto ts = r.numbers("glancing.t_list")) {
    c.t_list = *ts;
    if (ts->empty()) r.bad("glancing.t_list", "must not be empty");
    for (double t : *ts)
      if (!(t > 0.0)) r.bad("glancing.t_list", "entries must be positive");
  }

  // quantum
  QuantumSpec& q = c.quantum;
  q.h = r.number("quantum.h");
  if (q.h && !(*q.h > 0.0)) r.bad("quantum.h", "must be positive");
  if (const auto hs = r.numbers("quantum.h_list")) {
    q.h_list = *hs;
    for (std::size_t i = 0; i < hs->size(); ++i) {
      if (!((*hs)[i] > 0.0)) r.bad("quantum.h_list", "entries must be positive");
      if (i > 0 && !((*hs)[i] < (*hs)[i - 1])) {
        r.bad("quantum.h_list", "must be strictly decreasing");
        break;
      }
    }
  }
  q.sigma_factor = r.number("quantum.sigma_factor", q.sigma_factor);
  if (!(q.sigma_factor >= 0.25 && q.sigma_factor <= 4.0))
    r.bad("quantum.sigma_factor", "must lie in [0.25, 4]");
  q.extent = r.number("quantum.extent", q.extent);
  require_positive(r, "quantum.extent", q.extent);
  q.extent_y = r.number("quantum.extent_y", q.extent_y);
  require_positive(r, "quantum.extent_y", q.extent_y);
  for (auto [key, field] : {std::pair{"quantum.points", &q.points}, {"quantum.points_y", &q.points_y}}) {
    if (const auto n = r.integer(key)) {
      if (*n < 2 || !std::has_single_bit(static_cast<unsigned long long>(*n)))
        r.bad(key, "must be a power of two >= 2");
      else
        *field = static_cast<std::size_t>(*n);
    }
  }
  q.dt_factor = r.number("quantum.dt_factor", q.dt_factor);
  if (!(q.dt_factor > 0.0 && q.dt_factor <= 1.0)) r.bad("quantum.dt_factor", "must lie in (0, 1]");
  if (const auto n = r.integer("quantum.resolution")) {
    if (*n < 8 || *n > 256) r.bad("quantum.resolution", "must lie in [8, 256]");
    else q.resolution = static_cast<int>(*n);
  }
  if (const auto ts = r.numbers("quantum.times")) {
    q.times = *ts;
    for (std::size_t i = 0; i < ts->size(); ++i) {
      if (!((*ts)[i] >= 0.0)) r.bad("quantum.times", "entries must be >= 0");
      if (i > 0 && !((*ts)[i] > (*ts)[i - 1])) {
        r.bad("quantum.times", "must be strictly increasing");
        break;
      }
    }
  }

  if (const auto hyp = r.string("invariance.hypothesis")) {
    if (*hyp == "glancing") c.use_corollary = true;
    else if (*hyp != "transversal")
      r.bad("invariance.hypothesis", "expected \"transversal\" or \"glancing\"");
  }
  c.curvature_y = r.number("curvature.y", 0.0);
  if (const auto side = r.string("curvature.side")) {
    if (*side == "left") c.curvature_side = Side::Left;
    else if (*side != "right") r.bad("curvature.side", "expected \"right\" or \"left\"");
  }

  const bool quantum = K == ExperimentKind::ReflectScan || K == ExperimentKind::Invariance ||
                       K == ExperimentKind::Evolve;
  if (quantum && c.metric.kind != MetricKind::Flat)
    r.bad("metric.name", "wave experiments run on the flat metric only");

  // kind-specific requirements
  auto need = [&](bool ok, const std::string& key) {
    if (!ok) r.bad(key, "required for kind = " + std::string(to_string(K)));
  };
  switch (K) {
    case ExperimentKind::Flow:
    case ExperimentKind::Glancing:
      need(c.rho0.has_value() || r.has("rho0.x"), "rho0");
      need(c.T.has_value() || r.has("T"), "T");
      break;
    case ExperimentKind::Crossing:
      need(c.rho0.has_value() || r.has("rho0.x"), "rho0");
      if (c.rho0 && !c.x_exit)
        c.x_exit = c.rho0->x != 0.0 ? -c.rho0->x : (c.rho0->xi >= 0.0 ? 1.0 : -1.0) * f.exit_band;
      if (c.T && *c.T <= 0.0) r.bad("T", "the crossing time limit must be positive");
      break;
    case ExperimentKind::ReflectScan:
      need(c.rho0.has_value() || r.has("rho0.x"), "rho0");
      need(c.T.has_value() || r.has("T"), "T");
      need(!q.h_list.empty() || r.has("quantum.h_list"), "quantum.h_list");
      if (c.dimension != 1) r.bad("dimension", "reflect-scan runs in dimension 1");
      break;
    case ExperimentKind::Invariance:
      need(c.box.has_value() || r.has("box.x"), "box");
      need(c.T.has_value() || r.has("T"), "T");
      need(q.h.has_value() || r.has("quantum.h"), "quantum.h");
      if (c.box && !c.rho0) {
        const PhaseSpaceBox& B = *c.box;
        c.rho0 = PhasePoint{B.x.mid(), B.xi.mid(), c.dimension == 2 ? B.y.mid() : 0.0,
                            c.dimension == 2 ? B.eta.mid() : 0.0};
      }
      break;
    case ExperimentKind::CurvatureCheck:
      break;
    case ExperimentKind::Evolve:
      need(c.rho0.has_value() || r.has("rho0.x"), "rho0");
      need(q.h.has_value() || r.has("quantum.h"), "quantum.h");
      if (q.times.empty()) {
        if (c.T) q.times = {std::abs(*c.T)};
        else need(r.has("quantum.times"), "quantum.times or T");
      }
      break;
  }

  r.unknown_keys();
  if (!r.violations.empty()) throw ConfigError(ErrorCode::Config, r.violations);
  return c;
}

namespace {

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string list(const std::vector<double>& xs) {
  std::string s = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + num(xs[i]);
  return s + "]";
}

std::string quote(std::string_view s) { return "\"" + std::string(s) + "\""; }

}  // namespace

std::string serialize(const ExperimentConfig& c) {
  std::ostringstream o;
  o << "kind = " << quote(to_string(c.kind)) << "\n";
  o << "dimension = " << c.dimension << "\n";
  if (c.T) o << "T = " << num(*c.T) << "\n";

  const SmoothPart& s = c.smooth;
  o << "\n[potential]\nsmooth = " << quote(to_string(s.kind)) << "\n";
  if (s.kind != SmoothKind::Zero)
    o << "v0 = " << num(s.v0) << "\nv1 = " << num(s.v1) << "\nv2 = " << num(s.v2) << "\n";
  if (s.kind == SmoothKind::Poly)
    o << "vy = " << num(s.vy) << "\nvyy = " << num(s.vyy) << "\nvxy = " << num(s.vxy) << "\n";
  if (s.kind == SmoothKind::CosY) o << "a = " << num(s.a) << "\nk = " << num(s.k) << "\n";
  const SingularPart& g = c.singular;
  o << "singular = " << quote(to_string(g.kind)) << "\n";
  if (g.kind != SingularKind::None)
    o << "c = " << num(g.c) << "\nc1 = " << num(g.c1) << "\nc2 = " << num(g.c2)
      << "\nepsilon = " << num(g.epsilon) << "\n";
  o << "alpha = " << num(g.alpha) << "\n";

  o << "\n[metric]\n";
  switch (c.metric.kind) {
    case MetricKind::Power: o << "name = \"power\"\na = " << num(c.metric.a) << "\n"; break;
    case MetricKind::Exp:
      o << "name = \"exp\"\nk = " << num(c.metric.k) << "\nb = " << num(c.metric.b) << "\n";
      break;
    default: o << "name = \"flat\"\n"; break;
  }

  if (c.rho0) {
    o << "\n[rho0]\nx = " << num(c.rho0->x) << "\nxi = " << num(c.rho0->xi) << "\n";
    if (c.dimension == 2) o << "y = " << num(c.rho0->y) << "\neta = " << num(c.rho0->eta) << "\n";
  }
  if (c.box) {
    const PhaseSpaceBox& B = *c.box;
    o << "\n[box]\nx = " << list({B.x.lo, B.x.hi}) << "\nxi = " << list({B.xi.lo, B.xi.hi}) << "\n";
    if (c.dimension == 2)
      o << "y = " << list({B.y.lo, B.y.hi}) << "\neta = " << list({B.eta.lo, B.eta.hi}) << "\n";
  }

  const FlowOptions& f = c.flow;
  o << "\n[flow]\ntol = " << num(f.tol) << "\nxi_min = " << num(f.xi_min)
    << "\nt_inner = " << num(f.t_inner) << "\nwindow = " << num(f.window)
    << "\nglancing_span = " << num(f.glancing_span) << "\nr1_threshold = " << num(f.r1_threshold)
    << "\nexit_band = " << num(f.exit_band)
    << "\nglancing_constant_limit = " << num(f.glancing_constant_limit)
    << "\nsamples = " << c.samples << "\n";
  if (c.x_exit) o << "\n[crossing]\nx_exit = " << num(*c.x_exit) << "\n";
  o << "\n[glancing]\nt_list = " << list(c.t_list) << "\n";

  const QuantumSpec& q = c.quantum;
  o << "\n[quantum]\n";
  if (q.h) o << "h = " << num(*q.h) << "\n";
  if (!q.h_list.empty()) o << "h_list = " << list(q.h_list) << "\n";
  o << "sigma_factor = " << num(q.sigma_factor) << "\nextent = " << num(q.extent)
    << "\npoints = " << q.points << "\nextent_y = " << num(q.extent_y)
    << "\npoints_y = " << q.points_y << "\ndt_factor = " << num(q.dt_factor)
    << "\nresolution = " << q.resolution << "\n";
  if (!q.times.empty()) o << "times = " << list(q.times) << "\n";

  o << "\n[invariance]\nhypothesis = " << (c.use_corollary ? "\"glancing\"" : "\"transversal\"") << "\n";
  o << "\n[curvature]\ny = " << num(c.curvature_y)
    << "\nside = " << (c.curvature_side == Side::Left ? "\"left\"" : "\"right\"") << "\n";
  return o.str();
}

}  // namespace conoflow
