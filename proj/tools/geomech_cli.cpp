// geomech: command-line front end.
//
//   geomech simulate --spec damped.json --field hamiltonian --t0 0 --t1 10 --step 1e-3 --out traj.csv
//   geomech classify --spec sys.json --point "0,0,1" [--vectors "1,0,0;0,1,0"]
//   geomech reduce   --spec sphere.json --point "1,0,0,0"
//   geomech herglotz --spec lagrangian.json --path path.csv [--c 0]
//   geomech verify   --suite all --seed 42 --out report.json [--threads 4]
//
// Exit status: 0 success, 1 domain error (JSON object on stderr), 2 usage error.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "geomech/dynamics.hpp"
#include "geomech/error.hpp"
#include "geomech/lagrangian.hpp"
#include "geomech/reduction.hpp"
#include "json.hpp"
#include "verify_suite.hpp"

using json = nlohmann::ordered_json;
using namespace geomech;

namespace {

constexpr const char* kSchemaVersion = "1";

std::string schema_tag(const std::string& name) { return "geomech." + name + "/" + kSchemaVersion; }

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Error invalid_spec(const std::string& message) { return Error("InvalidSpec", message); }

// ------------------------------------------------------------------ system specification

struct SystemSpec {
  Kind kind = Kind::Symplectic;
  int n = 1;
  std::optional<Expression> hamiltonian;
  std::optional<Expression> lagrangian;
  Binding params;
  std::vector<Expression> constraints;
  std::optional<ShsCoefficients> shs;
  Binding initial;
};

std::vector<std::string> lagrangian_names(int n) {
  std::vector<std::string> names;
  for (int i = 1; i <= n; ++i) names.push_back("q" + std::to_string(i));
  for (int i = 1; i <= n; ++i) names.push_back("qdot" + std::to_string(i));
  names.insert(names.end(), {"z", "t"});
  return names;
}

Expression parse_field(const json& j, const std::string& what) {
  if (!j.is_string()) throw invalid_spec(what + " must be an expression string");
  return parse(j.get<std::string>());
}

void require_names(const Expression& e, const std::vector<std::string>& coords, const Binding& params,
                   const std::string& what) {
  for (const std::string& name : free_names(e)) {
    if (params.contains(name) || std::find(coords.begin(), coords.end(), name) != coords.end()) continue;
    throw invalid_spec(what + " uses unknown name '" + name + "'");
  }
}

SystemSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_spec("cannot read " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw invalid_spec(path + ": " + e.what());
  }
  if (!j.is_object()) throw invalid_spec("specification must be a JSON object");
  for (const char* key : {"geometry", "n"})
    if (!j.contains(key)) throw invalid_spec(std::string("missing field '") + key + "'");
  if (j.contains("hamiltonian") == j.contains("lagrangian"))
    throw invalid_spec("exactly one of 'hamiltonian' and 'lagrangian' is required");

  SystemSpec spec;
  if (!j["geometry"].is_string()) throw invalid_spec("'geometry' must be a string");
  spec.kind = kind_from_string(j["geometry"].get<std::string>());
  if (!j["n"].is_number_integer() || j["n"].get<int>() < 1) throw invalid_spec("'n' must be a positive integer");
  spec.n = j["n"].get<int>();

  if (j.contains("params")) {
    if (!j["params"].is_object()) throw invalid_spec("'params' must be an object");
    for (const auto& [name, value] : j["params"].items()) {
      if (!value.is_number()) throw invalid_spec("parameter '" + name + "' must be a number");
      spec.params[name] = value.get<double>();
    }
  }
  const std::vector<std::string> coords = coordinate_names(spec.kind, spec.n);
  const std::vector<std::string> lag_coords = lagrangian_names(spec.n);
  for (const auto& [name, value] : spec.params) {
    const bool clash = std::find(coords.begin(), coords.end(), name) != coords.end() ||
                       std::find(lag_coords.begin(), lag_coords.end(), name) != lag_coords.end();
    if (clash) throw invalid_spec("parameter '" + name + "' shadows a coordinate");
  }

  if (j.contains("hamiltonian")) {
    spec.hamiltonian = parse_field(j["hamiltonian"], "'hamiltonian'");
    require_names(*spec.hamiltonian, coords, spec.params, "'hamiltonian'");
  } else {
    spec.lagrangian = parse_field(j["lagrangian"], "'lagrangian'");
    require_names(*spec.lagrangian, lag_coords, spec.params, "'lagrangian'");
  }
  if (j.contains("constraints")) {
    if (!j["constraints"].is_array()) throw invalid_spec("'constraints' must be an array");
    for (const json& c : j["constraints"]) {
      spec.constraints.push_back(parse_field(c, "constraint"));
      require_names(spec.constraints.back(), coords, spec.params, "constraint");
    }
  }
  if (j.contains("shs")) {
    if (spec.kind != Kind::SHS) throw invalid_spec("'shs' is only allowed with geometry \"shs\"");
    const json& s = j["shs"];
    ShsCoefficients coeffs;
    for (const char* key : {"a", "b"}) {
      if (!s.contains(key) || !s[key].is_array() || static_cast<int>(s[key].size()) != spec.n)
        throw invalid_spec(std::string("'shs.") + key + "' must list n expressions");
      for (const json& e : s[key]) {
        (key[0] == 'a' ? coeffs.a : coeffs.b).push_back(parse_field(e, std::string("'shs.") + key + "'"));
        require_names((key[0] == 'a' ? coeffs.a : coeffs.b).back(), coords, spec.params, std::string("'shs.") + key + "'");
      }
    }
    spec.shs = std::move(coeffs);
  }
  if (j.contains("initial")) {
    if (!j["initial"].is_object()) throw invalid_spec("'initial' must be an object");
    for (const auto& [name, value] : j["initial"].items()) {
      if (!value.is_number()) throw invalid_spec("initial value of '" + name + "' must be a number");
      spec.initial[name] = value.get<double>();
    }
  }
  return spec;
}

const ShsCoefficients* shs_of(const SystemSpec& spec) { return spec.shs ? &*spec.shs : nullptr; }

PhaseSystem phase_system(const SystemSpec& spec) {
  if (!spec.hamiltonian) throw invalid_spec("this command needs a 'hamiltonian'");
  return PhaseSystem(spec.kind, spec.n, *spec.hamiltonian, spec.params, shs_of(spec));
}

ConstraintManifold manifold(const SystemSpec& spec) {
  ConstraintManifold m;
  m.kind = spec.kind;
  m.n = spec.n;
  m.constraints = spec.constraints;
  m.params = spec.params;
  if (spec.shs) m.shs = *spec.shs;
  return m;
}

// ------------------------------------------------------------------ argument helpers

std::vector<double> parse_numbers(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
    if (used == 0 || used != item.size()) throw UsageError(flag + ": '" + item + "' is not a number");
    out.push_back(value);
  }
  return out;
}

Vector chart_vector(const std::string& text, int dim, const std::string& flag) {
  const std::vector<double> values = parse_numbers(text, flag);
  if (static_cast<int>(values.size()) != dim)
    throw UsageError(flag + ": expected " + std::to_string(dim) + " comma-separated values, got " +
                     std::to_string(values.size()));
  return Eigen::Map<const Vector>(values.data(), dim);
}

Binding chart_binding(const std::vector<std::string>& names, const Vector& x, const Binding& params) {
  Binding b = params;
  for (std::size_t i = 0; i < names.size(); ++i) b[names[i]] = x(static_cast<Eigen::Index>(i));
  return b;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

void emit(const json& doc, const std::string& out) {
  const std::string text = doc.dump(2) + "\n";
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream file(out, std::ios::binary);
  if (!file) throw Error("OutputError", "cannot write " + out);
  file << text;
}

json report(const std::string& name, const std::vector<std::string>& command, json results) {
  json doc;
  doc["schema"] = schema_tag(name);
  doc["command"] = command;
  doc["results"] = std::move(results);
  return doc;
}

// ------------------------------------------------------------------ subcommands

struct SimulateArgs {
  std::string spec, field = "hamiltonian", x0, out;
  double t0 = 0.0, t1 = 1.0, step = 1e-3;
  bool adaptive = false;
};

int simulate(const SimulateArgs& a, const std::vector<std::string>& command) {
  const SystemSpec spec = load_spec(a.spec);
  const PhaseSystem sys = phase_system(spec);
  const FieldKind kind = field_kind_from_string(a.field);
  Vector x0;
  if (!a.x0.empty()) {
    x0 = chart_vector(a.x0, sys.dim(), "--x0");
  } else {
    x0.resize(sys.dim());
    for (int i = 0; i < sys.dim(); ++i) {
      const std::string& name = sys.coordinates()[static_cast<std::size_t>(i)];
      const auto it = spec.initial.find(name);
      if (it == spec.initial.end()) throw MissingCoordinate("no initial value for '" + name + "' (use --x0 or 'initial')");
      x0(i) = it->second;
    }
  }
  IntegrationOptions options;
  options.step = a.step;
  options.adaptive = a.adaptive;
  const Trajectory traj = integrate(sys, kind, x0, a.t0, a.t1, options);

  std::vector<std::string> columns{"t"};
  for (const std::string& name : sys.coordinates()) columns.push_back(name == "t" ? "tau" : name);
  columns.insert(columns.end(), {"H", "dHdt"});

  const bool as_json = a.out.size() >= 5 && a.out.ends_with(".json");
  if (as_json) {
    json rows = json::array();
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
      json row = json::array({traj.times[k]});
      for (Eigen::Index i = 0; i < traj.states[k].size(); ++i) row.push_back(traj.states[k](i));
      row.push_back(traj.energy[k]);
      row.push_back(traj.energy_rate[k]);
      rows.push_back(std::move(row));
    }
    json results;
    results["geometry"] = to_string(sys.kind());
    results["field"] = to_string(kind);
    results["columns"] = columns;
    results["rows"] = std::move(rows);
    emit(report("trajectory", command, std::move(results)), a.out);
  } else {
    std::ostringstream csv;
    for (std::size_t c = 0; c < columns.size(); ++c) csv << (c ? "," : "") << columns[c];
    csv << '\n';
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
      csv << format_double(traj.times[k]);
      for (Eigen::Index i = 0; i < traj.states[k].size(); ++i) csv << ',' << format_double(traj.states[k](i));
      csv << ',' << format_double(traj.energy[k]) << ',' << format_double(traj.energy_rate[k]) << '\n';
    }
    if (a.out.empty() || a.out == "-") {
      std::cout << csv.str();
      return 0;
    }
    std::ofstream file(a.out, std::ios::binary);
    if (!file) throw Error("OutputError", "cannot write " + a.out);
    file << csv.str();
  }
  return 0;
}

json classification_json(const ClassificationReport& r) {
  return {{"dim", r.dim},
          {"complement_dim", r.complement_dim},
          {"isotropic", r.isotropic},
          {"coisotropic", r.coisotropic},
          {"lagrangian", r.lagrangian},
          {"lagrangian_literal", r.lagrangian_literal},
          {"symplectic", r.symplectic_subspace},
          {"horizontal", r.horizontal},
          {"vertical", r.vertical},
          {"t_horizontal", r.t_horizontal},
          {"z_horizontal", r.z_horizontal},
          {"t_vertical", r.t_vertical},
          {"z_vertical", r.z_vertical}};
}

struct PointArgs {
  std::string spec, point, vectors, out;
};

int classify(const PointArgs& a, const std::vector<std::string>& command) {
  const SystemSpec spec = load_spec(a.spec);
  const std::vector<std::string> names = coordinate_names(spec.kind, spec.n);
  const int d = static_cast<int>(names.size());
  const Binding at = chart_binding(names, chart_vector(a.point, d, "--point"), spec.params);

  json results;
  results["geometry"] = to_string(spec.kind);
  results["point"] = vector_json(chart_vector(a.point, d, "--point"));
  Subspace delta;
  LinearGeometry g = LinearGeometry::standard(spec.kind, spec.n, at, shs_of(spec));
  if (!a.vectors.empty()) {
    std::vector<Vector> vs;
    std::stringstream ss(a.vectors);
    std::string item;
    while (std::getline(ss, item, ';')) vs.push_back(chart_vector(item, d, "--vectors"));
    delta = subspace_from_vectors(d, vs);
    results["source"] = "vectors";
  } else {
    if (spec.constraints.empty()) throw UsageError("--vectors is required when the specification has no constraints");
    const ConstraintManifold m = manifold(spec);
    g = geometry_at(m, at);
    delta = tangent_space_at(m, at);
    results["source"] = "constraints";
  }
  results["classification"] = classification_json(classify_subspace(g, delta));
  const Subspace perp = lambda_orthogonal(g, delta);
  results["subspace_basis"] = matrix_json(delta.basis());
  results["complement_basis"] = matrix_json(perp.basis());
  emit(report("classify", command, std::move(results)), a.out);
  return 0;
}

int reduce(const PointArgs& a, const std::vector<std::string>& command) {
  const SystemSpec spec = load_spec(a.spec);
  if (spec.constraints.empty()) throw invalid_spec("reduce needs 'constraints'");
  const std::vector<std::string> names = coordinate_names(spec.kind, spec.n);
  const Vector x = chart_vector(a.point, static_cast<int>(names.size()), "--point");
  const ConstraintManifold m = manifold(spec);
  const Binding at = chart_binding(names, x, spec.params);
  const ReductionReport r = linear_reduce(geometry_at(m, at), tangent_space_at(m, at));

  json results;
  results["geometry"] = to_string(spec.kind);
  results["point"] = vector_json(x);
  results["tangent_dim"] = r.tangent.dim();
  results["orthogonal_dim"] = r.orthogonal.dim();
  results["case"] = to_string(r.verticality_case);
  results["reduced_geometry"] = to_string(r.reduced_kind);
  results["quotient_dim"] = r.quotient.dim();
  results["expected_dim"] = r.expected_dim;
  results["classification"] = classification_json(r.classification);
  json checks = json::array();
  for (const Check& c : r.checks)
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"residual", finite_or_null(c.residual)}});
  results["checks"] = std::move(checks);
  results["passed"] = r.passed();
  json forms;
  forms["two_form"] = matrix_json(r.forms.two_form);
  forms["theta"] = vector_json(r.forms.theta);
  forms["eta"] = vector_json(r.forms.eta);
  forms["representatives"] = matrix_json(r.quotient.representatives);
  results["reduced_forms"] = std::move(forms);
  emit(report("reduction", command, std::move(results)), a.out);
  return 0;
}

struct HerglotzArgs {
  std::string spec, path, out;
  double c = 0.0;
  double tolerance = 1e-4;
  double gradient_tolerance = 1e-3;
};

PathGrid read_path(const std::string& file, int n) {
  std::ifstream in(file);
  if (!in) throw Error("InvalidPath", "cannot read " + file);
  std::string line;
  if (!std::getline(in, line)) throw Error("InvalidPath", file + " is empty");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  std::vector<std::string> expected{"t"};
  for (int i = 1; i <= n; ++i) expected.push_back("q" + std::to_string(i));
  if (header != expected) {
    std::string want;
    for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
    throw Error("InvalidPath", "path header must be " + want);
  }
  std::vector<double> times;
  std::vector<Vector> nodes;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<double> values;
    try {
      values = parse_numbers(line, "row " + std::to_string(row));
    } catch (const UsageError& e) {
      throw Error("InvalidPath", e.what());
    }
    if (static_cast<int>(values.size()) != n + 1) throw Error("InvalidPath", "row " + std::to_string(row) + " has the wrong width");
    times.push_back(values[0]);
    nodes.push_back(Eigen::Map<const Vector>(values.data() + 1, n));
  }
  if (times.size() < 2) throw Error("InvalidPath", "path needs at least two rows");
  const double a = times.front(), b = times.back();
  const double h = (b - a) / static_cast<double>(times.size() - 1);
  for (std::size_t k = 0; k < times.size(); ++k)
    if (std::abs(times[k] - (a + h * static_cast<double>(k))) > 1e-9 * std::max(1.0, std::abs(b - a)))
      throw Error("InvalidPath", "path times must be uniformly spaced");
  return PathGrid(a, b, std::move(nodes));
}

int herglotz(const HerglotzArgs& a, const std::vector<std::string>& command) {
  const SystemSpec spec = load_spec(a.spec);
  if (!spec.lagrangian) throw invalid_spec("herglotz needs a 'lagrangian'");
  const LagrangianSystem sys(spec.n, *spec.lagrangian, spec.params);
  PathGrid path = read_path(a.path, spec.n);
  path.set_initial_action(a.c);

  const ResidualSeries h = herglotz_residual(sys, path);
  const ResidualSeries el = euler_lagrange_residual(sys, path);
  const Matrix gradient = action_gradient(sys, path);
  const double gradient_max = gradient.size() ? gradient.cwiseAbs().maxCoeff() : 0.0;

  json series = json::array();
  for (std::size_t k = 0; k < h.times.size(); ++k)
    series.push_back({{"t", h.times[k]}, {"residual", vector_json(h.residual[k])}, {"z", h.z[k + 1]},
                      {"gradient", vector_json(gradient.row(static_cast<Eigen::Index>(k)).transpose())}});
  json results;
  results["nodes"] = path.size();
  results["step"] = path.step();
  results["initial_action"] = path.initial_action();
  results["action"] = finite_or_null(herglotz_action(sys, path));
  results["herglotz_max"] = finite_or_null(h.max());
  results["euler_lagrange_max"] = finite_or_null(el.max());
  results["gradient_max"] = finite_or_null(gradient_max);
  results["checks"] = json::array(
      {{{"name", "herglotz_residual"}, {"residual", finite_or_null(h.max())}, {"tolerance", a.tolerance},
        {"passed", h.max() <= a.tolerance}},
       {{"name", "action_criticality"}, {"residual", finite_or_null(gradient_max)}, {"tolerance", a.gradient_tolerance},
        {"passed", gradient_max <= a.gradient_tolerance}}});
  results["series"] = std::move(series);
  emit(report("herglotz", command, std::move(results)), a.out);
  return 0;
}

struct VerifyArgs {
  std::string suite = "all", out;
  std::uint64_t seed = 42;
  unsigned threads = 0;
  bool strict = false;
};

int run_verify(VerifyArgs a, const std::vector<std::string>& command) {
  if (const char* env = std::getenv("GEOMECH_SEED"); env && *env) {
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(env, &end, 0);
    if (errno != 0 || *end != '\0') throw UsageError(std::string("GEOMECH_SEED: '") + env + "' is not an unsigned integer");
    a.seed = v;
  }
  const auto checks = verify::select(a.suite);
  if (checks.empty()) throw UsageError("--suite: no checks match '" + a.suite + "'");
  const unsigned threads = a.threads ? a.threads : std::max(1u, std::thread::hardware_concurrency());
  const auto results = verify::run_checks(checks, a.seed, threads);

  int passed = 0, failed = 0, errors = 0;
  json entries = json::array();
  for (const auto& r : results) {
    json e;
    e["check_id"] = r.id;
    e["reference"] = r.reference;
    e["status"] = to_string(r.status);
    e["residual"] = finite_or_null(r.outcome.residual);
    e["tolerance"] = r.outcome.tolerance;
    e["bound"] = r.outcome.bound == verify::Bound::Upper ? "upper" : "lower";
    e["seed"] = r.seed;
    if (!r.outcome.detail.empty()) e["detail"] = r.outcome.detail;
    if (!r.error.empty()) e["error"] = r.error;
    entries.push_back(std::move(e));
    (r.status == verify::Status::Pass ? passed : r.status == verify::Status::Fail ? failed : errors)++;
  }
  json doc;
  doc["schema"] = schema_tag("verify");
  doc["command"] = command;
  doc["suite"] = a.suite;
  doc["seed"] = a.seed;
  doc["summary"] = {{"total", results.size()}, {"passed", passed}, {"failed", failed}, {"errors", errors}};
  doc["checks"] = std::move(entries);
  emit(doc, a.out);
  if (a.strict && passed != static_cast<int>(results.size()))
    throw Error("VerificationFailed", std::to_string(failed + errors) + " of " + std::to_string(results.size()) +
                                          " checks did not pass");
  return 0;
}

void print_error(const std::string& code, const std::string& message) {
  std::cerr << json{{"error", code}, {"message", message}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geometric mechanics toolkit"};
  app.require_subcommand(1);
  std::vector<std::string> command(argv + 1, argv + argc);

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Integrate a field of a Hamiltonian system");
  simulate_cmd->add_option("--spec", sim.spec, "System specification JSON")->required()->check(CLI::ExistingFile);
  simulate_cmd->add_option("--field", sim.field, "gradient | hamiltonian | evolution")
      ->check(CLI::IsMember({"gradient", "hamiltonian", "evolution"}));
  simulate_cmd->add_option("--t0", sim.t0, "Start time");
  simulate_cmd->add_option("--t1", sim.t1, "End time")->required();
  simulate_cmd->add_option("--step", sim.step, "Step (initial step when adaptive)");
  simulate_cmd->add_flag("--adaptive", sim.adaptive, "Dormand-Prince 5(4) with step control");
  simulate_cmd->add_option("--x0", sim.x0, "Initial state in chart order, comma-separated");
  simulate_cmd->add_option("--out", sim.out, "Output CSV (or .json); stdout when omitted");

  PointArgs cls;
  auto* classify_cmd = app.add_subcommand("classify", "Classify a subspace or constraint tangent space");
  classify_cmd->add_option("--spec", cls.spec, "System specification JSON")->required()->check(CLI::ExistingFile);
  classify_cmd->add_option("--point", cls.point, "Chart point, comma-separated")->required();
  classify_cmd->add_option("--vectors", cls.vectors, "Spanning vectors 'v;v;...'");
  classify_cmd->add_option("--out", cls.out, "Output JSON; stdout when omitted");

  PointArgs red;
  auto* reduce_cmd = app.add_subcommand("reduce", "Reduce the constraint tangent space at a point");
  reduce_cmd->add_option("--spec", red.spec, "System specification JSON")->required()->check(CLI::ExistingFile);
  reduce_cmd->add_option("--point", red.point, "Chart point, comma-separated")->required();
  reduce_cmd->add_option("--out", red.out, "Output JSON; stdout when omitted");

  HerglotzArgs her;
  auto* herglotz_cmd = app.add_subcommand("herglotz", "Herglotz residuals and action criticality of a path");
  herglotz_cmd->add_option("--spec", her.spec, "Lagrangian specification JSON")->required()->check(CLI::ExistingFile);
  herglotz_cmd->add_option("--path", her.path, "CSV with header t,q1,..,qn")->required()->check(CLI::ExistingFile);
  herglotz_cmd->add_option("--c", her.c, "Initial action z(a)");
  herglotz_cmd->add_option("--tol", her.tolerance, "Residual tolerance");
  herglotz_cmd->add_option("--gradient-tol", her.gradient_tolerance, "Action gradient tolerance");
  herglotz_cmd->add_option("--out", her.out, "Output JSON; stdout when omitted");

  VerifyArgs ver;
  auto* verify_cmd = app.add_subcommand("verify", "Run the verification matrix");
  verify_cmd->add_option("--suite", ver.suite, "all, a group such as 'reduction', or a check id");
  verify_cmd->add_option("--seed", ver.seed, "Base seed (GEOMECH_SEED overrides)");
  verify_cmd->add_option("--threads", ver.threads, "Worker cap (default: hardware threads)")->check(CLI::PositiveNumber);
  verify_cmd->add_flag("--strict", ver.strict, "Exit 1 unless every check passes");
  verify_cmd->add_option("--out", ver.out, "Output JSON; stdout when omitted");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*simulate_cmd) return simulate(sim, command);
    if (*classify_cmd) return classify(cls, command);
    if (*reduce_cmd) return reduce(red, command);
    if (*herglotz_cmd) return herglotz(her, command);
    if (*verify_cmd) return run_verify(ver, command);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    print_error(e.code(), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("InternalError", e.what());
    return 1;
  }
  return 2;
}
