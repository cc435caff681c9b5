#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "memheat/error.hpp"
#include "memheat/kernel.hpp"
#include "memheat/scenario.hpp"

namespace memheat::scenario {

using nlohmann::json;

namespace {

// Reads one JSON object, remembering which keys were consumed.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  void read(const char* key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) fail(key, "expected a number");
      out = v->get<double>();
    }
  }
  void read(const char* key, std::size_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned()) fail(key, "expected a nonnegative integer");
      out = v->get<std::size_t>();
    }
  }
  void read(const char* key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) fail(key, "expected a string");
      out = v->get<std::string>();
    }
  }
  void read(const char* key, std::optional<double>& out) {
    if (const json* v = find(key)) {
      if (v->is_null()) {
        out.reset();
      } else if (v->is_number()) {
        out = v->get<double>();
      } else {
        fail(key, "expected a number or null");
      }
    }
  }
  void read(const char* key, std::vector<double>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) fail(key, "expected an array of numbers");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_number()) fail(key, "expected an array of numbers");
        out.push_back(e.get<double>());
      }
    }
  }
  void read(const char* key, std::vector<std::size_t>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) fail(key, "expected an array of integers");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_number_unsigned()) fail(key, "expected an array of nonnegative integers");
        out.push_back(e.get<std::size_t>());
      }
    }
  }

  /// Child object, or nullptr when absent.
  const json* child(const char* key) { return find(key); }
  std::string path(const char* key) const { return path_ + "." + key; }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.contains(item.key())) throw ConfigError("unknown key '" + path_ + "." + item.key() + "'");
    }
  }

  [[noreturn]] void fail(const char* key, const std::string& what) const {
    throw ConfigError(path_ + "." + key + ": " + what);
  }

 private:
  const json* find(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class F>
void section(Section& parent, const char* key, F&& body) {
  if (const json* v = parent.child(key)) {
    Section s(*v, parent.path(key));
    body(s);
    s.finish();
  }
}

void read_field(Section& s, FieldSpec& f) {
  s.read("kind", f.kind);
  s.read("mode", f.mode);
  s.read("power", f.power);
  s.read("scale", f.scale);
}

json field_json(const FieldSpec& f) {
  return {{"kind", f.kind}, {"mode", f.mode}, {"power", f.power}, {"scale", f.scale}};
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

void check_field(const FieldSpec& f, const DomainConfig& d, const char* name) {
  const std::string n = name;
  require(f.kind == "zero" || f.kind == "unit" || f.kind == "decay" || f.kind == "band",
          n + ".kind must be zero, unit, decay or band");
  require(f.kind == "zero" || f.kind == "decay" || (f.mode >= 1 && f.mode <= d.modes),
          n + ".mode must lie in 1..domain.modes");
}

void check(const ScenarioConfig& c) {
  for (const auto* text : {&c.kernels.K, &c.kernels.N}) {
    try {
      (void)parse_kernel(*text);
    } catch (const DomainError& e) {
      throw ConfigError("kernel '" + *text + "': " + e.what());
    }
  }
  require(c.domain.length > 0.0, "domain.length must be positive");
  require(c.domain.modes >= 2, "domain.modes must be at least 2");
  require(c.time.T > 0.0, "time.T must be positive");
  require(c.time.steps_per_unit >= 8, "time.steps_per_unit must be at least 8");
  require(c.time.stride >= 1, "time.stride must be at least 1");
  require(c.time.snapshot_points >= 2, "time.snapshot_points must be at least 2");
  check_field(c.initial, c.domain, "initial");
  check_field(c.target, c.domain, "target");
  require(c.forcing.kind == "none" || c.forcing.kind == "distributed" || c.forcing.kind == "boundary",
          "forcing.kind must be none, distributed or boundary");
  require(c.forcing.mode >= 1 && c.forcing.mode <= c.domain.modes, "forcing.mode must lie in 1..domain.modes");
  require(c.forcing.side == "left" || c.forcing.side == "right", "forcing.side must be left or right");
  require(c.geometry.kind == "distributed" || c.geometry.kind == "boundary",
          "geometry.kind must be distributed or boundary");
  require(c.geometry.side == "left" || c.geometry.side == "right", "geometry.side must be left or right");
  require(!c.basis.time_atoms.empty(), "basis.time_atoms must not be empty");
  for (std::size_t m : c.basis.time_atoms) require(m >= 1, "basis.time_atoms entries must be positive");
  require(c.basis.space_atoms >= 1, "basis.space_atoms must be positive");
  for (double m : c.obstruction.mu2) require(m > 0.0, "obstruction.mu2 entries must be positive");
  require(c.zset.t_lo > 0.0 && c.zset.t_hi > c.zset.t_lo, "zset needs 0 < t_lo < t_hi");
  require(c.zset.points >= 2, "zset.points must be at least 2");
  require(c.example_a2.eps > 0.0 && c.example_a2.eps < 0.25, "example_a2.eps must lie in (0, 1/4)");
  require(c.example_a2.steps >= 8, "example_a2.steps must be at least 8");
  require(c.tolerances.theta_A > 0.0 && c.tolerances.theta_A < std::numbers::pi / 2,
          "tolerances.theta_A must lie in (0, pi/2)");
  require(c.tolerances.rel_tol > 0.0, "tolerances.rel_tol must be positive");
  require(!c.tolerances.rho || *c.tolerances.rho >= 0.0, "tolerances.rho must be nonnegative");
  if (c.contour) {
    const auto& s = c.contour->t_scaling;
    require(s == "auto" || s == "always" || s == "never", "contour.t_scaling must be auto, always or never");
  }
  require(!c.output.empty(), "output must not be empty");
}

}  // namespace

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::Simulate: return "simulate";
    case Experiment::Verify: return "verify";
    case Experiment::Control: return "control";
    case Experiment::Obstruction: return "obstruction";
    case Experiment::ZSet: return "zset";
    case Experiment::ExampleA2: return "exampleA2";
    case Experiment::Validate: return "validate";
  }
  return "unknown";
}

Experiment parse_experiment(const std::string& name) {
  for (Experiment e : {Experiment::Simulate, Experiment::Verify, Experiment::Control, Experiment::Obstruction,
                       Experiment::ZSet, Experiment::ExampleA2, Experiment::Validate}) {
    if (to_string(e) == name) return e;
  }
  throw ConfigError("unknown experiment '" + name + "'");
}

SpectralField FieldSpec::build(const EigenBasis& basis) const {
  if (kind == "zero") return SpectralField(basis);
  if (kind == "unit") return scale * SpectralField::unit(basis, mode);
  const bool band = kind == "band";
  const double p = power;
  const double c = scale;
  const std::size_t cut = mode;
  return SpectralField::from_sequence(basis, [=](std::size_t n) {
    if (band && n > cut) return 0.0;
    return c * std::pow(static_cast<double>(n), -p);
  });
}

ControlGeometry GeometryConfig::build() const {
  if (kind == "boundary") return ControlGeometry::boundary(side == "left" ? BoundarySide::Left : BoundarySide::Right);
  return ControlGeometry::distributed(a, b);
}

ContourSpec ContourConfig::build(double theta) const {
  ContourSpec s;
  s.arc_radius = arc_radius;
  s.ray_angle = ray_angle.value_or(default_contour(theta).ray_angle);
  s.truncation = truncation;
  s.ray_nodes = ray_nodes;
  s.arc_nodes = arc_nodes;
  s.t_scaling = t_scaling == "always" ? TimeScaling::Always
                : t_scaling == "never" ? TimeScaling::Never
                                       : TimeScaling::Auto;
  return s;
}

ScenarioConfig from_json(const json& j) {
  ScenarioConfig c;
  Section root(j, "config");
  std::string experiment = to_string(c.experiment);
  root.read("experiment", experiment);
  c.experiment = parse_experiment(experiment);

  section(root, "kernels", [&](Section& s) {
    s.read("K", c.kernels.K);
    s.read("N", c.kernels.N);
  });
  section(root, "domain", [&](Section& s) {
    s.read("L", c.domain.length);
    s.read("modes", c.domain.modes);
  });
  section(root, "time", [&](Section& s) {
    s.read("T", c.time.T);
    s.read("steps_per_unit", c.time.steps_per_unit);
    s.read("stride", c.time.stride);
    s.read("snapshot_points", c.time.snapshot_points);
  });
  section(root, "initial", [&](Section& s) { read_field(s, c.initial); });
  section(root, "target", [&](Section& s) { read_field(s, c.target); });
  section(root, "forcing", [&](Section& s) {
    s.read("kind", c.forcing.kind);
    s.read("value", c.forcing.value);
    s.read("mode", c.forcing.mode);
    s.read("side", c.forcing.side);
  });
  section(root, "geometry", [&](Section& s) {
    s.read("kind", c.geometry.kind);
    s.read("a", c.geometry.a);
    s.read("b", c.geometry.b);
    s.read("side", c.geometry.side);
  });
  section(root, "basis", [&](Section& s) {
    s.read("time_atoms", c.basis.time_atoms);
    s.read("space_atoms", c.basis.space_atoms);
  });
  section(root, "obstruction", [&](Section& s) { s.read("mu2", c.obstruction.mu2); });
  section(root, "zset", [&](Section& s) {
    s.read("t_lo", c.zset.t_lo);
    s.read("t_hi", c.zset.t_hi);
    s.read("points", c.zset.points);
  });
  section(root, "example_a2", [&](Section& s) {
    s.read("eps", c.example_a2.eps);
    s.read("steps", c.example_a2.steps);
    s.read("extra_nodes", c.example_a2.extra_nodes);
    s.read("times", c.example_a2.times);
  });
  section(root, "tolerances", [&](Section& s) {
    s.read("theta_A", c.tolerances.theta_A);
    s.read("rel_tol", c.tolerances.rel_tol);
    s.read("convolution_tol", c.tolerances.convolution_tol);
    s.read("rho", c.tolerances.rho);
    s.read("psi_tol", c.tolerances.psi_tol);
    s.read("zero_tol", c.tolerances.zero_tol);
  });
  if (const json* v = root.child("contour"); v && !v->is_null()) {
    ContourConfig cc;
    Section s(*v, "config.contour");
    s.read("arc_radius", cc.arc_radius);
    s.read("ray_angle", cc.ray_angle);
    s.read("truncation", cc.truncation);
    s.read("ray_nodes", cc.ray_nodes);
    s.read("arc_nodes", cc.arc_nodes);
    s.read("t_scaling", cc.t_scaling);
    s.finish();
    c.contour = cc;
  }
  root.read("output", c.output);
  std::size_t seed = c.seed;
  root.read("seed", seed);
  c.seed = seed;
  root.finish();

  check(c);
  return c;
}

json to_json(const ScenarioConfig& c) {
  json j;
  j["experiment"] = to_string(c.experiment);
  j["kernels"] = {{"K", c.kernels.K}, {"N", c.kernels.N}};
  j["domain"] = {{"L", c.domain.length}, {"modes", c.domain.modes}};
  j["time"] = {{"T", c.time.T},
               {"steps_per_unit", c.time.steps_per_unit},
               {"stride", c.time.stride},
               {"snapshot_points", c.time.snapshot_points}};
  j["initial"] = field_json(c.initial);
  j["target"] = field_json(c.target);
  j["forcing"] = {{"kind", c.forcing.kind}, {"value", c.forcing.value}, {"mode", c.forcing.mode},
                  {"side", c.forcing.side}};
  j["geometry"] = {{"kind", c.geometry.kind}, {"a", c.geometry.a}, {"b", c.geometry.b}, {"side", c.geometry.side}};
  j["basis"] = {{"time_atoms", c.basis.time_atoms}, {"space_atoms", c.basis.space_atoms}};
  j["obstruction"] = {{"mu2", c.obstruction.mu2}};
  j["zset"] = {{"t_lo", c.zset.t_lo}, {"t_hi", c.zset.t_hi}, {"points", c.zset.points}};
  j["example_a2"] = {{"eps", c.example_a2.eps},
                     {"steps", c.example_a2.steps},
                     {"extra_nodes", c.example_a2.extra_nodes},
                     {"times", c.example_a2.times}};
  j["tolerances"] = {{"theta_A", c.tolerances.theta_A},     {"rel_tol", c.tolerances.rel_tol},
                     {"convolution_tol", c.tolerances.convolution_tol}, {"rho", optional_json(c.tolerances.rho)},
                     {"psi_tol", c.tolerances.psi_tol},     {"zero_tol", c.tolerances.zero_tol}};
  if (c.contour) {
    const auto& cc = *c.contour;
    j["contour"] = {{"arc_radius", cc.arc_radius}, {"ray_angle", optional_json(cc.ray_angle)},
                    {"truncation", cc.truncation}, {"ray_nodes", cc.ray_nodes},
                    {"arc_nodes", cc.arc_nodes},   {"t_scaling", cc.t_scaling}};
  }
  j["output"] = c.output;
  j["seed"] = c.seed;
  return j;
}

json read_config_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

ScenarioConfig load_config(const std::filesystem::path& path) { return from_json(read_config_json(path)); }

}  // namespace memheat::scenario
