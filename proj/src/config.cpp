#include "satflow/config.hpp"

#include <cmath>
#include <set>

namespace satflow {

using nlohmann::json;

namespace {

std::string describe(const json& j) {
  switch (j.type()) {
    case json::value_t::null:
      return "null";
    case json::value_t::boolean:
      return "boolean";
    case json::value_t::string:
      return "string";
    case json::value_t::array:
      return "array";
    case json::value_t::object:
      return "object";
    default:
      return "number";
  }
}

/// Typed access to one JSON object with path-aware errors.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object, got " + describe(j_));
  }

  void allow(std::initializer_list<const char*> keys) const {
    const std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [key, value] : j_.items()) {
      if (!ok.count(key)) throw ConfigError(path_ + "/" + key, "unknown key");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  std::string at(const char* key) const { return path_ + "/" + key; }
  const json& raw(const char* key) const { return j_.at(key); }

  Node object(const char* key) const { return Node(j_.at(key), at(key)); }

  double number(const char* key) const {
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(at(key), "expected a number, got " + describe(v));
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(at(key), "expected a finite number");
    return x;
  }
  double positive(const char* key) const {
    const double x = number(key);
    if (!(x > 0.0)) throw ConfigError(at(key), "must be positive");
    return x;
  }
  int natural(const char* key) const {
    const json& v = j_.at(key);
    if (!v.is_number() || !(v.is_number_integer() || std::floor(v.get<double>()) == v.get<double>()) ||
        v.get<double>() < 0.0) {
      throw ConfigError(at(key), "must be a natural number");
    }
    return static_cast<int>(v.get<double>());
  }
  std::string string(const char* key) const {
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(at(key), "expected a string, got " + describe(v));
    return v.get<std::string>();
  }
  bool boolean(const char* key) const {
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError(at(key), "expected a boolean, got " + describe(v));
    return v.get<bool>();
  }
  std::vector<double> numbers(const char* key) const {
    const json& v = j_.at(key);
    std::vector<double> out;
    if (v.is_number()) {
      out.push_back(v.get<double>());
      return out;
    }
    if (!v.is_array() || v.empty()) throw ConfigError(at(key), "expected a number or a non-empty array of numbers");
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(at(key) + "/" + std::to_string(i), "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }

 private:
  const json& j_;
  std::string path_;
};

template <typename F>
auto guarded(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(path, e.what());
  }
}

DomainSpec parse_domain(const Node& node) {
  node.allow({"name", "params"});
  DomainSpec d;
  d.name = node.string("name");
  const json empty = json::object();
  const Node params = node.has("params") ? node.object("params") : Node(empty, node.at("params"));
  if (d.name == "interval") {
    params.allow({"a", "b"});
    d = DomainSpec::interval(params.number("a"), params.number("b"));
  } else if (d.name == "box") {
    params.allow({"lower", "upper"});
    d = DomainSpec::box(params.numbers("lower"), params.numbers("upper"));
    if (d.lower.size() != d.upper.size()) throw ConfigError(params.at("upper"), "must have the length of lower");
  } else if (d.name == "ball") {
    params.allow({"center", "radius"});
    d = DomainSpec::ball(params.numbers("center"), params.positive("radius"));
  } else if (d.name == "peanut") {
    params.allow({"a", "r"});
    d = DomainSpec::peanut(params.has("a") ? params.number("a") : 3.9, params.has("r") ? params.positive("r") : 4.0);
  } else {
    throw ConfigError(node.at("name"), "unknown domain '" + d.name + "' (expected interval, box, ball or peanut)");
  }
  guarded(node.at("name"), [&] { return d.build(); });
  return d;
}

ModelSpec parse_model(const Node& node, ModelSpec m) {
  node.allow({"mobility", "alpha", "entropy", "confinement", "kernel"});
  if (node.has("mobility")) m.mobility = node.string("mobility");
  if (node.has("alpha")) m.alpha = node.positive("alpha");
  if (m.mobility == "linear") m.alpha = kNoSaturation;
  if (node.has("entropy")) {
    const Node e = node.object("entropy");
    e.allow({"kind", "parameter"});
    m.entropy = e.string("kind");
    if (e.has("parameter")) m.entropy_parameter = e.number("parameter");
  }
  if (node.has("confinement")) {
    const Node c = node.object("confinement");
    c.allow({"kind", "strength", "radius"});
    m.confinement = c.string("kind");
    if (c.has("strength")) m.confinement_strength = c.number("strength");
    if (c.has("radius")) m.confinement_radius = c.positive("radius");
  }
  if (node.has("kernel")) {
    const Node k = node.object("kernel");
    k.allow({"kind", "amplitude", "width"});
    m.kernel = k.string("kind");
    if (k.has("amplitude")) m.kernel_amplitude = k.number("amplitude");
    if (k.has("width")) m.kernel_width = k.positive("width");
  }
  guarded(node.at("mobility").substr(0, node.at("mobility").rfind('/')), [&] { return m.build(); });
  return m;
}

InitialCondition parse_initial(const Node& node, int dimension) {
  const std::string kind = node.string("kind");
  if (kind == "constant") {
    node.allow({"kind", "value"});
    return InitialCondition::constant(node.number("value"));
  }
  if (kind == "barenblatt") {
    node.allow({"kind", "m", "mass", "t0"});
    BarenblattParams p;
    if (node.has("m")) p.m = node.number("m");
    if (node.has("mass")) p.mass = node.number("mass");
    if (node.has("t0")) p.t0 = node.number("t0");
    p.dimension = dimension;
    guarded(node.at("kind"), [&] { return Barenblatt(p).constant(); });
    return InitialCondition::from_barenblatt(p);
  }
  throw ConfigError(node.at("kind"), "unknown initial datum '" + kind + "' (expected constant or barenblatt)");
}

SchemeOptions parse_options(const Node& node, SchemeOptions o) {
  node.allow({"midpoint", "newton_tol", "max_iters", "picard_max_iters", "max_halvings"});
  if (node.has("midpoint")) {
    o.midpoint = guarded(node.at("midpoint"), [&] { return parse_midpoint_rule(node.string("midpoint")); });
  }
  if (node.has("newton_tol")) o.newton_tol = node.positive("newton_tol");
  if (node.has("max_iters")) o.newton_max_iters = node.natural("max_iters");
  if (node.has("picard_max_iters")) o.picard_max_iters = node.natural("picard_max_iters");
  if (node.has("max_halvings")) o.max_halvings = node.natural("max_halvings");
  guarded(node.at("max_iters").substr(0, node.at("max_iters").rfind('/')), [&] {
    o.validate();
    return 0;
  });
  return o;
}

}  // namespace

json parse_config_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", "malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

ExperimentSpec parse_config(const json& config) {
  const Node root(config, "");
  root.allow({"preset", "domain", "model", "h", "p", "tau_factor", "T", "initial", "options", "estimator",
              "output_dir", "snapshot_every", "checks", "max_retries", "seed"});

  ExperimentSpec spec;
  if (root.has("preset")) {
    const std::string name = root.string("preset");
    spec = guarded(root.at("preset"), [&] { return experiment_preset(name); });
  } else {
    for (const char* key : {"domain", "model", "h", "T"}) {
      if (!root.has(key)) throw ConfigError(root.at(key), "required when no preset is given");
    }
    spec.name = "custom";
  }

  if (root.has("domain")) spec.domain = parse_domain(root.object("domain"));
  if (root.has("model")) spec.model = parse_model(root.object("model"), root.has("preset") ? spec.model : ModelSpec{});
  if (root.has("h")) {
    spec.spacings = root.numbers("h");
    for (std::size_t i = 0; i < spec.spacings.size(); ++i) {
      if (!(spec.spacings[i] > 0.0)) throw ConfigError(root.at("h") + "/" + std::to_string(i), "must be positive");
    }
  }
  if (root.has("p")) spec.tau_exponent = root.natural("p");
  if (root.has("tau_factor")) spec.tau_factor = root.positive("tau_factor");
  if (root.has("T")) spec.final_time = root.positive("T");
  const int dimension = guarded(root.at("domain"), [&] { return spec.domain.dimension(); });
  if (root.has("initial")) {
    spec.initial = parse_initial(root.object("initial"), dimension);
  } else if (spec.initial.kind == InitialCondition::Kind::Barenblatt) {
    spec.initial.barenblatt.dimension = dimension;
  }
  if (root.has("options")) spec.options = parse_options(root.object("options"), spec.options);
  if (root.has("estimator")) {
    spec.estimator = guarded(root.at("estimator"), [&] { return parse_estimator(root.string("estimator")); });
  }
  if (root.has("output_dir")) spec.output_dir = root.string("output_dir");
  if (root.has("snapshot_every")) spec.snapshot_every = root.natural("snapshot_every");
  if (root.has("max_retries")) spec.max_retries = root.natural("max_retries");
  if (root.has("checks")) {
    const Node c = root.object("checks");
    c.allow({"envelope", "lambda_entropy"});
    if (c.has("envelope")) spec.check_envelope = c.boolean("envelope");
    if (c.has("lambda_entropy")) spec.track_lambda_entropy = c.boolean("lambda_entropy");
  }
  if (root.has("seed")) root.natural("seed");

  guarded("", [&] {
    spec.validate();
    return 0;
  });
  return spec;
}

json to_json(const ExperimentSpec& spec) {
  json d{{"name", spec.domain.name}};
  if (spec.domain.name == "interval") {
    d["params"] = {{"a", spec.domain.lower.at(0)}, {"b", spec.domain.upper.at(0)}};
  } else if (spec.domain.name == "box") {
    d["params"] = {{"lower", spec.domain.lower}, {"upper", spec.domain.upper}};
  } else if (spec.domain.name == "ball") {
    d["params"] = {{"center", spec.domain.center}, {"radius", spec.domain.radius}};
  } else {
    d["params"] = {{"a", spec.domain.peanut_a}, {"r", spec.domain.peanut_r}};
  }
  const ModelSpec& m = spec.model;
  json model{{"mobility", m.mobility},
             {"entropy", {{"kind", m.entropy}, {"parameter", m.entropy_parameter}}},
             {"confinement", {{"kind", m.confinement}, {"strength", m.confinement_strength}, {"radius", m.confinement_radius}}},
             {"kernel", {{"kind", m.kernel}, {"amplitude", m.kernel_amplitude}, {"width", m.kernel_width}}}};
  if (std::isfinite(m.alpha)) model["alpha"] = m.alpha;
  json initial;
  switch (spec.initial.kind) {
    case InitialCondition::Kind::Constant:
      initial = {{"kind", "constant"}, {"value", spec.initial.value}};
      break;
    case InitialCondition::Kind::Barenblatt:
      initial = {{"kind", "barenblatt"},
                 {"m", spec.initial.barenblatt.m},
                 {"mass", spec.initial.barenblatt.mass},
                 {"t0", spec.initial.barenblatt.t0}};
      break;
    case InitialCondition::Kind::Custom:
      initial = {{"kind", "custom"}};
      break;
  }
  return json{{"preset", spec.name},
              {"domain", d},
              {"model", model},
              {"h", spec.spacings},
              {"p", spec.tau_exponent},
              {"tau_factor", spec.tau_factor},
              {"T", spec.final_time},
              {"initial", initial},
              {"options",
               {{"midpoint", to_string(spec.options.midpoint)},
                {"newton_tol", spec.options.newton_tol},
                {"max_iters", spec.options.newton_max_iters},
                {"picard_max_iters", spec.options.picard_max_iters},
                {"max_halvings", spec.options.max_halvings}}},
              {"estimator", to_string(spec.estimator)},
              {"output_dir", spec.output_dir.string()},
              {"snapshot_every", spec.snapshot_every},
              {"checks", {{"envelope", spec.check_envelope}, {"lambda_entropy", spec.track_lambda_entropy}}},
              {"max_retries", spec.max_retries}};
}

}  // namespace satflow
