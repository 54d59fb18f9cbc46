#include <gtest/gtest.h>

#include "satflow/config.hpp"

using namespace satflow;
using nlohmann::json;

namespace {

std::string error_path(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<accepted>";
}

json minimal_pme() {
  return json::parse(R"({
    "domain": {"name": "interval", "params": {"a": -3, "b": 3}},
    "model": {"mobility": "linear", "entropy": {"kind": "power", "parameter": 2}},
    "h": 0.2, "T": 0.04,
    "initial": {"kind": "barenblatt", "m": 2, "mass": 2, "t0": 1}
  })");
}

}  // namespace

TEST(Config, MinimalCustomExperiment) {
  const ExperimentSpec s = parse_config(minimal_pme());
  EXPECT_EQ(s.name, "custom");
  EXPECT_EQ(s.spacings, std::vector<double>{0.2});
  EXPECT_DOUBLE_EQ(s.final_time, 0.04);
  EXPECT_EQ(s.tau_exponent, 2);
  EXPECT_EQ(s.model.mobility, "linear");
  EXPECT_FALSE(std::isfinite(s.model.alpha));
  EXPECT_EQ(s.initial.kind, InitialCondition::Kind::Barenblatt);
  EXPECT_EQ(s.initial.barenblatt.dimension, 1);
}

TEST(Config, PresetIsOverriddenKeyByKey) {
  const ExperimentSpec s = parse_config(json::parse(R"({"preset": "barenblatt-1d", "h": [0.4, 0.2], "T": 0.16})"));
  EXPECT_EQ(s.name, "barenblatt-1d");
  EXPECT_EQ(s.spacings, (std::vector<double>{0.4, 0.2}));
  EXPECT_DOUBLE_EQ(s.final_time, 0.16);
  EXPECT_EQ(s.estimator, Estimator::Eps1);
  EXPECT_EQ(s.model.entropy, "power");
}

TEST(Config, NestedModelOverridesKeepPresetFields) {
  const ExperimentSpec s =
      parse_config(json::parse(R"({"preset": "steady-square", "model": {"kernel": {"kind": "gaussian", "amplitude": -1}}})"));
  EXPECT_EQ(s.model.kernel, "gaussian");
  EXPECT_EQ(s.model.confinement, "quadratic");
  EXPECT_EQ(s.model.mobility, "saturation");
}

TEST(Config, UnknownKeysReportTheirPath) {
  json j = minimal_pme();
  j["model"]["kernel"] = {{"kind", "gaussian"}, {"widht", 1.0}};
  EXPECT_EQ(error_path(j), "/model/kernel/widht");
  json top = minimal_pme();
  top["colour"] = "red";
  EXPECT_EQ(error_path(top), "/colour");
}

TEST(Config, TypeErrorsReportTheirPath) {
  json j = minimal_pme();
  j["T"] = "soon";
  EXPECT_EQ(error_path(j), "/T");
  j = minimal_pme();
  j["h"] = json::array({0.2, "x"});
  EXPECT_EQ(error_path(j), "/h/1");
  j = minimal_pme();
  j["h"] = -0.1;
  EXPECT_EQ(error_path(j), "/h/0");
}

TEST(Config, TimeExponentMustBeNatural) {
  for (const json& bad : {json(1.5), json(-1), json("2")}) {
    json j = minimal_pme();
    j["p"] = bad;
    EXPECT_EQ(error_path(j), "/p") << bad.dump();
  }
  json ok = minimal_pme();
  ok["p"] = 1;
  EXPECT_EQ(parse_config(ok).tau_exponent, 1);
}

TEST(Config, MissingRequiredKeysWithoutPreset) {
  json j = minimal_pme();
  j.erase("T");
  EXPECT_EQ(error_path(j), "/T");
}

TEST(Config, UnknownKindsAreConfigErrors) {
  json j = minimal_pme();
  j["domain"]["name"] = "torus";
  EXPECT_EQ(error_path(j), "/domain/name");
  j = minimal_pme();
  j["options"] = {{"midpoint", "O4"}};
  EXPECT_EQ(error_path(j), "/options/midpoint");
  j = minimal_pme();
  j["model"]["mobility"] = "cubic";
  EXPECT_NE(error_path(j), "<accepted>");
  j = minimal_pme();
  j["estimator"] = "eps3";
  EXPECT_EQ(error_path(j), "/estimator");
}

TEST(Config, Eps2NeedsAChain) {
  json j = minimal_pme();
  j["estimator"] = "eps2";
  EXPECT_THROW(parse_config(j), ConfigError);
  j["h"] = {0.2, 0.1};
  EXPECT_NO_THROW(parse_config(j));
}

TEST(Config, MalformedTextIsAConfigError) {
  try {
    parse_config_text("{\"h\": 0.1,, }");
    FAIL() << "accepted malformed JSON";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("byte"), std::string::npos);
  }
}

TEST(Config, ResolvedSpecRoundTrips) {
  for (const std::string& name : preset_names()) {
    const ExperimentSpec s = experiment_preset(name);
    json j = to_json(s);
    j.erase("initial");  // custom data cannot round-trip; presets re-supply it
    const ExperimentSpec back = parse_config(j);
    EXPECT_EQ(to_json(back).dump(), to_json(s).dump()) << name;
  }
}
