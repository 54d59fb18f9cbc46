#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "satflow/harness.hpp"

namespace satflow {

/// Invalid configuration document. `path()` is a JSON pointer to the offending value.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::invalid_argument((path.empty() ? std::string("/") : path) + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Builds an experiment from a config document. Keys override the named preset when one is given;
/// without a preset, domain, model, h and T are required. Unknown keys are rejected.
ExperimentSpec parse_config(const nlohmann::json& config);

/// Parses text, reporting syntax errors with their byte offset.
nlohmann::json parse_config_text(const std::string& text);

/// Resolved experiment as JSON, for manifests.
nlohmann::json to_json(const ExperimentSpec& spec);

}  // namespace satflow
