#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "cacq/chain.hpp"

namespace cacq {

/// Configuration rejection carrying the dotted key path of the offending
/// entry (e.g. "queue.capacity").
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path.empty() ? message : path + ": " + message),
        path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

nlohmann::json load_json_file(const std::string& file_path);

SystemConfig config_from_json(const nlohmann::json& root);
SystemConfig load_config(const std::string& file_path);

/// Effective configuration (defaults filled in); reloading it reproduces the
/// same model exactly.
nlohmann::json config_to_json(const SystemConfig& config);

/// Overwrite the numeric value at a dotted key path in a config document.
void set_by_path(nlohmann::json& root, const std::string& dotted_path, double value);

/// Read the numeric value at a dotted key path.
double get_by_path(const nlohmann::json& root, const std::string& dotted_path);

}  // namespace cacq
