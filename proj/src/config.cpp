#include "cacq/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace cacq {

namespace {

using nlohmann::json;

const json& require(const json& parent, const std::string& path, const char* key) {
  if (!parent.is_object()) throw ConfigError(path, "expected an object");
  const auto it = parent.find(key);
  if (it == parent.end()) throw ConfigError(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

std::string join(const std::string& path, const char* key) {
  return path.empty() ? key : path + "." + key;
}

double as_number(const json& value, const std::string& path) {
  if (!value.is_number()) throw ConfigError(path, "expected a number");
  return value.get<double>();
}

double require_number(const json& parent, const std::string& path, const char* key) {
  return as_number(require(parent, path, key), join(path, key));
}

int require_int(const json& parent, const std::string& path, const char* key) {
  const json& value = require(parent, path, key);
  if (!value.is_number_integer()) throw ConfigError(join(path, key), "expected an integer");
  return value.get<int>();
}

std::string require_string(const json& parent, const std::string& path, const char* key) {
  const json& value = require(parent, path, key);
  if (!value.is_string()) throw ConfigError(join(path, key), "expected a string");
  return value.get<std::string>();
}

MmppParams parse_mmpp(const json& root) {
  const json& node = require(root, "", "mmpp");
  const json& gen = require(node, "mmpp", "generator_per_min");
  if (!gen.is_array() || gen.empty())
    throw ConfigError("mmpp.generator_per_min", "expected a nonempty matrix");
  const int s = static_cast<int>(gen.size());
  MmppParams params;
  params.generator = Eigen::MatrixXd::Zero(s, s);
  for (int i = 0; i < s; ++i) {
    const json& row = gen[i];
    if (!row.is_array() || static_cast<int>(row.size()) != s)
      throw ConfigError("mmpp.generator_per_min", "expected a square matrix");
    for (int j = 0; j < s; ++j)
      params.generator(i, j) = as_number(row[j], "mmpp.generator_per_min");
  }
  const json& rates = require(node, "mmpp", "arrival_rates_per_frame");
  if (!rates.is_array() || static_cast<int>(rates.size()) != s)
    throw ConfigError("mmpp.arrival_rates_per_frame",
                      "expected one rate per phase (" + std::to_string(s) + ")");
  params.arrival_rates = Eigen::VectorXd::Zero(s);
  for (int i = 0; i < s; ++i)
    params.arrival_rates[i] = as_number(rates[i], "mmpp.arrival_rates_per_frame");
  try {
    validate(params);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("mmpp", e.what());
  }
  return params;
}

ChannelParams parse_channel(const json& root) {
  const json& node = require(root, "", "channel");
  ChannelParams params;
  params.subchannel_count = require_int(node, "channel", "subchannel_count");
  params.avg_snr_db = require_number(node, "channel", "avg_snr_db");
  params.nakagami_m = node.contains("nakagami_m")
                          ? as_number(node["nakagami_m"], "channel.nakagami_m")
                          : 1.0;
  const json& table = require(node, "channel", "rate_table");
  if (!table.is_array() || table.empty())
    throw ConfigError("channel.rate_table", "expected a nonempty array");
  for (std::size_t i = 0; i < table.size(); ++i) {
    const std::string path = "channel.rate_table[" + std::to_string(i) + "]";
    const json& entry = table[i];
    if (!entry.is_object()) throw ConfigError(path, "expected an object");
    RateStep step;
    if (entry.contains("snr_threshold_db") && !entry["snr_threshold_db"].is_null()) {
      step.snr_threshold_db = as_number(entry["snr_threshold_db"], path + ".snr_threshold_db");
    } else if (i != 0) {
      throw ConfigError(path + ".snr_threshold_db", "missing (only the first entry may omit it)");
    }
    if (!entry.contains("packets_per_frame") || !entry["packets_per_frame"].is_number_integer())
      throw ConfigError(path + ".packets_per_frame", "expected an integer");
    step.packets_per_frame = entry["packets_per_frame"].get<int>();
    params.rate_table.push_back(step);
  }
  try {
    validate(params);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("channel", e.what());
  }
  return params;
}

CacPolicy parse_policy(const json& root, int queue_capacity) {
  const json& node = require(root, "", "policy");
  const std::string kind = require_string(node, "policy", "kind");
  try {
    if (kind == "threshold") return CacPolicy::threshold(require_int(node, "policy", "c_max"));
    if (kind == "unrestricted")
      return CacPolicy::unrestricted(require_int(node, "policy", "c_trunc"));
    if (kind == "queue_aware") {
      const int c_trunc = require_int(node, "policy", "c_trunc");
      if (node.contains("alpha")) {
        const json& alpha = node["alpha"];
        if (!alpha.is_array() || static_cast<int>(alpha.size()) != queue_capacity + 1)
          throw ConfigError("policy.alpha",
                            "expected queue.capacity + 1 acceptance probabilities");
        Eigen::VectorXd curve(alpha.size());
        for (std::size_t i = 0; i < alpha.size(); ++i)
          curve[static_cast<int>(i)] = as_number(alpha[i], "policy.alpha");
        return CacPolicy::queue_aware(std::move(curve), c_trunc);
      }
      return CacPolicy::queue_aware(require_int(node, "policy", "b_th"), c_trunc);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError("policy", e.what());
  }
  throw ConfigError("policy.kind",
                    "expected one of threshold, queue_aware, unrestricted; got \"" + kind + "\"");
}

}  // namespace

json load_json_file(const std::string& file_path) {
  std::ifstream in(file_path);
  if (!in) throw ConfigError("", "cannot open config file " + file_path);
  json root;
  try {
    in >> root;
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("JSON parse error: ") + e.what());
  }
  return root;
}

SystemConfig config_from_json(const json& root) {
  SystemConfig config;
  config.mmpp = parse_mmpp(root);
  config.channel = parse_channel(root);

  const json& queue = require(root, "", "queue");
  config.queue_capacity = require_int(queue, "queue", "capacity");
  if (config.queue_capacity < 1) throw ConfigError("queue.capacity", "must be >= 1");
  config.max_batch = require_int(queue, "queue", "max_batch");
  if (config.max_batch < 1) throw ConfigError("queue.max_batch", "must be >= 1");

  config.policy = parse_policy(root, config.queue_capacity);

  const json& connections = require(root, "", "connections");
  config.conn_arrival_per_min = require_number(connections, "connections", "arrival_rate_per_min");
  if (config.conn_arrival_per_min < 0.0)
    throw ConfigError("connections.arrival_rate_per_min", "must be >= 0");
  config.conn_mean_duration_min = require_number(connections, "connections", "mean_duration_min");
  if (config.conn_mean_duration_min <= 0.0)
    throw ConfigError("connections.mean_duration_min", "must be > 0");

  config.frame_duration_ms = require_number(root, "", "frame_duration_ms");
  if (config.frame_duration_ms <= 0.0) throw ConfigError("frame_duration_ms", "must be > 0");

  if (root.contains("solver")) {
    const json& solver = root["solver"];
    if (!solver.is_object()) throw ConfigError("solver", "expected an object");
    if (solver.contains("tolerance"))
      config.solver.tolerance = as_number(solver["tolerance"], "solver.tolerance");
    if (solver.contains("max_sweeps")) {
      if (!solver["max_sweeps"].is_number_integer())
        throw ConfigError("solver.max_sweeps", "expected an integer");
      config.solver.max_sweeps = solver["max_sweeps"].get<int>();
    }
    if (solver.contains("method")) {
      try {
        config.solver.method =
            solver_method_from_string(solver["method"].get<std::string>());
      } catch (const std::exception& e) {
        throw ConfigError("solver.method", e.what());
      }
    }
    if (solver.contains("dense_direct_limit")) {
      if (!solver["dense_direct_limit"].is_number_integer())
        throw ConfigError("solver.dense_direct_limit", "expected an integer");
      config.solver.dense_direct_limit = solver["dense_direct_limit"].get<int>();
    }
    if (solver.contains("memory_budget_mb")) {
      if (!solver["memory_budget_mb"].is_number_unsigned())
        throw ConfigError("solver.memory_budget_mb", "expected a nonnegative integer");
      config.solver.memory_budget_mb = solver["memory_budget_mb"].get<std::size_t>();
    }
  }
  try {
    validate(config);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("", e.what());
  }
  return config;
}

SystemConfig load_config(const std::string& file_path) {
  return config_from_json(load_json_file(file_path));
}

json config_to_json(const SystemConfig& config) {
  json root;
  const int s = config.mmpp.phase_count();
  json gen = json::array();
  for (int i = 0; i < s; ++i) {
    json row = json::array();
    for (int j = 0; j < s; ++j) row.push_back(config.mmpp.generator(i, j));
    gen.push_back(std::move(row));
  }
  json rates = json::array();
  for (int i = 0; i < s; ++i) rates.push_back(config.mmpp.arrival_rates[i]);
  root["mmpp"] = {{"generator_per_min", std::move(gen)},
                  {"arrival_rates_per_frame", std::move(rates)}};

  json table = json::array();
  for (std::size_t i = 0; i < config.channel.rate_table.size(); ++i) {
    const RateStep& step = config.channel.rate_table[i];
    json entry;
    entry["snr_threshold_db"] =
        i == 0 ? json(nullptr) : json(step.snr_threshold_db);
    entry["packets_per_frame"] = step.packets_per_frame;
    table.push_back(std::move(entry));
  }
  root["channel"] = {{"subchannel_count", config.channel.subchannel_count},
                     {"avg_snr_db", config.channel.avg_snr_db},
                     {"nakagami_m", config.channel.nakagami_m},
                     {"rate_table", std::move(table)}};

  json policy;
  policy["kind"] = to_string(config.policy.kind());
  switch (config.policy.kind()) {
    case PolicyKind::kThreshold:
      policy["c_max"] = config.policy.connection_bound();
      break;
    case PolicyKind::kUnrestricted:
      policy["c_trunc"] = config.policy.connection_bound();
      break;
    case PolicyKind::kQueueAware:
      policy["c_trunc"] = config.policy.connection_bound();
      if (config.policy.has_alpha_curve()) {
        json alpha = json::array();
        for (int i = 0; i < config.policy.alpha_curve().size(); ++i)
          alpha.push_back(config.policy.alpha_curve()[i]);
        policy["alpha"] = std::move(alpha);
      } else {
        policy["b_th"] = config.policy.b_th();
      }
      break;
  }
  root["policy"] = std::move(policy);

  root["queue"] = {{"capacity", config.queue_capacity}, {"max_batch", config.max_batch}};
  root["connections"] = {{"arrival_rate_per_min", config.conn_arrival_per_min},
                         {"mean_duration_min", config.conn_mean_duration_min}};
  root["frame_duration_ms"] = config.frame_duration_ms;
  root["solver"] = {{"tolerance", config.solver.tolerance},
                    {"max_sweeps", config.solver.max_sweeps},
                    {"method", to_string(config.solver.method)},
                    {"dense_direct_limit", config.solver.dense_direct_limit},
                    {"memory_budget_mb", config.solver.memory_budget_mb}};
  return root;
}

void set_by_path(json& root, const std::string& dotted_path, double value) {
  json* node = &root;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted_path.find('.', start);
    const std::string key = dotted_path.substr(start, dot - start);
    if (key.empty()) throw ConfigError(dotted_path, "empty path segment");
    if (!node->is_object() || !node->contains(key))
      throw ConfigError(dotted_path, "no such config entry");
    node = &(*node)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (!node->is_number()) throw ConfigError(dotted_path, "not a numeric config entry");
  if (node->is_number_integer() && value == std::floor(value) &&
      std::abs(value) < 1e15) {
    *node = static_cast<std::int64_t>(value);
  } else {
    *node = value;
  }
}

double get_by_path(const json& root, const std::string& dotted_path) {
  const json* node = &root;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted_path.find('.', start);
    const std::string key = dotted_path.substr(start, dot - start);
    if (!node->is_object() || !node->contains(key))
      throw ConfigError(dotted_path, "no such config entry");
    node = &(*node)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (!node->is_number()) throw ConfigError(dotted_path, "not a numeric config entry");
  return node->get<double>();
}

}  // namespace cacq
