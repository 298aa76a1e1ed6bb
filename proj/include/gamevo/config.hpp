#pragma once

// Run configuration: a TOML-style `key = value` file mirroring SearchConfig
// plus data and split settings. Section headers are accepted and ignored.

#include "gamevo/search.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gamevo {

struct RunConfig {
  SearchConfig search;
  std::string algo = "ea-fq";
  std::string data;
  std::string schema;
  std::string output = "out";
  std::optional<std::string> train_end; // ISO-8601
  std::optional<std::string> valid_end;
  std::vector<std::pair<std::string, std::string>> exclude; // inclusive windows
  std::vector<int> hours;
  std::optional<std::string> seed_preset;
  double sota_alpha = 0.95;
  bool consume_history = false;
  bool seed_set = false; // seed given in the file
};

// Values: numbers, "strings", true/false and nested [arrays]. Comments start
// with '#'. Throws ParseError with the offending line.
nlohmann::json parse_config_text(std::string_view text);

// Applies known keys; throws DataError on unknown keys or wrong types.
void apply_config(const nlohmann::json &values, RunConfig &config);

RunConfig load_config(const std::string &path);

// "0-23", "5", "0,6,12-14".
std::vector<int> parse_hours(std::string_view text);

} // namespace gamevo
