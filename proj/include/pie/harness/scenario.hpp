// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "pie/common/result.hpp"
#include "pie/monitor/types.hpp"

namespace pie::harness {

struct PeripheralSpec {
  std::string name;
  std::string kind;  // sensor | keyboard | accelerator
  /// Device-tree node for MMIO devices; defaults to `name`.
  std::string node;
  bool dma = false;
  std::string firmware;
  std::string version = "1.0";
  std::string manufacturer = "acme";
  bool terminate_on_peer_loss = true;
};

struct PlatformSpec {
  std::size_t max_entries = 16;
  monitor::IdPolicy id_policy = monitor::IdPolicy::Monotonic;
  std::string provider = "deterministic";
  /// Generated from the peripherals when absent.
  std::optional<nlohmann::json> device_tree;
  std::vector<PeripheralSpec> peripherals;
  /// Manufacturers the verifier and controller enclaves trust.
  std::vector<std::string> trusted_manufacturers{"acme"};
};

struct Action {
  std::string op;
  std::optional<std::string> label;
  nlohmann::json args;  // the whole action object
};

struct Assertion {
  std::string kind;
  nlohmann::json args;
};

struct Scenario {
  std::string name;
  std::uint64_t seed = 0;
  /// "benign" or "attack"; informational.
  std::string category = "benign";
  std::string description;
  PlatformSpec platform;
  std::vector<Action> actions;
  std::vector<Assertion> assertions;
  /// The document the scenario was parsed from.
  nlohmann::json source;
};

/// Every action op the runner understands.
const std::vector<std::string_view>& known_actions();
/// Every assertion kind the runner understands.
const std::vector<std::string_view>& known_assertions();

/// Structural validation only; symbol references are resolved at run time.
/// Errors are ScenarioInvalid.
Result<Scenario> parse_scenario(const nlohmann::json& doc);
Result<Scenario> parse_scenario(std::string_view text);
inline Result<Scenario> parse_scenario(const char* text) {
  return parse_scenario(std::string_view(text));
}
inline Result<Scenario> parse_scenario(const std::string& text) {
  return parse_scenario(std::string_view(text));
}
Result<Scenario> load_scenario_file(const std::string& path);

}  // namespace pie::harness
