// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "pie/harness/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "pie/peripherals/peripheral.hpp"

namespace pie::harness {

using nlohmann::json;

const std::vector<std::string_view>& known_actions() {
  static const std::vector<std::string_view> kActions = {
      "os.create_enclave",  "os.destroy_enclave",
      "os.connect",         "os.sync_disconnect",
      "os.read",            "os.write",
      "os.schedule",        "os.pause",
      "os.resume",          "enclave.write",
      "enclave.read",       "ce.attach",
      "ae.call",            "env.set_sensor",
      "env.inject_key",     "env.unplug",
      "env.replug",         "periph.lie_dma",
      "periph.dma_write",   "periph.dma_read",
      "verifier.attest",    "verifier.provision_secret",
      "adversary.relaunch_with_same_id",
      "adversary.replay_report",
  };
  return kActions;
}

const std::vector<std::string_view>& known_assertions() {
  static const std::vector<std::string_view> kAssertions = {
      "expect_error",        "expect_ok",
      "expect_verdict",      "expect_trace_absent",
      "expect_trace_present", "expect_bytes",
      "expect_attack_detected",
  };
  return kAssertions;
}

namespace {

Error invalid(std::string why) {
  return make_error(Errc::ScenarioInvalid, std::move(why));
}

bool is_known(const std::vector<std::string_view>& list, std::string_view s) {
  return std::find(list.begin(), list.end(), s) != list.end();
}

template <typename T>
bool read_opt(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return true;
  try {
    out = obj.at(key).get<T>();
    return true;
  } catch (const json::exception&) {
    return false;
  }
}

Result<PlatformSpec> parse_platform(const json& p) {
  PlatformSpec out;
  if (!p.is_object()) return invalid("platform must be an object");
  if (!read_opt(p, "max_entries", out.max_entries) || out.max_entries < 3 ||
      out.max_entries > 64)
    return invalid("max_entries must be an integer in [3, 64]");
  std::string policy = "monotonic";
  if (!read_opt(p, "id_policy", policy)) return invalid("bad id_policy");
  auto pol = monitor::id_policy_from_string(policy);
  if (!pol) return invalid("unknown id_policy " + policy);
  out.id_policy = *pol;
  if (!read_opt(p, "provider", out.provider) ||
      (out.provider != "deterministic" && out.provider != "ed25519"))
    return invalid("provider must be deterministic or ed25519");
  if (p.contains("device_tree")) {
    if (!p["device_tree"].is_object())
      return invalid("device_tree must be an object");
    out.device_tree = p["device_tree"];
  }
  if (p.contains("trusted_manufacturers") &&
      !read_opt(p, "trusted_manufacturers", out.trusted_manufacturers))
    return invalid("trusted_manufacturers must be a list of strings");

  std::set<std::string> names;
  if (p.contains("peripherals")) {
    if (!p["peripherals"].is_array())
      return invalid("peripherals must be a list");
    for (const auto& d : p["peripherals"]) {
      PeripheralSpec spec;
      if (!d.is_object() || !d.contains("name") || !d["name"].is_string() ||
          !d.contains("kind") || !d["kind"].is_string())
        return invalid("peripheral needs string name and kind");
      spec.name = d["name"].get<std::string>();
      spec.kind = d["kind"].get<std::string>();
      if (!peripherals::peripheral_kind_from_string(spec.kind))
        return invalid("unknown peripheral kind " + spec.kind);
      spec.node = spec.name;
      spec.firmware = spec.kind + "-firmware-1.0";
      if (!read_opt(d, "node", spec.node) || !read_opt(d, "dma", spec.dma) ||
          !read_opt(d, "firmware", spec.firmware) ||
          !read_opt(d, "version", spec.version) ||
          !read_opt(d, "manufacturer", spec.manufacturer) ||
          !read_opt(d, "terminate_on_peer_loss", spec.terminate_on_peer_loss))
        return invalid("bad field in peripheral " + spec.name);
      if (!names.insert(spec.name).second)
        return invalid("duplicate peripheral " + spec.name);
      out.peripherals.push_back(std::move(spec));
    }
  }
  return out;
}

}  // namespace

Result<Scenario> parse_scenario(const json& doc) {
  if (!doc.is_object()) return invalid("scenario must be an object");
  Scenario s;
  s.source = doc;
  if (!doc.contains("name") || !doc["name"].is_string())
    return invalid("scenario needs a string name");
  s.name = doc["name"].get<std::string>();
  if (!read_opt(doc, "seed", s.seed)) return invalid("seed must be unsigned");
  if (!read_opt(doc, "category", s.category) ||
      (s.category != "benign" && s.category != "attack"))
    return invalid("category must be benign or attack");
  if (!read_opt(doc, "description", s.description))
    return invalid("description must be a string");
  if (doc.contains("platform")) {
    auto p = parse_platform(doc["platform"]);
    if (!p) return p.error();
    s.platform = std::move(*p);
  }

  if (!doc.contains("actions") || !doc["actions"].is_array())
    return invalid("scenario needs an actions list");
  std::set<std::string> labels;
  for (std::size_t i = 0; i < doc["actions"].size(); ++i) {
    const auto& a = doc["actions"][i];
    if (!a.is_object() || !a.contains("op") || !a["op"].is_string())
      return invalid("action " + std::to_string(i) + " needs a string op");
    Action act{a["op"].get<std::string>(), std::nullopt, a};
    if (!is_known(known_actions(), act.op))
      return invalid("unknown action " + act.op);
    if (a.contains("label")) {
      if (!a["label"].is_string()) return invalid("label must be a string");
      act.label = a["label"].get<std::string>();
      if (!labels.insert(*act.label).second)
        return invalid("duplicate label " + *act.label);
    }
    s.actions.push_back(std::move(act));
  }

  if (doc.contains("assertions")) {
    if (!doc["assertions"].is_array())
      return invalid("assertions must be a list");
    for (const auto& a : doc["assertions"]) {
      if (!a.is_object() || !a.contains("kind") || !a["kind"].is_string())
        return invalid("assertion needs a string kind");
      Assertion as{a["kind"].get<std::string>(), a};
      if (!is_known(known_assertions(), as.kind))
        return invalid("unknown assertion " + as.kind);
      if (a.contains("action")) {
        const auto& ref = a["action"];
        bool ok = (ref.is_number_unsigned() &&
                   ref.get<std::size_t>() < s.actions.size()) ||
                  (ref.is_string() && labels.count(ref.get<std::string>()));
        if (!ok) return invalid("assertion refers to an unknown action");
      }
      s.assertions.push_back(std::move(as));
    }
  }
  return s;
}

Result<Scenario> parse_scenario(std::string_view text) {
  auto doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) return invalid("scenario is not valid JSON");
  return parse_scenario(doc);
}

Result<Scenario> load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) return invalid("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  return parse_scenario(std::string_view(text));
}

}  // namespace pie::harness
