// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "pie/harness/runner.hpp"

#include <algorithm>

namespace pie::harness {

using nlohmann::json;

namespace {

// "Reject" matches "Reject(LinkMismatch)"; exact names match themselves.
bool result_matches(const std::string& actual, const std::string& expected) {
  if (actual == expected) return true;
  return actual.size() > expected.size() &&
         actual.compare(0, expected.size() + 1, expected + "(") == 0;
}

std::optional<std::size_t> action_index(const Scenario& s, const json& ref) {
  if (ref.is_number_unsigned()) return ref.get<std::size_t>();
  if (!ref.is_string()) return std::nullopt;
  for (std::size_t i = 0; i < s.actions.size(); ++i)
    if (s.actions[i].label == ref.get<std::string>()) return i;
  return std::nullopt;
}

bool record_matches(const TraceRecord& r, const json& pattern) {
  for (const char* key : {"actor", "operation", "result"}) {
    if (!pattern.contains(key)) continue;
    const std::string& field = key == std::string("actor") ? r.actor
                               : key == std::string("operation") ? r.operation
                                                                 : r.result;
    if (field != pattern[key].get<std::string>()) return false;
  }
  if (pattern.contains("args")) {
    for (const auto& [k, v] : pattern["args"].items())
      if (!r.args.contains(k) || r.args[k] != v) return false;
  }
  if (pattern.contains("contains") &&
      r.to_json_line().find(pattern["contains"].get<std::string>()) ==
          std::string::npos)
    return false;
  return true;
}

std::optional<Bytes> expected_bytes(const json& a, std::size_t actual_size) {
  if (a.value("zero", false)) return Bytes(actual_size, 0);
  if (a.contains("hex") && a["hex"].is_string())
    return from_hex(a["hex"].get<std::string>());
  if (a.contains("text") && a["text"].is_string())
    return to_bytes(a["text"].get<std::string>());
  return std::nullopt;
}

AssertionResult evaluate(const Scenario& s, const Assertion& as,
                         const Simulation& sim) {
  AssertionResult r;
  r.kind = as.kind;
  const json& a = as.args;
  const auto& outcomes = sim.outcomes();

  const ActionOutcome* outcome = nullptr;
  if (a.contains("action")) {
    auto idx = action_index(s, a["action"]);
    if (idx && *idx < outcomes.size()) outcome = &outcomes[*idx];
    if (!outcome) {
      r.detail = "action did not run";
      return r;
    }
  }

  if (as.kind == "expect_error") {
    std::string want = a.value("error", "");
    r.passed = outcome && !outcome->ok && result_matches(outcome->result, want);
    r.detail = outcome ? "got " + outcome->result : "no action";
  } else if (as.kind == "expect_ok") {
    r.passed = outcome && outcome->ok;
    r.detail = outcome ? "got " + outcome->result : "no action";
  } else if (as.kind == "expect_verdict") {
    std::string want = a.value("verdict", "");
    r.passed = outcome && outcome->verdict &&
               result_matches(outcome->verdict->to_string(), want);
    r.detail = outcome && outcome->verdict
                   ? "got " + outcome->verdict->to_string() + " " +
                         outcome->verdict->detail
                   : "no verdict";
  } else if (as.kind == "expect_trace_absent" ||
             as.kind == "expect_trace_present") {
    json pattern = a.value("pattern", json::object());
    std::size_t hits = 0;
    for (const auto& rec : sim.trace().records())
      if (record_matches(rec, pattern)) ++hits;
    bool want_present = as.kind == "expect_trace_present";
    r.passed = want_present ? hits > 0 : hits == 0;
    r.detail = std::to_string(hits) + " matching record(s)";
  } else if (as.kind == "expect_bytes") {
    Bytes actual;
    if (outcome) {
      if (!outcome->ok) {
        r.detail = "action failed: " + outcome->result;
        return r;
      }
      actual = outcome->data;
    } else {
      auto range = sim.target(a.value("at", json::object()), 32);
      if (!range) {
        r.detail = range.error().detail;
        return r;
      }
      auto bytes = sim.inspect(*range);
      if (!bytes) {
        r.detail = bytes.error().detail;
        return r;
      }
      actual = std::move(*bytes);
    }
    auto want = expected_bytes(a, actual.size());
    r.passed = want && !actual.empty() && *want == actual;
    r.detail = "got " + to_hex(ByteView(actual).first(
                            std::min<std::size_t>(actual.size(), 64)));
  } else if (as.kind == "expect_attack_detected") {
    std::string via = a.value("via", "");
    for (const auto& o : outcomes) {
      bool rejected = o.verdict && !o.verdict->accepted;
      bool unprovisioned =
          o.op == "verifier.provision_secret" && o.result == "failed";
      bool match = via.empty() || via == o.op;
      if (match && (rejected || unprovisioned)) {
        r.passed = true;
        r.detail = "detected at action " + std::to_string(o.index) + ": " +
                   o.result;
        break;
      }
    }
    if (!r.passed) r.detail = "no verifier-side detection";
  }
  return r;
}

}  // namespace

ScenarioResult run_scenario(const Scenario& scenario, RunOptions options) {
  ScenarioResult result;
  result.name = scenario.name;
  PlatformSpec spec = scenario.platform;
  if (options.max_entries) spec.max_entries = *options.max_entries;
  std::uint64_t seed = options.seed.value_or(scenario.seed);

  auto sim = Simulation::create(spec, seed);
  if (!sim) {
    result.exit_code = kExitInvalid;
    result.invalid_reason = sim.error().detail;
    return result;
  }
  for (std::size_t i = 0; i < scenario.actions.size(); ++i) {
    auto out = (*sim)->execute(scenario.actions[i]);
    if (!out) {
      result.exit_code = kExitInvalid;
      result.invalid_reason =
          "action " + std::to_string(i) + ": " + out.error().detail;
      break;
    }
  }
  result.trace = (*sim)->trace();
  result.outcomes = (*sim)->outcomes();
  result.reports = (*sim)->last_reports();
  if (result.exit_code == kExitInvalid) return result;

  for (std::size_t i = 0; i < scenario.assertions.size(); ++i) {
    auto r = evaluate(scenario, scenario.assertions[i], **sim);
    r.index = i;
    if (!r.passed) result.exit_code = kExitAssertion;
    result.assertions.push_back(std::move(r));
  }
  return result;
}

}  // namespace pie::harness
