// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <set>

#include "pie/harness/runner.hpp"

namespace pie::harness {
namespace {

using nlohmann::json;

json minimal() {
  return json::parse(R"({
    "name": "t", "seed": 3,
    "actions": [{"op": "os.create_enclave", "as": "a", "label": "make"}],
    "assertions": [{"kind": "expect_ok", "action": "make"}]
  })");
}

TEST(Scenario, ParsesMinimalDocument) {
  auto s = parse_scenario(minimal());
  ASSERT_TRUE(s) << s.error().detail;
  EXPECT_EQ(s->name, "t");
  EXPECT_EQ(s->seed, 3u);
  EXPECT_EQ(s->platform.max_entries, 16u);
  EXPECT_EQ(s->actions.size(), 1u);
  EXPECT_EQ(run_scenario(*s).exit_code, kExitPass);
}

TEST(Scenario, RejectsInvalidDocuments) {
  EXPECT_EQ(parse_scenario(std::string_view("{")).code(), Errc::ScenarioInvalid);
  auto bad_op = minimal();
  bad_op["actions"][0]["op"] = "os.format_disk";
  EXPECT_EQ(parse_scenario(bad_op).code(), Errc::ScenarioInvalid);
  auto bad_ref = minimal();
  bad_ref["assertions"][0]["action"] = "nope";
  EXPECT_EQ(parse_scenario(bad_ref).code(), Errc::ScenarioInvalid);
  auto bad_entries = minimal();
  bad_entries["platform"]["max_entries"] = 2;
  EXPECT_EQ(parse_scenario(bad_entries).code(), Errc::ScenarioInvalid);
  auto bad_kind = minimal();
  bad_kind["platform"]["peripherals"] = json::array({{{"name", "x"}, {"kind", "gpu"}}});
  EXPECT_EQ(parse_scenario(bad_kind).code(), Errc::ScenarioInvalid);
  EXPECT_EQ(load_scenario_file("/nonexistent/file.json").code(), Errc::ScenarioInvalid);
}

TEST(Runner, UnresolvedNameIsInvalid) {
  auto doc = minimal();
  doc["actions"].push_back({{"op", "os.destroy_enclave"}, {"enclave", "ghost"}});
  auto s = parse_scenario(doc);
  ASSERT_TRUE(s);
  auto r = run_scenario(*s);
  EXPECT_EQ(r.exit_code, kExitInvalid);
  EXPECT_FALSE(r.invalid_reason.empty());
}

TEST(Runner, FailedAssertionGivesExitOne) {
  auto doc = minimal();
  doc["assertions"].push_back(
      {{"kind", "expect_error"}, {"action", "make"}, {"error", "NoFreeEntry"}});
  auto r = run_scenario(*parse_scenario(doc));
  EXPECT_EQ(r.exit_code, kExitAssertion);
  ASSERT_EQ(r.assertions.size(), 2u);
  EXPECT_TRUE(r.assertions[0].passed);
  EXPECT_FALSE(r.assertions[1].passed);
}

TEST(Runner, MaxEntriesOverride) {
  auto doc = minimal();
  for (int i = 0; i < 6; ++i)
    doc["actions"].push_back({{"op", "os.create_enclave"}, {"as", "e" + std::to_string(i)},
                              {"label", "c" + std::to_string(i)}});
  doc["assertions"] = json::array({{{"kind", "expect_error"}, {"action", "c5"},
                                    {"error", "NoFreeEntry"}}});
  auto s = *parse_scenario(doc);
  EXPECT_EQ(run_scenario(s, {std::nullopt, 8}).exit_code, kExitPass);
  EXPECT_EQ(run_scenario(s, {std::nullopt, 16}).exit_code, kExitAssertion);
}

TEST(Corpus, CoversTheAnalysis) {
  auto corpus = builtin_corpus();
  EXPECT_GE(corpus.size(), 13u);
  std::set<std::string> names;
  for (const auto& s : corpus) names.insert(s.name);
  for (const char* n :
       {"malicious-os-read", "overlap-connect", "third-party-connect", "stale-buffer",
        "connect-before-sync-disconnect", "flush-on-destroy", "rogue-dma", "pmp-budget",
        "toctou-identifier-reuse", "link-mismatch-attestation", "forged-peripheral-cert",
        "ce-killed-cascade", "peripheral-replug-cascade", "sunny-day"})
    EXPECT_EQ(names.count(n), 1u) << n;
}

TEST(Corpus, EveryScenarioPasses) {
  for (const auto& s : builtin_corpus()) {
    auto r = run_scenario(s);
    EXPECT_EQ(r.exit_code, kExitPass) << s.name << " " << r.invalid_reason;
    for (const auto& a : r.assertions)
      EXPECT_TRUE(a.passed) << s.name << " [" << a.index << "] " << a.kind << " " << a.detail;
  }
}

TEST(Corpus, SameSeedSameTrace) {
  for (const auto& s : builtin_corpus())
    EXPECT_EQ(run_scenario(s).trace.to_jsonl(), run_scenario(s).trace.to_jsonl()) << s.name;
}

TEST(Corpus, SeedChangesRandomness) {
  auto s = builtin_corpus().front();
  EXPECT_NE(run_scenario(s, {1001, std::nullopt}).trace.to_jsonl(),
            run_scenario(s, {1002, std::nullopt}).trace.to_jsonl());
}

TEST(Taint, FlagsOsReadOfEnclaveBytes) {
  Trace t;
  t.append("enclave:1", "checked_write",
           {{"addr", "0x1000"}, {"len", 2}, {"data", "abcd"}}, "ok");
  t.append("OS", "checked_read", {{"addr", "0x1001"}, {"len", 4}}, "ok");
  EXPECT_EQ(taint_violations(t).size(), 1u);
  Trace cleared;
  cleared.append("enclave:1", "checked_write",
                 {{"addr", "0x1000"}, {"len", 2}, {"data", "abcd"}}, "ok");
  cleared.append("SM", "zero_fill", {{"range", {{"base", "0x1000"}, {"size", 16}}}}, "ok");
  cleared.append("OS", "checked_read", {{"addr", "0x1000"}, {"len", 4}}, "ok");
  EXPECT_TRUE(taint_violations(cleared).empty());
}

TEST(Fuzz, ShortRunIsClean) {
  auto r = fuzz_isolation(5, 1500);
  EXPECT_EQ(r.steps, 1500u);
  for (const auto& v : r.violations) ADD_FAILURE() << v.step << ": " << v.what;
  EXPECT_GT(r.os_reads_ok, 0u);
  EXPECT_GT(r.os_accesses_denied, 0u);
  EXPECT_EQ(fuzz_isolation(5, 1500).trace_digest, r.trace_digest);
}

}  // namespace
}  // namespace pie::harness
