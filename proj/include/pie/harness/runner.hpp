// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pie/common/trace.hpp"
#include "pie/harness/scenario.hpp"
#include "pie/harness/simulation.hpp"

namespace pie::harness {

enum ExitCode : int { kExitPass = 0, kExitAssertion = 1, kExitInvalid = 2 };

struct AssertionResult {
  std::size_t index = 0;
  std::string kind;
  bool passed = false;
  std::string detail;
};

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_entries;
};

struct ScenarioResult {
  std::string name;
  int exit_code = kExitPass;
  /// Set when the scenario was rejected before or during the run.
  std::string invalid_reason;
  Trace trace;
  std::vector<ActionOutcome> outcomes;
  std::vector<AssertionResult> assertions;
  /// Encoded reports of the last attestation, AE first.
  std::vector<Bytes> reports;

  bool passed() const { return exit_code == kExitPass; }
};

/// Deterministic: identical (scenario, options) give byte-identical traces.
ScenarioResult run_scenario(const Scenario& scenario, RunOptions options = {});

/// The security-analysis corpus: one scenario per argument of the analysis,
/// plus a benign end-to-end run.
std::vector<Scenario> builtin_corpus();

// Isolation fuzzing.

struct FuzzViolation {
  std::size_t step = 0;
  std::string what;
};

struct FuzzReport {
  std::uint64_t seed = 0;
  std::size_t steps = 0;
  std::size_t os_reads_ok = 0;
  std::size_t os_accesses_denied = 0;
  std::vector<FuzzViolation> violations;
  std::string trace_digest;
};

/// Random OS, enclave, device and environment actions against one platform.
/// Flags (a) any successful OS access into a live private range, a live
/// region or monitor memory, judged against the monitor state before the
/// access, and (b) any OS read that returns bytes an enclave wrote and that
/// were not zero-filled since (taint replay over the trace).
FuzzReport fuzz_isolation(std::uint64_t seed, std::size_t steps);

/// The taint replay on its own, for traces produced elsewhere.
std::vector<FuzzViolation> taint_violations(const Trace& trace);

}  // namespace pie::harness
