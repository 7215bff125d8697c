// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include <stdexcept>
#include <string_view>

#include "pie/harness/runner.hpp"

namespace pie::harness {

namespace {

constexpr std::string_view kSunnyDay = R"json({
  "name": "sunny-day",
  "category": "benign",
  "description": "AE reads a sensor through its controller, passes attestation and receives a provisioned secret.",
  "seed": 1,
  "platform": {
    "peripherals": [{"name": "sensor0", "kind": "sensor"}]
  },
  "actions": [
    {"op": "os.create_enclave", "as": "ae", "kind": "AE", "code": "weather-app"},
    {"op": "os.create_enclave", "as": "ce", "kind": "CE", "code": "sensor-controller"},
    {"op": "os.connect", "a": "ce", "b": "sensor0", "as": "ce_dev"},
    {"op": "os.connect", "a": "ae", "b": "ce", "as": "link"},
    {"op": "ce.attach", "controller": "ce", "peripheral": "sensor0", "label": "attach"},
    {"op": "env.set_sensor", "peripheral": "sensor0", "value": 21},
    {"op": "ae.call", "ae": "ae", "ce": "ce", "request": "read", "label": "read"},
    {"op": "verifier.attest", "ae": "ae", "label": "attest"},
    {"op": "verifier.provision_secret", "ae": "ae", "label": "provision"}
  ],
  "assertions": [
    {"kind": "expect_ok", "action": "attach"},
    {"kind": "expect_ok", "action": "read"},
    {"kind": "expect_verdict", "action": "attest", "verdict": "Accept"},
    {"kind": "expect_ok", "action": "provision"},
    {"kind": "expect_bytes", "action": "provision", "text": "pie-provisioned-token"},
    {"kind": "expect_trace_absent", "pattern": {"actor": "OS", "result": "AccessFault"}}
  ]
})json";

constexpr std::string_view kMaliciousOsRead = R"json({
  "name": "malicious-os-read",
  "category": "attack",
  "description": "The OS tries to read and write enclave memory, a live shared region and monitor memory.",
  "seed": 2,
  "actions": [
    {"op": "os.create_enclave", "as": "a", "code": "victim"},
    {"op": "os.create_enclave", "as": "b", "code": "peer", "kind": "CE"},
    {"op": "os.connect", "a": "a", "b": "b", "as": "r"},
    {"op": "enclave.write", "enclave": "a", "text": "top-secret-private"},
    {"op": "enclave.write", "enclave": "a", "at": {"region": "r"}, "text": "top-secret-shared"},
    {"op": "os.read", "enclave": "a", "offset": 256, "len": 18, "label": "read_private"},
    {"op": "os.read", "region": "r", "len": 17, "label": "read_shared"},
    {"op": "os.read", "sm": true, "len": 16, "label": "read_monitor"},
    {"op": "os.write", "enclave": "a", "offset": 256, "hex": "deadbeef", "label": "write_private"},
    {"op": "os.write", "region": "r", "hex": "deadbeef", "label": "write_shared"}
  ],
  "assertions": [
    {"kind": "expect_error", "action": "read_private", "error": "AccessFault"},
    {"kind": "expect_error", "action": "read_shared", "error": "AccessFault"},
    {"kind": "expect_error", "action": "read_monitor", "error": "AccessFault"},
    {"kind": "expect_error", "action": "write_private", "error": "AccessFault"},
    {"kind": "expect_error", "action": "write_shared", "error": "AccessFault"},
    {"kind": "expect_trace_absent", "pattern": {"actor": "OS", "operation": "checked_read", "result": "ok"}},
    {"kind": "expect_bytes", "at": {"enclave": "a", "offset": 256, "len": 18}, "text": "top-secret-private"}
  ]
})json";

constexpr std::string_view kOverlapConnect = R"json({
  "name": "overlap-connect",
  "category": "attack",
  "description": "The OS places a new region over an existing region and over an enclave's private memory.",
  "seed": 3,
  "actions": [
    {"op": "os.create_enclave", "as": "a"},
    {"op": "os.create_enclave", "as": "b"},
    {"op": "os.create_enclave", "as": "c"},
    {"op": "os.connect", "a": "a", "b": "b", "as": "r1"},
    {"op": "os.connect", "a": "a", "b": "c", "same_as": "r1", "shift": 2048, "label": "partial"},
    {"op": "os.connect", "a": "b", "b": "c", "at": {"enclave": "a", "whole": true}, "label": "over_private"}
  ],
  "assertions": [
    {"kind": "expect_error", "action": "partial", "error": "OverlapError"},
    {"kind": "expect_error", "action": "over_private", "error": "OverlapError"}
  ]
})json";

constexpr std::string_view kThirdPartyConnect = R"json({
  "name": "third-party-connect",
  "category": "attack",
  "description": "A third enclave asks to join an existing one-to-one region.",
  "seed": 4,
  "actions": [
    {"op": "os.create_enclave", "as": "a"},
    {"op": "os.create_enclave", "as": "b"},
    {"op": "os.create_enclave", "as": "c"},
    {"op": "os.connect", "a": "a", "b": "b", "as": "r1"},
    {"op": "enclave.write", "enclave": "a", "at": {"region": "r1"}, "text": "for-b-only"},
    {"op": "os.connect", "a": "a", "b": "c", "same_as": "r1", "label": "join_a"},
    {"op": "os.connect", "a": "c", "b": "b", "same_as": "r1", "label": "join_b"},
    {"op": "enclave.read", "enclave": "c", "at": {"region": "r1", "len": 10}, "label": "peek"}
  ],
  "assertions": [
    {"kind": "expect_error", "action": "join_a", "error": "ThirdParty"},
    {"kind": "expect_error", "action": "join_b", "error": "ThirdParty"},
    {"kind": "expect_error", "action": "peek", "error": "AccessFault"}
  ]
})json";

constexpr std::string_view kStaleBuffer = R"json({
  "name": "stale-buffer",
  "category": "attack",
  "description": "After the peer dies the survivor's buffer stays protected until the OS releases it, which zeroes it.",
  "seed": 5,
  "actions": [
    {"op": "os.create_enclave", "as": "a"},
    {"op": "os.create_enclave", "as": "b"},
    {"op": "os.connect", "a": "a", "b": "b", "as": "r"},
    {"op": "enclave.write", "enclave": "a", "at": {"region": "r"}, "text": "stale-secret"},
    {"op": "os.destroy_enclave", "enclave": "b"},
    {"op": "os.read", "region": "r", "len": 12, "label": "read_stale"},
    {"op": "enclave.read", "enclave": "a", "at": {"region": "r", "len": 12}, "label": "survivor_read"},
    {"op": "os.sync_disconnect", "region": "r", "label": "release"},
    {"op": "os.read", "region": "r", "len": 12, "label": "read_released"}
  ],
  "assertions": [
    {"kind": "expect_error", "action": "read_stale", "error": "AccessFault"},
    {"kind": "expect_bytes", "action": "survivor_read", "text": "stale-secret"},
    {"kind": "expect_ok", "action": "release"},
    {"kind": "expect_bytes", "action": "read_released", "zero": true},
    {"kind": "expect_trace_present", "pattern": {"operation": "async_disconnect_enclaves", "result": "ok"}}
  ]
})json";

constexpr std::string_view kConnectBeforeSync = R"json({
  "name": "connect-before-sync-disconnect",
  "category": "attack",
  "description": "A survivor cannot be connected anew before the old region is released and it has seen the release.",
  "seed": 6,
  "actions": [
    {"op": "os.create_enclave", "as": "a"},
    {"op": "os.create_enclave", "as": "b"},
    {"op": "os.connect", "a": "a", "b": "b", "as": "r"},
    {"op": "os.destroy_enclave", "enclave": "b"},
    {"op": "os.create_enclave", "as": "c"},
    {"op": "os.connect", "a": "a", "b": "c", "as": "r2", "label": "too_early"},
    {"op": "os.sync_disconnect", "region": "r"},
    {"op": "os.connect", "a": "a", "b": "c", "as": "r2", "label": "undelivered"},
    {"op": "os.schedule", "enclave": "a"},
    {"op": "os.connect", "a": "a", "b": "c", "as": "r2", "label": "after_release"}
  ],
  "assertions": [
    {"kind": "expect_error", "action": "too_early", "error": "MustSyncDisconnectFirst"},
    {"kind": "expect_error", "action": "undelivered", "error": "MustSyncDisconnectFirst"},
    {"kind": "expect_ok", "action": "after_release"}
  ]
})json";

constexpr std::string_view kFlushOnDestroy = R"json({
  "name": "flush-on-destroy",
  "category": "attack",
  "description": "Enclave memory is wiped before the OS gets it back.",
  "seed": 7,
  "actions": [
    {"op": "os.create_enclave", "as": "a"},
    {"op": "enclave.write", "enclave": "a", "text": "key-material-0123456789"},
    {"op": "os.read", "enclave": "a", "offset": 256, "len": 23, "label": "while_alive"},
    {"op": "os.destroy_enclave", "enclave": "a"},
    {"op": "os.read", "enclave": "a", "offset": 256, "len": 23, "label": "after_destroy"}
  ],
  "assertions": [
    {"kind": "expect_error", "action": "while_alive", "error": "AccessFault"},
    {"kind": "expect_bytes", "action": "after_destroy", "zero": true},
    {"kind": "expect_bytes", "at": {"enclave": "a", "whole": true}, "zero": true}
  ]
})json";

constexpr std::string_view kRogueDma = R"json({
  "name": "rogue-dma",
  "category": "attack",
  "description": "A DMA device misreports its window; the monitor refuses the region and the device cannot reach other memory.",
  "seed": 8,
  "platform": {
    "peripherals": [{"name": "acc0", "kind": "accelerator", "dma": true}]
  },
  "actions": [
    {"op": "os.create_enclave", "as": "ce", "kind": "CE", "code": "accel-controller"},
    {"op": "periph.lie_dma", "peripheral": "acc0", "shift": 4096},
    {"op": "os.connect", "a": "ce", "b": "acc0", "as": "dma", "label": "connect"},
    {"op": "periph.dma_write", "peripheral": "acc0", "at": {"enclave": "ce", "offset": 256}, "hex": "66666666", "label": "rogue_write"},
    {"op": "periph.dma_read", "peripheral": "acc0", "at": {"sm": true, "len": 16}, "label": "rogue_read"}
  ],
  "assertions": [
    {"kind": "expect_error", "action": "connect", "error": "Mismatch"},
    {"kind": "expect_trace_present", "pattern": {"operation": "verify_dma_region", "result": "Mismatch"}},
    {"kind": "expect_error", "action": "rogue_write", "error": "AccessFault"},
    {"kind": "expect_error", "action": "rogue_read", "error": "AccessFault"}
  ]
})json";

constexpr std::string_view kPmpBudget = R"json({
  "name": "pmp-budget",
  "category": "benign",
  "description": "Sixteen PMP entries hold seven enclaves with one region each; the eighth enclave does not fit.",
  "seed": 9,
  "platform": {
    "max_entries": 16,
    "peripherals": [
      {"name": "s0", "kind": "sensor"}, {"name": "s1", "kind": "sensor"},
      {"name": "s2", "kind": "sensor"}, {"name": "s3", "kind": "sensor"},
      {"name": "s4", "kind": "sensor"}, {"name": "s5", "kind": "sensor"},
      {"name": "s6", "kind": "sensor"}, {"name": "s7", "kind": "sensor"}
    ]
  },
  "actions": [
    {"op": "os.create_enclave", "as": "c0", "kind": "CE", "label": "c0"},
    {"op": "os.connect", "a": "c0", "b": "s0", "label": "r0"},
    {"op": "os.create_enclave", "as": "c1", "kind": "CE", "label": "c1"},
    {"op": "os.connect", "a": "c1", "b": "s1", "label": "r1"},
    {"op": "os.create_enclave", "as": "c2", "kind": "CE", "label": "c2"},
    {"op": "os.connect", "a": "c2", "b": "s2", "label": "r2"},
    {"op": "os.create_enclave", "as": "c3", "kind": "CE", "label": "c3"},
    {"op": "os.connect", "a": "c3", "b": "s3", "label": "r3"},
    {"op": "os.create_enclave", "as": "c4", "kind": "CE", "label": "c4"},
    {"op": "os.connect", "a": "c4", "b": "s4", "label": "r4"},
    {"op": "os.create_enclave", "as": "c5", "kind": "CE", "label": "c5"},
    {"op": "os.connect", "a": "c5", "b": "s5", "label": "r5"},
    {"op": "os.create_enclave", "as": "c6", "kind": "CE", "label": "c6"},
    {"op": "os.connect", "a": "c6", "b": "s6", "label": "r6"},
    {"op": "os.create_enclave", "as": "c7", "kind": "CE", "label": "c7"}
  ],
  "assertions": [
    {"kind": "expect_ok", "action": "c0"}, {"kind": "expect_ok", "action": "r0"},
    {"kind": "expect_ok", "action": "c1"}, {"kind": "expect_ok", "action": "r1"},
    {"kind": "expect_ok", "action": "c2"}, {"kind": "expect_ok", "action": "r2"},
    {"kind": "expect_ok", "action": "c3"}, {"kind": "expect_ok", "action": "r3"},
    {"kind": "expect_ok", "action": "c4"}, {"kind": "expect_ok", "action": "r4"},
    {"kind": "expect_ok", "action": "c5"}, {"kind": "expect_ok", "action": "r5"},
    {"kind": "expect_ok", "action": "c6"}, {"kind": "expect_ok", "action": "r6"},
    {"kind": "expect_error", "action": "c7", "error": "NoFreeEntry"}
  ]
})json";

constexpr std::string_view kPmpBudgetSmall = R"json({
  "name": "pmp-budget-small",
  "category": "benign",
  "description": "Eight PMP entries hold three enclaves with one region each.",
  "seed": 10,
  "platform": {
    "max_entries": 8,
    "peripherals": [
      {"name": "s0", "kind": "sensor"}, {"name": "s1", "kind": "sensor"},
      {"name": "s2", "kind": "sensor"}, {"name": "s3", "kind": "sensor"}
    ]
  },
  "actions": [
    {"op": "os.create_enclave", "as": "c0", "kind": "CE", "label": "c0"},
    {"op": "os.connect", "a": "c0", "b": "s0", "label": "r0"},
    {"op": "os.create_enclave", "as": "c1", "kind": "CE", "label": "c1"},
    {"op": "os.connect", "a": "c1", "b": "s1", "label": "r1"},
    {"op": "os.create_enclave", "as": "c2", "kind": "CE", "label": "c2"},
    {"op": "os.connect", "a": "c2", "b": "s2", "label": "r2"},
    {"op": "os.create_enclave", "as": "c3", "kind": "CE", "label": "c3"}
  ],
  "assertions": [
    {"kind": "expect_ok", "action": "c0"}, {"kind": "expect_ok", "action": "r0"},
    {"kind": "expect_ok", "action": "c1"}, {"kind": "expect_ok", "action": "r1"},
    {"kind": "expect_ok", "action": "c2"}, {"kind": "expect_ok", "action": "r2"},
    {"kind": "expect_error", "action": "c3", "error": "NoFreeEntry"}
  ]
})json";

constexpr std::string_view kToctou = R"json({
  "name": "toctou-identifier-reuse",
  "category": "attack",
  "description": "After attestation the adversary relaunches B and then A under their old identifiers; the replacement cannot unwrap the provisioned secret. Needs identifier reuse.",
  "seed": 11,
  "platform": {"id_policy": "reuse"},
  "actions": [
    {"op": "os.create_enclave", "as": "A", "kind": "AE", "code": "client-app"},
    {"op": "os.create_enclave", "as": "B", "kind": "CE", "code": "service-b"},
    {"op": "os.connect", "a": "A", "b": "B", "as": "link"},
    {"op": "verifier.attest", "ae": "A", "label": "attest"},
    {"op": "adversary.relaunch_with_same_id", "enclave": "B", "label": "relaunch_b"},
    {"op": "adversary.relaunch_with_same_id", "enclave": "A", "code": "client-app-evil", "label": "relaunch_a"},
    {"op": "verifier.provision_secret", "ae": "A", "label": "provision"},
    {"op": "adversary.replay_report", "ae": "A", "from": "attest", "label": "replay"},
    {"op": "verifier.attest", "ae": "A", "label": "reattest"}
  ],
  "assertions": [
    {"kind": "expect_verdict", "action": "attest", "verdict": "Accept"},
    {"kind": "expect_trace_present", "pattern": {"operation": "relaunch_with_same_id", "result": "same-id"}},
    {"kind": "expect_error", "action": "provision", "error": "failed"},
    {"kind": "expect_attack_detected", "via": "verifier.provision_secret"},
    {"kind": "expect_verdict", "action": "replay", "verdict": "Reject(NonceMismatch)"},
    {"kind": "expect_verdict", "action": "reattest", "verdict": "Reject(MeasurementMismatch)"}
  ]
})json";

constexpr std::string_view kLinkMismatch = R"json({
  "name": "link-mismatch-attestation",
  "category": "attack",
  "description": "The OS relays the report of a controller that is not linked to the attested application.",
  "seed": 12,
  "actions": [
    {"op": "os.create_enclave", "as": "ae", "code": "app"},
    {"op": "os.create_enclave", "as": "other", "code": "other-app"},
    {"op": "os.create_enclave", "as": "ce1", "kind": "CE", "code": "controller"},
    {"op": "os.create_enclave", "as": "ce2", "kind": "CE", "code": "controller"},
    {"op": "os.connect", "a": "ae", "b": "ce1"},
    {"op": "os.connect", "a": "other", "b": "ce2"},
    {"op": "verifier.attest", "ae": "ae", "label": "honest"},
    {"op": "verifier.attest", "ae": "ae", "relay": {"ce1": "ce2"}, "label": "swapped"}
  ],
  "assertions": [
    {"kind": "expect_verdict", "action": "honest", "verdict": "Accept"},
    {"kind": "expect_verdict", "action": "swapped", "verdict": "Reject(LinkMismatch)"},
    {"kind": "expect_attack_detected"}
  ]
})json";

constexpr std::string_view kForgedCert = R"json({
  "name": "forged-peripheral-cert",
  "category": "attack",
  "description": "A device with a certificate from an untrusted manufacturer fails local and remote attestation.",
  "seed": 13,
  "platform": {
    "peripherals": [{"name": "fake0", "kind": "sensor", "manufacturer": "counterfeit"}]
  },
  "actions": [
    {"op": "os.create_enclave", "as": "ae", "code": "app"},
    {"op": "os.create_enclave", "as": "ce", "kind": "CE", "code": "sensor-controller"},
    {"op": "os.connect", "a": "ce", "b": "fake0"},
    {"op": "os.connect", "a": "ae", "b": "ce"},
    {"op": "ce.attach", "controller": "ce", "peripheral": "fake0", "label": "attach"},
    {"op": "ae.call", "ae": "ae", "ce": "ce", "request": "read", "label": "read"},
    {"op": "verifier.attest", "ae": "ae", "label": "attest"}
  ],
  "assertions": [
    {"kind": "expect_error", "action": "attach", "error": "Fail"},
    {"kind": "expect_error", "action": "read", "error": "NotAttested"},
    {"kind": "expect_verdict", "action": "attest", "verdict": "Reject(PeripheralCertInvalid)"},
    {"kind": "expect_trace_absent", "pattern": {"operation": "ce_handle_request", "result": "ok"}}
  ]
})json";

constexpr std::string_view kCeKilled = R"json({
  "name": "ce-killed-cascade",
  "category": "attack",
  "description": "Killing a controller protects both application buffers, notifies both applications and resets the device.",
  "seed": 14,
  "platform": {
    "peripherals": [{"name": "sensor0", "kind": "sensor"}]
  },
  "actions": [
    {"op": "os.create_enclave", "as": "ae1", "code": "app"},
    {"op": "os.create_enclave", "as": "ae2", "code": "app"},
    {"op": "os.create_enclave", "as": "ce", "kind": "CE", "code": "sensor-controller"},
    {"op": "os.connect", "a": "ce", "b": "sensor0", "as": "ce_dev"},
    {"op": "os.connect", "a": "ae1", "b": "ce", "as": "l1"},
    {"op": "os.connect", "a": "ae2", "b": "ce", "as": "l2"},
    {"op": "ce.attach", "controller": "ce", "peripheral": "sensor0"},
    {"op": "ae.call", "ae": "ae1", "ce": "ce", "request": "read", "label": "before"},
    {"op": "os.destroy_enclave", "enclave": "ce"},
    {"op": "os.read", "region": "l1", "len": 32, "label": "stale_read"},
    {"op": "ae.call", "ae": "ae1", "ce": "ce", "request": "read", "label": "after_kill"},
    {"op": "os.sync_disconnect", "region": "l1"},
    {"op": "os.read", "region": "l1", "len": 32, "label": "released_read"},
    {"op": "ae.call", "ae": "ae1", "ce": "ce", "request": "read", "label": "after_release"},
    {"op": "verifier.attest", "ae": "ae2", "label": "attest"}
  ],
  "assertions": [
    {"kind": "expect_ok", "action": "before"},
    {"kind": "expect_error", "action": "stale_read", "error": "AccessFault"},
    {"kind": "expect_error", "action": "after_kill", "error": "DisconnectedError"},
    {"kind": "expect_bytes", "action": "released_read", "zero": true},
    {"kind": "expect_error", "action": "after_release", "error": "DisconnectedError"},
    {"kind": "expect_verdict", "action": "attest", "verdict": "Reject(LinkMismatch)"},
    {"kind": "expect_trace_present", "pattern": {"operation": "async_disconnect_enclaves", "args": {"survivor": "peripheral:1"}}},
    {"kind": "expect_trace_present", "pattern": {"operation": "async_disconnect_enclaves", "args": {"survivor": "enclave:2"}}}
  ]
})json";

constexpr std::string_view kReplug = R"json({
  "name": "peripheral-replug-cascade",
  "category": "attack",
  "description": "A replugged device with new firmware invalidates the controller's attestation and every application is told.",
  "seed": 15,
  "platform": {
    "peripherals": [{"name": "kbd0", "kind": "keyboard"}]
  },
  "actions": [
    {"op": "os.create_enclave", "as": "ae1", "code": "app"},
    {"op": "os.create_enclave", "as": "ae2", "code": "app"},
    {"op": "os.create_enclave", "as": "ce", "kind": "CE", "code": "kbd-controller"},
    {"op": "os.connect", "a": "ce", "b": "kbd0", "as": "ce_dev"},
    {"op": "os.connect", "a": "ae1", "b": "ce"},
    {"op": "os.connect", "a": "ae2", "b": "ce"},
    {"op": "ce.attach", "controller": "ce", "peripheral": "kbd0"},
    {"op": "env.inject_key", "peripheral": "kbd0", "key": 30},
    {"op": "ae.call", "ae": "ae1", "ce": "ce", "request": "read", "label": "first_key"},
    {"op": "env.unplug", "peripheral": "kbd0"},
    {"op": "env.replug", "peripheral": "kbd0", "firmware": "kbd-firmware-2.0", "version": "2.0"},
    {"op": "ae.call", "ae": "ae1", "ce": "ce", "request": "read", "label": "stale"},
    {"op": "os.schedule", "enclave": "ae2"},
    {"op": "os.sync_disconnect", "region": "ce_dev"},
    {"op": "os.schedule", "enclave": "ce"},
    {"op": "os.connect", "a": "ce", "b": "kbd0", "as": "ce_dev2", "label": "reconnect"},
    {"op": "ce.attach", "controller": "ce", "peripheral": "kbd0", "label": "reattach"},
    {"op": "ae.call", "ae": "ae1", "ce": "ce", "request": "read", "label": "fresh"},
    {"op": "verifier.attest", "ae": "ae1", "label": "old_policy"},
    {"op": "verifier.attest", "ae": "ae1", "firmware_versions": ["2.0"], "label": "new_policy"}
  ],
  "assertions": [
    {"kind": "expect_bytes", "action": "first_key", "hex": "011e"},
    {"kind": "expect_error", "action": "stale", "error": "NotAttested"},
    {"kind": "expect_trace_present", "pattern": {"actor": "enclave:3", "operation": "notify_connected", "args": {"kind": "PeripheralFirmwareChanged"}}},
    {"kind": "expect_trace_present", "pattern": {"operation": "enter_enclave", "args": {"id": "enclave:2", "delivered": 1}}},
    {"kind": "expect_ok", "action": "reconnect"},
    {"kind": "expect_ok", "action": "reattach"},
    {"kind": "expect_ok", "action": "fresh"},
    {"kind": "expect_verdict", "action": "old_policy", "verdict": "Reject(FirmwareMismatch)"},
    {"kind": "expect_verdict", "action": "new_policy", "verdict": "Accept"}
  ]
})json";

constexpr std::string_view kExclusiveReset = R"json({
  "name": "exclusive-session-reset",
  "category": "benign",
  "description": "A sensor serving two applications is reset between their sessions; an accelerator runs them in parallel.",
  "seed": 16,
  "platform": {
    "peripherals": [
      {"name": "sensor0", "kind": "sensor"},
      {"name": "acc0", "kind": "accelerator", "dma": true}
    ]
  },
  "actions": [
    {"op": "os.create_enclave", "as": "ae1", "code": "app"},
    {"op": "os.create_enclave", "as": "ae2", "code": "app"},
    {"op": "os.create_enclave", "as": "cs", "kind": "CE", "code": "sensor-controller"},
    {"op": "os.create_enclave", "as": "ca", "kind": "CE", "code": "accel-controller"},
    {"op": "os.connect", "a": "cs", "b": "sensor0"},
    {"op": "os.connect", "a": "ca", "b": "acc0", "label": "dma"},
    {"op": "os.connect", "a": "ae1", "b": "cs"},
    {"op": "os.connect", "a": "ae2", "b": "cs"},
    {"op": "os.connect", "a": "ae1", "b": "ca"},
    {"op": "os.connect", "a": "ae2", "b": "ca"},
    {"op": "ce.attach", "controller": "cs", "peripheral": "sensor0"},
    {"op": "ce.attach", "controller": "ca", "peripheral": "acc0"},
    {"op": "ae.call", "ae": "ae1", "ce": "cs", "request": "read"},
    {"op": "ae.call", "ae": "ae2", "ce": "cs", "request": "read"},
    {"op": "ae.call", "ae": "ae1", "ce": "ca", "request": "submit", "text": "alpha"},
    {"op": "ae.call", "ae": "ae2", "ce": "ca", "request": "submit", "text": "beta"},
    {"op": "ae.call", "ae": "ae1", "ce": "ca", "request": "result", "label": "r1"},
    {"op": "ae.call", "ae": "ae2", "ce": "ca", "request": "result", "label": "r2"}
  ],
  "assertions": [
    {"kind": "expect_ok", "action": "dma"},
    {"kind": "expect_trace_present", "pattern": {"actor": "enclave:3", "operation": "send_frame", "args": {"type": 4}}},
    {"kind": "expect_trace_absent", "pattern": {"actor": "enclave:4", "operation": "send_frame", "args": {"type": 4}}},
    {"kind": "expect_bytes", "action": "r1", "hex": "8ac625bb85ed202b0000000000000005"},
    {"kind": "expect_bytes", "action": "r2", "hex": "7627619b954620a70000000000000004"}
  ]
})json";

constexpr std::string_view kControllerEcho = R"json({
  "name": "controller-echo",
  "category": "benign",
  "description": "Request and reply marshalling through a controller without a device.",
  "seed": 17,
  "actions": [
    {"op": "os.create_enclave", "as": "ae", "code": "app"},
    {"op": "os.create_enclave", "as": "ce", "kind": "CE", "code": "echo-controller"},
    {"op": "ae.call", "ae": "ae", "ce": "ce", "text": "too early", "label": "unconnected"},
    {"op": "os.connect", "a": "ae", "b": "ce", "as": "link"},
    {"op": "ae.call", "ae": "ae", "ce": "ce", "text": "hello controller", "label": "echo"},
    {"op": "ae.call", "ae": "ae", "ce": "ce", "fill": 171, "len": 200, "label": "wrap"},
    {"op": "ae.call", "ae": "ae", "ce": "ce", "fill": 205, "len": 1500, "label": "wrap2"}
  ],
  "assertions": [
    {"kind": "expect_error", "action": "unconnected", "error": "NotConnected"},
    {"kind": "expect_bytes", "action": "echo", "text": "hello controller"},
    {"kind": "expect_ok", "action": "wrap"},
    {"kind": "expect_ok", "action": "wrap2"}
  ]
})json";

constexpr std::string_view kAll[] = {
    kSunnyDay,       kMaliciousOsRead,  kOverlapConnect, kThirdPartyConnect,
    kStaleBuffer,    kConnectBeforeSync, kFlushOnDestroy, kRogueDma,
    kPmpBudget,      kPmpBudgetSmall,   kToctou,         kLinkMismatch,
    kForgedCert,     kCeKilled,         kReplug,         kExclusiveReset,
    kControllerEcho,
};

}  // namespace

std::vector<Scenario> builtin_corpus() {
  std::vector<Scenario> out;
  for (std::string_view doc : kAll) {
    auto s = parse_scenario(doc);
    if (!s) throw std::logic_error("builtin scenario: " + s.error().detail);
    out.push_back(std::move(*s));
  }
  return out;
}

}  // namespace pie::harness
