// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pie/attestation/report.hpp"
#include "pie/attestation/verifier.hpp"
#include "pie/common/trace.hpp"
#include "pie/crypto/provider.hpp"
#include "pie/harness/scenario.hpp"
#include "pie/monitor/monitor.hpp"
#include "pie/peripherals/peripheral.hpp"
#include "pie/platform/device_tree.hpp"
#include "pie/platform/memory.hpp"
#include "pie/progmodel/runtime.hpp"

namespace pie::harness {

using monitor::EntityId;
using monitor::RegionId;
using platform::MemRange;

inline constexpr std::uint64_t kDefaultEnclaveSize = 0x4000;
inline constexpr std::uint64_t kDefaultRegionSize = 0x1000;
/// The verifier-provisioned secret sits in the last bytes of the private
/// range.
inline constexpr std::uint64_t kSecretSlot = 32;

struct ActionOutcome {
  std::size_t index = 0;
  std::string op;
  /// False if the underlying operation failed or was refused.
  bool ok = true;
  /// "ok", an error name, a verdict ("Accept", "Reject(...)"), "Fail(...)"
  /// for local attestation, "recovered"/"failed" for provisioning.
  std::string result = "ok";
  std::string detail;
  Bytes data;
  std::optional<attestation::Verdict> verdict;
};

/// One complete simulated platform: device tree, memory, monitor, devices,
/// enclave runtime and a remote verifier. Actions use the scenario action
/// format and symbolic names.
class Simulation {
 public:
  /// ScenarioInvalid if the platform description does not hold together.
  static Result<std::unique_ptr<Simulation>> create(const PlatformSpec& spec,
                                                    std::uint64_t seed);

  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  /// ScenarioInvalid for unresolved names or malformed arguments; every
  /// simulated failure is reported inside the outcome instead.
  Result<ActionOutcome> execute(const Action& action);
  Result<ActionOutcome> execute(const nlohmann::json& action);

  const std::vector<ActionOutcome>& outcomes() const { return outcomes_; }
  const Trace& trace() const { return trace_; }
  monitor::Monitor& sm() { return *sm_; }
  peripherals::PeripheralBus& bus() { return *bus_; }
  progmodel::Runtime& runtime() { return *runtime_; }
  crypto::CryptoProvider& provider() { return *provider_; }
  const crypto::KeyPair& platform_key() const { return platform_key_; }
  const PlatformSpec& spec() const { return spec_; }

  std::optional<EntityId> entity(const std::string& name) const;
  std::optional<RegionId> region(const std::string& name) const;
  /// Private range of the enclave currently or last bound to `name`.
  std::optional<MemRange> enclave_range(const std::string& name) const;
  /// Encoded reports of the last verifier.attest run, AE first.
  const std::vector<Bytes>& last_reports() const { return last_reports_; }

  /// Reads without a PMP check (the harness is not a platform party).
  Result<Bytes> inspect(const MemRange& range) const;

  /// Resolves an address target: {"addr","len"}, {"region","offset","len"},
  /// {"enclave","offset","len"} or {"sm":true,...}.
  Result<MemRange> target(const nlohmann::json& args,
                          std::uint64_t default_len) const;

 private:
  struct EnclaveRecord {
    EntityId id;
    monitor::EnclaveKind kind;
    std::string code;
    std::string config;
    MemRange range;
  };
  struct VerifierSession {
    EntityId subject;
    Digest secret{};
  };
  struct AttestRun {
    std::string subject;
    attestation::VerificationPolicy policy;
    std::vector<Bytes> reports;
  };
  struct DeviceRecord {
    PeripheralSpec spec;
    EntityId id;
    int generation = 0;
    std::optional<std::int64_t> lie_shift;
  };

  Simulation(PlatformSpec spec, std::uint64_t seed);
  Status boot();

  // Action handlers; `o` is prefilled with index and op.
  Status do_create(const nlohmann::json& a, ActionOutcome& o);
  Status do_destroy(const nlohmann::json& a, ActionOutcome& o);
  Status do_connect(const nlohmann::json& a, ActionOutcome& o);
  Status do_sync_disconnect(const nlohmann::json& a, ActionOutcome& o);
  Status do_os_access(const nlohmann::json& a, ActionOutcome& o, bool write);
  Status do_enclave_access(const nlohmann::json& a, ActionOutcome& o,
                           bool write);
  Status do_schedule(const nlohmann::json& a, ActionOutcome& o);
  Status do_pause(const nlohmann::json& a, ActionOutcome& o, bool pause);
  Status do_ce_attach(const nlohmann::json& a, ActionOutcome& o);
  Status do_ae_call(const nlohmann::json& a, ActionOutcome& o);
  Status do_env(const nlohmann::json& a, ActionOutcome& o);
  Status do_unplug(const nlohmann::json& a, ActionOutcome& o);
  Status do_replug(const nlohmann::json& a, ActionOutcome& o);
  Status do_lie_dma(const nlohmann::json& a, ActionOutcome& o);
  Status do_dma_access(const nlohmann::json& a, ActionOutcome& o, bool write);
  Status do_attest(const nlohmann::json& a, ActionOutcome& o);
  Status do_provision(const nlohmann::json& a, ActionOutcome& o);
  Status do_relaunch(const nlohmann::json& a, ActionOutcome& o);
  Status do_replay(const nlohmann::json& a, ActionOutcome& o);

  Result<EntityId> need_entity(const nlohmann::json& a, const char* key) const;
  Result<EntityId> need_enclave(const nlohmann::json& a, const char* key) const;
  Result<DeviceRecord*> need_device(const nlohmann::json& a, const char* key);
  Result<RegionId> need_region(const nlohmann::json& a, const char* key) const;
  Result<MemRange> allocate(std::uint64_t size);
  std::unique_ptr<peripherals::Peripheral> build_device(DeviceRecord& rec);
  attestation::PeripheralCertificate certify(const PeripheralSpec& spec,
                                             const crypto::KeyPair& device);
  attestation::VerificationPolicy default_policy(const nlohmann::json& a,
                                                 const std::string& subject);
  void fail(ActionOutcome& o, const Error& e);

  PlatformSpec spec_;
  std::uint64_t seed_;
  std::unique_ptr<crypto::CryptoProvider> provider_;
  std::optional<platform::DeviceTree> tree_;
  std::optional<platform::PhysicalMemory> memory_;
  Trace trace_;
  std::unique_ptr<monitor::Monitor> sm_;
  std::unique_ptr<peripherals::PeripheralBus> bus_;
  std::unique_ptr<progmodel::Runtime> runtime_;
  crypto::KeyPair platform_key_;
  std::map<std::string, crypto::KeyPair> manufacturers_;

  std::map<std::string, EnclaveRecord> enclaves_;
  /// Code a name was first created with: what the verifier expects.
  std::map<std::string, std::pair<std::string, std::string>> expected_;
  std::map<std::string, RegionId> regions_;
  std::map<std::string, DeviceRecord> devices_;
  std::map<std::string, VerifierSession> sessions_;
  std::map<std::string, AttestRun> attest_runs_;
  std::vector<Bytes> last_reports_;
  std::uint64_t next_free_ = 0;
  std::uint64_t alloc_end_ = 0;
  std::vector<ActionOutcome> outcomes_;
};

}  // namespace pie::harness
