// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "pie/common/result.hpp"
#include "pie/common/trace.hpp"
#include "pie/crypto/provider.hpp"
#include "pie/monitor/peripheral_port.hpp"
#include "pie/monitor/types.hpp"
#include "pie/platform/device_tree.hpp"
#include "pie/platform/memory.hpp"
#include "pie/pmp/pmp.hpp"

namespace pie::monitor {

struct MonitorConfig {
  std::size_t max_entries = pmp::PmpConfig::kDefaultEntries;
  IdPolicy id_policy = IdPolicy::Monotonic;
  /// Memory reserved for the monitor itself; must lie in dram.
  MemRange sm_range{PhysAddr{0x8000'0000}, 2 * 1024 * 1024};
  Bytes sm_image = to_bytes("pie-security-monitor-v1");
};

struct PeripheralRecord {
  EntityId id;
  PeripheralInfo info;
  PeripheralPort* port = nullptr;
  bool attached = true;
  /// Enclaves that ever held a region with this device; they hear about
  /// replugs.
  std::set<EntityId> bound_enclaves;
};

/// The security monitor. Owns the PMP table and all enclave and region
/// bookkeeping; the OS reaches it only through the public calls below.
///
/// PMP layout: entry 0 covers the monitor's own memory and grants nothing,
/// the last entry is the OS background entry over the whole platform span
/// (lowest priority), and every enclave and every non-freed region takes one
/// entry in between. A context switch recomputes every entry's permissions
/// for the entity that is about to run.
class Monitor {
 public:
  Monitor(const platform::DeviceTree& device_tree,
          platform::PhysicalMemory& memory, crypto::CryptoProvider& provider,
          MonitorConfig config = {}, Trace* trace = nullptr);

  Monitor(const Monitor&) = delete;
  Monitor& operator=(const Monitor&) = delete;

  // Enclave life cycle.
  Result<EntityId> create_enclave(ByteView code, ByteView config,
                                  MemRange private_range, EnclaveKind kind);
  Status destroy_enclave(EntityId id);
  Status enter_enclave(EntityId id);
  Status exit_to_os();
  Status pause(EntityId id);
  Status resume(EntityId id);

  // Peripherals. Attach/unplug/replug are environment events.
  Result<EntityId> attach_peripheral(PeripheralInfo info, PeripheralPort* port);
  Status unplug_peripheral(EntityId peripheral);
  Status replug_peripheral(EntityId peripheral, Digest firmware_digest,
                           Bytes public_key);

  // Shared memory.
  Result<RegionId> connect_enclaves(EntityId a, EntityId b, MemRange range);
  Status async_disconnect_enclaves(RegionId region, EntityId dead);
  Status sync_disconnect_enclaves(RegionId region);
  /// Verified iff ok(). Errors: Mismatch, SignatureInvalid, NotDmaCapable.
  Status verify_dma_region(EntityId peripheral, EntityId enclave,
                           MemRange claimed);

  // Memory access through the PMP. `ctx` must be the running context (OS or
  // the running enclave); EntityId::os() while an enclave runs is BadState.
  Result<Bytes> checked_read(EntityId ctx, PhysAddr addr, std::uint64_t len);
  Status checked_write(EntityId ctx, PhysAddr addr, ByteView bytes);
  /// Device-side access. Only ranges of regions the device is a party of are
  /// reachable.
  Result<Bytes> peripheral_read(EntityId peripheral, PhysAddr addr,
                                std::uint64_t len);
  Status peripheral_write(EntityId peripheral, PhysAddr addr, ByteView bytes);
  /// Machine-mode read, used by tests and the harness.
  Result<Bytes> sm_read(PhysAddr addr, std::uint64_t len) const;

  /// Lets the running enclave `from` forward a notification to every enclave
  /// it shares a live region with.
  Status notify_connected(EntityId from, NotificationKind kind, EntityId about);
  /// Drains the notifications delivered to `id` on its last entry.
  std::vector<Notification> take_delivered(EntityId id);

  // Queries.
  const EnclaveDescriptor* enclave(EntityId id) const;
  const SharedRegion* region(RegionId id) const;
  const PeripheralRecord* peripheral(EntityId id) const;
  std::vector<EntityId> live_enclaves() const;
  std::vector<RegionId> live_regions() const;
  const std::map<RegionId, SharedRegion>& regions() const { return regions_; }
  /// The live region between the two entities, if any.
  std::optional<RegionId> region_between(EntityId a, EntityId b) const;
  EntityId current() const { return current_; }
  const pmp::PmpConfig& pmp() const { return pmp_; }
  std::size_t free_entry_count() const { return pmp_.free_entry_count(); }
  const attestation::Measurement& sm_measurement() const {
    return sm_measurement_;
  }
  const MonitorConfig& config() const { return config_; }
  const platform::DeviceTree& device_tree() const { return device_tree_; }
  crypto::CryptoProvider& provider() const { return provider_; }
  /// Every range the OS must not reach: monitor memory, live private ranges,
  /// live regions.
  std::vector<MemRange> protected_ranges() const;

  /// Re-checks the structural invariants (one-to-one sharing, disjointness,
  /// entry accounting, connection-set consistency, single running enclave).
  Status check_invariants() const;

 private:
  std::uint64_t assign_identifier();
  EnclaveDescriptor* find_enclave(EntityId id);
  PeripheralRecord* find_peripheral(EntityId id);
  bool is_live(EntityId id) const;
  Status check_placement(const MemRange& range, bool allow_mmio) const;
  void apply_view(EntityId ctx);
  void queue(EntityId target, Notification n);
  void drop_connection(EntityId party, RegionId region);
  void free_region(SharedRegion& region);
  void record(std::string actor, std::string op, nlohmann::json args,
              const Status& status);
  pmp::Privilege privilege_of(EntityId ctx) const;

  const platform::DeviceTree& device_tree_;
  platform::PhysicalMemory& memory_;
  crypto::CryptoProvider& provider_;
  MonitorConfig config_;
  Trace* trace_;

  pmp::PmpConfig pmp_;
  std::size_t background_index_;
  attestation::Measurement sm_measurement_;
  EntityId current_ = EntityId::os();

  std::map<std::uint64_t, EnclaveDescriptor> enclaves_;
  std::map<RegionId, SharedRegion> regions_;
  std::map<std::uint64_t, PeripheralRecord> peripherals_;
  std::set<std::tuple<EntityId, EntityId, MemRange>> verified_dma_;
  std::uint64_t next_enclave_id_ = 1;
  std::uint64_t next_region_id_ = 1;
  std::uint64_t next_peripheral_id_ = 1;
};

}  // namespace pie::monitor
