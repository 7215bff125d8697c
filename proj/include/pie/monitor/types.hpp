// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pie/attestation/measurement.hpp"
#include "pie/common/bytes.hpp"
#include "pie/platform/memory.hpp"

namespace pie::monitor {

using platform::MemRange;
using platform::PhysAddr;

struct EntityId {
  enum class Kind : std::uint8_t { Os = 0, Enclave = 1, Peripheral = 2 };

  Kind kind = Kind::Os;
  std::uint64_t id = 0;

  static constexpr EntityId os() { return {Kind::Os, 0}; }
  static constexpr EntityId enclave(std::uint64_t id) {
    return {Kind::Enclave, id};
  }
  static constexpr EntityId peripheral(std::uint64_t id) {
    return {Kind::Peripheral, id};
  }

  constexpr bool is_os() const { return kind == Kind::Os; }
  constexpr bool is_enclave() const { return kind == Kind::Enclave; }
  constexpr bool is_peripheral() const { return kind == Kind::Peripheral; }

  constexpr auto operator<=>(const EntityId&) const = default;
};

/// "OS", "enclave:<n>" or "peripheral:<n>".
std::string to_string(EntityId id);
std::optional<EntityId> entity_from_string(std::string_view s);
/// 9 bytes: kind, then the id as 8-byte big-endian.
Bytes encode(EntityId id);
std::optional<EntityId> decode_entity(ByteView bytes);

using RegionId = std::uint64_t;

enum class EnclaveState { Idle, Running, Paused, Destroyed };
enum class EnclaveKind { Application, Controller };

std::string_view to_string(EnclaveState state);
std::string_view to_string(EnclaveKind kind);

enum class NotificationKind {
  PeerDestroyed,
  SyncDisconnected,
  PeripheralReattached,
  PeripheralFirmwareChanged,
};

std::string_view to_string(NotificationKind kind);

struct Notification {
  NotificationKind kind;
  RegionId region = 0;
  EntityId peer;
  bool operator==(const Notification&) const = default;
};

struct Connection {
  EntityId peer;
  RegionId region = 0;
  bool operator==(const Connection&) const = default;
};

struct EnclaveDescriptor {
  EntityId id;
  EnclaveState state = EnclaveState::Idle;
  EnclaveKind kind = EnclaveKind::Application;
  MemRange private_range;
  attestation::Measurement measurement;
  Digest config_digest{};
  /// Ordered by region id.
  std::vector<Connection> connections;
  /// Queued by the monitor, moved to `delivered` on the next entry.
  std::deque<Notification> pending_events;
  /// What the enclave has seen but not yet consumed.
  std::vector<Notification> delivered;
  std::size_t pmp_index = 0;
};

enum class RegionStatus { Shared, SoleOwned, Freed };

std::string_view to_string(RegionStatus status);

/// A one-to-one shared buffer. In Shared status both `a` and `b` are parties;
/// in SoleOwned status only `a` (the survivor) is.
struct SharedRegion {
  RegionId id = 0;
  MemRange range;
  RegionStatus status = RegionStatus::Shared;
  EntityId a;
  EntityId b;
  std::optional<std::size_t> pmp_index;

  bool live() const { return status != RegionStatus::Freed; }
  bool has_party(EntityId e) const {
    if (status == RegionStatus::Shared) return a == e || b == e;
    if (status == RegionStatus::SoleOwned) return a == e;
    return false;
  }
  /// The other party of a Shared region.
  EntityId peer_of(EntityId e) const { return a == e ? b : a; }
};

enum class IdPolicy { Monotonic, Reuse };

std::string_view to_string(IdPolicy policy);
std::optional<IdPolicy> id_policy_from_string(std::string_view s);

}  // namespace pie::monitor
