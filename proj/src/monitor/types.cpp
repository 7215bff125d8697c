// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "pie/monitor/types.hpp"

#include <charconv>

namespace pie::monitor {

std::string to_string(EntityId id) {
  switch (id.kind) {
    case EntityId::Kind::Os: return "OS";
    case EntityId::Kind::Enclave: return "enclave:" + std::to_string(id.id);
    case EntityId::Kind::Peripheral:
      return "peripheral:" + std::to_string(id.id);
  }
  return "?";
}

std::optional<EntityId> entity_from_string(std::string_view s) {
  if (s == "OS") return EntityId::os();
  auto parse_tail = [&](std::string_view prefix) -> std::optional<std::uint64_t> {
    if (s.substr(0, prefix.size()) != prefix) return std::nullopt;
    auto tail = s.substr(prefix.size());
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), v);
    if (ec != std::errc() || p != tail.data() + tail.size() || tail.empty())
      return std::nullopt;
    return v;
  };
  if (auto v = parse_tail("enclave:")) return EntityId::enclave(*v);
  if (auto v = parse_tail("peripheral:")) return EntityId::peripheral(*v);
  return std::nullopt;
}

Bytes encode(EntityId id) {
  Bytes out{static_cast<std::uint8_t>(id.kind)};
  put_be64(out, id.id);
  return out;
}

std::optional<EntityId> decode_entity(ByteView bytes) {
  if (bytes.size() != 9 || bytes[0] > 2) return std::nullopt;
  return EntityId{static_cast<EntityId::Kind>(bytes[0]),
                  get_be64(bytes.subspan(1))};
}

std::string_view to_string(EnclaveState state) {
  switch (state) {
    case EnclaveState::Idle: return "Idle";
    case EnclaveState::Running: return "Running";
    case EnclaveState::Paused: return "Paused";
    case EnclaveState::Destroyed: return "Destroyed";
  }
  return "?";
}

std::string_view to_string(EnclaveKind kind) {
  return kind == EnclaveKind::Application ? "AE" : "CE";
}

std::string_view to_string(NotificationKind kind) {
  switch (kind) {
    case NotificationKind::PeerDestroyed: return "PeerDestroyed";
    case NotificationKind::SyncDisconnected: return "SyncDisconnected";
    case NotificationKind::PeripheralReattached: return "PeripheralReattached";
    case NotificationKind::PeripheralFirmwareChanged:
      return "PeripheralFirmwareChanged";
  }
  return "?";
}

std::string_view to_string(RegionStatus status) {
  switch (status) {
    case RegionStatus::Shared: return "Shared";
    case RegionStatus::SoleOwned: return "SoleOwned";
    case RegionStatus::Freed: return "Freed";
  }
  return "?";
}

std::string_view to_string(IdPolicy policy) {
  return policy == IdPolicy::Monotonic ? "monotonic" : "reuse";
}

std::optional<IdPolicy> id_policy_from_string(std::string_view s) {
  if (s == "monotonic") return IdPolicy::Monotonic;
  if (s == "reuse") return IdPolicy::Reuse;
  return std::nullopt;
}

}  // namespace pie::monitor
