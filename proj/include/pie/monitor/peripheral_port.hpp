// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>

#include "pie/common/bytes.hpp"
#include "pie/monitor/types.hpp"

namespace pie::monitor {

/// What the monitor needs from an attached device. Implemented by the
/// peripheral models; the monitor never sees firmware internals.
class PeripheralPort {
 public:
  virtual ~PeripheralPort() = default;

  /// The device's signed view of its DMA window: base (8 bytes BE),
  /// size (8 bytes BE), then a signature over those 16 bytes.
  virtual Bytes query_dma_config() = 0;

  /// The peer on `region` is gone; the device keeps sole ownership.
  virtual void on_peer_lost(RegionId region, EntityId peer) = 0;

  /// `region` was zeroed and released by a synchronous disconnect.
  virtual void on_region_freed(RegionId region) = 0;
};

/// Registration data for a device, taken from its certificate.
struct PeripheralInfo {
  std::string name;
  bool dma_capable = false;
  /// Device-tree range of MMIO devices.
  std::optional<MemRange> mmio_range;
  Bytes public_key;
  Digest firmware_digest{};
};

}  // namespace pie::monitor
