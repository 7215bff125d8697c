// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>

#include "pie/common/bytes.hpp"
#include "pie/common/result.hpp"
#include "pie/monitor/monitor.hpp"

namespace pie::progmodel {

using monitor::EntityId;
using platform::MemRange;

/// AE<->CE request/reply plumbing over one shared region.
///
/// The region is split into two equal halves: the lower one carries
/// requests (AE writes, CE reads), the upper one replies. Each half is a
/// byte ring:
///
///   [0..7]   head, u64 BE: total bytes consumed so far
///   [8..15]  tail, u64 BE: total bytes produced so far
///   [16..]   data area of (half - 16) bytes, used modulo its size
///
/// A record is u32 BE payload length, u32 BE request id, then the payload.
/// Records may wrap around the end of the data area. The region is
/// zero-filled on connect, so both rings start empty.
inline constexpr std::uint64_t kRingHeader = 16;
inline constexpr std::uint64_t kRecordHeader = 8;
/// Smallest region that still carries an empty record in each direction.
inline constexpr std::uint64_t kMinRegionSize = 2 * (kRingHeader + 64);

struct RingRecord {
  std::uint32_t request_id = 0;
  Bytes payload;
  bool operator==(const RingRecord&) const = default;
};

enum class RingSide { Request, Reply };

MemRange ring_half(const MemRange& region, RingSide side);

/// All accesses go through the monitor's PMP check as `ctx`, which must be
/// the running context.
class Ring {
 public:
  Ring(monitor::Monitor& sm, EntityId ctx, MemRange half)
      : sm_(sm), ctx_(ctx), half_(half) {}

  std::uint64_t capacity() const { return half_.size - kRingHeader; }

  /// InvalidArgument if the record does not fit in the free space.
  Status push(std::uint32_t request_id, ByteView payload);
  /// nullopt when empty. ParseError on a corrupt length.
  Result<std::optional<RingRecord>> pop();

 private:
  Result<std::pair<std::uint64_t, std::uint64_t>> indices();
  Status write_wrapped(std::uint64_t pos, ByteView bytes);
  Result<Bytes> read_wrapped(std::uint64_t pos, std::uint64_t len);

  monitor::Monitor& sm_;
  EntityId ctx_;
  MemRange half_;
};

}  // namespace pie::progmodel
