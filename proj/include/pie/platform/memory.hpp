// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>

#include "pie/common/bytes.hpp"
#include "pie/common/result.hpp"

namespace pie::platform {

struct PhysAddr {
  std::uint64_t value = 0;

  constexpr auto operator<=>(const PhysAddr&) const = default;
  constexpr PhysAddr operator+(std::uint64_t offset) const {
    return PhysAddr{value + offset};
  }
};

std::string to_string(PhysAddr addr);

/// Half-open byte range [base, base + size).
struct MemRange {
  PhysAddr base;
  std::uint64_t size = 0;

  constexpr auto operator<=>(const MemRange&) const = default;

  /// size > 0 and base + size does not wrap.
  constexpr bool valid() const {
    return size > 0 &&
           size <= std::numeric_limits<std::uint64_t>::max() - base.value;
  }
  constexpr std::uint64_t end() const { return base.value + size; }

  constexpr bool contains(PhysAddr addr) const {
    return addr.value >= base.value && addr.value < end();
  }
  /// True iff [addr, addr + len) lies completely inside this range.
  constexpr bool contains(PhysAddr addr, std::uint64_t len) const {
    return len > 0 && addr.value >= base.value && addr.value <= end() &&
           len <= end() - addr.value;
  }
  constexpr bool contains(const MemRange& other) const {
    return contains(other.base, other.size);
  }

  static Result<MemRange> make(std::uint64_t base, std::uint64_t size);
};

std::string to_string(const MemRange& range);

/// True iff the two half-open intervals share at least one byte.
constexpr bool range_overlaps(const MemRange& a, const MemRange& b) {
  return a.base.value < b.end() && b.base.value < a.end();
}

/// Sparse, zero-initialised backing store. No access control lives here: the
/// monitor is the only component that decides who may touch which byte.
class PhysicalMemory {
 public:
  static constexpr std::uint64_t kPageSize = 4096;

  explicit PhysicalMemory(MemRange total_span);

  const MemRange& total_span() const { return span_; }

  Result<Bytes> raw_read(PhysAddr addr, std::uint64_t len) const;
  Status raw_write(PhysAddr addr, ByteView bytes);
  Status zero_fill(const MemRange& range);

  /// True iff every byte of the range reads as 0x00.
  bool is_zero(const MemRange& range) const;

  std::size_t resident_pages() const { return pages_.size(); }

 private:
  using Page = std::array<std::uint8_t, kPageSize>;

  Status check_span(PhysAddr addr, std::uint64_t len) const;

  MemRange span_;
  std::unordered_map<std::uint64_t, Page> pages_;
};

}  // namespace pie::platform
