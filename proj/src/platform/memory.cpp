// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "pie/platform/memory.hpp"

#include <algorithm>
#include <cstdio>

namespace pie::platform {

std::string to_string(PhysAddr addr) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%llx",
                static_cast<unsigned long long>(addr.value));
  return buf;
}

std::string to_string(const MemRange& range) {
  return "[" + to_string(range.base) + ", +" + std::to_string(range.size) +
         ")";
}

Result<MemRange> MemRange::make(std::uint64_t base, std::uint64_t size) {
  MemRange r{PhysAddr{base}, size};
  if (!r.valid())
    return make_error(Errc::InvalidArgument,
                      "malformed range " + to_string(PhysAddr{base}) + "+" +
                          std::to_string(size));
  return r;
}

PhysicalMemory::PhysicalMemory(MemRange total_span) : span_(total_span) {}

Status PhysicalMemory::check_span(PhysAddr addr, std::uint64_t len) const {
  if (len == 0) {
    if (addr.value < span_.base.value || addr.value > span_.end())
      return make_error(Errc::OutOfSpan, to_string(addr));
    return ok_status();
  }
  if (!span_.contains(addr, len))
    return make_error(Errc::OutOfSpan,
                      to_string(addr) + "+" + std::to_string(len) +
                          " outside " + to_string(span_));
  return ok_status();
}

Result<Bytes> PhysicalMemory::raw_read(PhysAddr addr,
                                       std::uint64_t len) const {
  if (auto s = check_span(addr, len); !s) return s.error();
  Bytes out(len, 0);
  std::uint64_t done = 0;
  while (done < len) {
    std::uint64_t a = addr.value + done;
    std::uint64_t page = a / kPageSize;
    std::uint64_t off = a % kPageSize;
    std::uint64_t n = std::min(len - done, kPageSize - off);
    if (auto it = pages_.find(page); it != pages_.end())
      std::copy_n(it->second.begin() + off, n, out.begin() + done);
    done += n;
  }
  return out;
}

Status PhysicalMemory::raw_write(PhysAddr addr, ByteView bytes) {
  if (auto s = check_span(addr, bytes.size()); !s) return s;
  std::uint64_t done = 0;
  while (done < bytes.size()) {
    std::uint64_t a = addr.value + done;
    std::uint64_t page = a / kPageSize;
    std::uint64_t off = a % kPageSize;
    std::uint64_t n = std::min<std::uint64_t>(bytes.size() - done,
                                              kPageSize - off);
    auto [it, inserted] = pages_.try_emplace(page);
    if (inserted) it->second.fill(0);
    std::copy_n(bytes.begin() + done, n, it->second.begin() + off);
    done += n;
  }
  return ok_status();
}

Status PhysicalMemory::zero_fill(const MemRange& range) {
  if (auto s = check_span(range.base, range.size); !s) return s;
  std::uint64_t first = range.base.value / kPageSize;
  std::uint64_t last = (range.end() - 1) / kPageSize;
  for (auto it = pages_.begin(); it != pages_.end();) {
    std::uint64_t page = it->first;
    if (page < first || page > last) {
      ++it;
      continue;
    }
    std::uint64_t page_base = page * kPageSize;
    std::uint64_t lo = std::max(page_base, range.base.value);
    std::uint64_t hi = std::min(page_base + kPageSize, range.end());
    if (lo == page_base && hi == page_base + kPageSize) {
      it = pages_.erase(it);
    } else {
      std::fill(it->second.begin() + (lo - page_base),
                it->second.begin() + (hi - page_base), 0);
      ++it;
    }
  }
  return ok_status();
}

bool PhysicalMemory::is_zero(const MemRange& range) const {
  for (const auto& [page, data] : pages_) {
    std::uint64_t page_base = page * kPageSize;
    std::uint64_t lo = std::max(page_base, range.base.value);
    std::uint64_t hi = std::min(page_base + kPageSize, range.end());
    for (std::uint64_t a = lo; a < hi; ++a)
      if (data[a - page_base] != 0) return false;
  }
  return true;
}

}  // namespace pie::platform
