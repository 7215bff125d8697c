// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "pie/progmodel/ring.hpp"

#include <algorithm>

namespace pie::progmodel {

using platform::PhysAddr;

MemRange ring_half(const MemRange& region, RingSide side) {
  std::uint64_t half = region.size / 2;
  std::uint64_t base = region.base.value + (side == RingSide::Reply ? half : 0);
  return MemRange{PhysAddr{base}, half};
}

Result<std::pair<std::uint64_t, std::uint64_t>> Ring::indices() {
  auto hdr = sm_.checked_read(ctx_, half_.base, kRingHeader);
  if (!hdr) return hdr.error();
  std::uint64_t head = get_be64(ByteView(*hdr).subspan(0, 8));
  std::uint64_t tail = get_be64(ByteView(*hdr).subspan(8, 8));
  if (tail < head || tail - head > capacity())
    return make_error(Errc::ParseError, "ring indices out of range");
  return std::make_pair(head, tail);
}

Status Ring::write_wrapped(std::uint64_t pos, ByteView bytes) {
  if (bytes.empty()) return ok_status();
  std::uint64_t cap = capacity();
  std::uint64_t off = pos % cap;
  std::uint64_t first = std::min<std::uint64_t>(bytes.size(), cap - off);
  Status s = sm_.checked_write(
      ctx_, PhysAddr{half_.base.value + kRingHeader + off},
      bytes.subspan(0, first));
  if (!s || first == bytes.size()) return s;
  return sm_.checked_write(ctx_, PhysAddr{half_.base.value + kRingHeader},
                           bytes.subspan(first));
}

Result<Bytes> Ring::read_wrapped(std::uint64_t pos, std::uint64_t len) {
  if (len == 0) return Bytes{};
  std::uint64_t cap = capacity();
  std::uint64_t off = pos % cap;
  std::uint64_t first = std::min(len, cap - off);
  auto a = sm_.checked_read(ctx_, PhysAddr{half_.base.value + kRingHeader + off},
                            first);
  if (!a || first == len) return a;
  auto b = sm_.checked_read(ctx_, PhysAddr{half_.base.value + kRingHeader},
                            len - first);
  if (!b) return b;
  append(*a, *b);
  return a;
}

Status Ring::push(std::uint32_t request_id, ByteView payload) {
  auto idx = indices();
  if (!idx) return idx.error();
  auto [head, tail] = *idx;
  std::uint64_t need = kRecordHeader + payload.size();
  if (need > capacity() - (tail - head))
    return make_error(Errc::InvalidArgument, "ring full");
  Bytes rec;
  put_be32(rec, static_cast<std::uint32_t>(payload.size()));
  put_be32(rec, request_id);
  append(rec, payload);
  if (Status s = write_wrapped(tail, rec); !s) return s;
  Bytes t;
  put_be64(t, tail + need);
  return sm_.checked_write(ctx_, PhysAddr{half_.base.value + 8}, t);
}

Result<std::optional<RingRecord>> Ring::pop() {
  auto idx = indices();
  if (!idx) return idx.error();
  auto [head, tail] = *idx;
  if (head == tail) return std::optional<RingRecord>{};
  if (tail - head < kRecordHeader)
    return make_error(Errc::ParseError, "truncated ring record");
  auto hdr = read_wrapped(head, kRecordHeader);
  if (!hdr) return hdr.error();
  std::uint32_t len = get_be32(ByteView(*hdr).subspan(0, 4));
  if (kRecordHeader + len > tail - head)
    return make_error(Errc::ParseError, "ring record length overruns tail");
  RingRecord rec;
  rec.request_id = get_be32(ByteView(*hdr).subspan(4, 4));
  auto body = read_wrapped(head + kRecordHeader, len);
  if (!body) return body.error();
  rec.payload = std::move(*body);
  Bytes h;
  put_be64(h, head + kRecordHeader + len);
  if (Status s = sm_.checked_write(ctx_, half_.base, h); !s) return s.error();
  return std::optional<RingRecord>{std::move(rec)};
}

}  // namespace pie::progmodel
