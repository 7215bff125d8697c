// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "pie/crypto/canonical.hpp"

#include <limits>
#include <stdexcept>

namespace pie::crypto {

CanonicalWriter& CanonicalWriter::field(ByteView bytes) {
  if (bytes.size() > std::numeric_limits<std::uint32_t>::max())
    throw std::length_error("canonical field too long");
  put_be32(out_, static_cast<std::uint32_t>(bytes.size()));
  append(out_, bytes);
  return *this;
}

CanonicalWriter& CanonicalWriter::text(std::string_view s) {
  return field(ByteView(reinterpret_cast<const std::uint8_t*>(s.data()),
                        s.size()));
}

CanonicalWriter& CanonicalWriter::u64(std::uint64_t v) {
  Bytes b;
  put_be64(b, v);
  return field(b);
}

CanonicalList& CanonicalList::add(ByteView element) {
  put_be32(body_, static_cast<std::uint32_t>(element.size()));
  append(body_, element);
  ++count_;
  return *this;
}

Bytes CanonicalList::finish() const {
  Bytes out;
  put_be32(out, count_);
  append(out, body_);
  return out;
}

std::optional<Bytes> CanonicalReader::field() {
  if (failed_ || in_.size() - pos_ < 4) {
    failed_ = true;
    return std::nullopt;
  }
  std::uint32_t len = get_be32(in_.subspan(pos_, 4));
  if (in_.size() - pos_ - 4 < len) {
    failed_ = true;
    return std::nullopt;
  }
  auto start = in_.begin() + static_cast<std::ptrdiff_t>(pos_ + 4);
  Bytes out(start, start + len);
  pos_ += 4 + len;
  return out;
}

std::optional<std::string> CanonicalReader::text() {
  auto f = field();
  if (!f) return std::nullopt;
  return std::string(f->begin(), f->end());
}

std::optional<std::uint64_t> CanonicalReader::u64() {
  auto f = field();
  if (!f || f->size() != 8) {
    failed_ = true;
    return std::nullopt;
  }
  return get_be64(*f);
}

std::optional<std::vector<Bytes>> CanonicalReader::list(ByteView field) {
  if (field.size() < 4) return std::nullopt;
  std::uint32_t count = get_be32(field.first(4));
  CanonicalReader r(field.subspan(4));
  std::vector<Bytes> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    auto e = r.field();
    if (!e) return std::nullopt;
    out.push_back(std::move(*e));
  }
  if (!r.at_end()) return std::nullopt;
  return out;
}

}  // namespace pie::crypto
