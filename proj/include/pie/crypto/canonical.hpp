// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "pie/common/bytes.hpp"

namespace pie::crypto {

/// Canonical encoding of signed bodies: a fixed field order, each field
/// prefixed by its length as a 4-byte big-endian integer. Integers are 8-byte
/// big-endian fields. A nested list is one field holding a 4-byte count
/// followed by the length-prefixed elements.
class CanonicalWriter {
 public:
  CanonicalWriter& field(ByteView bytes);
  CanonicalWriter& text(std::string_view s);
  CanonicalWriter& u64(std::uint64_t v);

  const Bytes& bytes() const& { return out_; }
  Bytes bytes() && { return std::move(out_); }

 private:
  Bytes out_;
};

/// Nested list helper: `list.add(...)` per element, then `writer.field(list.finish())`.
class CanonicalList {
 public:
  CanonicalList& add(ByteView element);
  Bytes finish() const;

 private:
  std::uint32_t count_ = 0;
  Bytes body_;
};

/// Reads fields back in order. Any malformed input makes the reader fail and
/// all later reads return nullopt.
class CanonicalReader {
 public:
  explicit CanonicalReader(ByteView in) : in_(in) {}

  std::optional<Bytes> field();
  std::optional<std::string> text();
  std::optional<std::uint64_t> u64();
  /// Splits a list field produced by CanonicalList.
  static std::optional<std::vector<Bytes>> list(ByteView field);

  bool at_end() const { return pos_ == in_.size(); }
  bool failed() const { return failed_; }
  /// Bytes consumed so far.
  std::size_t position() const { return pos_; }

 private:
  ByteView in_;
  std::size_t pos_ = 0;
  bool failed_ = false;
};

}  // namespace pie::crypto
