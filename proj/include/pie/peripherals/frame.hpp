// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "pie/common/bytes.hpp"
#include "pie/common/result.hpp"

namespace pie::peripherals {

inline constexpr std::size_t kFrameSize = 32;
inline constexpr std::size_t kFramePayload = 29;
inline constexpr std::size_t kHandshakeSize = 60;

enum class FrameType : std::uint8_t {
  Data = 0x01,
  Challenge = 0x02,
  ChallengeResponse = 0x03,
  Reset = 0x04,
  DmaConfig = 0x05,
};

using EncodedFrame = std::array<std::uint8_t, kFrameSize>;

/// One bus message. Byte layout:
///   [0] type, [1] seq, [2] len (payload bytes used, <= 29),
///   [3..31] payload, zero-padded after len.
class Frame {
 public:
  /// InvalidArgument if the payload exceeds 29 bytes.
  static Result<Frame> make(FrameType type, std::uint8_t seq,
                            ByteView payload);
  /// ParseError on unknown type, len > 29 or non-zero padding.
  static Result<Frame> decode(ByteView bytes);

  FrameType type() const { return type_; }
  std::uint8_t seq() const { return seq_; }
  std::uint8_t len() const { return len_; }
  ByteView payload() const { return ByteView(payload_.data(), len_); }

  EncodedFrame encode() const;
  bool operator==(const Frame&) const = default;

 private:
  Frame() = default;

  FrameType type_ = FrameType::Data;
  std::uint8_t seq_ = 0;
  std::uint8_t len_ = 0;
  std::array<std::uint8_t, kFramePayload> payload_{};
};

/// Splits `data` over consecutive frames numbered from `first_seq`. Every
/// frame but the last is full; the last has len < 29, so a message whose size
/// is a multiple of 29 ends with an empty frame.
std::vector<Frame> chunk(FrameType type, ByteView data,
                         std::uint8_t first_seq = 0);

/// Inverse of chunk(). ParseError if the sequence is not a complete message
/// of a single type with consecutive seq numbers.
Result<Bytes> reassemble(std::span<const Frame> frames);

/// The 60-byte local-attestation opener. Byte layout:
///   [0..3] magic "PIE1", [4..5] protocol version (BE), [6..7] peripheral
///   kind (BE), [8..23] peripheral nonce, [24..55] certificate digest,
///   [56..59] reserved, zero.
struct HandshakeMsg {
  static constexpr std::array<std::uint8_t, 4> kMagic = {'P', 'I', 'E', '1'};
  static constexpr std::uint16_t kProtocolVersion = 1;

  std::uint16_t protocol_version = kProtocolVersion;
  std::uint16_t peripheral_kind = 0;
  std::array<std::uint8_t, 16> peripheral_nonce{};
  Digest certificate_digest{};

  std::array<std::uint8_t, kHandshakeSize> encode() const;
  static Result<HandshakeMsg> decode(ByteView bytes);
  bool operator==(const HandshakeMsg&) const = default;
};

}  // namespace pie::peripherals
