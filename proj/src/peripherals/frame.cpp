// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "pie/peripherals/frame.hpp"

#include <algorithm>

namespace pie::peripherals {

namespace {
bool known_type(std::uint8_t t) { return t >= 0x01 && t <= 0x05; }
}  // namespace

Result<Frame> Frame::make(FrameType type, std::uint8_t seq, ByteView payload) {
  if (payload.size() > kFramePayload)
    return make_error(Errc::InvalidArgument,
                      "frame payload of " + std::to_string(payload.size()) +
                          " bytes exceeds 29");
  if (!known_type(static_cast<std::uint8_t>(type)))
    return make_error(Errc::InvalidArgument, "unknown frame type");
  Frame f;
  f.type_ = type;
  f.seq_ = seq;
  f.len_ = static_cast<std::uint8_t>(payload.size());
  std::copy(payload.begin(), payload.end(), f.payload_.begin());
  return f;
}

Result<Frame> Frame::decode(ByteView bytes) {
  if (bytes.size() != kFrameSize)
    return make_error(Errc::ParseError, "frame must be 32 bytes");
  if (!known_type(bytes[0]))
    return make_error(Errc::ParseError, "unknown frame type");
  if (bytes[2] > kFramePayload)
    return make_error(Errc::ParseError, "frame len exceeds 29");
  auto payload = bytes.subspan(3);
  if (std::any_of(payload.begin() + bytes[2], payload.end(),
                  [](std::uint8_t b) { return b != 0; }))
    return make_error(Errc::ParseError, "non-zero frame padding");
  return make(static_cast<FrameType>(bytes[0]), bytes[1],
              payload.first(bytes[2]));
}

EncodedFrame Frame::encode() const {
  EncodedFrame out{};
  out[0] = static_cast<std::uint8_t>(type_);
  out[1] = seq_;
  out[2] = len_;
  std::copy(payload_.begin(), payload_.end(), out.begin() + 3);
  return out;
}

std::vector<Frame> chunk(FrameType type, ByteView data,
                         std::uint8_t first_seq) {
  std::vector<Frame> out;
  std::uint8_t seq = first_seq;
  std::size_t pos = 0;
  while (true) {
    std::size_t n = std::min(kFramePayload, data.size() - pos);
    out.push_back(Frame::make(type, seq++, data.subspan(pos, n)).value());
    pos += n;
    if (n < kFramePayload) break;
  }
  return out;
}

Result<Bytes> reassemble(std::span<const Frame> frames) {
  if (frames.empty()) return make_error(Errc::ParseError, "no frames");
  Bytes out;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const Frame& f = frames[i];
    bool last = i + 1 == frames.size();
    if (f.type() != frames[0].type())
      return make_error(Errc::ParseError, "mixed frame types");
    if (f.seq() != static_cast<std::uint8_t>(frames[0].seq() + i))
      return make_error(Errc::ParseError, "sequence gap");
    if (last != (f.len() < kFramePayload))
      return make_error(Errc::ParseError, "bad message termination");
    append(out, f.payload());
  }
  return out;
}

std::array<std::uint8_t, kHandshakeSize> HandshakeMsg::encode() const {
  std::array<std::uint8_t, kHandshakeSize> out{};
  std::copy(kMagic.begin(), kMagic.end(), out.begin());
  out[4] = static_cast<std::uint8_t>(protocol_version >> 8);
  out[5] = static_cast<std::uint8_t>(protocol_version);
  out[6] = static_cast<std::uint8_t>(peripheral_kind >> 8);
  out[7] = static_cast<std::uint8_t>(peripheral_kind);
  std::copy(peripheral_nonce.begin(), peripheral_nonce.end(), out.begin() + 8);
  std::copy(certificate_digest.begin(), certificate_digest.end(),
            out.begin() + 24);
  return out;
}

Result<HandshakeMsg> HandshakeMsg::decode(ByteView bytes) {
  if (bytes.size() != kHandshakeSize)
    return make_error(Errc::ParseError, "handshake must be 60 bytes");
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin()))
    return make_error(Errc::ParseError, "bad handshake magic");
  if (std::any_of(bytes.begin() + 56, bytes.end(),
                  [](std::uint8_t b) { return b != 0; }))
    return make_error(Errc::ParseError, "reserved bytes must be zero");
  HandshakeMsg m;
  m.protocol_version = get_be16(bytes.subspan(4, 2));
  m.peripheral_kind = get_be16(bytes.subspan(6, 2));
  std::copy_n(bytes.begin() + 8, 16, m.peripheral_nonce.begin());
  std::copy_n(bytes.begin() + 24, 32, m.certificate_digest.begin());
  return m;
}

}  // namespace pie::peripherals
