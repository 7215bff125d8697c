// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>

#include "../support/fixture.hpp"
#include "pie/crypto/canonical.hpp"

namespace pie::testing {
namespace {

using namespace peripherals;

TEST(Frame, LayoutIsTypeSeqLenPayload) {
  auto f = Frame::make(FrameType::Data, 9, to_bytes("abc"));
  ASSERT_TRUE(f);
  auto e = f->encode();
  ASSERT_EQ(e.size(), 32u);
  EXPECT_EQ(e[0], 0x01);
  EXPECT_EQ(e[1], 9);
  EXPECT_EQ(e[2], 3);
  EXPECT_EQ(e[3], 'a');
  EXPECT_EQ(e[5], 'c');
  for (std::size_t i = 6; i < 32; ++i) EXPECT_EQ(e[i], 0);
}

TEST(Frame, DecodeRefusesMalformed) {
  EncodedFrame e = Frame::make(FrameType::Reset, 0, {})->encode();
  EXPECT_TRUE(Frame::decode(e));
  EXPECT_EQ(Frame::decode(ByteView(e).first(31)).code(), Errc::ParseError);
  auto bad = e;
  bad[0] = 0x09;
  EXPECT_EQ(Frame::decode(bad).code(), Errc::ParseError);
  bad = e;
  bad[2] = 30;
  EXPECT_EQ(Frame::decode(bad).code(), Errc::ParseError);
  bad = e;
  bad[31] = 1;
  EXPECT_EQ(Frame::decode(bad).code(), Errc::ParseError);
  EXPECT_EQ(Frame::make(FrameType::Data, 0, Bytes(30, 1)).code(), Errc::InvalidArgument);
}

TEST(Frame, RandomRoundTrip) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 2000; ++i) {
    auto type = static_cast<FrameType>(1 + rng() % 5);
    Bytes payload(rng() % 30);
    for (auto& b : payload) b = static_cast<std::uint8_t>(rng());
    auto f = Frame::make(type, static_cast<std::uint8_t>(rng()), payload);
    ASSERT_TRUE(f);
    auto back = Frame::decode(f->encode());
    ASSERT_TRUE(back);
    EXPECT_EQ(*back, *f);
    EXPECT_EQ(Bytes(back->payload().begin(), back->payload().end()), payload);
  }
}

TEST(Frame, ChunkAndReassemble) {
  for (std::size_t n : {0u, 1u, 28u, 29u, 30u, 58u, 100u}) {
    Bytes data(n);
    for (std::size_t i = 0; i < n; ++i) data[i] = static_cast<std::uint8_t>(i);
    auto frames = chunk(FrameType::ChallengeResponse, data, 250);
    EXPECT_EQ(frames.size(), n / kFramePayload + 1);
    EXPECT_LT(frames.back().len(), kFramePayload);
    EXPECT_EQ(frames[0].seq(), 250);
    auto back = reassemble(frames);
    ASSERT_TRUE(back);
    EXPECT_EQ(*back, data);
  }
  auto frames = chunk(FrameType::Data, Bytes(40, 1));
  std::swap(frames[0], frames[1]);
  EXPECT_EQ(reassemble(frames).code(), Errc::ParseError);
}

TEST(Handshake, SixtyBytesRoundTrip) {
  HandshakeMsg m;
  m.peripheral_kind = 3;
  m.peripheral_nonce.fill(0x11);
  m.certificate_digest.fill(0x22);
  auto e = m.encode();
  ASSERT_EQ(e.size(), 60u);
  EXPECT_EQ(std::string(e.begin(), e.begin() + 4), "PIE1");
  EXPECT_EQ(e[7], 3);
  auto back = HandshakeMsg::decode(e);
  ASSERT_TRUE(back);
  EXPECT_EQ(*back, m);
  auto bad = e;
  bad[59] = 1;
  EXPECT_FALSE(HandshakeMsg::decode(bad));
  bad = e;
  bad[0] = 'X';
  EXPECT_FALSE(HandshakeMsg::decode(bad));
}

std::uint64_t fnv1a(ByteView data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (auto b : data) {
    h ^= b;
    h *= 1099511628211ULL;
  }
  return h;
}

TEST(Accelerator, SessionsAreIsolated) {
  TestPlatform p;
  auto& acc = p.add_device<Accelerator>(PeripheralKind::Accelerator, true);
  EntityId a = EntityId::enclave(1), b = EntityId::enclave(2);
  EXPECT_EQ(acc.accel_submit(a, Bytes{1}).code(), Errc::NoSession);
  acc.accel_open_session(a);
  acc.accel_open_session(b);
  ASSERT_TRUE(acc.accel_submit(a, to_bytes("hello ")));
  ASSERT_TRUE(acc.accel_submit(b, to_bytes("other")));
  ASSERT_TRUE(acc.accel_submit(a, to_bytes("world")));
  Bytes want;
  put_be64(want, fnv1a(to_bytes("hello world")));
  put_be64(want, 11);
  EXPECT_EQ(*acc.accel_result(a), want);
  acc.accel_reset(a);
  EXPECT_FALSE(acc.has_session(a));
  EXPECT_TRUE(acc.has_session(b));
  acc.reset_state();
  EXPECT_EQ(acc.session_count(), 0u);
}

TEST(Sensor, SignedCountedReadings) {
  TestPlatform p;
  auto& s = p.add_device<Sensor>(PeripheralKind::Sensor);
  s.set_environment(-40);
  auto r1 = s.sensor_read();
  auto r2 = s.sensor_read();
  EXPECT_EQ(r1.value, -40);
  EXPECT_LT(r1.counter, r2.counter);
  crypto::CanonicalWriter w;
  w.field(Bytes{0xff, 0xd8}).u64(r1.counter);
  EXPECT_EQ(SensorStatement::body(r1.value, r1.counter), w.bytes());
  EXPECT_TRUE(p.provider.verify(s.public_key(), w.bytes(), r1.signature));
}

TEST(Keyboard, FifoAndReset) {
  TestPlatform p;
  auto& k = p.add_device<Keyboard>(PeripheralKind::Keyboard);
  k.inject_key(4);
  k.inject_key(5);
  EXPECT_EQ(k.keyboard_poll(), 4);
  k.reset_state();
  EXPECT_EQ(k.keyboard_poll(), std::nullopt);
}

TEST(Peripheral, ChallengeOverFrames) {
  TestPlatform p;
  auto& s = p.add_device<Sensor>(PeripheralKind::Sensor);
  Bytes challenge = p.provider.random(32);
  for (const auto& f : chunk(FrameType::Challenge, challenge)) s.deliver(f);
  std::vector<Frame> out;
  while (auto f = s.take_outbound()) out.push_back(*f);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0].type(), FrameType::ChallengeResponse);
  auto sig = reassemble(out);
  ASSERT_TRUE(sig);
  EXPECT_TRUE(p.provider.verify(s.public_key(), challenge, *sig));
}

TEST(Peripheral, DmaConfigIsSigned) {
  TestPlatform p;
  auto& acc = p.add_device<Accelerator>(PeripheralKind::Accelerator, true);
  auto& s = p.add_device<Sensor>(PeripheralKind::Sensor);
  EXPECT_TRUE(s.query_dma_config().empty());
  EXPECT_TRUE(acc.query_dma_config().empty());
  MemRange w = range(kDramBase + 0x40'0000, 0x2000);
  acc.set_negotiated(w);
  Bytes cfg = acc.query_dma_config();
  ASSERT_EQ(cfg.size(), 16u + crypto::kSignatureSize);
  EXPECT_EQ(get_be64(cfg), w.base.value);
  EXPECT_EQ(get_be64(ByteView(cfg).subspan(8)), w.size);
  EXPECT_TRUE(p.provider.verify(acc.public_key(), ByteView(cfg).first(16),
                                ByteView(cfg).subspan(16)));
}

TEST(Peripheral, PeerLossPolicyIsPerDevice) {
  TestPlatform p;
  auto& k = p.add_device<Keyboard>(PeripheralKind::Keyboard);
  k.inject_key(1);
  k.set_terminate_on_peer_loss(false);
  k.on_peer_lost(1, EntityId::enclave(1));
  EXPECT_EQ(k.queued(), 1u);
  k.set_terminate_on_peer_loss(true);
  k.on_peer_lost(1, EntityId::enclave(1));
  EXPECT_EQ(k.queued(), 0u);
}

TEST(Bus, TrafficNeedsLiveRegion) {
  TestPlatform p;
  auto& s = p.add_device<Sensor>(PeripheralKind::Sensor);
  EntityId ce = p.create(EnclaveKind::Controller);
  auto f = *Frame::make(FrameType::Data, 0, to_bytes("x"));
  EXPECT_EQ(p.bus.send_frame(ce, s.id(), f).code(), Errc::NotConnected);
  EXPECT_EQ(p.bus.handshake(ce, s.id()).code(), Errc::NotConnected);
  ASSERT_TRUE(p.connect(ce, s.id()));
  ASSERT_TRUE(p.bus.send_frame(ce, s.id(), f));
  auto echo = p.bus.recv_frame(ce, s.id());
  ASSERT_TRUE(echo);
  ASSERT_TRUE(echo->has_value());
  EXPECT_EQ(echo->value().payload()[0], 'x');
  auto hello = p.bus.handshake(ce, s.id());
  ASSERT_TRUE(hello);
  EXPECT_EQ(hello->certificate_digest, p.provider.hash(s.certificate().encode()));
  EXPECT_EQ(hello->peripheral_kind, static_cast<std::uint16_t>(PeripheralKind::Sensor));
}

}  // namespace
}  // namespace pie::testing
