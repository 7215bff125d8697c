// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <deque>
#include <random>

#include "../support/fixture.hpp"

namespace pie::testing {
namespace {

using namespace progmodel;
using peripherals::PeripheralKind;

Bytes req(Op op, std::string_view rest = {}) {
  Bytes b{static_cast<std::uint8_t>(op)};
  append(b, to_bytes(rest));
  return b;
}

TEST(Ring, HalvesSplitTheRegion) {
  MemRange r = range(0x9000'0000, 0x1000);
  EXPECT_EQ(ring_half(r, RingSide::Request), range(0x9000'0000, 0x800));
  EXPECT_EQ(ring_half(r, RingSide::Reply), range(0x9000'0800, 0x800));
}

TEST(Ring, WrapAroundAgainstQueueModel) {
  TestPlatform p;
  EntityId a = p.create(), b = p.create();
  auto rid = *p.connect(a, b, 0x1000);
  MemRange half = ring_half(p.sm.region(rid)->range, RingSide::Request);
  std::mt19937_64 rng(1);
  std::deque<RingRecord> model;
  std::uint64_t produced = 0, consumed = 0;
  std::uint32_t next = 1;
  for (int step = 0; step < 3000; ++step) {
    bool produce = rng() % 2 == 0;
    EntityId who = produce ? a : b;
    ASSERT_TRUE(p.sm.enter_enclave(who));
    Ring ring(p.sm, who, half);
    if (produce) {
      Bytes payload(rng() % 200);
      for (auto& x : payload) x = static_cast<std::uint8_t>(rng());
      std::uint64_t need = kRecordHeader + payload.size();
      Status s = ring.push(next, payload);
      if (produced - consumed + need <= ring.capacity()) {
        ASSERT_TRUE(s) << s.error().detail;
        model.push_back({next++, payload});
        produced += need;
      } else {
        EXPECT_EQ(s.code(), Errc::InvalidArgument);
      }
    } else {
      auto got = ring.pop();
      ASSERT_TRUE(got) << got.error().detail;
      if (model.empty()) {
        EXPECT_FALSE(got->has_value());
      } else {
        ASSERT_TRUE(got->has_value());
        EXPECT_EQ(**got, model.front());
        consumed += kRecordHeader + model.front().payload.size();
        model.pop_front();
      }
    }
    ASSERT_TRUE(p.sm.exit_to_os());
    // Header words as seen by the monitor.
    EXPECT_EQ(get_be64(*p.sm.sm_read(half.base, 8)), consumed);
    EXPECT_EQ(get_be64(*p.sm.sm_read(half.base + 8, 8)), produced);
  }
  EXPECT_GT(produced, 4 * (half.size - kRingHeader));
}

TEST(Ring, CorruptHeaderIsParseError) {
  TestPlatform p;
  EntityId a = p.create(), b = p.create();
  auto rid = *p.connect(a, b, 0x1000);
  MemRange half = ring_half(p.sm.region(rid)->range, RingSide::Request);
  ASSERT_TRUE(p.sm.enter_enclave(a));
  Bytes tail;
  put_be64(tail, 1);
  ASSERT_TRUE(p.sm.checked_write(a, half.base + 8, tail));
  EXPECT_EQ(Ring(p.sm, a, half).pop().code(), Errc::ParseError);
  ASSERT_TRUE(p.sm.exit_to_os());
}

TEST(Ring, OutsidersAreFaulted) {
  TestPlatform p;
  EntityId a = p.create(), b = p.create(), c = p.create();
  auto rid = *p.connect(a, b, 0x1000);
  MemRange half = ring_half(p.sm.region(rid)->range, RingSide::Request);
  ASSERT_TRUE(p.sm.enter_enclave(c));
  EXPECT_EQ(Ring(p.sm, c, half).push(1, Bytes{1}).code(), Errc::AccessFault);
  ASSERT_TRUE(p.sm.exit_to_os());
}

TEST(AeReply, BodyCarriesStatusByte) {
  AeReply ok{7, std::nullopt, to_bytes("ab")};
  EXPECT_EQ(ok.encode_body(), (Bytes{0, 'a', 'b'}));
  AeReply err{7, Errc::NotAttested, {}};
  Bytes body = err.encode_body();
  ASSERT_EQ(body.size(), 1u);
  EXPECT_EQ(body[0], static_cast<std::uint8_t>(Errc::NotAttested) + 1);
  EXPECT_EQ(AeReply::decode({7, body}), err);
  EXPECT_EQ(AeReply::decode({7, {}}), std::nullopt);
}

TEST(Runtime, EchoControllerWithoutDevice) {
  TestPlatform p;
  EntityId ae = p.create(), ce = p.create(EnclaveKind::Controller);
  EXPECT_EQ(p.runtime.ae_call(ae, ce, to_bytes("x")).code(), Errc::NotConnected);
  ASSERT_TRUE(p.connect(ae, ce));
  for (int i = 0; i < 50; ++i) {
    Bytes msg(i * 13, static_cast<std::uint8_t>(i));
    auto r = p.runtime.ae_call(ae, ce, msg);
    ASSERT_TRUE(r) << r.error().detail;
    ASSERT_TRUE(r->ok());
    EXPECT_EQ(r->payload, msg);
  }
  EXPECT_TRUE(p.sm.current().is_os());
}

TEST(Runtime, SmallRegionIsRefused) {
  TestPlatform p;
  EntityId ae = p.create(), ce = p.create(EnclaveKind::Controller);
  ASSERT_TRUE(p.connect(ae, ce, kMinRegionSize - 16));
  EXPECT_EQ(p.runtime.ae_call(ae, ce, to_bytes("x")).code(), Errc::InvalidArgument);
}

TEST(Runtime, DeviceRequestsNeedAttestationAndSession) {
  TestPlatform p;
  auto& s = p.add_device<peripherals::Sensor>(PeripheralKind::Sensor);
  EntityId ae = p.create(), ce = p.create(EnclaveKind::Controller);
  ASSERT_TRUE(p.connect(ce, s.id()));
  ASSERT_TRUE(p.connect(ae, ce));
  ASSERT_TRUE(p.runtime.ce_attach_peripheral(ce, s.id()).ok);
  ASSERT_TRUE(p.runtime.controller(ce)->transcript);
  s.set_environment(23);
  auto r = p.runtime.ae_call(ae, ce, req(Op::Read));
  ASSERT_TRUE(r);
  ASSERT_TRUE(r->ok()) << to_string(*r->error);
  ASSERT_EQ(r->payload.size(), 2 + 8 + crypto::kSignatureSize);
  EXPECT_EQ(get_be16(r->payload), 23);
  auto body = peripherals::SensorStatement::body(23, get_be64(ByteView(r->payload).subspan(2)));
  EXPECT_TRUE(p.provider.verify(s.public_key(), body, ByteView(r->payload).subspan(10)));
}

TEST(Runtime, UntrustedDeviceGivesNotAttested) {
  TestPlatform p;
  auto rogue = p.provider.keygen(std::string_view("rogue"));
  auto& s = p.add_device<peripherals::Sensor>(PeripheralKind::Sensor, false, "1.0", &rogue);
  EntityId ae = p.create(), ce = p.create(EnclaveKind::Controller);
  ASSERT_TRUE(p.connect(ce, s.id()));
  ASSERT_TRUE(p.connect(ae, ce));
  EXPECT_FALSE(p.runtime.ce_attach_peripheral(ce, s.id()).ok);
  auto r = p.runtime.ae_call(ae, ce, req(Op::Read));
  ASSERT_TRUE(r);
  EXPECT_EQ(r->error, Errc::NotAttested);
}

TEST(Runtime, ExclusiveDeviceIsResetBetweenApplications) {
  TestPlatform p;
  auto& k = p.add_device<peripherals::Keyboard>(PeripheralKind::Keyboard);
  EntityId ae1 = p.create(), ae2 = p.create(), ce = p.create(EnclaveKind::Controller);
  ASSERT_TRUE(p.connect(ce, k.id()));
  ASSERT_TRUE(p.connect(ae1, ce));
  ASSERT_TRUE(p.connect(ae2, ce));
  ASSERT_TRUE(p.runtime.ce_attach_peripheral(ce, k.id()).ok);
  k.inject_key(30);
  k.inject_key(31);
  auto r1 = p.runtime.ae_call(ae1, ce, req(Op::Read));
  ASSERT_TRUE(r1);
  EXPECT_EQ(r1->payload, (Bytes{1, 30}));
  // The second key was typed into ae1's session and must not reach ae2.
  auto r2 = p.runtime.ae_call(ae2, ce, req(Op::Read));
  ASSERT_TRUE(r2);
  EXPECT_EQ(r2->payload, Bytes{0});
  EXPECT_EQ(p.runtime.controller(ce)->resets_sent, 1u);
  EXPECT_GE(k.reset_count(), 1u);
}

TEST(Runtime, ParallelDeviceKeepsSessionsApart) {
  TestPlatform p;
  auto& acc = p.add_device<peripherals::Accelerator>(PeripheralKind::Accelerator, true);
  EntityId ae1 = p.create(), ae2 = p.create(), ce = p.create(EnclaveKind::Controller);
  ASSERT_TRUE(p.connect(ce, acc.id()));
  ASSERT_TRUE(p.connect(ae1, ce));
  ASSERT_TRUE(p.connect(ae2, ce));
  ASSERT_TRUE(p.runtime.ce_attach_peripheral(ce, acc.id()).ok);
  EXPECT_EQ(acc.session_count(), 2u);
  ASSERT_TRUE(p.runtime.ae_call(ae1, ce, req(Op::Submit, "one")));
  ASSERT_TRUE(p.runtime.ae_call(ae2, ce, req(Op::Submit, "two!")));
  ASSERT_TRUE(p.runtime.ae_call(ae1, ce, req(Op::Submit, "more")));
  auto r1 = p.runtime.ae_call(ae1, ce, req(Op::Result));
  auto r2 = p.runtime.ae_call(ae2, ce, req(Op::Result));
  ASSERT_TRUE(r1 && r2);
  EXPECT_EQ(get_be64(ByteView(r1->payload).subspan(8)), 7u);
  EXPECT_EQ(get_be64(ByteView(r2->payload).subspan(8)), 4u);
  EXPECT_EQ(p.runtime.controller(ce)->resets_sent, 0u);
}

TEST(Runtime, ControllerDeathIsObserved) {
  TestPlatform p;
  EntityId ae = p.create(), ce = p.create(EnclaveKind::Controller);
  auto rid = *p.connect(ae, ce);
  ASSERT_TRUE(p.runtime.ae_call(ae, ce, to_bytes("x")));
  ASSERT_TRUE(p.sm.destroy_enclave(ce));
  p.runtime.forget(ce);
  EXPECT_EQ(p.runtime.ae_call(ae, ce, to_bytes("x")).code(), Errc::DisconnectedError);
  ASSERT_TRUE(p.sm.sync_disconnect_enclaves(rid));
  EXPECT_EQ(p.runtime.ae_call(ae, ce, to_bytes("x")).code(), Errc::DisconnectedError);
  const auto* app = p.runtime.application(ae);
  ASSERT_NE(app, nullptr);
  EXPECT_EQ(app->observed.size(), 2u);
}

TEST(Runtime, ApplicationLeavingClosesSession) {
  TestPlatform p;
  auto& acc = p.add_device<peripherals::Accelerator>(PeripheralKind::Accelerator, true);
  EntityId ae1 = p.create(), ae2 = p.create(), ce = p.create(EnclaveKind::Controller);
  ASSERT_TRUE(p.connect(ce, acc.id()));
  ASSERT_TRUE(p.connect(ae1, ce));
  ASSERT_TRUE(p.connect(ae2, ce));
  ASSERT_TRUE(p.runtime.ce_attach_peripheral(ce, acc.id()).ok);
  ASSERT_TRUE(p.sm.destroy_enclave(ae1));
  ASSERT_TRUE(p.runtime.schedule(ce));
  EXPECT_EQ(p.runtime.controller(ce)->sessions.count(ae1), 0u);
  EXPECT_FALSE(acc.has_session(ae1));
  EXPECT_TRUE(acc.has_session(ae2));
}

TEST(Runtime, ReplugDropsTranscriptAndTellsApplications) {
  TestPlatform p;
  auto& s = p.add_device<peripherals::Sensor>(PeripheralKind::Sensor);
  EntityId ae = p.create(), ce = p.create(EnclaveKind::Controller);
  ASSERT_TRUE(p.connect(ce, s.id()));
  ASSERT_TRUE(p.connect(ae, ce));
  ASSERT_TRUE(p.runtime.ce_attach_peripheral(ce, s.id()).ok);
  ASSERT_TRUE(p.sm.unplug_peripheral(s.id()));
  ASSERT_TRUE(p.sm.replug_peripheral(s.id(), s.firmware_digest(), s.public_key()));
  ASSERT_TRUE(p.runtime.schedule(ce));
  EXPECT_FALSE(p.runtime.controller(ce)->transcript);
  ASSERT_TRUE(p.runtime.schedule(ae));
  ASSERT_FALSE(p.runtime.application(ae)->observed.empty());
  EXPECT_EQ(p.runtime.application(ae)->observed.back().kind,
            monitor::NotificationKind::PeripheralReattached);
  auto r = p.runtime.ae_call(ae, ce, req(Op::Read));
  ASSERT_TRUE(r);
  EXPECT_EQ(r->error, Errc::NotAttested);
}

TEST(Drivers, RegistryBuiltins) {
  auto reg = DriverRegistry::with_builtins();
  for (auto k : {"sensor", "keyboard", "accelerator", "echo"}) EXPECT_TRUE(reg.has(k));
  EXPECT_FALSE(reg.has("gpu"));
  EXPECT_EQ(reg.make("gpu"), nullptr);
  EXPECT_TRUE(reg.make("sensor")->exclusive());
  EXPECT_FALSE(reg.make("accelerator")->exclusive());
  EXPECT_FALSE(reg.make("echo")->touches_peripheral());
}

}  // namespace
}  // namespace pie::testing
