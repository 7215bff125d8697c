// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "../support/fixture.hpp"

namespace pie::testing {
namespace {

using monitor::EnclaveState;
using monitor::NotificationKind;
using monitor::RegionStatus;
using peripherals::PeripheralKind;

TEST(Monitor, BootLayout) {
  TestPlatform p(16);
  const auto& sm_entry = p.sm.pmp().entry(0);
  ASSERT_TRUE(sm_entry);
  EXPECT_EQ(sm_entry->range, p.sm.config().sm_range);
  EXPECT_EQ(sm_entry->perms, pmp::Perms::none());
  const auto& bg = p.sm.pmp().entry(15);
  ASSERT_TRUE(bg);
  EXPECT_EQ(bg->range, p.tree.span());
  EXPECT_EQ(p.sm.free_entry_count(), 14u);
  EXPECT_TRUE(p.sm.check_invariants());
}

TEST(Monitor, CreateZeroesAndLoadsImage) {
  TestPlatform p;
  MemRange r = p.alloc(0x2000);
  ASSERT_TRUE(p.memory.raw_write(r.base + 0x1000, Bytes(16, 0x55)));
  auto id = p.sm.create_enclave(to_bytes("IMG"), to_bytes("cfg"), r,
                                EnclaveKind::Application);
  ASSERT_TRUE(id);
  EXPECT_EQ(*p.sm.sm_read(r.base, 7), (Bytes{0, 0, 0, 3, 'I', 'M', 'G'}));
  EXPECT_EQ(*p.sm.sm_read(r.base + 0x1000, 16), Bytes(16, 0));
  const auto* e = p.sm.enclave(*id);
  ASSERT_NE(e, nullptr);
  EXPECT_EQ(e->state, EnclaveState::Idle);
  EXPECT_EQ(e->config_digest, p.provider.hash(to_bytes("cfg")));
}

TEST(Monitor, CreateRejectsBadPlacement) {
  TestPlatform p;
  EntityId a = p.create();
  MemRange ar = p.sm.enclave(a)->private_range;
  EXPECT_EQ(p.sm.create_enclave({}, {}, range(ar.base.value + 0x100, 0x1000),
                                EnclaveKind::Application).code(),
            Errc::OverlapError);
  EXPECT_EQ(p.sm.create_enclave({}, {}, range(kDramBase, 0x1000),
                                EnclaveKind::Application).code(),
            Errc::OverlapError);
  EXPECT_EQ(p.sm.create_enclave({}, {}, range(kMmioBase, 0x1000),
                                EnclaveKind::Application).code(),
            Errc::OutOfSpan);
  EXPECT_EQ(p.sm.create_enclave({}, {}, range(0x4000'0000, 0x1000),
                                EnclaveKind::Application).code(),
            Errc::OutOfSpan);
  EXPECT_EQ(p.sm.create_enclave(Bytes(0x2000, 1), {}, p.alloc(0x1000),
                                EnclaveKind::Application).code(),
            Errc::InvalidArgument);
}

TEST(Monitor, OsCannotTouchEnclaveOrMonitorMemory) {
  TestPlatform p;
  EntityId a = p.create();
  MemRange ar = p.sm.enclave(a)->private_range;
  EXPECT_EQ(p.os_read(ar).code(), Errc::AccessFault);
  EXPECT_EQ(p.sm.checked_write(EntityId::os(), ar.base, Bytes{1}).code(),
            Errc::AccessFault);
  EXPECT_EQ(p.os_read(range(kDramBase, 8)).code(), Errc::AccessFault);
  EXPECT_TRUE(p.os_read(p.alloc(0x1000)));
}

TEST(Monitor, RunningContextMustMatch) {
  TestPlatform p;
  EntityId a = p.create();
  EntityId b = p.create();
  MemRange ar = p.sm.enclave(a)->private_range;
  ASSERT_TRUE(p.sm.enter_enclave(a));
  EXPECT_EQ(p.sm.checked_read(EntityId::os(), ar.base, 4).code(), Errc::BadState);
  EXPECT_EQ(p.sm.checked_read(b, ar.base, 4).code(), Errc::BadState);
  EXPECT_TRUE(p.sm.checked_write(a, ar.base + 0x100, to_bytes("mine")));
  EXPECT_EQ(p.sm.checked_read(a, p.sm.enclave(b)->private_range.base, 4).code(),
            Errc::AccessFault);
  EXPECT_EQ(p.sm.enter_enclave(b).code(), Errc::BadState);
  ASSERT_TRUE(p.sm.exit_to_os());
  EXPECT_EQ(p.sm.exit_to_os().code(), Errc::BadState);
}

TEST(Monitor, PauseAndResume) {
  TestPlatform p;
  EntityId a = p.create();
  EXPECT_EQ(p.sm.pause(a).code(), Errc::BadState);
  ASSERT_TRUE(p.sm.enter_enclave(a));
  ASSERT_TRUE(p.sm.pause(a));
  EXPECT_EQ(p.sm.enclave(a)->state, EnclaveState::Paused);
  EXPECT_TRUE(p.sm.current().is_os());
  ASSERT_TRUE(p.sm.resume(a));
  EXPECT_EQ(p.sm.enclave(a)->state, EnclaveState::Running);
  ASSERT_TRUE(p.sm.exit_to_os());
}

TEST(Monitor, ConnectSharesOnlyWithParties) {
  TestPlatform p;
  EntityId a = p.create(), b = p.create(), c = p.create();
  auto rid = p.connect(a, b);
  ASSERT_TRUE(rid);
  MemRange rr = p.sm.region(*rid)->range;
  for (EntityId x : {a, b}) {
    ASSERT_TRUE(p.sm.enter_enclave(x));
    EXPECT_TRUE(p.sm.checked_write(x, rr.base, to_bytes("hi")));
    ASSERT_TRUE(p.sm.exit_to_os());
  }
  ASSERT_TRUE(p.sm.enter_enclave(c));
  EXPECT_EQ(p.sm.checked_read(c, rr.base, 2).code(), Errc::AccessFault);
  ASSERT_TRUE(p.sm.exit_to_os());
  EXPECT_EQ(p.os_read(rr).code(), Errc::AccessFault);
  EXPECT_EQ(p.sm.enclave(a)->connections.size(), 1u);
  EXPECT_EQ(p.sm.region_between(b, a), rid.value());
}

TEST(Monitor, ConnectRefusals) {
  TestPlatform p;
  EntityId a = p.create(), b = p.create(), c = p.create();
  auto rid = p.connect(a, b);
  ASSERT_TRUE(rid);
  MemRange rr = p.sm.region(*rid)->range;
  EXPECT_EQ(p.sm.connect_enclaves(a, c, rr).code(), Errc::ThirdParty);
  EXPECT_EQ(p.sm.connect_enclaves(a, c, range(rr.base.value + 0x800, 0x1000)).code(),
            Errc::OverlapError);
  EXPECT_EQ(p.sm.connect_enclaves(b, c, p.sm.enclave(a)->private_range).code(),
            Errc::OverlapError);
  EXPECT_EQ(p.sm.connect_enclaves(a, a, p.alloc(0x1000)).code(), Errc::InvalidArgument);
  EXPECT_EQ(p.sm.connect_enclaves(a, EntityId::os(), p.alloc(0x1000)).code(),
            Errc::InvalidArgument);
  EXPECT_EQ(p.sm.connect_enclaves(a, EntityId::enclave(77), p.alloc(0x1000)).code(),
            Errc::UnknownEnclave);
  EXPECT_TRUE(p.sm.check_invariants());
}

TEST(Monitor, DestroyCascadesToSurvivor) {
  TestPlatform p;
  EntityId a = p.create(), b = p.create();
  auto rid = *p.connect(a, b);
  MemRange rr = p.sm.region(rid)->range;
  MemRange br = p.sm.enclave(b)->private_range;
  ASSERT_TRUE(p.sm.destroy_enclave(b));
  EXPECT_EQ(p.sm.enclave(b), nullptr);
  const auto* r = p.sm.region(rid);
  ASSERT_NE(r, nullptr);
  EXPECT_EQ(r->status, RegionStatus::SoleOwned);
  EXPECT_EQ(r->a, a);
  EXPECT_EQ(p.os_read(rr).code(), Errc::AccessFault);
  EXPECT_EQ(*p.os_read(br), Bytes(br.size, 0));
  ASSERT_EQ(p.sm.enclave(a)->pending_events.size(), 1u);
  EXPECT_EQ(p.sm.enclave(a)->pending_events[0].kind, NotificationKind::PeerDestroyed);

  ASSERT_TRUE(p.sm.enter_enclave(a));
  auto got = p.sm.take_delivered(a);
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].peer, b);
  EXPECT_TRUE(p.sm.take_delivered(a).empty());
  ASSERT_TRUE(p.sm.exit_to_os());
  EXPECT_TRUE(p.sm.check_invariants());
}

TEST(Monitor, SyncDisconnectZeroesAndFrees) {
  TestPlatform p;
  EntityId a = p.create(), b = p.create();
  auto rid = *p.connect(a, b);
  MemRange rr = p.sm.region(rid)->range;
  ASSERT_TRUE(p.sm.enter_enclave(a));
  ASSERT_TRUE(p.sm.checked_write(a, rr.base, Bytes(64, 0xaa)));
  ASSERT_TRUE(p.sm.exit_to_os());
  std::size_t free_before = p.sm.free_entry_count();
  ASSERT_TRUE(p.sm.sync_disconnect_enclaves(rid));
  EXPECT_EQ(p.sm.free_entry_count(), free_before + 1);
  EXPECT_EQ(*p.os_read(rr), Bytes(rr.size, 0));
  EXPECT_TRUE(p.sm.enclave(a)->connections.empty());
  EXPECT_EQ(p.sm.sync_disconnect_enclaves(rid).code(), Errc::BadRegionState);
  EXPECT_EQ(p.sm.enclave(a)->pending_events.back().kind,
            NotificationKind::SyncDisconnected);
}

TEST(Monitor, ConnectWaitsForSyncDisconnect) {
  TestPlatform p;
  EntityId a = p.create(), b = p.create(), c = p.create();
  auto rid = *p.connect(a, b);
  ASSERT_TRUE(p.sm.destroy_enclave(b));
  EXPECT_EQ(p.connect(a, c).code(), Errc::MustSyncDisconnectFirst);
  ASSERT_TRUE(p.sm.sync_disconnect_enclaves(rid));
  EXPECT_EQ(p.connect(a, c).code(), Errc::MustSyncDisconnectFirst);
  ASSERT_TRUE(p.sm.enter_enclave(a));
  ASSERT_TRUE(p.sm.exit_to_os());
  EXPECT_TRUE(p.connect(a, c));
}

TEST(Monitor, AsyncDisconnectNeedsDeadParty) {
  TestPlatform p;
  EntityId a = p.create(), b = p.create();
  auto rid = *p.connect(a, b);
  EXPECT_EQ(p.sm.async_disconnect_enclaves(rid, b).code(), Errc::BadState);
  EXPECT_EQ(p.sm.async_disconnect_enclaves(rid + 9, b).code(), Errc::BadRegionState);
}

TEST(Monitor, PmpBudget) {
  for (std::size_t max : {8u, 16u}) {
    TestPlatform p(max);
    std::size_t made = 0;
    while (true) {
      auto& s = p.add_device<peripherals::Sensor>(PeripheralKind::Sensor);
      auto id = p.sm.create_enclave(to_bytes("c"), {}, p.alloc(0x1000),
                                    EnclaveKind::Controller);
      if (!id) {
        EXPECT_EQ(id.code(), Errc::NoFreeEntry);
        break;
      }
      ASSERT_TRUE(p.connect(*id, s.id()));
      ++made;
    }
    EXPECT_EQ(made, (max - 2) / 2);
  }
}

TEST(Monitor, IdentifierPolicies) {
  TestPlatform mono(16, monitor::IdPolicy::Monotonic);
  EntityId a = mono.create();
  ASSERT_TRUE(mono.sm.destroy_enclave(a));
  EXPECT_NE(mono.create(), a);

  TestPlatform reuse(16, monitor::IdPolicy::Reuse);
  EntityId b = reuse.create();
  reuse.create();
  ASSERT_TRUE(reuse.sm.destroy_enclave(b));
  EXPECT_EQ(reuse.create(), b);
}

TEST(Monitor, MmioConnectMustMatchDeviceTree) {
  TestPlatform p;
  auto& s = p.add_device<peripherals::Sensor>(PeripheralKind::Sensor);
  EntityId ce = p.create(EnclaveKind::Controller);
  EXPECT_EQ(p.sm.connect_enclaves(ce, s.id(), p.alloc(0x1000)).code(), Errc::Mismatch);
  ASSERT_TRUE(p.connect(ce, s.id()));
  EXPECT_EQ(p.sm.peripheral(s.id())->bound_enclaves.count(ce), 1u);
}

TEST(Monitor, DmaWindowVerification) {
  TestPlatform p;
  auto& acc = p.add_device<peripherals::Accelerator>(PeripheralKind::Accelerator, true);
  auto& s = p.add_device<peripherals::Sensor>(PeripheralKind::Sensor);
  EntityId ce = p.create(EnclaveKind::Controller);
  MemRange w = p.alloc(0x1000);
  EXPECT_EQ(p.sm.connect_enclaves(ce, acc.id(), w).code(), Errc::Mismatch);
  EXPECT_EQ(p.sm.verify_dma_region(s.id(), ce, w).code(), Errc::NotDmaCapable);
  acc.set_negotiated(w);
  acc.lie_dma(range(w.base.value + 0x1000, 0x1000));
  EXPECT_EQ(p.sm.verify_dma_region(acc.id(), ce, w).code(), Errc::Mismatch);
  acc.lie_dma(std::nullopt);
  ASSERT_TRUE(p.sm.verify_dma_region(acc.id(), ce, w));
  auto rid = p.sm.connect_enclaves(ce, acc.id(), w);
  ASSERT_TRUE(rid);

  EXPECT_TRUE(p.sm.peripheral_write(acc.id(), w.base, to_bytes("dma")));
  EXPECT_EQ(*p.sm.peripheral_read(acc.id(), w.base, 3), to_bytes("dma"));
  EXPECT_EQ(p.sm.peripheral_read(acc.id(), p.sm.enclave(ce)->private_range.base, 4).code(),
            Errc::AccessFault);
  EXPECT_EQ(p.sm.peripheral_write(acc.id(), range(kDramBase, 1).base, Bytes{1}).code(),
            Errc::AccessFault);
}

TEST(Monitor, ReplugNotifiesBoundControllers) {
  TestPlatform p;
  auto& s = p.add_device<peripherals::Sensor>(PeripheralKind::Sensor);
  EntityId ce = p.create(EnclaveKind::Controller);
  ASSERT_TRUE(p.connect(ce, s.id()));
  ASSERT_TRUE(p.sm.unplug_peripheral(s.id()));
  ASSERT_TRUE(p.sm.replug_peripheral(s.id(), s.firmware_digest(), s.public_key()));
  EXPECT_EQ(p.sm.enclave(ce)->pending_events.back().kind,
            NotificationKind::PeripheralReattached);
  ASSERT_TRUE(p.sm.unplug_peripheral(s.id()));
  ASSERT_TRUE(p.sm.replug_peripheral(s.id(), p.provider.hash(to_bytes("new")),
                                     s.public_key()));
  EXPECT_EQ(p.sm.enclave(ce)->pending_events.back().kind,
            NotificationKind::PeripheralFirmwareChanged);
}

TEST(Monitor, NotifyConnectedReachesEnclavePeers) {
  TestPlatform p;
  auto& s = p.add_device<peripherals::Sensor>(PeripheralKind::Sensor);
  EntityId ce = p.create(EnclaveKind::Controller);
  EntityId ae1 = p.create(), ae2 = p.create();
  ASSERT_TRUE(p.connect(ce, s.id()));
  ASSERT_TRUE(p.connect(ae1, ce));
  ASSERT_TRUE(p.connect(ae2, ce));
  EXPECT_EQ(p.sm.notify_connected(ce, NotificationKind::PeripheralReattached, s.id()).code(),
            Errc::BadState);
  ASSERT_TRUE(p.sm.enter_enclave(ce));
  ASSERT_TRUE(p.sm.notify_connected(ce, NotificationKind::PeripheralReattached, s.id()));
  ASSERT_TRUE(p.sm.exit_to_os());
  EXPECT_EQ(p.sm.enclave(ae1)->pending_events.size(), 1u);
  EXPECT_EQ(p.sm.enclave(ae2)->pending_events.size(), 1u);
}

TEST(Monitor, TraceRecordsAreOrderedJson) {
  TestPlatform p;
  p.create();
  ASSERT_GE(p.trace.size(), 2u);
  for (std::size_t i = 0; i < p.trace.size(); ++i)
    EXPECT_EQ(p.trace.records()[i].step, i);
  auto line = p.trace.records().back().to_json_line();
  auto j = nlohmann::json::parse(line);
  EXPECT_EQ(j["actor"], "OS");
  EXPECT_EQ(j["operation"], "create_enclave");
  EXPECT_EQ(j["result"], "ok");
}

}  // namespace
}  // namespace pie::testing
