// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "pie/common/result.hpp"
#include "pie/platform/device_tree.hpp"
#include "pie/platform/memory.hpp"

namespace pie::platform {
namespace {

constexpr const char* kTree = R"({"nodes":[
  {"name":"cpu0","kind":"cpu"},
  {"name":"dram","kind":"dram","base":"0x80000000","size":65536},
  {"name":"uart","kind":"mmio-peripheral","base":"0x10000000","size":4096,"model":"uart"}
]})";

TEST(DeviceTree, ParsesNodesAndSpan) {
  auto t = DeviceTree::load(kTree);
  ASSERT_TRUE(t) << t.error().detail;
  EXPECT_EQ(t->nodes().size(), 3u);
  EXPECT_EQ(t->span().base.value, 0x1000'0000u);
  EXPECT_EQ(t->span().end(), 0x8001'0000u);
  ASSERT_NE(t->find("uart"), nullptr);
  EXPECT_EQ(t->find("uart")->model, "uart");
  EXPECT_TRUE(t->in_dram({PhysAddr{0x8000'1000}, 0x1000}));
  EXPECT_FALSE(t->in_dram({PhysAddr{0x8000'f000}, 0x2000}));
  EXPECT_NE(t->mmio_node_overlapping({PhysAddr{0x1000'0800}, 0x10}), nullptr);
}

TEST(DeviceTree, RejectsMalformedInput) {
  EXPECT_EQ(DeviceTree::load("not json").code(), Errc::ParseError);
  EXPECT_EQ(DeviceTree::load(R"({"nodes":[{"name":"x","kind":"gpu","base":0,"size":1}]})").code(),
            Errc::ParseError);
  EXPECT_EQ(DeviceTree::load(R"({"nodes":[
      {"name":"a","kind":"dram","base":0,"size":4096},
      {"name":"b","kind":"dram","base":2048,"size":4096}]})").code(),
            Errc::OverlapError);
  EXPECT_EQ(DeviceTree::load(R"({"nodes":[{"name":"a","kind":"dram","base":1,"size":0}]})").code(),
            Errc::ParseError);
}

TEST(Memory, UntouchedBytesReadZero) {
  PhysicalMemory m({PhysAddr{0x1000}, 0x10000});
  auto b = m.raw_read(PhysAddr{0x2000}, 64);
  ASSERT_TRUE(b);
  EXPECT_EQ(*b, Bytes(64, 0));
  EXPECT_EQ(m.resident_pages(), 0u);
}

TEST(Memory, WriteAcrossPagesAndZeroFill) {
  PhysicalMemory m({PhysAddr{0}, 0x4000});
  Bytes data(100, 0xab);
  ASSERT_TRUE(m.raw_write(PhysAddr{0x1000 - 50}, data));
  EXPECT_EQ(*m.raw_read(PhysAddr{0x1000 - 50}, 100), data);
  MemRange r{PhysAddr{0xf00}, 0x200};
  EXPECT_FALSE(m.is_zero(r));
  ASSERT_TRUE(m.zero_fill(r));
  EXPECT_TRUE(m.is_zero(r));
}

TEST(Memory, OutOfSpanIsRefused) {
  PhysicalMemory m({PhysAddr{0x1000}, 0x1000});
  EXPECT_EQ(m.raw_read(PhysAddr{0x1ff0}, 32).code(), Errc::OutOfSpan);
  EXPECT_EQ(m.raw_write(PhysAddr{0}, Bytes{1}).code(), Errc::OutOfSpan);
}

TEST(MemRange, MakeRejectsWrapAndEmpty) {
  EXPECT_FALSE(MemRange::make(0, 0));
  EXPECT_FALSE(MemRange::make(~std::uint64_t{0}, 2));
  EXPECT_TRUE(MemRange::make(0x1000, 0x1000));
}

}  // namespace
}  // namespace pie::platform
