// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "pie/attestation/report.hpp"
#include "pie/crypto/provider.hpp"
#include "pie/monitor/monitor.hpp"
#include "pie/peripherals/peripheral.hpp"
#include "pie/platform/device_tree.hpp"
#include "pie/platform/memory.hpp"
#include "pie/progmodel/runtime.hpp"

namespace pie::testing {

using monitor::EnclaveKind;
using monitor::EntityId;
using platform::MemRange;
using platform::PhysAddr;

inline constexpr std::uint64_t kDramBase = 0x8000'0000;
inline constexpr std::uint64_t kDramSize = 0x1000'0000;
inline constexpr std::uint64_t kMmioBase = 0x1000'0000;
inline constexpr std::uint64_t kBusBase = 0x0c00'0000;
inline constexpr std::size_t kMmioSlots = 8;

inline std::string tree_json() {
  std::string nodes =
      R"({"name":"cpu0","kind":"cpu"},)"
      R"({"name":"dram","kind":"dram","base":"0x80000000","size":268435456},)"
      R"({"name":"dma-bus","kind":"bus-controller","base":"0x0c000000","size":4096})";
  for (std::size_t i = 0; i < kMmioSlots; ++i)
    nodes += R"(,{"name":"mmio)" + std::to_string(i) +
             R"(","kind":"mmio-peripheral","base":)" +
             std::to_string(kMmioBase + i * 0x1000) + R"(,"size":4096})";
  return R"({"nodes":[)" + nodes + "]}";
}

inline MemRange range(std::uint64_t base, std::uint64_t size) {
  return MemRange{PhysAddr{base}, size};
}

/// Monitor, bus and runtime over the test device tree, with a bump allocator
/// for enclave and region memory.
struct TestPlatform {
  platform::DeviceTree tree;
  platform::PhysicalMemory memory;
  crypto::DeterministicProvider provider;
  Trace trace;
  monitor::Monitor sm;
  crypto::KeyPair platform_key;
  crypto::KeyPair manufacturer;
  peripherals::PeripheralBus bus;
  progmodel::Runtime runtime;
  std::uint64_t next_free = kDramBase + 0x20'0000;
  std::size_t next_mmio = 0;

  explicit TestPlatform(std::size_t max_entries = 16,
                        monitor::IdPolicy policy = monitor::IdPolicy::Monotonic,
                        std::uint64_t seed = 7)
      : tree(platform::DeviceTree::load(tree_json()).value()),
        memory(tree.span()),
        provider(seed),
        sm(tree, memory, provider, config(max_entries, policy), &trace),
        platform_key(provider.keygen(std::string_view("test-platform"))),
        manufacturer(provider.keygen(std::string_view("test-manufacturer"))),
        bus(sm, &trace),
        runtime(sm, bus, provider, {manufacturer.public_key}, &trace) {}

  static monitor::MonitorConfig config(std::size_t max_entries,
                                       monitor::IdPolicy policy) {
    monitor::MonitorConfig cfg;
    cfg.max_entries = max_entries;
    cfg.id_policy = policy;
    return cfg;
  }

  MemRange alloc(std::uint64_t size) {
    MemRange r = range(next_free, size);
    next_free += (size + 0xfff) & ~std::uint64_t{0xfff};
    return r;
  }

  EntityId create(EnclaveKind kind = EnclaveKind::Application,
                  std::string code = "code", std::string config = "",
                  std::uint64_t size = 0x4000) {
    auto id = sm.create_enclave(to_bytes(code), to_bytes(config), alloc(size),
                                kind);
    if (!id) throw std::runtime_error(id.error().detail);
    return *id;
  }

  Result<monitor::RegionId> connect(EntityId a, EntityId b,
                                    std::uint64_t size = 0x1000) {
    if (b.is_peripheral()) {
      auto* dev = bus.get(b);
      if (dev && dev->binding().mmio_range)
        return sm.connect_enclaves(a, b, *dev->binding().mmio_range);
      MemRange r = alloc(size);
      if (dev) dev->set_negotiated(r);
      if (Status s = sm.verify_dma_region(b, a, r); !s) return s.error();
      return sm.connect_enclaves(a, b, r);
    }
    return sm.connect_enclaves(a, b, alloc(size));
  }

  attestation::PeripheralCertificate certify(const crypto::KeyPair& device,
                                             const Bytes& firmware,
                                             std::string version = "1.0",
                                             const crypto::KeyPair* signer =
                                                 nullptr) {
    return attestation::issue_certificate(
        provider, signer ? *signer : manufacturer, device.public_key,
        provider.hash(firmware), std::move(version));
  }

  template <class Device = peripherals::Sensor>
  Device& add_device(peripherals::PeripheralKind kind, bool dma = false,
                     std::string version = "1.0",
                     const crypto::KeyPair* signer = nullptr) {
    std::string name = "dev" + std::to_string(bus.ids().size());
    auto key = provider.keygen(std::string_view("test-device/" + name));
    Bytes firmware = to_bytes(name + "-firmware");
    peripherals::Binding binding;
    binding.dma = dma;
    if (!dma) binding.mmio_range = range(kMmioBase + 0x1000 * next_mmio++, 0x1000);
    auto dev = std::make_unique<Device>(name, kind, provider, key,
                                        certify(key, firmware, version, signer),
                                        firmware, binding);
    Device& ref = *dev;
    bus.attach(std::move(dev)).value();
    return ref;
  }

  Result<Bytes> os_read(MemRange r) {
    return sm.checked_read(EntityId::os(), r.base, r.size);
  }
};

}  // namespace pie::testing
