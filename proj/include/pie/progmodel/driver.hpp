// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>

#include "pie/common/result.hpp"
#include "pie/common/trace.hpp"
#include "pie/monitor/monitor.hpp"
#include "pie/peripherals/peripheral.hpp"

namespace pie::progmodel {

using monitor::EntityId;

/// What a driver may touch while serving one request of `ae`.
struct DriverContext {
  peripherals::PeripheralBus& bus;
  EntityId controller;
  /// Null for drivers that do not touch a device.
  peripherals::Peripheral* device = nullptr;
  EntityId ae;
};

/// Request opcodes, first payload byte.
enum class Op : std::uint8_t {
  Read = 0x01,    // sensor sample, keyboard poll
  Submit = 0x02,  // accelerator input
  Result = 0x03,  // accelerator digest
  Frame = 0x04,   // raw Data frame round trip
};

/// Driver logic of a controller enclave. Drivers are stateless; the device
/// keeps per-session state.
class Driver {
 public:
  virtual ~Driver() = default;
  virtual std::string_view kind() const = 0;
  /// Whether replies depend on the device (and so need a fresh local
  /// attestation).
  virtual bool touches_peripheral() const { return true; }
  /// One session at a time: the device is reset whenever the serving
  /// application enclave changes.
  virtual bool exclusive() const { return false; }
  virtual void open_session(DriverContext&) {}
  virtual void close_session(DriverContext&) {}
  virtual Result<Bytes> handle(DriverContext& ctx, ByteView request) = 0;
};

using DriverFactory = std::function<std::unique_ptr<Driver>()>;

/// Drivers keyed by peripheral kind string. The built-in set is sensor,
/// keyboard, accelerator and echo (no device; returns the request).
class DriverRegistry {
 public:
  static DriverRegistry with_builtins();

  void add(std::string kind, DriverFactory factory);
  bool has(std::string_view kind) const;
  std::unique_ptr<Driver> make(std::string_view kind) const;

 private:
  std::map<std::string, DriverFactory, std::less<>> factories_;
};

}  // namespace pie::progmodel
