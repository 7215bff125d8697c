// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pie/attestation/report.hpp"
#include "pie/common/trace.hpp"
#include "pie/crypto/provider.hpp"
#include "pie/monitor/monitor.hpp"
#include "pie/peripherals/frame.hpp"

namespace pie::peripherals {

using monitor::EntityId;
using platform::MemRange;

enum class PeripheralKind : std::uint16_t {
  Sensor = 1,
  Keyboard = 2,
  Accelerator = 3,
};

std::string_view to_string(PeripheralKind kind);
std::optional<PeripheralKind> peripheral_kind_from_string(std::string_view s);

/// How the device reaches memory: a fixed device-tree range (MMIO) or a DMA
/// window negotiated by the OS.
struct Binding {
  bool dma = false;
  std::optional<MemRange> mmio_range;
  std::optional<MemRange> negotiated;
};

/// Firmware-side model of an attestable device. Key material stays inside;
/// the monitor talks to it through PeripheralPort, the controller enclave
/// through frames and the kind-specific operations of the subclasses.
class Peripheral : public monitor::PeripheralPort {
 public:
  Peripheral(std::string name, PeripheralKind kind,
             crypto::CryptoProvider& provider, crypto::KeyPair device_key,
             attestation::PeripheralCertificate certificate, Bytes firmware,
             Binding binding);
  ~Peripheral() override = default;

  const std::string& name() const { return name_; }
  PeripheralKind kind() const { return kind_; }
  EntityId id() const { return id_; }
  void set_id(EntityId id) { id_ = id; }
  const attestation::PeripheralCertificate& certificate() const {
    return certificate_;
  }
  const Bytes& public_key() const { return device_key_.public_key; }
  const Digest& firmware_digest() const { return firmware_digest_; }
  const Binding& binding() const { return binding_; }
  monitor::PeripheralInfo info() const;

  /// Fresh 60-byte handshake with the digest of the serialized certificate.
  HandshakeMsg handshake();
  Bytes sign_challenge(ByteView challenge) const;

  /// Device side of the frame channel.
  void deliver(const Frame& frame);
  std::optional<Frame> take_outbound();
  std::size_t outbound_pending() const { return outbound_.size(); }

  // DMA negotiation. The OS programs the window; a harness can make the
  // device lie about it.
  void set_negotiated(MemRange range) { binding_.negotiated = range; }
  void lie_dma(std::optional<MemRange> range) { lie_ = range; }
  /// Signed (base, size) view as DmaConfig frames. NotDmaCapable for MMIO
  /// devices, InvalidArgument before a window was negotiated.
  Result<std::vector<Frame>> report_dma_config() const;

  /// Models a replug: new key material, certificate and firmware.
  void reflash(crypto::KeyPair device_key,
               attestation::PeripheralCertificate certificate, Bytes firmware);

  /// Zero all session state and queues.
  virtual void reset_state();
  std::uint64_t reset_count() const { return reset_count_; }

  /// Whether losing a peer wipes all session state (firmware policy).
  void set_terminate_on_peer_loss(bool v) { terminate_on_peer_loss_ = v; }

  // monitor::PeripheralPort
  Bytes query_dma_config() override;
  void on_peer_lost(monitor::RegionId region, EntityId peer) override;
  void on_region_freed(monitor::RegionId region) override;

 protected:
  /// Inbound Data frames; the base firmware echoes them.
  virtual void on_data(const Frame& frame);
  void emit(const Frame& frame) { outbound_.push_back(frame); }
  void emit_message(FrameType type, ByteView data);
  crypto::CryptoProvider& provider() const { return provider_; }

 private:
  Result<Bytes> signed_dma_body() const;

  std::string name_;
  PeripheralKind kind_;
  crypto::CryptoProvider& provider_;
  crypto::KeyPair device_key_;
  attestation::PeripheralCertificate certificate_;
  Digest firmware_digest_;
  Binding binding_;
  EntityId id_;
  std::optional<MemRange> lie_;
  std::deque<Frame> outbound_;
  std::vector<Frame> inbound_message_;
  std::uint8_t out_seq_ = 0;
  std::uint64_t reset_count_ = 0;
  bool terminate_on_peer_loss_ = true;
};

struct SensorStatement {
  std::int16_t value = 0;
  std::uint64_t counter = 0;
  Bytes signature;

  /// Canonical (value as 2-byte BE, counter as u64) body that is signed.
  static Bytes body(std::int16_t value, std::uint64_t counter);
};

class Sensor final : public Peripheral {
 public:
  using Peripheral::Peripheral;

  void set_environment(std::int16_t value) { environment_ = value; }
  /// Current value signed together with a strictly increasing counter.
  SensorStatement sensor_read();

 private:
  std::int16_t environment_ = 0;
  std::uint64_t counter_ = 0;
};

class Keyboard final : public Peripheral {
 public:
  using Peripheral::Peripheral;

  void inject_key(std::uint8_t scancode) { keys_.push_back(scancode); }
  std::optional<std::uint8_t> keyboard_poll();
  std::size_t queued() const { return keys_.size(); }
  void reset_state() override;

 private:
  std::deque<std::uint8_t> keys_;
};

/// Per-application-enclave isolated compute sessions.
class Accelerator final : public Peripheral {
 public:
  using Peripheral::Peripheral;

  /// Opens (or reopens empty) the session of `ae`.
  void accel_open_session(EntityId ae);
  Status accel_submit(EntityId ae, ByteView data);
  /// 8-byte BE FNV-1a-64 over everything submitted, then the byte count as
  /// 8-byte BE. NoSession if `ae` has no session.
  Result<Bytes> accel_result(EntityId ae) const;
  /// Drops the session of `ae`, or every session when `ae` is empty.
  void accel_reset(std::optional<EntityId> ae);
  bool has_session(EntityId ae) const { return sessions_.count(ae) != 0; }
  std::size_t session_count() const { return sessions_.size(); }
  void reset_state() override;

 private:
  struct Session {
    Bytes input;
    std::uint64_t accumulator = 0xcbf29ce484222325ULL;
    std::uint64_t count = 0;
  };
  std::map<EntityId, Session> sessions_;
};

/// Host side of the device buses. Owns the device models, registers them
/// with the monitor and refuses traffic on devices that have no live region
/// with the sender.
class PeripheralBus {
 public:
  PeripheralBus(monitor::Monitor& sm, Trace* trace = nullptr);

  Result<EntityId> attach(std::unique_ptr<Peripheral> device);
  Peripheral* get(EntityId id) const;
  Peripheral* find(std::string_view name) const;
  std::vector<EntityId> ids() const;

  /// NotConnected unless `host` shares a live region with `device`.
  Status send_frame(EntityId host, EntityId device, const Frame& frame);
  /// nullopt on a poll miss.
  Result<std::optional<Frame>> recv_frame(EntityId host, EntityId device);
  Result<HandshakeMsg> handshake(EntityId host, EntityId device);
  Status connected(EntityId host, EntityId device) const;

 private:
  monitor::Monitor& sm_;
  Trace* trace_;
  std::map<EntityId, std::unique_ptr<Peripheral>> devices_;
};

}  // namespace pie::peripherals
