// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "pie/peripherals/peripheral.hpp"

#include <algorithm>

#include "pie/crypto/canonical.hpp"

namespace pie::peripherals {

std::string_view to_string(PeripheralKind kind) {
  switch (kind) {
    case PeripheralKind::Sensor: return "sensor";
    case PeripheralKind::Keyboard: return "keyboard";
    case PeripheralKind::Accelerator: return "accelerator";
  }
  return "?";
}

std::optional<PeripheralKind> peripheral_kind_from_string(std::string_view s) {
  if (s == "sensor") return PeripheralKind::Sensor;
  if (s == "keyboard") return PeripheralKind::Keyboard;
  if (s == "accelerator") return PeripheralKind::Accelerator;
  return std::nullopt;
}

Peripheral::Peripheral(std::string name, PeripheralKind kind,
                       crypto::CryptoProvider& provider,
                       crypto::KeyPair device_key,
                       attestation::PeripheralCertificate certificate,
                       Bytes firmware, Binding binding)
    : name_(std::move(name)),
      kind_(kind),
      provider_(provider),
      device_key_(std::move(device_key)),
      certificate_(std::move(certificate)),
      firmware_digest_(provider.hash(firmware)),
      binding_(binding) {}

monitor::PeripheralInfo Peripheral::info() const {
  return monitor::PeripheralInfo{name_, binding_.dma, binding_.mmio_range,
                                 device_key_.public_key, firmware_digest_};
}

HandshakeMsg Peripheral::handshake() {
  HandshakeMsg m;
  m.peripheral_kind = static_cast<std::uint16_t>(kind_);
  Bytes nonce = provider_.random(m.peripheral_nonce.size());
  std::copy(nonce.begin(), nonce.end(), m.peripheral_nonce.begin());
  m.certificate_digest = provider_.hash(certificate_.encode());
  return m;
}

Bytes Peripheral::sign_challenge(ByteView challenge) const {
  return provider_.sign(device_key_.secret_key, challenge);
}

void Peripheral::emit_message(FrameType type, ByteView data) {
  for (const Frame& f : chunk(type, data, out_seq_)) {
    emit(f);
    ++out_seq_;
  }
}

void Peripheral::deliver(const Frame& frame) {
  switch (frame.type()) {
    case FrameType::Reset:
      reset_state();
      return;
    case FrameType::Challenge: {
      if (!inbound_message_.empty() &&
          inbound_message_.front().type() != FrameType::Challenge)
        inbound_message_.clear();
      inbound_message_.push_back(frame);
      if (frame.len() == kFramePayload) return;
      auto challenge = reassemble(inbound_message_);
      inbound_message_.clear();
      if (challenge)
        emit_message(FrameType::ChallengeResponse, sign_challenge(*challenge));
      return;
    }
    case FrameType::DmaConfig:
      if (auto body = signed_dma_body())
        emit_message(FrameType::DmaConfig, *body);
      return;
    case FrameType::Data:
      on_data(frame);
      return;
    case FrameType::ChallengeResponse:
      return;
  }
}

void Peripheral::on_data(const Frame& frame) { emit(frame); }

std::optional<Frame> Peripheral::take_outbound() {
  if (outbound_.empty()) return std::nullopt;
  Frame f = outbound_.front();
  outbound_.pop_front();
  return f;
}

Result<Bytes> Peripheral::signed_dma_body() const {
  if (!binding_.dma)
    return make_error(Errc::NotDmaCapable, name_ + " has no DMA engine");
  std::optional<MemRange> view = lie_ ? lie_ : binding_.negotiated;
  if (!view)
    return make_error(Errc::InvalidArgument, "no DMA window negotiated");
  Bytes body;
  put_be64(body, view->base.value);
  put_be64(body, view->size);
  Bytes sig = provider_.sign(device_key_.secret_key, body);
  append(body, sig);
  return body;
}

Result<std::vector<Frame>> Peripheral::report_dma_config() const {
  auto body = signed_dma_body();
  if (!body) return body.error();
  return chunk(FrameType::DmaConfig, *body);
}

Bytes Peripheral::query_dma_config() {
  auto frames = report_dma_config();
  if (!frames) return {};
  auto body = reassemble(*frames);
  return body ? *body : Bytes{};
}

void Peripheral::reflash(crypto::KeyPair device_key,
                         attestation::PeripheralCertificate certificate,
                         Bytes firmware) {
  device_key_ = std::move(device_key);
  certificate_ = std::move(certificate);
  firmware_digest_ = provider_.hash(firmware);
  reset_state();
}

void Peripheral::reset_state() {
  outbound_.clear();
  inbound_message_.clear();
  ++reset_count_;
}

void Peripheral::on_peer_lost(monitor::RegionId, EntityId) {
  if (terminate_on_peer_loss_) reset_state();
}

void Peripheral::on_region_freed(monitor::RegionId) { reset_state(); }

// ---------------------------------------------------------------------------

Bytes SensorStatement::body(std::int16_t value, std::uint64_t counter) {
  Bytes v;
  put_be16(v, static_cast<std::uint16_t>(value));
  crypto::CanonicalWriter w;
  w.field(v).u64(counter);
  return std::move(w).bytes();
}

SensorStatement Sensor::sensor_read() {
  SensorStatement s{environment_, ++counter_, {}};
  s.signature = sign_challenge(SensorStatement::body(s.value, s.counter));
  return s;
}

std::optional<std::uint8_t> Keyboard::keyboard_poll() {
  if (keys_.empty()) return std::nullopt;
  std::uint8_t k = keys_.front();
  keys_.pop_front();
  return k;
}

void Keyboard::reset_state() {
  keys_.clear();
  Peripheral::reset_state();
}

void Accelerator::accel_open_session(EntityId ae) { sessions_[ae] = Session{}; }

Status Accelerator::accel_submit(EntityId ae, ByteView data) {
  auto it = sessions_.find(ae);
  if (it == sessions_.end())
    return make_error(Errc::NoSession, monitor::to_string(ae));
  Session& s = it->second;
  for (std::uint8_t b : data) {
    s.accumulator ^= b;
    s.accumulator *= 0x100000001b3ULL;
  }
  s.count += data.size();
  append(s.input, data);
  return ok_status();
}

Result<Bytes> Accelerator::accel_result(EntityId ae) const {
  auto it = sessions_.find(ae);
  if (it == sessions_.end())
    return make_error(Errc::NoSession, monitor::to_string(ae));
  Bytes out;
  put_be64(out, it->second.accumulator);
  put_be64(out, it->second.count);
  return out;
}

void Accelerator::accel_reset(std::optional<EntityId> ae) {
  if (ae)
    sessions_.erase(*ae);
  else
    sessions_.clear();
}

void Accelerator::reset_state() {
  sessions_.clear();
  Peripheral::reset_state();
}

// ---------------------------------------------------------------------------

PeripheralBus::PeripheralBus(monitor::Monitor& sm, Trace* trace)
    : sm_(sm), trace_(trace) {}

Result<EntityId> PeripheralBus::attach(std::unique_ptr<Peripheral> device) {
  auto id = sm_.attach_peripheral(device->info(), device.get());
  if (!id) return id.error();
  device->set_id(*id);
  devices_.emplace(*id, std::move(device));
  return *id;
}

Peripheral* PeripheralBus::get(EntityId id) const {
  auto it = devices_.find(id);
  return it == devices_.end() ? nullptr : it->second.get();
}

Peripheral* PeripheralBus::find(std::string_view name) const {
  for (const auto& [id, d] : devices_)
    if (d->name() == name) return d.get();
  return nullptr;
}

std::vector<EntityId> PeripheralBus::ids() const {
  std::vector<EntityId> out;
  for (const auto& [id, d] : devices_) out.push_back(id);
  return out;
}

Status PeripheralBus::connected(EntityId host, EntityId device) const {
  const auto* rec = sm_.peripheral(device);
  if (!get(device) || !rec || !rec->attached ||
      !sm_.region_between(host, device))
    return make_error(Errc::NotConnected,
                      monitor::to_string(host) + " -> " +
                          monitor::to_string(device));
  return ok_status();
}

Status PeripheralBus::send_frame(EntityId host, EntityId device,
                                 const Frame& frame) {
  Status s = connected(host, device);
  if (trace_) {
    auto raw = frame.encode();
    trace_->append(monitor::to_string(host), "send_frame",
                   {{"device", monitor::to_string(device)},
                    {"type", static_cast<int>(frame.type())},
                    {"frame", to_hex(raw)}},
                   s ? "ok" : std::string(to_string(s.code())));
  }
  if (s) get(device)->deliver(frame);
  return s;
}

Result<std::optional<Frame>> PeripheralBus::recv_frame(EntityId host,
                                                       EntityId device) {
  Status s = connected(host, device);
  if (!s) return s.error();
  return get(device)->take_outbound();
}

Result<HandshakeMsg> PeripheralBus::handshake(EntityId host, EntityId device) {
  Status s = connected(host, device);
  if (!s) return s.error();
  HandshakeMsg m = get(device)->handshake();
  if (trace_) {
    auto raw = m.encode();
    trace_->append(monitor::to_string(device), "handshake",
                   {{"host", monitor::to_string(host)},
                    {"bytes", raw.size()},
                    {"message", to_hex(raw)}},
                   "ok");
  }
  return m;
}

}  // namespace pie::peripherals
