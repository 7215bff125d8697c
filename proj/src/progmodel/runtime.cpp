// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "pie/progmodel/runtime.hpp"

#include <algorithm>

namespace pie::progmodel {

using monitor::EnclaveKind;
using monitor::NotificationKind;
using monitor::RegionStatus;
using nlohmann::json;
using peripherals::Frame;
using peripherals::FrameType;

Bytes AeReply::encode_body() const {
  Bytes out(1 + payload.size());
  out[0] = error ? static_cast<std::uint8_t>(*error) + 1 : 0;
  std::copy(payload.begin(), payload.end(), out.begin() + 1);
  return out;
}

std::optional<AeReply> AeReply::decode(const RingRecord& record) {
  if (record.payload.empty()) return std::nullopt;
  AeReply r;
  r.request_id = record.request_id;
  std::uint8_t status = record.payload[0];
  if (status > static_cast<std::uint8_t>(Errc::ScenarioInvalid) + 1)
    return std::nullopt;
  if (status != 0) r.error = static_cast<Errc>(status - 1);
  r.payload.assign(record.payload.begin() + 1, record.payload.end());
  return r;
}

Runtime::Runtime(monitor::Monitor& sm, peripherals::PeripheralBus& bus,
                 crypto::CryptoProvider& provider,
                 std::vector<Bytes> trusted_manufacturers, Trace* trace,
                 DriverRegistry drivers)
    : sm_(sm),
      bus_(bus),
      provider_(provider),
      trusted_(std::move(trusted_manufacturers)),
      trace_(trace),
      drivers_(std::move(drivers)) {}

void Runtime::record(EntityId actor, std::string op, json args,
                     std::string result) {
  if (trace_)
    trace_->append(monitor::to_string(actor), std::move(op), std::move(args),
                   std::move(result));
}

ControllerState& Runtime::controller_state(EntityId id) {
  auto [it, fresh] = controllers_.try_emplace(id);
  if (fresh) it->second.driver = drivers_.make("echo");
  return it->second;
}

ApplicationState& Runtime::application_state(EntityId id) {
  return applications_[id];
}

const ControllerState* Runtime::controller(EntityId id) const {
  auto it = controllers_.find(id);
  return it == controllers_.end() ? nullptr : &it->second;
}

const ApplicationState* Runtime::application(EntityId id) const {
  auto it = applications_.find(id);
  return it == applications_.end() ? nullptr : &it->second;
}

void Runtime::forget(EntityId id) {
  controllers_.erase(id);
  applications_.erase(id);
}

Status Runtime::enter(EntityId id) {
  Status s = sm_.enter_enclave(id);
  if (s) react(id);
  return s;
}

void Runtime::exit() { (void)sm_.exit_to_os(); }

Status Runtime::schedule(EntityId id) {
  Status s = enter(id);
  if (s) exit();
  return s;
}

void Runtime::react(EntityId id) {
  const auto* e = sm_.enclave(id);
  if (!e) return;
  auto delivered = sm_.take_delivered(id);
  if (e->kind == EnclaveKind::Controller) {
    controller_state(id);
    for (const auto& n : delivered) ce_on_notification(id, n);
    reconcile_sessions(id);
    return;
  }
  auto& app = application_state(id);
  for (const auto& n : delivered) {
    app.observed.push_back(n);
    if (n.kind == NotificationKind::PeerDestroyed ||
        n.kind == NotificationKind::SyncDisconnected)
      app.disconnected[n.peer] = n.region;
  }
}

DriverContext Runtime::context(EntityId controller, EntityId ae) {
  auto& st = controller_state(controller);
  peripherals::Peripheral* dev =
      st.peripheral ? bus_.get(*st.peripheral) : nullptr;
  return DriverContext{bus_, controller, dev, ae};
}

void Runtime::reconcile_sessions(EntityId controller) {
  auto& st = controller_state(controller);
  std::map<EntityId, RegionId> want;
  if (const auto* e = sm_.enclave(controller)) {
    for (const auto& c : e->connections) {
      const auto* r = sm_.region(c.region);
      if (c.peer.is_enclave() && r && r->status == RegionStatus::Shared)
        want[c.peer] = c.region;
    }
  }
  for (auto it = st.sessions.begin(); it != st.sessions.end();) {
    auto w = want.find(it->first);
    if (w == want.end() || w->second != it->second) {
      auto ctx = context(controller, it->first);
      st.driver->close_session(ctx);
      it = st.sessions.erase(it);
    } else {
      ++it;
    }
  }
  for (const auto& [ae, region] : want) {
    if (st.sessions.emplace(ae, region).second) {
      auto ctx = context(controller, ae);
      st.driver->open_session(ctx);
    }
  }
}

void Runtime::teardown_sessions(EntityId controller) {
  auto& st = controller_state(controller);
  for (const auto& [ae, region] : st.sessions) {
    auto ctx = context(controller, ae);
    st.driver->close_session(ctx);
  }
  st.sessions.clear();
  st.last_served.reset();
}

void Runtime::ce_on_notification(EntityId controller, const Notification& n) {
  auto& st = controller_state(controller);
  record(controller, "ce_on_notification",
         {{"kind", monitor::to_string(n.kind)},
          {"peer", monitor::to_string(n.peer)},
          {"region", n.region}},
         "ok");
  const bool about_device = st.peripheral && *st.peripheral == n.peer;
  switch (n.kind) {
    case NotificationKind::PeerDestroyed:
    case NotificationKind::SyncDisconnected:
      if (n.peer.is_enclave()) {
        auto it = st.sessions.find(n.peer);
        if (it != st.sessions.end()) {
          auto ctx = context(controller, n.peer);
          st.driver->close_session(ctx);
          st.sessions.erase(it);
        }
      } else if (about_device) {
        st.transcript.reset();
        if (n.kind == NotificationKind::PeerDestroyed)
          teardown_sessions(controller);
      }
      return;
    case NotificationKind::PeripheralReattached:
    case NotificationKind::PeripheralFirmwareChanged:
      st.transcript.reset();
      teardown_sessions(controller);
      (void)sm_.notify_connected(controller, n.kind, n.peer);
      return;
  }
}

Bytes Runtime::challenge_over_frames(EntityId controller, EntityId peripheral,
                                     ByteView challenge) {
  for (const Frame& f : peripherals::chunk(FrameType::Challenge, challenge))
    if (!bus_.send_frame(controller, peripheral, f)) return {};
  std::vector<Frame> got;
  for (;;) {
    auto r = bus_.recv_frame(controller, peripheral);
    if (!r || !*r) break;
    const Frame& f = **r;
    if (f.type() != FrameType::ChallengeResponse) continue;
    got.push_back(f);
    if (f.len() < peripherals::kFramePayload) break;
  }
  auto body = peripherals::reassemble(got);
  return body ? *body : Bytes{};
}

AttachOutcome Runtime::ce_attach_peripheral(EntityId controller,
                                            EntityId peripheral) {
  json args{{"peripheral", monitor::to_string(peripheral)}};
  auto fail = [&](std::string why) {
    record(controller, "ce_attach_peripheral", args, "Fail(" + why + ")");
    return AttachOutcome{false, why};
  };

  const auto* e = sm_.enclave(controller);
  if (!e || e->kind != EnclaveKind::Controller)
    return fail("not a controller enclave");
  auto& st = controller_state(controller);
  if (st.peripheral && *st.peripheral != peripheral)
    return fail("controller already drives " +
                monitor::to_string(*st.peripheral));
  for (const auto& [other, ost] : controllers_) {
    const auto* oe = sm_.enclave(other);
    if (other != controller && ost.peripheral == peripheral && oe &&
        oe->state != monitor::EnclaveState::Destroyed)
      return fail("peripheral already has a controller");
  }
  peripherals::Peripheral* dev = bus_.get(peripheral);
  if (!dev) return fail("unknown peripheral");

  if (Status s = enter(controller); !s)
    return fail(std::string(to_string(s.code())));
  auto hello = bus_.handshake(controller, peripheral);
  if (!hello) {
    exit();
    return fail(std::string(to_string(hello.code())));
  }

  st.peripheral = peripheral;
  st.transcript.reset();
  if (auto d = drivers_.make(peripherals::to_string(dev->kind()))) {
    teardown_sessions(controller);
    st.driver = std::move(d);
    reconcile_sessions(controller);
  }

  const auto& cert = dev->certificate();
  if (hello->certificate_digest != provider_.hash(cert.encode())) {
    exit();
    return fail(std::string(to_string(attestation::LocalFailure::DigestMismatch)));
  }
  auto result = attestation::local_attest_peripheral(
      provider_, cert, trusted_,
      [&](ByteView ch) { return challenge_over_frames(controller, peripheral, ch); });
  exit();
  if (!result.ok())
    return fail(std::string(to_string(result.failure)));
  st.transcript = std::move(result.transcript);
  record(controller, "ce_attach_peripheral", args, "Ok");
  return AttachOutcome{true, {}};
}

AeReply Runtime::ce_handle_request(EntityId controller, EntityId ae,
                                   const RingRecord& request) {
  auto& st = controller_state(controller);
  AeReply reply;
  reply.request_id = request.request_id;
  auto fail = [&](Errc code, std::string detail) {
    reply.error = code;
    reply.payload = to_bytes(detail);
  };

  if (!st.sessions.count(ae)) {
    fail(Errc::NoSession, monitor::to_string(ae));
  } else if (st.driver->touches_peripheral() && !st.transcript) {
    fail(Errc::NotAttested, "peripheral not attested");
  } else {
    if (st.driver->exclusive() && st.peripheral && st.last_served &&
        *st.last_served != ae) {
      auto reset = Frame::make(FrameType::Reset, 0, {});
      if (reset && bus_.send_frame(controller, *st.peripheral, *reset))
        ++st.resets_sent;
    }
    st.last_served = ae;
    auto ctx = context(controller, ae);
    auto out = st.driver->handle(ctx, request.payload);
    if (out)
      reply.payload = std::move(*out);
    else
      fail(out.code(), out.error().detail);
  }
  record(controller, "ce_handle_request",
         {{"ae", monitor::to_string(ae)},
          {"request_id", request.request_id},
          {"reply", to_hex(reply.payload)}},
         reply.error ? std::string(to_string(*reply.error)) : "ok");
  return reply;
}

Result<AeReply> Runtime::ae_call(EntityId ae, EntityId controller,
                                 ByteView payload) {
  auto& app = application_state(ae);
  json args{{"controller", monitor::to_string(controller)},
            {"payload", to_hex(payload)}};
  auto done = [&](Error e) {
    record(ae, "ae_call", args, std::string(to_string(e.code)));
    return Result<AeReply>(std::move(e));
  };

  if (Status s = enter(ae); !s) return done(s.error());
  auto region = sm_.region_between(ae, controller);
  auto gone = app.disconnected.find(controller);
  if (region && gone != app.disconnected.end() && gone->second != *region) {
    app.disconnected.erase(gone);
    gone = app.disconnected.end();
  }
  if (!region || !controller.is_enclave()) {
    exit();
    if (gone != app.disconnected.end())
      return done(make_error(Errc::DisconnectedError,
                             monitor::to_string(controller) + " went away"));
    return done(make_error(Errc::NotConnected, "no live region"));
  }
  MemRange range = sm_.region(*region)->range;
  if (range.size < kMinRegionSize) {
    exit();
    return done(make_error(Errc::InvalidArgument, "region too small"));
  }
  std::uint32_t id = app.next_request++;
  args["request_id"] = id;
  Status pushed =
      Ring(sm_, ae, ring_half(range, RingSide::Request)).push(id, payload);
  exit();
  if (!pushed) return done(pushed.error());

  // The controller drains its request ring.
  if (Status s = enter(controller); !s) return done(s.error());
  Ring requests(sm_, controller, ring_half(range, RingSide::Request));
  Ring replies(sm_, controller, ring_half(range, RingSide::Reply));
  for (;;) {
    auto rec = requests.pop();
    if (!rec || !*rec) break;
    AeReply r = ce_handle_request(controller, ae, **rec);
    if (Status s = replies.push(r.request_id, r.encode_body()); !s) break;
  }
  exit();

  if (Status s = enter(ae); !s) return done(s.error());
  Ring inbox(sm_, ae, ring_half(range, RingSide::Reply));
  std::optional<AeReply> reply;
  for (;;) {
    auto rec = inbox.pop();
    if (!rec || !*rec) break;
    auto r = AeReply::decode(**rec);
    if (r && r->request_id == id) reply = std::move(r);
  }
  exit();
  if (!reply) return done(make_error(Errc::BadState, "no reply"));
  record(ae, "ae_call", args,
         reply->error ? std::string(to_string(*reply->error)) : "ok");
  return *reply;
}

std::vector<attestation::PeripheralEvidence> Runtime::peripheral_evidence(
    EntityId controller) {
  std::vector<attestation::PeripheralEvidence> out;
  const auto* e = sm_.enclave(controller);
  if (!e) return out;
  for (const auto& c : e->connections) {
    const auto* r = sm_.region(c.region);
    if (!c.peer.is_peripheral() || !r || r->status != RegionStatus::Shared)
      continue;
    auto* dev = bus_.get(c.peer);
    if (!dev) continue;
    attestation::PeripheralEvidence ev;
    ev.certificate = dev->certificate();
    ev.challenge = provider_.random(attestation::kChallengeSize);
    ev.response_signature = challenge_over_frames(controller, c.peer, ev.challenge);
    out.push_back(std::move(ev));
  }
  return out;
}

}  // namespace pie::progmodel
