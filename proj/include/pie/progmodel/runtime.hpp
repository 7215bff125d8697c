// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pie/attestation/report.hpp"
#include "pie/attestation/verifier.hpp"
#include "pie/common/trace.hpp"
#include "pie/monitor/monitor.hpp"
#include "pie/peripherals/peripheral.hpp"
#include "pie/progmodel/driver.hpp"
#include "pie/progmodel/ring.hpp"

namespace pie::progmodel {

using monitor::Notification;
using monitor::RegionId;

/// A controller's answer. On the wire the reply payload is one status byte
/// (0 for success, otherwise the error code plus one) followed by the reply
/// bytes or the UTF-8 error detail.
struct AeReply {
  std::uint32_t request_id = 0;
  std::optional<Errc> error;
  Bytes payload;

  bool ok() const { return !error.has_value(); }
  Bytes encode_body() const;
  static std::optional<AeReply> decode(const RingRecord& record);
  bool operator==(const AeReply&) const = default;
};

struct ControllerState {
  std::optional<EntityId> peripheral;
  /// Application enclave -> the region carrying its session.
  std::map<EntityId, RegionId> sessions;
  std::optional<attestation::LocalTranscript> transcript;
  std::optional<EntityId> last_served;
  std::unique_ptr<Driver> driver;
  std::uint64_t resets_sent = 0;
};

struct ApplicationState {
  std::vector<Notification> observed;
  /// Peer -> region on which the enclave saw it go away.
  std::map<EntityId, RegionId> disconnected;
  std::uint32_t next_request = 1;
};

struct AttachOutcome {
  bool ok = false;
  std::string detail;
};

/// Steps application and controller enclaves as deterministic state
/// machines on top of the monitor. Every enclave-side memory access goes
/// through the monitor's PMP check while that enclave is the running
/// context.
class Runtime : public attestation::EvidenceSource {
 public:
  Runtime(monitor::Monitor& sm, peripherals::PeripheralBus& bus,
          crypto::CryptoProvider& provider,
          std::vector<Bytes> trusted_manufacturers, Trace* trace = nullptr,
          DriverRegistry drivers = DriverRegistry::with_builtins());

  /// Local attestation of `peripheral` by `controller` over the frame
  /// channel. Binds the device to the controller even on failure, so that
  /// later device requests are refused with NotAttested.
  AttachOutcome ce_attach_peripheral(EntityId controller, EntityId peripheral);

  /// Serves one request while `controller` runs. Errors come back inside the
  /// reply: NoSession, NotAttested, or the driver's error.
  AeReply ce_handle_request(EntityId controller, EntityId ae,
                            const RingRecord& request);

  void ce_on_notification(EntityId controller, const Notification& n);

  /// Client side: marshals `payload` into the shared region, steps the
  /// controller and returns its reply. NotConnected without a live region,
  /// DisconnectedError once the application enclave has observed the
  /// controller going away.
  Result<AeReply> ae_call(EntityId ae, EntityId controller, ByteView payload);

  /// Lets the OS schedule `id` once: enter, react to notifications, exit.
  Status schedule(EntityId id);

  /// Drops runtime state of a destroyed enclave (identifiers may be reused).
  void forget(EntityId id);

  const ControllerState* controller(EntityId id) const;
  const ApplicationState* application(EntityId id) const;

  // attestation::EvidenceSource: a fresh challenge response per device.
  std::vector<attestation::PeripheralEvidence> peripheral_evidence(
      EntityId controller) override;

 private:
  ControllerState& controller_state(EntityId id);
  ApplicationState& application_state(EntityId id);
  Status enter(EntityId id);
  void exit();
  void react(EntityId id);
  void reconcile_sessions(EntityId controller);
  void teardown_sessions(EntityId controller);
  DriverContext context(EntityId controller, EntityId ae);
  Bytes challenge_over_frames(EntityId controller, EntityId peripheral,
                              ByteView challenge);
  void record(EntityId actor, std::string op, nlohmann::json args,
              std::string result);

  monitor::Monitor& sm_;
  peripherals::PeripheralBus& bus_;
  crypto::CryptoProvider& provider_;
  std::vector<Bytes> trusted_;
  Trace* trace_;
  DriverRegistry drivers_;
  std::map<EntityId, ControllerState> controllers_;
  std::map<EntityId, ApplicationState> applications_;
};

}  // namespace pie::progmodel
