// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pie/attestation/report.hpp"

namespace pie::attestation {

struct VerificationPolicy {
  Measurement sm;
  Measurement ae;
  std::vector<Measurement> ce;
  Bytes platform_public_key;
  std::vector<Bytes> manufacturer_keys;
  std::vector<std::string> firmware_versions;
};

enum class RejectReason {
  BadSignature,
  MeasurementMismatch,
  LinkMismatch,
  PeripheralCertInvalid,
  FirmwareMismatch,
  NonceMismatch,
  PlatformKeyMismatch,
};

std::string_view to_string(RejectReason reason);
std::optional<RejectReason> reject_reason_from_string(std::string_view s);

struct Verdict {
  bool accepted = false;
  RejectReason reason = RejectReason::BadSignature;
  std::string detail;

  static Verdict accept() { return {true, {}, {}}; }
  static Verdict reject(RejectReason r, std::string detail) {
    return {false, r, std::move(detail)};
  }
  /// "Accept" or "Reject(<reason>)".
  std::string to_string() const;
};

/// Cross-checks a platform-wide attestation. reports[0] is the application
/// enclave's report; the rest are the reports of the controller enclaves it
/// lists. nonces[i] is the nonce the verifier sent for reports[i].
///
/// Checks run in this order and the first failure is reported:
///   1. each report decodes and its signature verifies under its embedded
///      key (BadSignature), and that key is the policy's platform key
///      (PlatformKeyMismatch);
///   2. nonce echo (NonceMismatch);
///   3. monitor and subject measurements (MeasurementMismatch);
///   4. AE lists CE <=> CE lists AE (LinkMismatch);
///   5. peripheral evidence: certificate chain and challenge response
///      (PeripheralCertInvalid), firmware version (FirmwareMismatch).
Verdict verify_platform(const crypto::CryptoProvider& provider,
                        std::span<const Bytes> wire_reports,
                        const VerificationPolicy& policy,
                        std::span<const Bytes> nonces);

Verdict verify_platform(const crypto::CryptoProvider& provider,
                        std::span<const AttestationReport> reports,
                        const VerificationPolicy& policy,
                        std::span<const Bytes> nonces);

// Local attestation between a controller enclave and a device.

enum class LocalFailure { BadResponse, CertUntrusted, DigestMismatch };

std::string_view to_string(LocalFailure failure);

struct LocalTranscript {
  PeripheralCertificate certificate;
  Bytes challenge;
  Bytes response_signature;
};

struct LocalAttestation {
  std::optional<LocalTranscript> transcript;
  LocalFailure failure = LocalFailure::BadResponse;

  bool ok() const { return transcript.has_value(); }
};

/// Signs a challenge on the device side; the transport is the caller's.
using ChallengeResponder = std::function<Bytes(ByteView challenge)>;

/// Ok iff `certificate` verifies under one of the trusted manufacturer keys
/// and the device's signature over a fresh random challenge verifies under the
/// certified device key.
LocalAttestation local_attest_peripheral(
    crypto::CryptoProvider& provider, const PeripheralCertificate& certificate,
    std::span<const Bytes> trusted_manufacturers,
    const ChallengeResponder& respond);

}  // namespace pie::attestation
