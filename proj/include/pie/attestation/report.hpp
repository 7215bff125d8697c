// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pie/attestation/measurement.hpp"
#include "pie/common/bytes.hpp"
#include "pie/common/result.hpp"
#include "pie/crypto/provider.hpp"
#include "pie/monitor/types.hpp"

namespace pie::monitor {
class Monitor;
}

namespace pie::attestation {

using monitor::EntityId;

inline constexpr std::size_t kNonceSize = 32;
inline constexpr std::size_t kChallengeSize = 32;

/// Manufacturer statement binding a device key to a certified firmware.
struct PeripheralCertificate {
  Bytes peripheral_public_key;
  Digest firmware_digest{};
  std::string firmware_version;
  Bytes manufacturer_signature;

  /// Canonical encoding of the three certified fields.
  Bytes signed_body() const;
  /// signed_body fields followed by the signature field.
  Bytes encode() const;
  static std::optional<PeripheralCertificate> decode(ByteView bytes);
  bool operator==(const PeripheralCertificate&) const = default;
};

PeripheralCertificate issue_certificate(const crypto::CryptoProvider& provider,
                                        const crypto::KeyPair& manufacturer,
                                        Bytes peripheral_public_key,
                                        Digest firmware_digest,
                                        std::string firmware_version);

bool verify_certificate(const crypto::CryptoProvider& provider,
                        const PeripheralCertificate& cert,
                        ByteView manufacturer_public_key);

/// Challenge-response transcript of one device, as embedded in a CE report.
struct PeripheralEvidence {
  PeripheralCertificate certificate;
  Bytes challenge;
  Bytes response_signature;
  bool operator==(const PeripheralEvidence&) const = default;
};

enum class SubjectKind : std::uint8_t { AE = 0, CE = 1 };

/// Signed statement of the monitor about one enclave. Field order below is
/// the canonical serialization order.
struct AttestationReport {
  EntityId subject_id;
  SubjectKind subject_kind = SubjectKind::AE;
  Measurement sm_measurement;
  Measurement subject_measurement;
  Digest config_digest{};
  std::vector<EntityId> connected_ids;
  std::vector<PeripheralEvidence> peripheral_evidence;
  Bytes verifier_nonce;
  /// Key the report claims to be signed with (the device root key).
  Bytes platform_public_key;
  Bytes platform_signature;

  Bytes signed_body() const;
  /// Wire format: signed_body() followed by one signature field.
  Bytes encode() const;
  static std::optional<AttestationReport> decode(ByteView bytes);
  nlohmann::json to_json() const;
  bool operator==(const AttestationReport&) const = default;
};

/// Supplies fresh peripheral evidence for a controller enclave.
class EvidenceSource {
 public:
  virtual ~EvidenceSource() = default;
  virtual std::vector<PeripheralEvidence> peripheral_evidence(
      EntityId controller) = 0;
};

/// Builds and signs the report of `subject` from the monitor's live state.
/// connected_ids lists the peers of the subject's connection set in region
/// order. Errors: UnknownEnclave.
Result<AttestationReport> attest_enclave(const monitor::Monitor& sm,
                                         EntityId subject, ByteView nonce,
                                         const crypto::KeyPair& platform_key,
                                         EvidenceSource* evidence = nullptr);

}  // namespace pie::attestation
