// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "pie/attestation/verifier.hpp"

#include <algorithm>
#include <array>

namespace pie::attestation {

namespace {

struct ReasonName {
  RejectReason reason;
  std::string_view name;
};
constexpr std::array kReasonNames = {
    ReasonName{RejectReason::BadSignature, "BadSignature"},
    ReasonName{RejectReason::MeasurementMismatch, "MeasurementMismatch"},
    ReasonName{RejectReason::LinkMismatch, "LinkMismatch"},
    ReasonName{RejectReason::PeripheralCertInvalid, "PeripheralCertInvalid"},
    ReasonName{RejectReason::FirmwareMismatch, "FirmwareMismatch"},
    ReasonName{RejectReason::NonceMismatch, "NonceMismatch"},
    ReasonName{RejectReason::PlatformKeyMismatch, "PlatformKeyMismatch"},
};

template <class T>
bool contains(const std::vector<T>& v, const T& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

}  // namespace

std::string_view to_string(RejectReason reason) {
  for (const auto& r : kReasonNames)
    if (r.reason == reason) return r.name;
  return "?";
}

std::optional<RejectReason> reject_reason_from_string(std::string_view s) {
  for (const auto& r : kReasonNames)
    if (r.name == s) return r.reason;
  return std::nullopt;
}

std::string Verdict::to_string() const {
  if (accepted) return "Accept";
  return "Reject(" + std::string(attestation::to_string(reason)) + ")";
}

Verdict verify_platform(const crypto::CryptoProvider& provider,
                        std::span<const Bytes> wire_reports,
                        const VerificationPolicy& policy,
                        std::span<const Bytes> nonces) {
  if (wire_reports.empty())
    return Verdict::reject(RejectReason::LinkMismatch, "no reports");

  std::vector<AttestationReport> reports;
  for (std::size_t i = 0; i < wire_reports.size(); ++i) {
    auto rep = AttestationReport::decode(wire_reports[i]);
    if (!rep)
      return Verdict::reject(RejectReason::BadSignature,
                             "report " + std::to_string(i) + " is malformed");
    if (!provider.verify(rep->platform_public_key, rep->signed_body(),
                         rep->platform_signature))
      return Verdict::reject(RejectReason::BadSignature,
                             "report " + std::to_string(i) +
                                 " signature does not verify");
    if (rep->platform_public_key != policy.platform_public_key)
      return Verdict::reject(RejectReason::PlatformKeyMismatch,
                             "report " + std::to_string(i) +
                                 " signed by another platform");
    reports.push_back(std::move(*rep));
  }

  if (nonces.size() != reports.size())
    return Verdict::reject(RejectReason::NonceMismatch, "nonce count");
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (reports[i].verifier_nonce.size() != nonces[i].size() ||
        !std::equal(nonces[i].begin(), nonces[i].end(),
                    reports[i].verifier_nonce.begin()))
      return Verdict::reject(RejectReason::NonceMismatch,
                             "report " + std::to_string(i) + " is stale");
  }

  const AttestationReport& ae = reports.front();
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    if (r.sm_measurement != policy.sm)
      return Verdict::reject(RejectReason::MeasurementMismatch,
                             "monitor measurement");
    bool want_ae = i == 0;
    if (want_ae != (r.subject_kind == SubjectKind::AE))
      return Verdict::reject(RejectReason::MeasurementMismatch,
                             "unexpected subject kind");
    bool known = want_ae ? r.subject_measurement == policy.ae
                         : contains(policy.ce, r.subject_measurement);
    if (!known)
      return Verdict::reject(RejectReason::MeasurementMismatch,
                             monitor::to_string(r.subject_id) +
                                 " runs unexpected code");
  }

  std::vector<EntityId> listed;
  for (EntityId id : ae.connected_ids) {
    if (!id.is_enclave())
      return Verdict::reject(RejectReason::LinkMismatch,
                             "AE is linked to a non-enclave");
    listed.push_back(id);
  }
  if (listed.size() != reports.size() - 1)
    return Verdict::reject(RejectReason::LinkMismatch,
                           "CE report count differs from AE links");
  for (EntityId id : listed) {
    auto it = std::find_if(reports.begin() + 1, reports.end(),
                           [&](const auto& r) { return r.subject_id == id; });
    if (it == reports.end())
      return Verdict::reject(RejectReason::LinkMismatch,
                             "no report for " + monitor::to_string(id));
    if (!contains(it->connected_ids, ae.subject_id))
      return Verdict::reject(RejectReason::LinkMismatch,
                             monitor::to_string(id) + " does not list AE");
  }

  for (std::size_t i = 1; i < reports.size(); ++i) {
    const auto& ce = reports[i];
    auto devices = std::count_if(ce.connected_ids.begin(),
                                 ce.connected_ids.end(),
                                 [](EntityId id) { return id.is_peripheral(); });
    if (static_cast<std::size_t>(devices) != ce.peripheral_evidence.size())
      return Verdict::reject(RejectReason::PeripheralCertInvalid,
                             "evidence missing for a connected device");
    for (const auto& ev : ce.peripheral_evidence) {
      bool chained = std::any_of(
          policy.manufacturer_keys.begin(), policy.manufacturer_keys.end(),
          [&](const Bytes& k) {
            return verify_certificate(provider, ev.certificate, k);
          });
      if (!chained)
        return Verdict::reject(RejectReason::PeripheralCertInvalid,
                               "certificate not from a trusted manufacturer");
      if (ev.challenge.size() != kChallengeSize ||
          !provider.verify(ev.certificate.peripheral_public_key, ev.challenge,
                           ev.response_signature))
        return Verdict::reject(RejectReason::PeripheralCertInvalid,
                               "challenge response does not verify");
      if (!contains(policy.firmware_versions,
                    ev.certificate.firmware_version))
        return Verdict::reject(RejectReason::FirmwareMismatch,
                               "firmware " + ev.certificate.firmware_version);
    }
  }
  return Verdict::accept();
}

Verdict verify_platform(const crypto::CryptoProvider& provider,
                        std::span<const AttestationReport> reports,
                        const VerificationPolicy& policy,
                        std::span<const Bytes> nonces) {
  std::vector<Bytes> wire;
  for (const auto& r : reports) wire.push_back(r.encode());
  return verify_platform(provider, std::span<const Bytes>(wire), policy,
                         nonces);
}

std::string_view to_string(LocalFailure failure) {
  switch (failure) {
    case LocalFailure::BadResponse: return "BadResponse";
    case LocalFailure::CertUntrusted: return "CertUntrusted";
    case LocalFailure::DigestMismatch: return "DigestMismatch";
  }
  return "?";
}

LocalAttestation local_attest_peripheral(
    crypto::CryptoProvider& provider, const PeripheralCertificate& certificate,
    std::span<const Bytes> trusted_manufacturers,
    const ChallengeResponder& respond) {
  LocalAttestation out;
  bool chained = std::any_of(
      trusted_manufacturers.begin(), trusted_manufacturers.end(),
      [&](const Bytes& k) { return verify_certificate(provider, certificate, k); });
  if (!chained) {
    out.failure = LocalFailure::CertUntrusted;
    return out;
  }
  Bytes challenge = provider.random(kChallengeSize);
  Bytes response = respond(challenge);
  if (!provider.verify(certificate.peripheral_public_key, challenge,
                       response)) {
    out.failure = LocalFailure::BadResponse;
    return out;
  }
  out.transcript =
      LocalTranscript{certificate, std::move(challenge), std::move(response)};
  return out;
}

}  // namespace pie::attestation
