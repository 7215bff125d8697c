// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "pie/attestation/report.hpp"

#include <algorithm>

#include "pie/crypto/canonical.hpp"
#include "pie/monitor/monitor.hpp"

namespace pie::attestation {

using crypto::CanonicalList;
using crypto::CanonicalReader;
using crypto::CanonicalWriter;

namespace {

std::optional<Digest> to_digest(const std::optional<Bytes>& b) {
  if (!b || b->size() != kDigestSize) return std::nullopt;
  Digest d;
  std::copy(b->begin(), b->end(), d.begin());
  return d;
}

Bytes encode_evidence(const PeripheralEvidence& e) {
  CanonicalWriter w;
  w.field(e.certificate.encode()).field(e.challenge).field(e.response_signature);
  return std::move(w).bytes();
}

std::optional<PeripheralEvidence> decode_evidence(ByteView bytes) {
  CanonicalReader r(bytes);
  auto cert = r.field();
  auto challenge = r.field();
  auto response = r.field();
  if (r.failed() || !r.at_end()) return std::nullopt;
  auto decoded = PeripheralCertificate::decode(*cert);
  if (!decoded) return std::nullopt;
  return PeripheralEvidence{std::move(*decoded), std::move(*challenge),
                            std::move(*response)};
}

}  // namespace

Bytes PeripheralCertificate::signed_body() const {
  CanonicalWriter w;
  w.field(peripheral_public_key).field(firmware_digest).text(firmware_version);
  return std::move(w).bytes();
}

Bytes PeripheralCertificate::encode() const {
  Bytes out = signed_body();
  CanonicalWriter w;
  w.field(manufacturer_signature);
  append(out, w.bytes());
  return out;
}

std::optional<PeripheralCertificate> PeripheralCertificate::decode(
    ByteView bytes) {
  CanonicalReader r(bytes);
  PeripheralCertificate c;
  auto pk = r.field();
  auto fw = to_digest(r.field());
  auto version = r.text();
  auto sig = r.field();
  if (r.failed() || !r.at_end() || !fw) return std::nullopt;
  c.peripheral_public_key = std::move(*pk);
  c.firmware_digest = *fw;
  c.firmware_version = std::move(*version);
  c.manufacturer_signature = std::move(*sig);
  return c;
}

PeripheralCertificate issue_certificate(const crypto::CryptoProvider& provider,
                                        const crypto::KeyPair& manufacturer,
                                        Bytes peripheral_public_key,
                                        Digest firmware_digest,
                                        std::string firmware_version) {
  PeripheralCertificate c{std::move(peripheral_public_key), firmware_digest,
                          std::move(firmware_version), {}};
  c.manufacturer_signature =
      provider.sign(manufacturer.secret_key, c.signed_body());
  return c;
}

bool verify_certificate(const crypto::CryptoProvider& provider,
                        const PeripheralCertificate& cert,
                        ByteView manufacturer_public_key) {
  return provider.verify(manufacturer_public_key, cert.signed_body(),
                         cert.manufacturer_signature);
}

Bytes AttestationReport::signed_body() const {
  CanonicalList ids;
  for (EntityId id : connected_ids) ids.add(monitor::encode(id));
  CanonicalList evidence;
  for (const auto& e : peripheral_evidence) evidence.add(encode_evidence(e));

  CanonicalWriter w;
  w.field(monitor::encode(subject_id))
      .field(Bytes{static_cast<std::uint8_t>(subject_kind)})
      .field(sm_measurement.digest)
      .field(subject_measurement.digest)
      .field(config_digest)
      .field(ids.finish())
      .field(evidence.finish())
      .field(verifier_nonce)
      .field(platform_public_key);
  return std::move(w).bytes();
}

Bytes AttestationReport::encode() const {
  Bytes out = signed_body();
  CanonicalWriter w;
  w.field(platform_signature);
  append(out, w.bytes());
  return out;
}

std::optional<AttestationReport> AttestationReport::decode(ByteView bytes) {
  CanonicalReader r(bytes);
  AttestationReport rep;
  auto subject = r.field();
  auto kind = r.field();
  auto sm = to_digest(r.field());
  auto measurement = to_digest(r.field());
  auto config = to_digest(r.field());
  auto ids = r.field();
  auto evidence = r.field();
  auto nonce = r.field();
  auto pk = r.field();
  auto sig = r.field();
  if (r.failed() || !r.at_end() || !sm || !measurement || !config)
    return std::nullopt;
  auto subject_id = monitor::decode_entity(*subject);
  if (!subject_id || kind->size() != 1 || (*kind)[0] > 1) return std::nullopt;
  rep.subject_id = *subject_id;
  rep.subject_kind = static_cast<SubjectKind>((*kind)[0]);
  rep.sm_measurement.digest = *sm;
  rep.subject_measurement.digest = *measurement;
  rep.config_digest = *config;

  auto id_list = CanonicalReader::list(*ids);
  auto ev_list = CanonicalReader::list(*evidence);
  if (!id_list || !ev_list) return std::nullopt;
  for (const auto& raw : *id_list) {
    auto id = monitor::decode_entity(raw);
    if (!id) return std::nullopt;
    rep.connected_ids.push_back(*id);
  }
  for (const auto& raw : *ev_list) {
    auto e = decode_evidence(raw);
    if (!e) return std::nullopt;
    rep.peripheral_evidence.push_back(std::move(*e));
  }
  rep.verifier_nonce = std::move(*nonce);
  rep.platform_public_key = std::move(*pk);
  rep.platform_signature = std::move(*sig);
  return rep;
}

nlohmann::json AttestationReport::to_json() const {
  nlohmann::json ids = nlohmann::json::array();
  for (EntityId id : connected_ids) ids.push_back(monitor::to_string(id));
  nlohmann::json evidence = nlohmann::json::array();
  for (const auto& e : peripheral_evidence) {
    evidence.push_back(
        {{"peripheral_public_key", to_hex(e.certificate.peripheral_public_key)},
         {"firmware_digest", to_hex(e.certificate.firmware_digest)},
         {"firmware_version", e.certificate.firmware_version},
         {"manufacturer_signature",
          to_hex(e.certificate.manufacturer_signature)},
         {"challenge", to_hex(e.challenge)},
         {"response_signature", to_hex(e.response_signature)}});
  }
  return {{"subject_id", monitor::to_string(subject_id)},
          {"subject_kind", subject_kind == SubjectKind::AE ? "AE" : "CE"},
          {"sm_measurement", to_hex(sm_measurement.digest)},
          {"subject_measurement", to_hex(subject_measurement.digest)},
          {"config_digest", to_hex(config_digest)},
          {"connected_ids", ids},
          {"peripheral_evidence", evidence},
          {"verifier_nonce", to_hex(verifier_nonce)},
          {"platform_public_key", to_hex(platform_public_key)},
          {"platform_signature", to_hex(platform_signature)}};
}

Result<AttestationReport> attest_enclave(const monitor::Monitor& sm,
                                         EntityId subject, ByteView nonce,
                                         const crypto::KeyPair& platform_key,
                                         EvidenceSource* evidence) {
  const auto* e = sm.enclave(subject);
  if (!e) return make_error(Errc::UnknownEnclave, monitor::to_string(subject));

  AttestationReport rep;
  rep.subject_id = subject;
  rep.subject_kind = e->kind == monitor::EnclaveKind::Application
                         ? SubjectKind::AE
                         : SubjectKind::CE;
  rep.sm_measurement = sm.sm_measurement();
  rep.subject_measurement = e->measurement;
  rep.config_digest = e->config_digest;
  for (const auto& c : e->connections) rep.connected_ids.push_back(c.peer);
  if (rep.subject_kind == SubjectKind::CE && evidence)
    rep.peripheral_evidence = evidence->peripheral_evidence(subject);
  rep.verifier_nonce.assign(nonce.begin(), nonce.end());
  rep.platform_public_key = platform_key.public_key;
  rep.platform_signature =
      sm.provider().sign(platform_key.secret_key, rep.signed_body());
  return rep;
}

}  // namespace pie::attestation
