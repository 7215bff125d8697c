// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "../support/attest.hpp"

namespace pie::testing {
namespace {

using attestation::RejectReason;
using peripherals::PeripheralKind;

TEST(Measurement, EmptyImageGolden) {
  crypto::DeterministicProvider p;
  // Two empty length-prefixed fields: eight zero bytes.
  Digest oracle = p.hash(Bytes(8, 0));
  EXPECT_EQ(attestation::measure(p, {}, {}).digest, oracle);
  EXPECT_EQ(to_hex(oracle),
            "48dda5bbe9171a6656206ec56c595c5834b6cf38c5fe71bcb44fe43833aee9df");
}

TEST(Measurement, CodeAndConfigAreSeparated) {
  crypto::DeterministicProvider p;
  EXPECT_NE(attestation::measure(p, to_bytes("ab"), to_bytes("c")),
            attestation::measure(p, to_bytes("a"), to_bytes("bc")));
  EXPECT_EQ(attestation::measure(p, to_bytes("ab"), to_bytes("c")),
            attestation::measure(p, to_bytes("ab"), to_bytes("c")));
}

TEST(Certificate, IssueVerifyEncode) {
  crypto::DeterministicProvider p;
  auto m = p.keygen(std::string_view("m"));
  auto rogue = p.keygen(std::string_view("rogue"));
  auto dev = p.keygen(std::string_view("d"));
  auto cert = attestation::issue_certificate(p, m, dev.public_key,
                                             p.hash(to_bytes("fw")), "2.1");
  EXPECT_TRUE(attestation::verify_certificate(p, cert, m.public_key));
  EXPECT_FALSE(attestation::verify_certificate(p, cert, rogue.public_key));
  auto back = attestation::PeripheralCertificate::decode(cert.encode());
  ASSERT_TRUE(back);
  EXPECT_EQ(*back, cert);
  cert.firmware_version = "2.2";
  EXPECT_FALSE(attestation::verify_certificate(p, cert, m.public_key));
}

struct Honest : ::testing::Test {
  TestPlatform p;
  EntityId ae, ce;
  peripherals::Sensor* sensor = nullptr;

  void SetUp() override {
    sensor = &p.add_device<peripherals::Sensor>(PeripheralKind::Sensor);
    ae = p.create(EnclaveKind::Application, "app");
    ce = p.create(EnclaveKind::Controller, "ctl");
    ASSERT_TRUE(p.connect(ce, sensor->id()));
    ASSERT_TRUE(p.connect(ae, ce));
    ASSERT_TRUE(p.runtime.ce_attach_peripheral(ce, sensor->id()).ok);
  }
  attestation::VerificationPolicy policy() { return policy_for(p, "app", {"ctl"}); }
};

TEST_F(Honest, ReportContents) {
  Bytes nonce(32, 7);
  auto r = attestation::attest_enclave(p.sm, ce, nonce, p.platform_key, &p.runtime);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->subject_kind, attestation::SubjectKind::CE);
  ASSERT_EQ(r->connected_ids.size(), 2u);
  EXPECT_EQ(r->connected_ids[0], sensor->id());
  EXPECT_EQ(r->connected_ids[1], ae);
  ASSERT_EQ(r->peripheral_evidence.size(), 1u);
  EXPECT_EQ(r->verifier_nonce, nonce);
  auto back = attestation::AttestationReport::decode(r->encode());
  ASSERT_TRUE(back);
  EXPECT_EQ(*back, *r);
  EXPECT_EQ(attestation::attest_enclave(p.sm, EntityId::enclave(99), nonce,
                                        p.platform_key)
                .code(),
            Errc::UnknownEnclave);
}

TEST_F(Honest, Accepts) {
  auto v = verify(p, attest(p, ae), policy());
  EXPECT_TRUE(v.accepted) << v.to_string() << " " << v.detail;
}

TEST_F(Honest, BadSignature) {
  auto run = attest(p, ae);
  run.reports[0].back() ^= 0x01;
  EXPECT_EQ(verify(p, run, policy()).to_string(), "Reject(BadSignature)");
}

TEST_F(Honest, PlatformKeyMismatch) {
  auto rogue = p.provider.keygen(std::string_view("rogue-platform"));
  EXPECT_EQ(verify(p, attest(p, ae, &rogue), policy()).to_string(),
            "Reject(PlatformKeyMismatch)");
}

TEST_F(Honest, NonceMismatchOnReplay) {
  auto old = attest(p, ae);
  auto fresh = attest(p, ae);
  old.nonces = fresh.nonces;
  EXPECT_EQ(verify(p, old, policy()).to_string(), "Reject(NonceMismatch)");
}

TEST_F(Honest, MeasurementMismatch) {
  EXPECT_EQ(verify(p, attest(p, ae), policy_for(p, "app2", {"ctl"})).to_string(),
            "Reject(MeasurementMismatch)");
  EXPECT_EQ(verify(p, attest(p, ae), policy_for(p, "app", {"other"})).to_string(),
            "Reject(MeasurementMismatch)");
}

TEST_F(Honest, LinkMismatchOnRelayedController) {
  EntityId other_ae = p.create(EnclaveKind::Application, "app");
  EntityId other_ce = p.create(EnclaveKind::Controller, "ctl");
  ASSERT_TRUE(p.connect(other_ae, other_ce));
  auto run = attest(p, ae);
  Bytes nonce = p.provider.random(32);
  run.reports[1] = attestation::attest_enclave(p.sm, other_ce, nonce,
                                               p.platform_key, &p.runtime)
                       ->encode();
  run.nonces[1] = nonce;
  EXPECT_EQ(verify(p, run, policy()).to_string(), "Reject(LinkMismatch)");
}

TEST_F(Honest, LinkMismatchOnMissingController) {
  auto run = attest(p, ae);
  run.reports.pop_back();
  run.nonces.pop_back();
  EXPECT_EQ(verify(p, run, policy()).to_string(), "Reject(LinkMismatch)");
}

TEST(Attestation, PeripheralCertInvalidAndFirmwareMismatch) {
  TestPlatform p;
  auto rogue = p.provider.keygen(std::string_view("counterfeit"));
  auto& fake = p.add_device<peripherals::Sensor>(PeripheralKind::Sensor, false,
                                                 "1.0", &rogue);
  auto& old = p.add_device<peripherals::Sensor>(PeripheralKind::Sensor, false,
                                                "0.9");
  EntityId ae1 = p.create(EnclaveKind::Application, "app");
  EntityId ae2 = p.create(EnclaveKind::Application, "app");
  EntityId ce1 = p.create(EnclaveKind::Controller, "ctl");
  EntityId ce2 = p.create(EnclaveKind::Controller, "ctl");
  ASSERT_TRUE(p.connect(ce1, fake.id()));
  ASSERT_TRUE(p.connect(ce2, old.id()));
  ASSERT_TRUE(p.connect(ae1, ce1));
  ASSERT_TRUE(p.connect(ae2, ce2));
  auto local = p.runtime.ce_attach_peripheral(ce1, fake.id());
  EXPECT_FALSE(local.ok);
  EXPECT_EQ(local.detail, "CertUntrusted");
  EXPECT_TRUE(p.runtime.ce_attach_peripheral(ce2, old.id()).ok);

  auto policy = policy_for(p, "app", {"ctl"});
  EXPECT_EQ(verify(p, attest(p, ae1), policy).to_string(),
            "Reject(PeripheralCertInvalid)");
  EXPECT_EQ(verify(p, attest(p, ae2), policy).to_string(),
            "Reject(FirmwareMismatch)");
  policy.firmware_versions.push_back("0.9");
  EXPECT_TRUE(verify(p, attest(p, ae2), policy).accepted);
}

TEST(Attestation, EvidenceCountMustMatchDevices) {
  TestPlatform p;
  auto& s = p.add_device<peripherals::Sensor>(PeripheralKind::Sensor);
  EntityId ae = p.create(EnclaveKind::Application, "app");
  EntityId ce = p.create(EnclaveKind::Controller, "ctl");
  ASSERT_TRUE(p.connect(ce, s.id()));
  ASSERT_TRUE(p.connect(ae, ce));
  auto run = attest(p, ae);
  auto ce_report = attestation::AttestationReport::decode(run.reports[1]);
  ASSERT_TRUE(ce_report);
  ce_report->peripheral_evidence.clear();
  ce_report->platform_signature =
      p.provider.sign(p.platform_key.secret_key, ce_report->signed_body());
  run.reports[1] = ce_report->encode();
  EXPECT_EQ(verify(p, run, policy_for(p, "app", {"ctl"})).to_string(),
            "Reject(PeripheralCertInvalid)");
}

TEST(LocalAttestation, BadResponse) {
  crypto::DeterministicProvider p;
  auto m = p.keygen(std::string_view("m"));
  auto dev = p.keygen(std::string_view("d"));
  auto cert = attestation::issue_certificate(p, m, dev.public_key, {}, "1.0");
  std::vector<Bytes> trusted{m.public_key};
  auto ok = attestation::local_attest_peripheral(
      p, cert, trusted, [&](ByteView c) { return p.sign(dev.secret_key, c); });
  EXPECT_TRUE(ok.ok());
  auto bad = attestation::local_attest_peripheral(
      p, cert, trusted, [&](ByteView) { return Bytes(64, 0); });
  EXPECT_FALSE(bad.ok());
  EXPECT_EQ(bad.failure, attestation::LocalFailure::BadResponse);
}

TEST(Attestation, RejectReasonNames) {
  for (auto r : {RejectReason::BadSignature, RejectReason::MeasurementMismatch,
                 RejectReason::LinkMismatch, RejectReason::PeripheralCertInvalid,
                 RejectReason::FirmwareMismatch, RejectReason::NonceMismatch,
                 RejectReason::PlatformKeyMismatch})
    EXPECT_EQ(attestation::reject_reason_from_string(attestation::to_string(r)), r);
}

}  // namespace
}  // namespace pie::testing
