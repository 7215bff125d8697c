// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "fixture.hpp"
#include "pie/attestation/measurement.hpp"
#include "pie/attestation/verifier.hpp"

namespace pie::testing {

struct AttestRun {
  std::vector<Bytes> reports;
  std::vector<Bytes> nonces;
};

/// Verifier side of the three-step flow: the AE report first, then one report
/// per enclave the AE lists, each under its own nonce.
inline AttestRun attest(TestPlatform& p, EntityId ae,
                        const crypto::KeyPair* signer = nullptr) {
  const crypto::KeyPair& key = signer ? *signer : p.platform_key;
  AttestRun run;
  run.nonces.push_back(p.provider.random(attestation::kNonceSize));
  auto first =
      attestation::attest_enclave(p.sm, ae, run.nonces[0], key, &p.runtime);
  if (!first) return run;
  run.reports.push_back(first->encode());
  for (EntityId peer : first->connected_ids) {
    if (!peer.is_enclave()) continue;
    Bytes nonce = p.provider.random(attestation::kNonceSize);
    auto r = attestation::attest_enclave(p.sm, peer, nonce, key, &p.runtime);
    if (!r) continue;
    run.nonces.push_back(nonce);
    run.reports.push_back(r->encode());
  }
  return run;
}

inline attestation::VerificationPolicy policy_for(
    TestPlatform& p, const std::string& ae_code,
    const std::vector<std::string>& ce_codes,
    std::vector<std::string> versions = {"1.0"}) {
  attestation::VerificationPolicy policy;
  policy.sm = p.sm.sm_measurement();
  policy.ae = attestation::measure(p.provider, to_bytes(ae_code), {});
  for (const auto& c : ce_codes)
    policy.ce.push_back(attestation::measure(p.provider, to_bytes(c), {}));
  policy.platform_public_key = p.platform_key.public_key;
  policy.manufacturer_keys = {p.manufacturer.public_key};
  policy.firmware_versions = std::move(versions);
  return policy;
}

inline attestation::Verdict verify(TestPlatform& p, const AttestRun& run,
                                   const attestation::VerificationPolicy& policy) {
  return attestation::verify_platform(p.provider,
                                      std::span<const Bytes>(run.reports),
                                      policy, run.nonces);
}

}  // namespace pie::testing
