// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "pie/attestation/measurement.hpp"

#include "pie/crypto/canonical.hpp"

namespace pie::attestation {

Measurement measure(const crypto::CryptoProvider& provider, ByteView code,
                    ByteView config) {
  crypto::CanonicalWriter w;
  w.field(code).field(config);
  return Measurement{provider.hash(w.bytes())};
}

}  // namespace pie::attestation
