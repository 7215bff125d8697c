// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "pie/common/bytes.hpp"
#include "pie/crypto/provider.hpp"

namespace pie::attestation {

struct Measurement {
  Digest digest{};
  bool operator==(const Measurement&) const = default;
};

/// hash(len32(code) || code || len32(config) || config)
Measurement measure(const crypto::CryptoProvider& provider, ByteView code,
                    ByteView config);

}  // namespace pie::attestation
