// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <string_view>

#include "pie/common/bytes.hpp"

namespace pie::crypto {

struct KeyPair {
  Bytes public_key;
  Bytes secret_key;
};

/// Hashing, signing and randomness behind one seam so a real signature scheme
/// and a fast deterministic one can be swapped. Both implementations here are
/// deterministic for a fixed seed.
class CryptoProvider {
 public:
  virtual ~CryptoProvider() = default;

  virtual std::string_view name() const = 0;

  /// SHA3-256 for both built-in providers.
  virtual Digest hash(ByteView data) const;

  virtual KeyPair keygen(ByteView seed) = 0;
  virtual Bytes sign(ByteView secret_key, ByteView message) const = 0;
  virtual bool verify(ByteView public_key, ByteView message,
                      ByteView signature) const = 0;

  Bytes random(std::size_t n);
  void reseed(std::uint64_t seed) { rng_.seed(seed); }

  KeyPair keygen(std::string_view label) {
    return keygen(ByteView(reinterpret_cast<const std::uint8_t*>(label.data()),
                           label.size()));
  }

 protected:
  explicit CryptoProvider(std::uint64_t seed) : rng_(seed) {}

 private:
  std::mt19937_64 rng_;
};

/// Keyed-hash "signatures": sig = H(pk) || H(sk || msg). Verification looks
/// the secret up from keys this instance generated, so it only works for
/// those keys. Fast and stable enough for golden values.
class DeterministicProvider final : public CryptoProvider {
 public:
  explicit DeterministicProvider(std::uint64_t seed = 0)
      : CryptoProvider(seed) {}

  std::string_view name() const override { return "deterministic"; }
  using CryptoProvider::keygen;
  KeyPair keygen(ByteView seed) override;
  Bytes sign(ByteView secret_key, ByteView message) const override;
  bool verify(ByteView public_key, ByteView message,
              ByteView signature) const override;

 private:
  std::map<Bytes, Bytes> secrets_by_public_;
};

/// Ed25519 over OpenSSL. Key pairs derive from H(seed).
class Ed25519Provider final : public CryptoProvider {
 public:
  explicit Ed25519Provider(std::uint64_t seed = 0) : CryptoProvider(seed) {}

  std::string_view name() const override { return "ed25519"; }
  using CryptoProvider::keygen;
  KeyPair keygen(ByteView seed) override;
  Bytes sign(ByteView secret_key, ByteView message) const override;
  bool verify(ByteView public_key, ByteView message,
              ByteView signature) const override;
};

/// "deterministic" or "ed25519"; nullptr otherwise.
std::unique_ptr<CryptoProvider> make_provider(std::string_view name,
                                              std::uint64_t seed);

inline constexpr std::size_t kSignatureSize = 64;

}  // namespace pie::crypto
