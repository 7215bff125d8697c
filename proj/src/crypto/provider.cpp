// Copyright PIE simulator contributors.
// Licensed under the Apache License, Version 2.0, see LICENSE for details.
// SPDX-License-Identifier: Apache-2.0

#include "pie/crypto/provider.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <stdexcept>

namespace pie::crypto {

namespace {

struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};
struct PkeyDeleter {
  void operator()(EVP_PKEY* key) const { EVP_PKEY_free(key); }
};
using MdCtx = std::unique_ptr<EVP_MD_CTX, MdCtxDeleter>;
using Pkey = std::unique_ptr<EVP_PKEY, PkeyDeleter>;

Digest sha3_256(ByteView a, ByteView b = {}) {
  MdCtx ctx(EVP_MD_CTX_new());
  Digest out{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha3_256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), a.data(), a.size()) != 1 ||
      EVP_DigestUpdate(ctx.get(), b.data(), b.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), out.data(), &len) != 1 ||
      len != out.size())
    throw std::runtime_error("SHA3-256 unavailable");
  return out;
}

}  // namespace

Digest CryptoProvider::hash(ByteView data) const { return sha3_256(data); }

Bytes CryptoProvider::random(std::size_t n) {
  Bytes out(n);
  std::uniform_int_distribution<int> byte(0, 255);
  for (auto& b : out) b = static_cast<std::uint8_t>(byte(rng_));
  return out;
}

KeyPair DeterministicProvider::keygen(ByteView seed) {
  static constexpr std::string_view kSecretLabel = "pie-det-secret";
  static constexpr std::string_view kPublicLabel = "pie-det-public";
  Digest sk = sha3_256(to_bytes(kSecretLabel), seed);
  Digest pk = sha3_256(to_bytes(kPublicLabel), sk);
  KeyPair kp{Bytes(pk.begin(), pk.end()), Bytes(sk.begin(), sk.end())};
  secrets_by_public_[kp.public_key] = kp.secret_key;
  return kp;
}

Bytes DeterministicProvider::sign(ByteView secret_key,
                                  ByteView message) const {
  static constexpr std::string_view kPublicLabel = "pie-det-public";
  Digest pk = sha3_256(to_bytes(kPublicLabel), secret_key);
  Digest pk_tag = sha3_256(pk);
  Digest mac = sha3_256(secret_key, message);
  Bytes sig(pk_tag.begin(), pk_tag.end());
  sig.insert(sig.end(), mac.begin(), mac.end());
  return sig;
}

bool DeterministicProvider::verify(ByteView public_key, ByteView message,
                                   ByteView signature) const {
  if (signature.size() != kSignatureSize) return false;
  auto it = secrets_by_public_.find(Bytes(public_key.begin(), public_key.end()));
  if (it == secrets_by_public_.end()) return false;
  Bytes expected = sign(it->second, message);
  return std::equal(expected.begin(), expected.end(), signature.begin());
}

KeyPair Ed25519Provider::keygen(ByteView seed) {
  Digest raw_seed = sha3_256(to_bytes("pie-ed25519-seed"), seed);
  Pkey key(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr,
                                        raw_seed.data(), raw_seed.size()));
  if (!key) throw std::runtime_error("Ed25519 keygen failed");
  KeyPair kp;
  std::size_t len = 32;
  kp.public_key.resize(len);
  EVP_PKEY_get_raw_public_key(key.get(), kp.public_key.data(), &len);
  kp.secret_key.assign(raw_seed.begin(), raw_seed.end());
  return kp;
}

Bytes Ed25519Provider::sign(ByteView secret_key, ByteView message) const {
  Pkey key(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr,
                                        secret_key.data(), secret_key.size()));
  MdCtx ctx(EVP_MD_CTX_new());
  Bytes sig(kSignatureSize);
  std::size_t len = sig.size();
  if (!key || !ctx ||
      EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) !=
          1 ||
      EVP_DigestSign(ctx.get(), sig.data(), &len, message.data(),
                     message.size()) != 1)
    throw std::runtime_error("Ed25519 sign failed");
  return sig;
}

bool Ed25519Provider::verify(ByteView public_key, ByteView message,
                             ByteView signature) const {
  if (signature.size() != kSignatureSize || public_key.size() != 32)
    return false;
  Pkey key(EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr,
                                       public_key.data(), public_key.size()));
  MdCtx ctx(EVP_MD_CTX_new());
  if (!key || !ctx ||
      EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) !=
          1)
    return false;
  return EVP_DigestVerify(ctx.get(), signature.data(), signature.size(),
                          message.data(), message.size()) == 1;
}

std::unique_ptr<CryptoProvider> make_provider(std::string_view name,
                                              std::uint64_t seed) {
  if (name == "deterministic")
    return std::make_unique<DeterministicProvider>(seed);
  if (name == "ed25519") return std::make_unique<Ed25519Provider>(seed);
  return nullptr;
}

}  // namespace pie::crypto
