// Copyright 2026 The Obliviofuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Thin wrappers over libsodium: SHA-256 digests, HMAC-SHA256 key derivation
// and XChaCha20-Poly1305 (IETF) sealing.
#ifndef OBLIVIOFUZZ_CRYPTO_H_
#define OBLIVIOFUZZ_CRYPTO_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace obliviofuzz {

inline constexpr size_t kDigestSize = 32;
inline constexpr size_t kKeySize = 32;
inline constexpr size_t kNonceSize = 24;
inline constexpr size_t kTagSize = 16;

using Digest = std::array<uint8_t, kDigestSize>;
using SessionKey = std::array<uint8_t, kKeySize>;
using Nonce = std::array<uint8_t, kNonceSize>;

// Initializes libsodium once; safe to call from any thread.
void EnsureCryptoInit();

Digest Sha256(std::span<const uint8_t> data);
Digest Sha256(std::span<const uint8_t> a, std::span<const uint8_t> b);
Digest HmacSha256(std::span<const uint8_t> key, std::span<const uint8_t> msg);

std::string ToHex(std::span<const uint8_t> bytes);
// Returns nullopt on odd length or non-hex characters.
std::optional<std::vector<uint8_t>> FromHex(std::string_view hex);

// Output is plaintext.size() + kTagSize bytes.
std::vector<uint8_t> AeadSeal(std::span<const uint8_t> plaintext,
                              const SessionKey& key, const Nonce& nonce);
// Returns nullopt if authentication fails.
std::optional<std::vector<uint8_t>> AeadOpen(
    std::span<const uint8_t> ciphertext, const SessionKey& key,
    const Nonce& nonce);

inline std::span<const uint8_t> AsBytes(std::string_view s) {
  return {reinterpret_cast<const uint8_t*>(s.data()), s.size()};
}

}  // namespace obliviofuzz

#endif  // OBLIVIOFUZZ_CRYPTO_H_
