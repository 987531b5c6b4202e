#include "ctsim/crypto.hpp"

#include <openssl/hmac.h>

#include <stdexcept>

namespace ctsim {

std::string to_hex(const uint8_t* data, size_t len) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (size_t i = 0; i < len; ++i) {
        out.push_back(digits[data[i] >> 4]);
        out.push_back(digits[data[i] & 0xf]);
    }
    return out;
}

static int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw std::invalid_argument("invalid hex digit");
}

std::vector<uint8_t> from_hex(const std::string& hex) {
    if (hex.size() % 2 != 0) throw std::invalid_argument("odd-length hex string");
    std::vector<uint8_t> out(hex.size() / 2);
    for (size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<uint8_t>(hex_nibble(hex[2 * i]) << 4 | hex_nibble(hex[2 * i + 1]));
    }
    return out;
}

std::string EphemeralId::hex() const { return to_hex(bytes.data(), bytes.size()); }

EphemeralId EphemeralId::from_hex(const std::string& hex) {
    auto raw = ctsim::from_hex(hex);
    if (raw.size() != 16) throw std::invalid_argument("ephemeral id must be 16 bytes");
    EphemeralId id;
    std::memcpy(id.bytes.data(), raw.data(), 16);
    return id;
}

std::string DiagnosisKey::hex() const { return to_hex(key_bytes.data(), key_bytes.size()); }

DiagnosisKey DiagnosisKey::from_hex(int64_t day, const std::string& hex) {
    auto raw = ctsim::from_hex(hex);
    if (raw.size() != 16) throw std::invalid_argument("diagnosis key must be 16 bytes");
    DiagnosisKey k;
    k.day_index = day;
    std::memcpy(k.key_bytes.data(), raw.data(), 16);
    return k;
}

std::array<uint8_t, 16> prf16(const std::array<uint8_t, 16>& key,
                              std::string_view domain_tag,
                              uint64_t message) {
    unsigned char msg[8 + 64];
    size_t msg_len = 0;
    for (int i = 0; i < 8; ++i) msg[msg_len++] = static_cast<unsigned char>(message >> (8 * i));
    for (char c : domain_tag) {
        if (msg_len >= sizeof(msg)) break;
        msg[msg_len++] = static_cast<unsigned char>(c);
    }

    unsigned char mac[EVP_MAX_MD_SIZE];
    unsigned int mac_len = 0;
    HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), msg, msg_len, mac, &mac_len);

    std::array<uint8_t, 16> out{};
    std::memcpy(out.data(), mac, 16);
    return out;
}

EphemeralId derive_ephemeral_id(const DiagnosisKey& key, int interval_in_day) {
    if (interval_in_day < 0 || interval_in_day >= kIntervalsPerDay) {
        throw std::out_of_range("interval_in_day must be in [0, 96)");
    }
    EphemeralId id;
    id.bytes = prf16(key.key_bytes, "ctsim-eid", static_cast<uint64_t>(interval_in_day));
    return id;
}

std::vector<EphemeralId> expand_key(const DiagnosisKey& key) {
    std::vector<EphemeralId> ids;
    ids.reserve(kIntervalsPerDay);
    for (int i = 0; i < kIntervalsPerDay; ++i) ids.push_back(derive_ephemeral_id(key, i));
    return ids;
}

DiagnosisKey generate_daily_key(Rng& secret_stream, int64_t day_index) {
    DiagnosisKey key;
    key.day_index = day_index;
    for (int i = 0; i < 2; ++i) {
        uint64_t word = secret_stream.next_u64();
        for (int b = 0; b < 8; ++b) {
            key.key_bytes[i * 8 + b] = static_cast<uint8_t>(word >> (8 * b));
        }
    }
    return key;
}

} // namespace ctsim
