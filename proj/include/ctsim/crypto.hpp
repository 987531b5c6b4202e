#ifndef CTSIM_CRYPTO_HPP
#define CTSIM_CRYPTO_HPP

#include <array>
#include <cstdint>
#include <cstring>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "ctsim/clock.hpp"
#include "ctsim/rng.hpp"

namespace ctsim {

// 16-byte rotating broadcast identifier. Valid for exactly one 900 s
// interval; equality is byte equality.
struct EphemeralId {
    std::array<uint8_t, 16> bytes{};

    friend bool operator==(const EphemeralId&, const EphemeralId&) = default;
    friend auto operator<=>(const EphemeralId&, const EphemeralId&) = default;

    std::string hex() const;
    static EphemeralId from_hex(const std::string& hex);
};

struct EphemeralIdHash {
    size_t operator()(const EphemeralId& id) const {
        uint64_t a, b;
        std::memcpy(&a, id.bytes.data(), 8);
        std::memcpy(&b, id.bytes.data() + 8, 8);
        return static_cast<size_t>(a * 0x9e3779b97f4a7c15ULL ^ b);
    }
};

// Per-day device secret. The rotating ephemeral identifiers for that day
// are derived from it, and it is what gets uploaded on positive diagnosis
// (the "condensed form" of the sent identifiers).
struct DiagnosisKey {
    int64_t day_index = 0;
    std::array<uint8_t, 16> key_bytes{};

    friend bool operator==(const DiagnosisKey&, const DiagnosisKey&) = default;

    std::string hex() const;
    static DiagnosisKey from_hex(int64_t day, const std::string& hex);
};

// Keyed PRF used for every identifier derivation in the simulator:
// HMAC-SHA256(key, domain_tag || message) truncated to 16 bytes.
// Deterministic and stable across versions; pinned by a golden-file test.
std::array<uint8_t, 16> prf16(const std::array<uint8_t, 16>& key,
                              std::string_view domain_tag,
                              uint64_t message);

// Ephemeral ID for one 15-minute interval of the key's day.
// Throws std::out_of_range unless 0 <= interval_in_day < 96.
EphemeralId derive_ephemeral_id(const DiagnosisKey& key, int interval_in_day);

// All 96 IDs of a key's day; element i equals derive_ephemeral_id(key, i).
std::vector<EphemeralId> expand_key(const DiagnosisKey& key);

// Fresh daily key with bytes drawn from the device's seeded secret stream.
DiagnosisKey generate_daily_key(Rng& secret_stream, int64_t day_index);

// True when an entry stamped `entry_tick` has aged out of the two-week
// retention window at `now_tick` (strictly older than 14 days).
inline bool retention_expired(int64_t entry_tick, int64_t now_tick, const SimClock& clock) {
    return now_tick - entry_tick > clock.retention_ticks();
}

std::string to_hex(const uint8_t* data, size_t len);
std::vector<uint8_t> from_hex(const std::string& hex);

} // namespace ctsim

#endif
