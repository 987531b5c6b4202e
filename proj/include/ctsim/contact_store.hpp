#ifndef CTSIM_CONTACT_STORE_HPP
#define CTSIM_CONTACT_STORE_HPP

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "ctsim/clock.hpp"
#include "ctsim/crypto.hpp"

namespace ctsim {

// Ground-truth provenance of a received sample. Invisible to protocol
// logic; only the metrics layer reads it.
enum class SampleOrigin : uint8_t { genuine, relay, replay };

struct ContactSample {
    int64_t tick = 0;
    float rssi_db = 0.0f;
    SampleOrigin origin = SampleOrigin::genuine;
};

// One device's evidence of having heard one EID. Samples stay within a
// single 900 s interval because the EID itself rotates; a contact that
// spans a rotation boundary shows up as two records.
struct ContactRecord {
    EphemeralId eid;
    int64_t interval_index = 0; // global interval the samples fall in
    int64_t first_tick = 0;
    int64_t last_tick = 0;
    std::vector<ContactSample> samples;
};

class ContactStore {
public:
    // Appends to the open record for (eid, interval) or starts a new one.
    void add(const EphemeralId& eid, int64_t interval_index, int64_t tick, double rssi_db,
             SampleOrigin origin);

    // Drops every record whose newest sample is older than the retention
    // window. Idempotent.
    void prune(int64_t now_tick, int64_t retention_ticks);

    const ContactRecord* find(const EphemeralId& eid, int64_t interval_index) const;

    const std::vector<ContactRecord>& records() const { return records_; }
    size_t size() const { return records_.size(); }
    void clear();

private:
    struct Key {
        EphemeralId eid;
        int64_t interval;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        size_t operator()(const Key& k) const {
            return EphemeralIdHash{}(k.eid) ^ (static_cast<size_t>(k.interval) * 0x9e3779b9u);
        }
    };

    void rebuild_index();

    std::vector<ContactRecord> records_; // insertion order, deterministic
    std::unordered_map<Key, size_t, KeyHash> index_;
};

} // namespace ctsim

#endif
