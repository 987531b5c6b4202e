#ifndef CTSIM_PROTOCOL_DECENTRALISED_HPP
#define CTSIM_PROTOCOL_DECENTRALISED_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ctsim/clock.hpp"
#include "ctsim/config.hpp"
#include "ctsim/contact_store.hpp"
#include "ctsim/crypto.hpp"
#include "ctsim/exposure.hpp"
#include "ctsim/radio.hpp"

namespace ctsim {

// One diagnosed user's key upload: that device's daily keys for the
// retention window, at most 14 of them.
struct DiagnosisUpload {
    int upload_id = -1;
    int64_t report_tick = 0;
    std::vector<DiagnosisKey> keys;
};

// 24-hour key publication. Contains nothing but keys grouped per upload
// and the current EID blacklist; no pseudonyms, no network identifiers.
struct KeyBatch {
    int64_t publish_tick = 0;
    std::vector<DiagnosisUpload> uploads;
    std::vector<EphemeralId> blacklist;
};

// Device-side state for the decentralised flow: self-generated daily keys
// plus the received-contact store. Never holds another device's stable
// identity.
class DecentralisedDevice {
public:
    DecentralisedDevice(int agent_id, Rng secret_stream);

    int agent_id() const { return agent_id_; }

    // Generates the daily key on rollover and prunes keys and contact
    // records that fell out of the 14-day window.
    void begin_day(const SimClock& clock);

    const EphemeralId& current_eid(const SimClock& clock);

    void on_reception(const EphemeralId& eid, const SimClock& clock, double rssi_db,
                      SampleOrigin origin);

    bool has_reported() const { return reported_; }

    // Uploads the daily keys of the retention window, then rotates the
    // device's keys. Throws InvariantViolation on a duplicate report.
    DiagnosisUpload report_diagnosis(const SimClock& clock);

    bool owns_key(const DiagnosisKey& key) const;

    ContactStore& store() { return store_; }
    const ContactStore& store() const { return store_; }
    size_t key_count() const { return keys_.size(); }

private:
    void ensure_key(int64_t day);

    int agent_id_;
    Rng secret_;
    std::map<int64_t, DiagnosisKey> keys_; // day -> key, pruned to the window
    std::unordered_set<std::string> own_key_hexes_; // every key ever generated, for self-exclusion
    ContactStore store_;
    bool reported_ = false;
    int64_t cached_interval_ = -1;
    EphemeralId cached_eid_;
};

// The decentralised backend stores uploaded keys and their timestamps and
// nothing else; matching never happens here.
class DecentralisedServer {
public:
    int submit_upload(std::vector<DiagnosisKey> keys, int64_t report_tick);

    // Publishes everything uploaded since the previous batch. Only legal
    // on a 24 h boundary; an empty batch is still published.
    KeyBatch publish_batch(const SimClock& clock);

    void add_blacklist(const std::vector<EphemeralId>& eids);

    size_t upload_count() const { return uploads_.size(); }
    size_t pending_count() const { return uploads_.size() - published_; }
    const std::vector<EphemeralId>& blacklist() const { return blacklist_; }

private:
    std::vector<DiagnosisUpload> uploads_;
    size_t published_ = 0; // uploads_[0..published_) already batched
    std::vector<EphemeralId> blacklist_;
    int next_upload_id_ = 0;
};

// Batch expansion shared by every device: (eid, valid interval) -> upload.
class BatchIndex {
public:
    explicit BatchIndex(const KeyBatch& batch);

    // upload index within the batch, or -1
    int lookup(const EphemeralId& eid, int64_t interval_index) const;
    const KeyBatch& batch() const { return *batch_; }

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
    const KeyBatch* batch_;
    std::unordered_map<Key, int, KeyHash> eids_;
};

// On-device matching: intersects the published keys' EIDs with the
// device's received records and notifies when the risk threshold is met.
// Never matches the device's own keys.
std::vector<ExposureNotification> match_local(DecentralisedDevice& device,
                                              const BatchIndex& index,
                                              const RadioParams& radio, const RiskParams& risk,
                                              const SimClock& clock);

} // namespace ctsim

#endif
