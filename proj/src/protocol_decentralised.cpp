#include "ctsim/protocol_decentralised.hpp"

#include <algorithm>

#include "ctsim/errors.hpp"

namespace ctsim {

DecentralisedDevice::DecentralisedDevice(int agent_id, Rng secret_stream)
    : agent_id_(agent_id), secret_(secret_stream) {}

void DecentralisedDevice::ensure_key(int64_t day) {
    if (keys_.count(day)) return;
    DiagnosisKey key = generate_daily_key(secret_, day);
    own_key_hexes_.insert(key.hex());
    keys_.emplace(day, key);
    cached_interval_ = -1;
}

void DecentralisedDevice::begin_day(const SimClock& clock) {
    int64_t day = clock.day_index();
    ensure_key(day);
    // two-week retention for both stores
    while (!keys_.empty() && keys_.begin()->first < day - (kRetentionDays - 1)) {
        keys_.erase(keys_.begin());
    }
    store_.prune(clock.tick, clock.retention_ticks());
}

const EphemeralId& DecentralisedDevice::current_eid(const SimClock& clock) {
    int64_t interval = clock.interval_index();
    if (interval != cached_interval_) {
        ensure_key(clock.day_index());
        cached_eid_ = derive_ephemeral_id(keys_.at(clock.day_index()), clock.interval_in_day());
        cached_interval_ = interval;
    }
    return cached_eid_;
}

void DecentralisedDevice::on_reception(const EphemeralId& eid, const SimClock& clock,
                                       double rssi_db, SampleOrigin origin) {
    store_.add(eid, clock.interval_index(), clock.tick, rssi_db, origin);
}

DiagnosisUpload DecentralisedDevice::report_diagnosis(const SimClock& clock) {
    if (reported_) {
        throw InvariantViolation("duplicate diagnosis report for agent " +
                                 std::to_string(agent_id_));
    }
    reported_ = true;
    ensure_key(clock.day_index());

    DiagnosisUpload upload;
    upload.report_tick = clock.tick;
    for (const auto& [day, key] : keys_) {
        if (day >= clock.day_index() - (kRetentionDays - 1)) upload.keys.push_back(key);
    }

    // Rotate: drop every current key and start fresh so identifiers
    // broadcast after the upload stay unlinkable to the published ones.
    keys_.clear();
    cached_interval_ = -1;
    ensure_key(clock.day_index());
    return upload;
}

bool DecentralisedDevice::owns_key(const DiagnosisKey& key) const {
    return own_key_hexes_.count(key.hex()) > 0;
}

int DecentralisedServer::submit_upload(std::vector<DiagnosisKey> keys, int64_t report_tick) {
    DiagnosisUpload upload;
    upload.upload_id = next_upload_id_++;
    upload.report_tick = report_tick;
    upload.keys = std::move(keys);
    uploads_.push_back(std::move(upload));
    return uploads_.back().upload_id;
}

KeyBatch DecentralisedServer::publish_batch(const SimClock& clock) {
    if (!clock.at_day_boundary()) {
        throw InvariantViolation("key batches are published only at 24h boundaries");
    }
    KeyBatch batch;
    batch.publish_tick = clock.tick;
    for (size_t i = published_; i < uploads_.size(); ++i) batch.uploads.push_back(uploads_[i]);
    published_ = uploads_.size();
    batch.blacklist = blacklist_;
    return batch;
}

void DecentralisedServer::add_blacklist(const std::vector<EphemeralId>& eids) {
    blacklist_.insert(blacklist_.end(), eids.begin(), eids.end());
    std::sort(blacklist_.begin(), blacklist_.end());
    blacklist_.erase(std::unique(blacklist_.begin(), blacklist_.end()), blacklist_.end());
}

BatchIndex::BatchIndex(const KeyBatch& batch) : batch_(&batch) {
    std::unordered_set<EphemeralId, EphemeralIdHash> banned(batch.blacklist.begin(),
                                                            batch.blacklist.end());
    for (size_t u = 0; u < batch.uploads.size(); ++u) {
        for (const DiagnosisKey& key : batch.uploads[u].keys) {
            for (int i = 0; i < kIntervalsPerDay; ++i) {
                EphemeralId eid = derive_ephemeral_id(key, i);
                if (banned.count(eid)) continue;
                int64_t interval = key.day_index * kIntervalsPerDay + i;
                eids_.emplace(Key{eid, interval}, static_cast<int>(u));
            }
        }
    }
}

int BatchIndex::lookup(const EphemeralId& eid, int64_t interval_index) const {
    auto it = eids_.find(Key{eid, interval_index});
    return it == eids_.end() ? -1 : it->second;
}

std::vector<ExposureNotification> match_local(DecentralisedDevice& device,
                                              const BatchIndex& index,
                                              const RadioParams& radio, const RiskParams& risk,
                                              const SimClock& clock) {
    const KeyBatch& batch = index.batch();
    if (batch.uploads.empty()) return {};

    // records grouped by matching upload, in upload order
    std::vector<std::vector<const ContactRecord*>> matched(batch.uploads.size());
    for (const ContactRecord& rec : device.store().records()) {
        int u = index.lookup(rec.eid, rec.interval_index);
        if (u >= 0) matched[static_cast<size_t>(u)].push_back(&rec);
    }

    std::vector<ExposureNotification> out;
    for (size_t u = 0; u < batch.uploads.size(); ++u) {
        if (matched[u].empty()) continue;
        const DiagnosisUpload& upload = batch.uploads[u];
        bool own = std::any_of(upload.keys.begin(), upload.keys.end(),
                               [&](const DiagnosisKey& k) { return device.owns_key(k); });
        if (own) continue; // never notify on the device's own keys
        RiskBreakdown breakdown =
            compute_risk(matched[u], radio, risk, clock.minutes_per_tick());
        if (breakdown.total() >= risk.exposure_minutes_threshold) {
            ExposureNotification n;
            n.agent_id = device.agent_id();
            n.trigger_tick = clock.tick;
            n.risk_score = breakdown.total();
            n.cause = breakdown.cause(risk.exposure_minutes_threshold);
            n.report_tick = upload.report_tick;
            out.push_back(n);
        }
    }
    return out;
}

} // namespace ctsim
