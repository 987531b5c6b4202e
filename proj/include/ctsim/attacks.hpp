#ifndef CTSIM_ATTACKS_HPP
#define CTSIM_ATTACKS_HPP

#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <unordered_map>
#include <vector>

#include "ctsim/clock.hpp"
#include "ctsim/config.hpp"
#include "ctsim/crypto.hpp"
#include "ctsim/protocol_decentralised.hpp"
#include "ctsim/radio.hpp"
#include "ctsim/world.hpp"

namespace ctsim {

// (ephemeral ID, position, time) triple captured by one fixed sniffer.
// agent_id is ground-truth bookkeeping for scoring; the attacker's own
// data is only (eid, sniffer, tick).
struct SnifferObservation {
    EphemeralId eid;
    int sniffer_index = -1;
    int64_t tick = 0;
    int agent_id = -1; // ground truth only
};

// Passive BLE sniffing stations on a uniform grid. They never transmit
// and never touch protocol state.
class SnifferGrid {
public:
    SnifferGrid(const SnifferGridConfig& cfg, double world_w, double world_h, double range_m);

    void sniff_round(const World& world, const SpatialGrid& agent_grid,
                     const EidProvider& eid_of, int64_t tick);

    const std::vector<Vec2>& positions() const { return positions_; }
    const std::vector<SnifferObservation>& observations() const { return log_; }
    double range() const { return range_; }

private:
    std::vector<Vec2> positions_;
    double range_;
    std::vector<SnifferObservation> log_;
};

struct TrackPoint {
    int64_t tick = 0;
    Vec2 sniffer_pos;
};

// Route recovered for one published upload by joining its keys' expanded
// EIDs against the sniffer observation log.
struct ReconstructedTrack {
    int upload_id = -1;
    int victim_agent = -1; // ground truth label, filled by the caller
    std::vector<TrackPoint> points;
    int64_t matched_ticks = 0;   // distinct ticks with at least one matched observation
    int64_t observed_ticks = 0;  // distinct in-range ticks within the keys' day window (ground truth)
    double coverage = 0.0;       // matched_ticks / observed_ticks
};

// Expands every published key, joins against the observation log, and
// orders each track by time. Soundness: an agent whose keys were never
// published can never appear in the output.
std::vector<ReconstructedTrack> reconstruct_tracks(
    const std::vector<SnifferObservation>& observations,
    const std::vector<DiagnosisUpload>& published_uploads,
    const std::vector<Vec2>& sniffer_positions);

// Fills in victim labels and coverage (matched in-range ticks over the
// victim's total in-range ticks within the published keys' day window).
// Ground-truth scoring; the attacker only ever sees the tracks.
void score_track_coverage(std::vector<ReconstructedTrack>& tracks,
                          const std::vector<SnifferObservation>& observations,
                          const std::vector<DiagnosisUpload>& published_uploads,
                          const std::map<int, int>& upload_reporter, const SimClock& clock);

// Relay/replay bridge between the captured agents' radio neighbourhood
// and the targets'. Captured EIDs are re-broadcast byte-identical after a
// latency; nothing is forged.
class RelayAttack {
public:
    RelayAttack(const RelayAttackConfig& cfg, AttackType type, double strong_rssi_db);

    struct Injection {
        int64_t deliver_tick = 0;
        int target_agent = -1;
        EphemeralId eid;
        SampleOrigin origin = SampleOrigin::relay;
    };

    // Captures the current EIDs of the staked-out agents (or of everyone
    // inside the capture zone) and schedules their re-broadcast.
    void capture_round(const World& world, const EidProvider& eid_of, const SimClock& clock);

    // Injections due at this tick, in deterministic order.
    std::vector<Injection> due_injections(int64_t tick);

    const std::vector<EphemeralId>& captured_eids() const { return captured_order_; }
    double injection_rssi_db() const { return strong_rssi_db_; }
    int64_t injected_count() const { return injected_; }
    void count_delivered(int64_t n) { injected_ += n; }

private:
    RelayAttackConfig cfg_;
    SampleOrigin origin_;
    int64_t total_delay_;
    double strong_rssi_db_;
    std::deque<Injection> queue_;
    std::set<EphemeralId> captured_set_;
    std::vector<EphemeralId> captured_order_;
    int64_t injected_ = 0;
};

// Sybil listener: a fixed receive-only device that partitions everything
// it hears into per-interval buckets so a later key publication can be
// attributed to a single encounter window.
class SybilListener {
public:
    SybilListener(Vec2 pos, double range_m, int bucket_intervals);

    void listen_round(const World& world, const SpatialGrid& agent_grid,
                      const EidProvider& eid_of, const SimClock& clock);

    struct Attribution {
        int64_t bucket = 0;
        int upload_id = -1;
        int candidate_count = 0; // distinct EIDs heard in the bucket
        bool unique = false;     // exactly one encounter in the window
        int attributed_agent = -1; // ground-truth resolution when unique
    };

    // Matches published keys against the buckets. Re-identification
    // succeeds when exactly one encounter occupies the matched window.
    std::vector<Attribution> identify(const std::vector<DiagnosisUpload>& published_uploads) const;

    // ground truth for the oracle recount
    const std::map<int64_t, std::set<int>>& agents_by_bucket() const { return gt_agents_; }

private:
    Vec2 pos_;
    double range_;
    int bucket_intervals_;
    std::map<int64_t, std::set<EphemeralId>> heard_;       // bucket -> EIDs
    std::map<int64_t, std::set<int>> gt_agents_;           // bucket -> agents (ground truth)
    std::unordered_map<EphemeralId, int, EphemeralIdHash> eid_agent_; // ground truth
};

} // namespace ctsim

#endif
