#ifndef CTSIM_RADIO_HPP
#define CTSIM_RADIO_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "ctsim/config.hpp"
#include "ctsim/crypto.hpp"
#include "ctsim/world.hpp"

namespace ctsim {

// Closest distance the path-loss model distinguishes; estimates are
// clamped here when a signal is stronger than the 1 m reference.
inline constexpr double kMinRadioDistanceM = 0.1;

// One heard broadcast. Devices only ever see (eid, tick, rssi); the sender
// agent index is kept for ground-truth tagging and never enters any
// device or server state.
struct Reception {
    int receiver_agent = -1;
    int sender_agent = -1;
    EphemeralId eid;
    int64_t tick = 0;
    double rssi_db = 0.0;
};

// Log-distance path loss with gaussian shadowing:
//   rssi(d) = rssi_at_1m - 10 * exponent * log10(d) + N(0, sigma)
// Throws std::domain_error for d <= 0.
double rssi_from_distance(double distance_m, const RadioParams& params, double noise_db);

// Inverts the noiseless model; clamped to kMinRadioDistanceM.
double estimate_distance(double rssi_db, const RadioParams& params);

// Returns the current broadcast EID for an agent, or nullptr when the
// agent carries no app. Implemented by each protocol's device layer.
using EidProvider = std::function<const EphemeralId*(int agent_id)>;

// All broadcasts heard this tick: for every ordered pair of distinct
// app devices within max_range_m whose sampled rssi clears the detection
// floor, one Reception. Output is sorted by (receiver, sender) and noise
// is drawn in that canonical order.
std::vector<Reception> broadcast_round(const World& world, const SpatialGrid& grid,
                                       const EidProvider& eid_of, const RadioParams& params,
                                       int64_t tick, Rng& radio_rng);

} // namespace ctsim

#endif
