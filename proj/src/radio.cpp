#include "ctsim/radio.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ctsim {

double rssi_from_distance(double distance_m, const RadioParams& params, double noise_db) {
    if (distance_m <= 0.0) throw std::domain_error("rssi_from_distance: distance must be > 0");
    return params.rssi_at_1m_db - 10.0 * params.path_loss_exponent * std::log10(distance_m) +
           noise_db;
}

double estimate_distance(double rssi_db, const RadioParams& params) {
    double d = std::pow(10.0, (params.rssi_at_1m_db - rssi_db) /
                                  (10.0 * params.path_loss_exponent));
    return std::max(d, kMinRadioDistanceM);
}

std::vector<Reception> broadcast_round(const World& world, const SpatialGrid& grid,
                                       const EidProvider& eid_of, const RadioParams& params,
                                       int64_t tick, Rng& radio_rng) {
    const auto& agents = world.agents();

    // Candidate unordered pairs of app devices within range, gathered via
    // the grid, then sorted so noise draws are independent of enumeration
    // order.
    std::vector<std::pair<int, int>> pairs;
    for (const Agent& a : agents) {
        if (!a.has_app) continue;
        grid.for_each_within(a.pos, params.max_range_m, agents, [&](int j) {
            if (j <= a.id) return;
            if (!agents[j].has_app) return;
            pairs.emplace_back(a.id, j);
        });
    }
    std::sort(pairs.begin(), pairs.end());

    std::vector<Reception> out;
    out.reserve(pairs.size() * 2);
    for (auto [i, j] : pairs) {
        const EphemeralId* eid_i = eid_of(i);
        const EphemeralId* eid_j = eid_of(j);
        double d = std::max(distance(agents[i].pos, agents[j].pos), kMinRadioDistanceM);
        // i -> j then j -> i, one independent shadowing draw each
        if (eid_i) {
            double noise = params.noise_sigma_db > 0.0
                               ? radio_rng.gaussian(0.0, params.noise_sigma_db)
                               : 0.0;
            double rssi = rssi_from_distance(d, params, noise);
            if (rssi >= params.detection_floor_db) {
                out.push_back(Reception{j, i, *eid_i, tick, rssi});
            }
        }
        if (eid_j) {
            double noise = params.noise_sigma_db > 0.0
                               ? radio_rng.gaussian(0.0, params.noise_sigma_db)
                               : 0.0;
            double rssi = rssi_from_distance(d, params, noise);
            if (rssi >= params.detection_floor_db) {
                out.push_back(Reception{i, j, *eid_j, tick, rssi});
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const Reception& a, const Reception& b) {
        if (a.receiver_agent != b.receiver_agent) return a.receiver_agent < b.receiver_agent;
        return a.sender_agent < b.sender_agent;
    });
    return out;
}

} // namespace ctsim
