#ifndef CTSIM_WORLD_HPP
#define CTSIM_WORLD_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "ctsim/clock.hpp"
#include "ctsim/config.hpp"
#include "ctsim/rng.hpp"

namespace ctsim {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(const Vec2& a, const Vec2& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

enum class Stage : uint8_t { Susceptible, Exposed, Infectious, Diagnosed, Recovered };

struct HealthState {
    Stage stage = Stage::Susceptible;
    int64_t exposed_at = -1;
    int64_t infectious_at = -1;
    int64_t diagnosed_at = -1;
};

struct Agent {
    int id = 0;
    Vec2 pos;
    Vec2 waypoint;
    double speed = 0.0;
    bool has_app = false;
    HealthState health;
    bool quarantined = false;
    int64_t quarantine_until = -1; // tick; -1 = indefinite (diagnosed)
};

// The 2D world: bounded rectangle, random-waypoint mobility, one mobility
// stream per agent so pausing one agent never perturbs another's draws.
class World {
public:
    World(const ScenarioConfig& cfg, const RngStreams& streams);

    // Moves every non-quarantined agent toward its waypoint by
    // speed * step_seconds; draws a fresh waypoint and speed on arrival.
    void step_mobility();

    std::vector<Agent>& agents() { return agents_; }
    const std::vector<Agent>& agents() const { return agents_; }
    double width() const { return width_; }
    double height() const { return height_; }

    bool in_bounds(const Vec2& p) const {
        return p.x >= 0.0 && p.x <= width_ && p.y >= 0.0 && p.y <= height_;
    }

private:
    void redraw_waypoint(Agent& a);

    double width_;
    double height_;
    double speed_min_;
    double speed_max_;
    double step_seconds_;
    std::vector<Agent> agents_;
    std::vector<Rng> mobility_rng_; // one stream per agent
};

// Dense symmetric Euclidean distance table (test and oracle helper).
std::vector<double> pairwise_distances(const World& world);

// Uniform-cell spatial index rebuilt per tick for radius queries.
class SpatialGrid {
public:
    SpatialGrid(double width, double height, double cell_size);

    void rebuild(const std::vector<Agent>& agents);

    // Calls fn(agent_index) for every indexed agent within `radius` of `p`.
    void for_each_within(const Vec2& p, double radius,
                         const std::vector<Agent>& agents,
                         const std::function<void(int)>& fn) const;

private:
    int cell_of(double x, double y) const;

    double cell_size_;
    int nx_;
    int ny_;
    std::vector<std::vector<int>> cells_;
};

} // namespace ctsim

#endif
