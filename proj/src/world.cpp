#include "ctsim/world.hpp"

#include <algorithm>

#include "ctsim/errors.hpp"

namespace ctsim {

World::World(const ScenarioConfig& cfg, const RngStreams& streams)
    : width_(cfg.world_width_m),
      height_(cfg.world_height_m),
      speed_min_(cfg.speed_min_mps),
      speed_max_(cfg.speed_max_mps),
      step_seconds_(cfg.step_seconds) {
    Rng init = streams.make("world-init");
    agents_.resize(cfg.n_agents);
    mobility_rng_.reserve(cfg.n_agents);
    for (int i = 0; i < cfg.n_agents; ++i) {
        Agent& a = agents_[i];
        a.id = i;
        a.pos = {init.uniform(0.0, width_), init.uniform(0.0, height_)};
        mobility_rng_.push_back(streams.make("mobility", static_cast<uint64_t>(i)));
        redraw_waypoint(a);
    }

    // App adoption: exactly round(n * fraction) agents, chosen by a seeded
    // shuffle so the set is stable for a given seed.
    int n_apps = static_cast<int>(std::llround(cfg.adoption_fraction * cfg.n_agents));
    std::vector<int> order(cfg.n_agents);
    for (int i = 0; i < cfg.n_agents; ++i) order[i] = i;
    for (int i = cfg.n_agents - 1; i > 0; --i) {
        int j = static_cast<int>(init.uniform_index(static_cast<uint64_t>(i) + 1));
        std::swap(order[i], order[j]);
    }
    for (int i = 0; i < n_apps; ++i) agents_[order[i]].has_app = true;
}

void World::redraw_waypoint(Agent& a) {
    Rng& rng = mobility_rng_[a.id];
    a.waypoint = {rng.uniform(0.0, width_), rng.uniform(0.0, height_)};
    a.speed = rng.uniform(speed_min_, speed_max_);
}

void World::step_mobility() {
    for (Agent& a : agents_) {
        if (a.quarantined) continue; // quarantined agents do not move
        double travel = a.speed * step_seconds_;
        if (travel <= 0.0) continue;
        double dx = a.waypoint.x - a.pos.x;
        double dy = a.waypoint.y - a.pos.y;
        double dist = std::hypot(dx, dy);
        if (dist <= travel) {
            a.pos = a.waypoint;
            redraw_waypoint(a);
        } else {
            a.pos.x += dx / dist * travel;
            a.pos.y += dy / dist * travel;
        }
        if (!in_bounds(a.pos)) {
            throw InvariantViolation(
                "containment: agent position left the world bounds (agent " +
                std::to_string(a.id) + ")");
        }
    }
}

std::vector<double> pairwise_distances(const World& world) {
    const auto& agents = world.agents();
    size_t n = agents.size();
    std::vector<double> table(n * n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            double d = distance(agents[i].pos, agents[j].pos);
            table[i * n + j] = d;
            table[j * n + i] = d;
        }
    }
    return table;
}

SpatialGrid::SpatialGrid(double width, double height, double cell_size)
    : cell_size_(std::max(cell_size, 1e-6)) {
    nx_ = std::max(1, static_cast<int>(std::ceil(width / cell_size_)));
    ny_ = std::max(1, static_cast<int>(std::ceil(height / cell_size_)));
    cells_.resize(static_cast<size_t>(nx_) * ny_);
}

int SpatialGrid::cell_of(double x, double y) const {
    int cx = std::clamp(static_cast<int>(x / cell_size_), 0, nx_ - 1);
    int cy = std::clamp(static_cast<int>(y / cell_size_), 0, ny_ - 1);
    return cy * nx_ + cx;
}

void SpatialGrid::rebuild(const std::vector<Agent>& agents) {
    for (auto& cell : cells_) cell.clear();
    for (const Agent& a : agents) {
        cells_[cell_of(a.pos.x, a.pos.y)].push_back(a.id);
    }
}

void SpatialGrid::for_each_within(const Vec2& p, double radius,
                                  const std::vector<Agent>& agents,
                                  const std::function<void(int)>& fn) const {
    int cx0 = std::clamp(static_cast<int>((p.x - radius) / cell_size_), 0, nx_ - 1);
    int cx1 = std::clamp(static_cast<int>((p.x + radius) / cell_size_), 0, nx_ - 1);
    int cy0 = std::clamp(static_cast<int>((p.y - radius) / cell_size_), 0, ny_ - 1);
    int cy1 = std::clamp(static_cast<int>((p.y + radius) / cell_size_), 0, ny_ - 1);
    for (int cy = cy0; cy <= cy1; ++cy) {
        for (int cx = cx0; cx <= cx1; ++cx) {
            for (int idx : cells_[static_cast<size_t>(cy) * nx_ + cx]) {
                if (distance(agents[idx].pos, p) <= radius) fn(idx);
            }
        }
    }
}

} // namespace ctsim
