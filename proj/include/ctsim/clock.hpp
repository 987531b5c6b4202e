#ifndef CTSIM_CLOCK_HPP
#define CTSIM_CLOCK_HPP

#include <cstdint>

namespace ctsim {

// Identifier rotation period. Ephemeral IDs are valid for exactly one
// 900 s interval, giving 96 intervals per day.
inline constexpr int64_t kRotationSeconds = 900;
inline constexpr int64_t kSecondsPerDay = 86400;
inline constexpr int kIntervalsPerDay = 96;
inline constexpr int kRetentionDays = 14;

// Simulation clock. interval_index and day_index are pure functions of
// (tick, step_seconds); the tick counter only ever moves forward.
struct SimClock {
    int64_t tick = 0;
    int step_seconds = 60;

    int64_t seconds() const { return tick * step_seconds; }
    int64_t interval_index() const { return seconds() / kRotationSeconds; }
    int interval_in_day() const { return static_cast<int>(interval_index() % kIntervalsPerDay); }
    int64_t day_index() const { return seconds() / kSecondsPerDay; }
    bool at_day_boundary() const { return seconds() % kSecondsPerDay == 0; }

    int64_t ticks_per_day() const { return kSecondsPerDay / step_seconds; }
    int64_t retention_ticks() const { return kRetentionDays * ticks_per_day(); }
    double minutes_per_tick() const { return step_seconds / 60.0; }

    void advance() { ++tick; }
};

} // namespace ctsim

#endif
