#include "doctest.h"

#include <cmath>

#include "ctsim/clock.hpp"
#include "ctsim/rng.hpp"

using namespace ctsim;

TEST_CASE("interval arithmetic: 96 intervals per day, rotation every 900s") {
    SimClock clock{0, 60};
    CHECK(clock.ticks_per_day() == 1440);
    CHECK(kIntervalsPerDay == 96); // 24*60/15

    // interval_index advances exactly every 900/step ticks
    int64_t per_interval = kRotationSeconds / clock.step_seconds;
    CHECK(per_interval == 15);
    for (int64_t t = 0; t < 3000; ++t) {
        clock.tick = t;
        CHECK(clock.interval_index() == t / per_interval);
    }

    clock.tick = 1440;
    CHECK(clock.day_index() == 1);
    CHECK(clock.at_day_boundary());
    CHECK(clock.interval_in_day() == 0);
    clock.tick = 1439;
    CHECK(clock.day_index() == 0);
    CHECK(clock.interval_in_day() == 95);
}

TEST_CASE("clock works for every step that divides 900") {
    for (int step : {1, 5, 60, 300, 900}) {
        SimClock clock{0, step};
        clock.tick = kSecondsPerDay / step;
        CHECK(clock.day_index() == 1);
        CHECK(clock.interval_index() == kIntervalsPerDay);
    }
}

TEST_CASE("named streams are independent and reproducible") {
    RngStreams a(42), b(42), c(43);
    CHECK(a.make("mobility").next_u64() == b.make("mobility").next_u64());
    CHECK(a.make("mobility").next_u64() != a.make("radio").next_u64());
    CHECK(a.make("mobility", 0).next_u64() != a.make("mobility", 1).next_u64());
    CHECK(a.make("mobility").next_u64() != c.make("mobility").next_u64());
}

TEST_CASE("uniform01 stays in [0,1) and is deterministic") {
    Rng r1(7), r2(7);
    for (int i = 0; i < 1000; ++i) {
        double v = r1.uniform01();
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
        CHECK(v == r2.uniform01());
    }
}

TEST_CASE("gaussian moments are sane") {
    Rng rng(123);
    const int n = 100000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        double v = rng.gaussian(2.0, 3.0);
        sum += v;
        sq += v * v;
    }
    double mean = sum / n;
    double var = sq / n - mean * mean;
    CHECK(std::abs(mean - 2.0) < 0.05);
    CHECK(std::abs(std::sqrt(var) - 3.0) < 0.05);
}

TEST_CASE("bernoulli edge probabilities") {
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        CHECK_FALSE(rng.bernoulli(0.0));
        CHECK(rng.bernoulli(1.0));
    }
}
