#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "polaron/rng.hpp"

namespace polaron {

// One individual of the birth-death process: born at `birth`, dead at `death`.
struct Interval {
    double birth = 0.0;
    double death = 0.0;
};

// One busy cycle of the birth-death process: every individual born before the
// population first returns to zero. `tau` is that return time, which equals
// the last death time.
struct Excursion {
    std::vector<Interval> intervals;  // sorted by birth time
    double tau = 0.0;

    std::size_t n() const { return intervals.size(); }
};

struct SamplerLimits {
    std::size_t max_individuals = 10000;
    double max_tau = 1000.0;
};

// Draws one excursion by the event-driven scheme: at population k the next
// event arrives after Exp(alpha + k), is a birth with probability
// alpha/(alpha+k), and a death kills a uniformly chosen living individual.
// Throws std::invalid_argument for alpha <= 0 and ResourceLimitError when a
// cap is breached.
Excursion sample_excursion(Rng& rng, double alpha, const SamplerLimits& limits = {});

// Verifies all structural invariants of an excursion (ordering, positivity,
// the population staying >= 1 until tau). Throws std::logic_error on breach.
void check_excursion(const Excursion& exc);

// Population size at time t computed from the interval list (right-continuous).
std::size_t alive_count(const Excursion& exc, double t);

struct ExcursionSummary {
    std::size_t count = 0;
    double mean_n = 0.0;
    std::size_t max_n = 0;
    double mean_tau = 0.0;
    double max_tau = 0.0;
    // alive_histogram[k] counts event intervals during which exactly k
    // individuals were alive, aggregated over all excursions.
    std::vector<std::size_t> alive_histogram;
};

ExcursionSummary summarize(std::span<const Excursion> excursions);

}  // namespace polaron
