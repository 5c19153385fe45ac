#include "polaron/excursion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "polaron/errors.hpp"

namespace polaron {

Excursion sample_excursion(Rng& rng, double alpha, const SamplerLimits& limits) {
    if (!(alpha > 0.0)) {
        throw std::invalid_argument("sample_excursion: alpha must be > 0, got " +
                                    std::to_string(alpha));
    }

    Excursion exc;
    double t = rng.exponential(alpha);  // first birth
    exc.intervals.push_back({t, 0.0});
    std::vector<std::size_t> alive = {0};

    while (!alive.empty()) {
        const double k = static_cast<double>(alive.size());
        t += rng.exponential(alpha + k);
        if (t > limits.max_tau) {
            throw ResourceLimitError(
                "sample_excursion: tau cap breached (n=" + std::to_string(exc.n()) +
                    ", t=" + std::to_string(t) + ")",
                exc.n(), t);
        }
        if (rng.uniform01() * (alpha + k) <= alpha) {
            exc.intervals.push_back({t, 0.0});
            alive.push_back(exc.n() - 1);
            if (exc.n() > limits.max_individuals) {
                throw ResourceLimitError(
                    "sample_excursion: individual cap breached (n=" + std::to_string(exc.n()) +
                        ", t=" + std::to_string(t) + ")",
                    exc.n(), t);
            }
        } else {
            const auto pick = static_cast<std::size_t>(rng.uniform01() * k);
            const std::size_t victim = alive[std::min(pick, alive.size() - 1)];
            exc.intervals[victim].death = t;
            alive[std::min(pick, alive.size() - 1)] = alive.back();
            alive.pop_back();
        }
    }
    exc.tau = t;

    // Births arrive in time order, so the list is already sorted by birth;
    // keep the documented tie-break anyway.
    std::sort(exc.intervals.begin(), exc.intervals.end(), [](const Interval& a, const Interval& b) {
        return a.birth != b.birth ? a.birth < b.birth : a.death < b.death;
    });
    return exc;
}

std::size_t alive_count(const Excursion& exc, double t) {
    std::size_t k = 0;
    for (const auto& iv : exc.intervals) {
        if (iv.birth <= t && t < iv.death) ++k;
    }
    return k;
}

void check_excursion(const Excursion& exc) {
    if (exc.n() == 0) throw std::logic_error("excursion: empty interval list");
    double max_death = 0.0;
    for (std::size_t i = 0; i < exc.n(); ++i) {
        const auto& iv = exc.intervals[i];
        if (!(0.0 <= iv.birth && iv.birth < iv.death))
            throw std::logic_error("excursion: bad interval ordering");
        if (!(iv.birth > 0.0)) throw std::logic_error("excursion: first birth must be > 0");
        if (!(iv.birth < exc.tau)) throw std::logic_error("excursion: birth at or after tau");
        if (!(iv.death <= exc.tau)) throw std::logic_error("excursion: death after tau");
        if (i > 0 && exc.intervals[i - 1].birth > iv.birth)
            throw std::logic_error("excursion: intervals not sorted by birth");
        max_death = std::max(max_death, iv.death);
    }
    if (max_death != exc.tau) throw std::logic_error("excursion: tau != last death");
    // Population must stay >= 1 on [birth_1, tau). Check just after every
    // event time, which is where a right-continuous step count can drop.
    for (const auto& iv : exc.intervals) {
        if (iv.death < exc.tau && alive_count(exc, iv.death) == 0)
            throw std::logic_error("excursion: population hit 0 before tau");
    }
    if (alive_count(exc, exc.tau) != 0) throw std::logic_error("excursion: still alive at tau");
}

ExcursionSummary summarize(std::span<const Excursion> excursions) {
    if (excursions.empty()) throw std::invalid_argument("summarize: empty excursion sequence");

    ExcursionSummary s;
    s.count = excursions.size();
    for (const auto& exc : excursions) {
        s.mean_n += static_cast<double>(exc.n());
        s.mean_tau += exc.tau;
        s.max_n = std::max(s.max_n, exc.n());
        s.max_tau = std::max(s.max_tau, exc.tau);

        // Walk the event times and histogram the population between events.
        std::vector<double> events;
        events.reserve(2 * exc.n());
        for (const auto& iv : exc.intervals) {
            events.push_back(iv.birth);
            events.push_back(iv.death);
        }
        std::sort(events.begin(), events.end());
        for (std::size_t e = 0; e + 1 < events.size(); ++e) {
            const std::size_t k = alive_count(exc, events[e]);
            if (k >= s.alive_histogram.size()) s.alive_histogram.resize(k + 1, 0);
            ++s.alive_histogram[k];
        }
    }
    s.mean_n /= static_cast<double>(s.count);
    s.mean_tau /= static_cast<double>(s.count);
    return s;
}

}  // namespace polaron
