#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "polaron/excursion.hpp"
#include "polaron/gaussian.hpp"
#include "polaron/rng.hpp"

namespace polaron {

// Sufficient statistic of one Monte Carlo draw from the renewal measure:
// every downstream functional reads only (tau, sigma2, logw).
// logw = alpha*tau - sum_i log|X_i|.
struct DressedSample {
    double tau = 0.0;
    double sigma2 = 0.0;
    double logw = 0.0;
    std::uint32_t n = 0;
};

struct EnsembleMeta {
    int version = 1;
    double alpha = 0.0;
    std::uint64_t base_seed = 0;
    std::size_t shards = 0;
    std::size_t samples_per_shard = 0;
};

// Persistable empirical representation of the renewal measure. The meta
// block fully determines the rows: regenerating reproduces them bitwise.
struct Ensemble {
    EnsembleMeta meta;
    std::vector<DressedSample> rows;

    std::size_t size() const { return rows.size(); }
};

DressedSample draw_dressed_sample(Rng& rng, double alpha, const SamplerLimits& limits = {});

// Sharded generation: shard k runs on the stream shard_seed(base_seed, k);
// rows are concatenated in shard order then draw order, so the result is
// independent of how shards are scheduled. Shards run in parallel.
Ensemble generate_ensemble(double alpha, std::size_t shards, std::size_t samples_per_shard,
                           std::uint64_t base_seed, const SamplerLimits& limits = {});

// Text format: one self-describing key:value header line, one
// "tau,sigma2,logw,n" row per sample with 17-significant-digit floats, and a
// trailing "checksum:<hex>" line (64-bit FNV-1a over all preceding bytes).
void save_ensemble(const Ensemble& ensemble, const std::filesystem::path& path);
Ensemble load_ensemble(const std::filesystem::path& path);

struct EssReport {
    double ess = 0.0;
    double max_share = 0.0;
};

// Effective sample size of the weights w_j = exp(logw_j - P^2 sigma2_j / 2
// + lambda tau_j): (sum w)^2 / sum w^2, plus the largest single-row share.
EssReport effective_sample_size(const Ensemble& ensemble, double P, double lambda);

std::uint64_t fnv1a64(std::span<const char> bytes);

}  // namespace polaron
