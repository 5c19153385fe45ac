#pragma once

#include <span>

#include "polaron/ensemble.hpp"
#include "polaron/fk.hpp"

// Serial reference implementations of the OpenMP kernels. Kept for testing
// (the parallel kernels must reproduce them) and for the benchmark target.
namespace polaron::reference {

// Plain single-loop evaluation of the Lambda estimate (shifted two-pass).
double lambda_hat(std::span<const DressedSample> rows, double P, double lambda);

// Same streams as generate_ensemble, one shard after another on one thread.
Ensemble generate_ensemble(double alpha, std::size_t shards, std::size_t samples_per_shard,
                           std::uint64_t base_seed, const SamplerLimits& limits = {});

// Same batches as fk_estimate, processed sequentially.
FkEstimate fk_estimate(const PathConfig& config);

}  // namespace polaron::reference
