#pragma once

#include <cstdint>
#include <span>

#include "amab/random.hpp"

namespace amab {

struct MIEstimate {
  double bits = 0.0;
  int prefix_t = 0;
  long samples = 0;
  double se = 0.0;
};

// Plug-in mutual information between discrete labels x in [0, n_x) and
// y in [0, n_y), in bits, with the Miller-Madow correction and floored at 0.
// The standard error is from `n_bootstrap` resamples.
MIEstimate plug_in_mutual_information(std::span<const int> x, std::span<const std::uint32_t> y, int n_x,
                                      std::uint32_t n_y, RandomStream& rng, int n_bootstrap = 100);

// Entropy in bits of a count vector with the Miller-Madow correction.
double miller_madow_entropy(std::span<const long> counts, long total);

}  // namespace amab
