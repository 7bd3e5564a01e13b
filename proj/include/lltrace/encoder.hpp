#pragma once

#include <cstddef>
#include <vector>

#include "lltrace/model.hpp"
#include "lltrace/rng.hpp"

namespace lltrace {

/// Inverse CDF of the arcsine law on [delta, 1 - delta] at u in [0, 1].
double arcsine_quantile(double u, double delta);

/// CDF of the arcsine law on [delta, 1 - delta].
double arcsine_cdf(double p, double delta);

/// ell i.i.d. biases. Arcsine draws use u on the open interval (0, 1) and are
/// clamped to the largest double below 1, so every bias lies strictly in (0, 1).
std::vector<double> sample_biases(const BiasDistribution& dist, std::size_t ell, Rng& rng);

/// n code words with X_{j,i} ~ Bernoulli(p_i), filled user by user.
Code generate_code(std::size_t n, std::vector<double> biases, Rng& rng);

}  // namespace lltrace
