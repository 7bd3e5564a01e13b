#include "lltrace/encoder.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace lltrace {

namespace {
constexpr double kBelowOne = 1.0 - 0x1.0p-53;
}

double arcsine_quantile(double u, double delta) {
    const double lo = std::asin(std::sqrt(delta));
    const double s = std::sin(lo + u * (std::numbers::pi / 2.0 - 2.0 * lo));
    return s * s;
}

double arcsine_cdf(double p, double delta) {
    if (p <= delta) return 0.0;
    if (p >= 1.0 - delta) return 1.0;
    const double lo = std::asin(std::sqrt(delta));
    return (std::asin(std::sqrt(p)) - lo) / (std::numbers::pi / 2.0 - 2.0 * lo);
}

std::vector<double> sample_biases(const BiasDistribution& dist, std::size_t ell, Rng& rng) {
    validate_bias(dist);
    if (const auto* fixed = std::get_if<FixedBias>(&dist)) return std::vector<double>(ell, fixed->p);

    const double delta = std::get<ArcsineBias>(dist).delta;
    std::vector<double> biases(ell);
    for (double& p : biases) {
        p = arcsine_quantile(uniform_open01(rng), delta);
        if (p >= 1.0) p = kBelowOne;
        if (p <= 0.0) p = std::numeric_limits<double>::min();
    }
    return biases;
}

Code generate_code(std::size_t n, std::vector<double> biases, Rng& rng) {
    if (n < 1) throw std::invalid_argument("generate_code: n must be positive");
    const std::size_t ell = biases.size();
    std::vector<Bit> bits(n * ell);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < ell; ++i) bits[j * ell + i] = bernoulli(rng, biases[i]) ? 1 : 0;
    return Code(n, std::move(biases), std::move(bits));
}

}  // namespace lltrace
