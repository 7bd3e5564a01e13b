#include "lltrace/model.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace lltrace {

CollusionChannel::CollusionChannel(int c, std::vector<double> theta) : c_(c), theta_(std::move(theta)) {
    if (c_ < 1) throw std::invalid_argument("collusion channel: c must be at least 1");
    if (theta_.size() != static_cast<std::size_t>(c_) + 1) {
        throw std::invalid_argument("collusion channel: theta has " + std::to_string(theta_.size()) +
                                    " entries, expected c + 1 = " + std::to_string(c_ + 1));
    }
    for (double t : theta_) {
        if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("collusion channel: theta entry outside [0, 1]");
    }
}

bool CollusionChannel::deterministic() const {
    return std::all_of(theta_.begin(), theta_.end(), [](double t) { return t == 0.0 || t == 1.0; });
}

CollusionChannel validate_channel(std::span<const double> theta, int c) {
    return CollusionChannel(c, std::vector<double>(theta.begin(), theta.end()));
}

void validate_bias(const BiasDistribution& dist) {
    if (const auto* fixed = std::get_if<FixedBias>(&dist)) {
        if (!(fixed->p > 0.0 && fixed->p < 1.0)) throw std::invalid_argument("fixed bias must lie in (0, 1)");
    } else {
        const auto& arcsine = std::get<ArcsineBias>(dist);
        if (!(arcsine.delta >= 0.0 && arcsine.delta < 0.5)) {
            throw std::invalid_argument("arcsine cut-off must lie in [0, 1/2)");
        }
    }
}

Code::Code(std::size_t n, std::vector<double> biases, std::vector<Bit> bits)
    : n_(n), biases_(std::move(biases)), bits_(std::move(bits)) {
    if (bits_.size() != n_ * biases_.size()) throw std::invalid_argument("code: bit matrix size mismatch");
    for (double p : biases_) {
        if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("code: bias outside (0, 1)");
    }
    for (Bit b : bits_) {
        if (b > 1) throw std::invalid_argument("code: entry is not a bit");
    }
}

std::string to_string(Mode mode) { return mode == Mode::simple ? "simple" : "joint"; }

Mode parse_mode(const std::string& text) {
    if (text == "simple") return Mode::simple;
    if (text == "joint") return Mode::joint;
    throw std::invalid_argument("unknown mode '" + text + "' (expected simple or joint)");
}

}  // namespace lltrace
