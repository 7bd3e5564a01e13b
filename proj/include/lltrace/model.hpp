#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace lltrace {

using Bit = std::uint8_t;

/// Collusion channel: theta[z] = P(Y = 1 | the coalition holds z ones), z = 0..c.
class CollusionChannel {
public:
    /// Throws std::invalid_argument unless theta has c + 1 entries in [0, 1].
    CollusionChannel(int c, std::vector<double> theta);

    int c() const { return c_; }
    const std::vector<double>& theta() const { return theta_; }
    double theta(int z) const { return theta_[static_cast<std::size_t>(z)]; }

    /// theta_0 == 0 and theta_c == 1.
    bool marking() const { return theta_.front() == 0.0 && theta_.back() == 1.0; }
    /// Every entry is exactly 0 or 1.
    bool deterministic() const;

    friend bool operator==(const CollusionChannel&, const CollusionChannel&) = default;

private:
    int c_;
    std::vector<double> theta_;
};

CollusionChannel validate_channel(std::span<const double> theta, int c);

struct FixedBias {
    double p;
    friend bool operator==(const FixedBias&, const FixedBias&) = default;
};

/// Arcsine law on [delta, 1 - delta]; delta = 0 is the cut-off-free encoder.
struct ArcsineBias {
    double delta = 0.0;
    friend bool operator==(const ArcsineBias&, const ArcsineBias&) = default;
};

using BiasDistribution = std::variant<FixedBias, ArcsineBias>;

void validate_bias(const BiasDistribution& dist);

/// n x ell binary matrix, row-major per user, plus the column biases.
class Code {
public:
    Code(std::size_t n, std::vector<double> biases, std::vector<Bit> bits);

    std::size_t n() const { return n_; }
    std::size_t ell() const { return biases_.size(); }
    Bit bit(std::size_t user, std::size_t pos) const { return bits_[user * ell() + pos]; }
    std::span<const Bit> row(std::size_t user) const {
        return {bits_.data() + user * ell(), ell()};
    }
    const std::vector<double>& biases() const { return biases_; }
    const std::vector<Bit>& bits() const { return bits_; }

    friend bool operator==(const Code&, const Code&) = default;

private:
    std::size_t n_;
    std::vector<double> biases_;
    std::vector<Bit> bits_;
};

struct PirateOutput {
    std::vector<Bit> y;
    friend bool operator==(const PirateOutput&, const PirateOutput&) = default;
};

struct SchemeParams {
    std::uint64_t ell = 1;
    double eta = 0.0;
    double gamma = 0.0;
    double eps1 = 0.0;
    double eps2 = 0.0;
    /// eta applies to normalized scores (universal design) rather than raw totals.
    bool normalized_threshold = false;
    /// Provenance flags such as "heuristic" or "bias fixed at 1/2".
    std::vector<std::string> notes;

    friend bool operator==(const SchemeParams&, const SchemeParams&) = default;
};

enum class Mode { simple, joint };

std::string to_string(Mode mode);
Mode parse_mode(const std::string& text);

}  // namespace lltrace
