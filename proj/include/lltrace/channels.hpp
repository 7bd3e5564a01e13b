#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lltrace/model.hpp"
#include "lltrace/rng.hpp"

namespace lltrace {

enum class AttackKind { interleaving, all_one, majority, minority, coin_flip, additive, dilution };

/// Named attack or group-testing noise model; r is used only by additive and dilution.
struct Attack {
    AttackKind kind = AttackKind::interleaving;
    double r = 0.0;

    friend bool operator==(const Attack&, const Attack&) = default;
};

/// Throws std::invalid_argument if r is present for a noiseless kind or missing/outside (0,1) for a noisy one.
void validate_attack(const Attack& attack);

bool has_noise_parameter(AttackKind kind);

/// Lowercase CLI names: interleaving, all1, majority, minority, coinflip, additive, dilution.
std::string to_string(AttackKind kind);
std::string to_string(const Attack& attack);

/// Accepts "<name>" or "<name>:<r>"; r_override (if set) supplies the noise rate for additive/dilution.
Attack parse_attack(const std::string& text, double r_override = -1.0);

/// The five marking-assumption fingerprinting attacks, in a fixed order.
std::vector<Attack> fingerprinting_attacks();

/// Majority and minority resolve the even-c tie z = c/2 with a fair coin.
CollusionChannel build_attack(const Attack& attack, int c);

/// z_i = sum of coalition bits at position i; Y_i ~ Bernoulli(theta[z_i]).
/// rng is consumed only for positions where 0 < theta[z_i] < 1.
PirateOutput apply_channel(const Code& code, std::span<const std::size_t> coalition,
                           const CollusionChannel& channel, Rng& rng);

}  // namespace lltrace
