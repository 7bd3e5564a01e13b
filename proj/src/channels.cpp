#include "lltrace/channels.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace lltrace {

bool has_noise_parameter(AttackKind kind) { return kind == AttackKind::additive || kind == AttackKind::dilution; }

void validate_attack(const Attack& attack) {
    if (has_noise_parameter(attack.kind)) {
        if (!(attack.r > 0.0 && attack.r < 1.0)) {
            throw std::invalid_argument(to_string(attack.kind) + " needs a noise rate r in (0, 1)");
        }
    } else if (attack.r != 0.0) {
        throw std::invalid_argument(to_string(attack.kind) + " takes no noise rate");
    }
}

std::string to_string(AttackKind kind) {
    switch (kind) {
        case AttackKind::interleaving: return "interleaving";
        case AttackKind::all_one: return "all1";
        case AttackKind::majority: return "majority";
        case AttackKind::minority: return "minority";
        case AttackKind::coin_flip: return "coinflip";
        case AttackKind::additive: return "additive";
        case AttackKind::dilution: return "dilution";
    }
    throw std::logic_error("unreachable attack kind");
}

std::string to_string(const Attack& attack) {
    if (!has_noise_parameter(attack.kind)) return to_string(attack.kind);
    // Shortest of %.12g and %.17g that still reads back as r.
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", attack.r);
    if (std::strtod(buf, nullptr) != attack.r) std::snprintf(buf, sizeof buf, "%.17g", attack.r);
    return to_string(attack.kind) + ":" + buf;
}

Attack parse_attack(const std::string& text, double r_override) {
    const auto colon = text.find(':');
    const std::string name = text.substr(0, colon);
    Attack attack;
    if (name == "interleaving") attack.kind = AttackKind::interleaving;
    else if (name == "all1") attack.kind = AttackKind::all_one;
    else if (name == "majority") attack.kind = AttackKind::majority;
    else if (name == "minority") attack.kind = AttackKind::minority;
    else if (name == "coinflip") attack.kind = AttackKind::coin_flip;
    else if (name == "additive") attack.kind = AttackKind::additive;
    else if (name == "dilution") attack.kind = AttackKind::dilution;
    else throw std::invalid_argument("unknown attack '" + name + "'");

    if (colon != std::string::npos) {
        try {
            std::size_t used = 0;
            const std::string rate = text.substr(colon + 1);
            attack.r = std::stod(rate, &used);
            if (used != rate.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw std::invalid_argument("bad noise rate in '" + text + "'");
        }
    }
    if (r_override >= 0.0 && has_noise_parameter(attack.kind)) attack.r = r_override;
    validate_attack(attack);
    return attack;
}

std::vector<Attack> fingerprinting_attacks() {
    return {{AttackKind::interleaving}, {AttackKind::all_one}, {AttackKind::majority},
            {AttackKind::minority}, {AttackKind::coin_flip}};
}

CollusionChannel build_attack(const Attack& attack, int c) {
    if (c < 1) throw std::invalid_argument("build_attack: c must be at least 1");
    validate_attack(attack);
    std::vector<double> theta(static_cast<std::size_t>(c) + 1);
    for (int z = 0; z <= c; ++z) {
        double t = 0.0;
        switch (attack.kind) {
            case AttackKind::interleaving:
                t = static_cast<double>(z) / c;
                break;
            case AttackKind::all_one:
                t = z > 0 ? 1.0 : 0.0;
                break;
            case AttackKind::majority:
                t = 2 * z < c ? 0.0 : (2 * z > c ? 1.0 : 0.5);
                break;
            case AttackKind::minority:
                if (z == 0) t = 0.0;
                else if (z == c) t = 1.0;
                else t = 2 * z < c ? 1.0 : (2 * z > c ? 0.0 : 0.5);
                break;
            case AttackKind::coin_flip:
                t = z == 0 ? 0.0 : (z == c ? 1.0 : 0.5);
                break;
            case AttackKind::additive:
                t = z == 0 ? attack.r : 1.0;
                break;
            case AttackKind::dilution:
                t = z == 0 ? 0.0 : 1.0 - std::pow(attack.r, z);
                break;
        }
        theta[static_cast<std::size_t>(z)] = t;
    }
    return CollusionChannel(c, std::move(theta));
}

PirateOutput apply_channel(const Code& code, std::span<const std::size_t> coalition,
                           const CollusionChannel& channel, Rng& rng) {
    if (coalition.size() != static_cast<std::size_t>(channel.c())) {
        throw std::invalid_argument("apply_channel: coalition size " + std::to_string(coalition.size()) +
                                    " does not match channel c = " + std::to_string(channel.c()));
    }
    for (std::size_t j : coalition) {
        if (j >= code.n()) throw std::invalid_argument("apply_channel: coalition member out of range");
    }
    PirateOutput out;
    out.y.resize(code.ell());
    for (std::size_t i = 0; i < code.ell(); ++i) {
        int z = 0;
        for (std::size_t j : coalition) z += code.bit(j, i);
        const double t = channel.theta(z);
        if (t == 0.0) out.y[i] = 0;
        else if (t == 1.0) out.y[i] = 1;
        else out.y[i] = bernoulli(rng, t) ? 1 : 0;
    }
    return out;
}

}  // namespace lltrace
