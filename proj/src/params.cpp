#include "lltrace/params.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "lltrace/decoders.hpp"

namespace lltrace {

namespace {

void check_budgets(double eps1, double eps2) {
    if (!(eps1 > 0.0 && eps1 < 1.0)) throw std::invalid_argument("eps1 must lie in (0, 1)");
    if (!(eps2 > 0.0 && eps2 < 1.0)) throw std::invalid_argument("eps2 must lie in (0, 1)");
}

std::uint64_t ceil_length(double ell) {
    if (!std::isfinite(ell) || ell > 1.8e19) throw std::invalid_argument("code length overflows 64 bits");
    const auto rounded = static_cast<std::uint64_t>(std::ceil(ell));
    return rounded < 1 ? 1 : rounded;
}

// log_fp = ln(candidates / eps1), log_fn = ln(1 / eps2).
SchemeParams chernoff_params(const PositionModel& model, Mode mode, double log_fp, double log_fn, double eps1,
                             double eps2) {
    const double gamma = log_fn / log_fp;
    if (!(gamma < 1.0)) {
        throw std::invalid_argument("error budgets incompatible: gamma = " + std::to_string(gamma) + " >= 1");
    }
    const auto sol = solve_markov_bounds(model, mode, log_fp, log_fn, MarkovExponents::standard(gamma));
    SchemeParams out;
    out.ell = ceil_length(sol.ell);
    out.eta = sol.eta;
    out.gamma = gamma;
    out.eps1 = eps1;
    out.eps2 = eps2;
    return out;
}

double binary_entropy(double r) { return -(r * std::log2(r) + (1.0 - r) * std::log2(1.0 - r)); }

}  // namespace

MarkovExponents MarkovExponents::standard(double gamma) {
    const double root = std::sqrt(gamma);
    return {1.0 - root, root};
}

MarkovSolution solve_markov_bounds(const PositionModel& model, Mode mode, double log_fp, double log_fn,
                                   MarkovExponents e) {
    const double d_alpha = moment_deficit(model, e.alpha, mode);
    const double d_beta = moment_deficit(model, 1.0 - e.beta, mode);
    if (!(d_alpha > 0.0) || !(d_beta > 0.0)) {
        throw std::invalid_argument("degenerate channel: M(t) >= 1, hypotheses are indistinguishable");
    }
    const double a = std::log1p(-d_alpha);
    const double b = std::log1p(-d_beta);
    // ell * a - alpha * eta = -log_fp ;  ell * b + beta * eta = -log_fn
    const double ell = -(e.beta * log_fp + e.alpha * log_fn) / (e.beta * a + e.alpha * b);
    const double eta = (-log_fn - ell * b) / e.beta;
    return {ell, eta};
}

SchemeParams simple_params(int c, std::uint64_t n, double eps1, double eps2, const PositionModel& model) {
    check_budgets(eps1, eps2);
    if (c != model.c) throw std::invalid_argument("simple_params: c does not match the model");
    if (n < 1) throw std::invalid_argument("simple_params: n must be positive");
    const double log_fp = std::log(static_cast<double>(n)) - std::log(eps1);
    return chernoff_params(model, Mode::simple, log_fp, -std::log(eps2), eps1, eps2);
}

SchemeParams simple_params_catch_all(int c, std::uint64_t n, double eps1, double eps2, const PositionModel& model) {
    check_budgets(eps1, eps2);
    catch_all_gamma(c, n, eps1, eps2);  // rejects gamma' >= 1
    SchemeParams out = simple_params(c, n, eps1, eps2 / c, model);
    out.eps2 = eps2;
    out.notes.push_back("heuristic: catch-all bound assumes independent colluder scores");
    return out;
}

SchemeParams joint_params(int c, std::uint64_t n, double eps1, double eps2, const PositionModel& model) {
    check_budgets(eps1, eps2);
    if (c != model.c) throw std::invalid_argument("joint_params: c does not match the model");
    if (n < 1) throw std::invalid_argument("joint_params: n must be positive");
    const double log_fp = c * std::log(static_cast<double>(n)) - std::log(eps1);
    return chernoff_params(model, Mode::joint, log_fp, -std::log(eps2), eps1, eps2);
}

SchemeParams deterministic_joint_params(int c, std::uint64_t n, double eps1) {
    if (!(eps1 > 0.0 && eps1 < 1.0)) throw std::invalid_argument("eps1 must lie in (0, 1)");
    if (c < 1 || n < 1) throw std::invalid_argument("deterministic_joint_params: c and n must be positive");
    const double log_fp = c * std::log(static_cast<double>(n)) - std::log(eps1);
    SchemeParams out;
    out.ell = ceil_length(log_fp / std::numbers::ln2);
    out.eta = log_fp;
    out.gamma = 0.0;
    out.eps1 = eps1;
    out.eps2 = 0.0;
    out.notes.push_back("all-guilty tuple is always accused");
    return out;
}

double catch_all_gamma(int c, std::uint64_t n, double eps1, double eps2) {
    if (c < 1 || n < 1) throw std::invalid_argument("catch_all_gamma: c and n must be positive");
    if (!(eps1 > 0.0 && eps1 < 1.0)) throw std::invalid_argument("eps1 must lie in (0, 1)");
    if (!(eps2 > 0.0)) throw std::invalid_argument("eps2 must be positive");
    const double gamma = std::log(c / eps2) / (std::log(static_cast<double>(n)) - std::log(eps1));
    if (!(gamma < 1.0)) throw std::invalid_argument("catch-all gamma' >= 1: error budgets incompatible");
    return gamma;
}

double asymptotic_length(const Attack& attack, int c, double n, Mode mode) {
    validate_attack(attack);
    const double ln2 = std::numbers::ln2;
    const double ln_n = std::log(n);
    const double log2_n = std::log2(n);
    const double r = attack.r;
    if (mode == Mode::simple) {
        switch (attack.kind) {
            case AttackKind::interleaving: return 2.0 * c * c * ln_n;
            case AttackKind::all_one:
            case AttackKind::minority: return c * ln_n / (ln2 * ln2);
            case AttackKind::majority: return std::numbers::pi * c * ln_n;
            case AttackKind::coin_flip: return 4.0 * c * ln_n / (ln2 * ln2);
            case AttackKind::additive: return c * ln_n / (ln2 * ln2 - r * ln2);
            case AttackKind::dilution: return c * ln_n / (ln2 * ln2);
        }
    } else {
        switch (attack.kind) {
            case AttackKind::interleaving: return 2.0 * c * c * ln_n;
            case AttackKind::all_one:
            case AttackKind::majority:
            case AttackKind::minority: return c * log2_n;
            case AttackKind::coin_flip: return c * ln_n / std::log(1.25);
            case AttackKind::additive: return c * log2_n / (1.0 - 0.5 * binary_entropy(r));
            case AttackKind::dilution: return c * log2_n / (1.0 - 0.5 * ln2 * binary_entropy(r));
        }
    }
    throw std::invalid_argument("asymptotic_length: unknown attack/mode pair");
}

SchemeParams universal_design(int c, std::uint64_t n, double eps1, double eps2) {
    const auto model = position_model(build_attack({AttackKind::interleaving}, c), 0.5);
    SchemeParams out = simple_params(c, n, eps1, eps2, model);
    out.eta = universal_threshold(n, eps1);
    out.normalized_threshold = true;
    out.notes.push_back("heuristic: code length assumes interleaving is the worst-case attack");
    out.notes.push_back("length computed at p = 1/2 while the encoder draws p from the arcsine law");
    return out;
}

}  // namespace lltrace
