#pragma once

#include <cstdint>

#include "lltrace/channels.hpp"
#include "lltrace/model.hpp"
#include "lltrace/probability.hpp"

namespace lltrace {

/// Markov-bound exponents. The defaults alpha = 1 - sqrt(gamma), beta = sqrt(gamma)
/// are the ones every calculator below uses.
struct MarkovExponents {
    double alpha;
    double beta;
    static MarkovExponents standard(double gamma);
};

/// Solves ell * ln M(alpha) - alpha * eta = -log_fp and ell * ln M(1 - beta) + beta * eta = -log_fn
/// for (ell, eta), where log_fp = ln(#innocent candidates / eps1) and log_fn = ln(1 / eps2).
/// Returns the unrounded pair. Throws if the moment function does not separate the hypotheses.
struct MarkovSolution {
    double ell;
    double eta;
};
MarkovSolution solve_markov_bounds(const PositionModel& model, Mode mode, double log_fp, double log_fn,
                                   MarkovExponents exponents);

/// Simple decoder parameters: with probability >= 1 - eps1 no innocent user is
/// accused, and with probability >= 1 - eps2 at least one colluder is.
SchemeParams simple_params(int c, std::uint64_t n, double eps1, double eps2, const PositionModel& model);

/// Catch-all variant: gamma replaced by ln(c / eps2) / ln(n / eps1). Heuristic only.
SchemeParams simple_params_catch_all(int c, std::uint64_t n, double eps1, double eps2, const PositionModel& model);

/// Joint decoder parameters: all-innocent tuples rejected with probability >= 1 - eps1,
/// the all-guilty tuple accused with probability >= 1 - eps2.
SchemeParams joint_params(int c, std::uint64_t n, double eps1, double eps2, const PositionModel& model);

/// Deterministic channel at the balance bias: ell = ceil(log2(n^c / eps1)), eta = ln(n^c / eps1).
SchemeParams deterministic_joint_params(int c, std::uint64_t n, double eps1);

/// gamma' = ln(c / eps2) / ln(n / eps1); a conjecture, not a theorem.
double catch_all_gamma(int c, std::uint64_t n, double eps1, double eps2);

/// Leading-order code length. Fingerprinting attacks use the published
/// asymptotics in both modes; additive and dilution use the group-testing forms.
double asymptotic_length(const Attack& attack, int c, double n, Mode mode);

/// Interleaving-attack simple parameters at p = 1/2, used as the code length for
/// arbitrary attacks. eta is the normalized threshold Phi^-1(1 - eps1 / n).
SchemeParams universal_design(int c, std::uint64_t n, double eps1, double eps2);

}  // namespace lltrace
