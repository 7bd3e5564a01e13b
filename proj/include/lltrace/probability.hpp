#pragma once

#include <array>
#include <vector>

#include "lltrace/model.hpp"

namespace lltrace {

/// Indexed [x][y] for a single user's symbol x and the pirate output y.
using XYTable = std::array<std::array<double, 2>, 2>;
/// Indexed [z][y] for a tuple tally z = 0..c.
using ZYTable = std::vector<std::array<double, 2>>;

/// Exact per-position distributions for fixed (c, p, theta).
///
/// H0 is the guilty hypothesis (the user, or every member of the tuple, is a
/// colluder) and H1 the innocent one. Under H1 the user's symbols are
/// independent of Y, so both H1 tables factorize into their marginals.
struct PositionModel {
    int c = 1;
    double p = 0.5;
    std::vector<double> theta;
    /// Binomial(c, p) over z = 0..c.
    std::vector<double> tally_pmf;
    /// f_{Y|P}(1|p).
    double y_marginal = 0.0;
    /// f_{Y|P}(0|p), summed directly rather than as 1 - y_marginal.
    double y_zero = 0.0;
    XYTable simple_h0{};
    XYTable simple_h1{};
    ZYTable joint_h0;
    ZYTable joint_h1;
};

/// Binomial(n, p) pmf over 0..n, evaluated term by term through log-gamma and renormalized.
std::vector<double> binomial_pmf(int n, double p);

/// Throws std::invalid_argument unless 0 < p < 1.
PositionModel position_model(const CollusionChannel& channel, double p);

/// M(t) = sum f_H0^t f_H1^(1-t); outcomes with f_H0 = 0 contribute nothing for t > 0.
double moment_fn(const PositionModel& model, double t, Mode mode);

/// 1 - M(t), computed without cancellation; positive whenever M(t) < 1 even when
/// the gap is far below double precision near 1.
double moment_deficit(const PositionModel& model, double t, Mode mode);

/// I(X_1; Y | P = p) in bits.
double mutual_info_simple(const PositionModel& model);
/// I(Z; Y | P = p) in bits. The per-user joint rate is this divided by c.
double mutual_info_joint(const PositionModel& model);

double mutual_info(const PositionModel& model, Mode mode);

/// Maximizer of the mode's mutual information over p in (0, 1).
///
/// A 512-point grid locates the best bracket, then golden-section search
/// refines it. When p and 1 - p tie (symmetric channels with two maxima)
/// the smaller bias is returned.
double optimal_bias(const CollusionChannel& channel, Mode mode);

/// Solves f_{Y|P}(1|p) = 1/2 for a deterministic, non-constant channel.
/// Non-monotone channels return the root closest to the joint-MI optimal bias.
double deterministic_balance_bias(const CollusionChannel& channel);

struct ScoreMoments {
    double mu0 = 0.0;
    double mu1 = 0.0;
    double var0 = 0.0;
    double var1 = 0.0;
};

/// Exact mean and variance of a per-position score under H0 and H1.
/// A -inf score on an outcome with positive probability yields mu = -inf, var = +inf.
ScoreMoments score_moments(const PositionModel& model, const XYTable& score);
ScoreMoments score_moments(const PositionModel& model, const ZYTable& score);

struct KlIndicator {
    double divergence = 0.0;
    /// (mu0 - mu1)^2 / var1 alone.
    double performance_indicator = 0.0;
    /// False when var0 <= 0 and the variance-ratio term was dropped.
    bool variance_term = true;
};

/// Gaussian KL divergence d(S0 || S1) as a code-rate indicator. Throws if var1 <= 0.
KlIndicator kl_indicator(double mu0, double mu1, double var0, double var1);

}  // namespace lltrace
