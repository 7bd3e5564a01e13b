#include "lltrace/probability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace lltrace {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_gamma(double x) {
#if defined(__GLIBC__)
    int sign = 0;
    return ::lgamma_r(x, &sign);  // reentrant: std::lgamma writes the global signgam
#else
    return std::lgamma(x);
#endif
}

template <class Visit>
void for_each_outcome(const PositionModel& m, Mode mode, Visit&& visit) {
    if (mode == Mode::simple) {
        for (int x = 0; x < 2; ++x)
            for (int y = 0; y < 2; ++y) visit(m.simple_h0[x][y], m.simple_h1[x][y]);
    } else {
        for (std::size_t z = 0; z < m.joint_h0.size(); ++z)
            for (int y = 0; y < 2; ++y) visit(m.joint_h0[z][y], m.joint_h1[z][y]);
    }
}

double output_prob(double theta, int y) { return y == 1 ? theta : 1.0 - theta; }

template <class F>
double golden_section_max(F&& f, double lo, double hi, double tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

double balance_gap(const CollusionChannel& channel, double p) {
    const auto pmf = binomial_pmf(channel.c(), p);
    double y1 = 0.0;
    for (int z = 0; z <= channel.c(); ++z) y1 += pmf[static_cast<std::size_t>(z)] * channel.theta(z);
    return y1 - 0.5;
}

double bisect_balance(const CollusionChannel& channel, double lo, double hi) {
    double g_lo = balance_gap(channel, lo);
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double g_mid = balance_gap(channel, mid);
        if (g_mid == 0.0) return mid;
        if ((g_mid < 0.0) == (g_lo < 0.0)) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

template <class Table>
void accumulate_moments(double& mu, double& var, const Table& probs, const Table& score) {
    mu = 0.0;
    for (std::size_t a = 0; a < probs.size(); ++a)
        for (int y = 0; y < 2; ++y) {
            const double f = probs[a][y];
            if (f <= 0.0) continue;
            const double s = score[a][y];
            if (s == -kInf) {
                mu = -kInf;
                var = kInf;
                return;
            }
            mu += f * s;
        }
    var = 0.0;
    for (std::size_t a = 0; a < probs.size(); ++a)
        for (int y = 0; y < 2; ++y) {
            const double f = probs[a][y];
            if (f <= 0.0) continue;
            const double d = score[a][y] - mu;
            var += f * d * d;
        }
}

}  // namespace

std::vector<double> binomial_pmf(int n, double p) {
    if (n < 0) throw std::invalid_argument("binomial_pmf: negative trial count");
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("binomial_pmf: p must lie in (0, 1)");
    const double log_p = std::log(p);
    const double log_q = std::log1p(-p);
    const double log_n_fact = log_gamma(n + 1.0);
    std::vector<double> pmf(static_cast<std::size_t>(n) + 1);
    for (int z = 0; z <= n; ++z) {
        const double log_choose = log_n_fact - log_gamma(z + 1.0) - log_gamma(n - z + 1.0);
        pmf[static_cast<std::size_t>(z)] = std::exp(log_choose + z * log_p + (n - z) * log_q);
    }
    const double total = std::accumulate(pmf.begin(), pmf.end(), 0.0);
    for (double& v : pmf) v /= total;
    return pmf;
}

PositionModel position_model(const CollusionChannel& channel, double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("position_model: p must lie in (0, 1)");
    const int c = channel.c();
    PositionModel m;
    m.c = c;
    m.p = p;
    m.theta = channel.theta();
    m.tally_pmf = binomial_pmf(c, p);

    double y1 = 0.0, y0 = 0.0;
    for (int z = 0; z <= c; ++z) {
        y1 += m.tally_pmf[static_cast<std::size_t>(z)] * channel.theta(z);
        y0 += m.tally_pmf[static_cast<std::size_t>(z)] * (1.0 - channel.theta(z));
    }
    m.y_marginal = y1;
    m.y_zero = y0;
    const std::array<double, 2> f_y{y0, y1};
    const std::array<double, 2> f_x{1.0 - p, p};

    // Condition on one colluder's symbol x; the other c - 1 contribute Binomial(c - 1, p) ones.
    const auto others = binomial_pmf(c - 1, p);
    for (int x = 0; x < 2; ++x) {
        for (int y = 0; y < 2; ++y) {
            double s = 0.0;
            for (int zo = 0; zo <= c - 1; ++zo) s += others[static_cast<std::size_t>(zo)] * output_prob(channel.theta(zo + x), y);
            m.simple_h0[x][y] = f_x[x] * s;
            m.simple_h1[x][y] = f_x[x] * f_y[y];
        }
    }

    m.joint_h0.resize(static_cast<std::size_t>(c) + 1);
    m.joint_h1.resize(static_cast<std::size_t>(c) + 1);
    for (int z = 0; z <= c; ++z) {
        const double fz = m.tally_pmf[static_cast<std::size_t>(z)];
        for (int y = 0; y < 2; ++y) {
            m.joint_h0[static_cast<std::size_t>(z)][y] = fz * output_prob(channel.theta(z), y);
            m.joint_h1[static_cast<std::size_t>(z)][y] = fz * f_y[y];
        }
    }
    return m;
}

double moment_fn(const PositionModel& model, double t, Mode mode) {
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("moment_fn: t must lie in [0, 1]");
    double total = 0.0;
    for_each_outcome(model, mode, [&](double f0, double f1) {
        if (f0 == 0.0) {
            if (t == 0.0) total += f1;
        } else if (f1 == 0.0) {
            if (t == 1.0) total += f0;
        } else {
            total += std::exp(t * std::log(f0) + (1.0 - t) * std::log(f1));
        }
    });
    return total;
}

double moment_deficit(const PositionModel& model, double t, Mode mode) {
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("moment_deficit: t must lie in [0, 1]");
    // Per symbol group (x, or z) both hypotheses share the weight w. With a, b the
    // probabilities of the rarer output under H0 and H1, the group contributes
    // w (1 - a^t b^(1-t) - (1-a)^t (1-b)^(1-t)); the second product goes through
    // log1p/expm1 so deficits far below machine epsilon survive.
    auto group = [t](double w, double h0_0, double h0_1, double h1_0, double h1_1) {
        if (w <= 0.0) return 0.0;
        double a = h0_0 / w, b = h1_0 / w;
        if (a + b > 1.0) {
            a = h0_1 / w;
            b = h1_1 / w;
        }
        double g;
        if (a == 0.0) g = t == 0.0 ? b : 0.0;
        else if (b == 0.0) g = t == 1.0 ? a : 0.0;
        else g = std::exp(t * std::log(a) + (1.0 - t) * std::log(b));
        const double la = t == 0.0 ? 0.0 : t * std::log1p(-a);
        const double lb = t == 1.0 ? 0.0 : (1.0 - t) * std::log1p(-b);
        const double e = -std::expm1(la + lb);
        return w * std::max(0.0, e - g);
    };
    double total = 0.0;
    if (mode == Mode::simple) {
        const double p = model.p;
        for (int x = 0; x < 2; ++x) {
            const double w = x ? p : 1.0 - p;
            total += group(w, model.simple_h0[x][0], model.simple_h0[x][1], model.simple_h1[x][0], model.simple_h1[x][1]);
        }
    } else {
        for (std::size_t z = 0; z < model.joint_h0.size(); ++z) {
            total += group(model.tally_pmf[z], model.joint_h0[z][0], model.joint_h0[z][1], model.joint_h1[z][0],
                           model.joint_h1[z][1]);
        }
    }
    return total;
}

double mutual_info_simple(const PositionModel& model) { return mutual_info(model, Mode::simple); }

double mutual_info_joint(const PositionModel& model) { return mutual_info(model, Mode::joint); }

double mutual_info(const PositionModel& model, Mode mode) {
    double nats = 0.0;
    for_each_outcome(model, mode, [&](double f0, double f1) {
        if (f0 > 0.0) nats += f0 * (std::log(f0) - std::log(f1));
    });
    // A divergence is never negative; rounding can leave -1e-16 when H0 and H1 nearly agree.
    return std::max(0.0, nats) / std::numbers::ln2;
}

double optimal_bias(const CollusionChannel& channel, Mode mode) {
    constexpr int grid = 512;
    constexpr double edge = 1e-12;
    auto mi_at = [&](double p) { return mutual_info(position_model(channel, p), mode); };

    int best = 1;
    double best_value = mi_at(1.0 / (grid + 1));
    for (int k = 2; k <= grid; ++k) {
        const double v = mi_at(static_cast<double>(k) / (grid + 1));
        if (v > best_value + 1e-12 * std::abs(best_value)) {
            best_value = v;
            best = k;
        }
    }
    const double lo = best == 1 ? edge : static_cast<double>(best - 1) / (grid + 1);
    const double hi = best == grid ? 1.0 - edge : static_cast<double>(best + 1) / (grid + 1);
    return golden_section_max(mi_at, lo, hi, 1e-10);
}

double deterministic_balance_bias(const CollusionChannel& channel) {
    if (!channel.deterministic()) throw std::invalid_argument("deterministic_balance_bias: channel is not deterministic");
    const auto& theta = channel.theta();
    bool nondecreasing = true, constant = true;
    for (std::size_t z = 1; z < theta.size(); ++z) {
        if (theta[z] < theta[z - 1]) nondecreasing = false;
        if (theta[z] != theta[0]) constant = false;
    }
    if (constant) throw std::invalid_argument("deterministic_balance_bias: channel output is constant");

    constexpr double lo = 1e-12, hi = 1.0 - 1e-12;
    if (nondecreasing) {
        if (balance_gap(channel, lo) > 0.0 || balance_gap(channel, hi) < 0.0) {
            throw std::invalid_argument("deterministic_balance_bias: no root in (0, 1)");
        }
        return bisect_balance(channel, lo, hi);
    }

    constexpr int grid = 4096;
    std::vector<double> roots;
    double prev_p = lo, prev_g = balance_gap(channel, lo);
    for (int k = 1; k <= grid; ++k) {
        const double p = k == grid ? hi : static_cast<double>(k) / grid;
        const double g = balance_gap(channel, p);
        if (g == 0.0) roots.push_back(p);
        else if ((g < 0.0) != (prev_g < 0.0) && prev_g != 0.0) roots.push_back(bisect_balance(channel, prev_p, p));
        prev_p = p;
        prev_g = g;
    }
    if (roots.empty()) throw std::invalid_argument("deterministic_balance_bias: no root in (0, 1)");
    const double target = optimal_bias(channel, Mode::joint);
    double best = roots.front();
    for (double r : roots)
        if (std::abs(r - target) < std::abs(best - target)) best = r;
    return best;
}

ScoreMoments score_moments(const PositionModel& model, const XYTable& score) {
    ScoreMoments out;
    accumulate_moments(out.mu0, out.var0, model.simple_h0, score);
    accumulate_moments(out.mu1, out.var1, model.simple_h1, score);
    return out;
}

ScoreMoments score_moments(const PositionModel& model, const ZYTable& score) {
    if (score.size() != model.joint_h0.size()) throw std::invalid_argument("score_moments: tally table size mismatch");
    ScoreMoments out;
    accumulate_moments(out.mu0, out.var0, model.joint_h0, score);
    accumulate_moments(out.mu1, out.var1, model.joint_h1, score);
    return out;
}

KlIndicator kl_indicator(double mu0, double mu1, double var0, double var1) {
    if (!(var1 > 0.0)) throw std::invalid_argument("kl_indicator: var1 must be positive");
    KlIndicator out;
    out.performance_indicator = (mu0 - mu1) * (mu0 - mu1) / var1;
    out.divergence = out.performance_indicator;
    if (var0 > 0.0) {
        const double ratio = var0 / var1;
        out.divergence += 0.5 * (ratio - 1.0 - std::log(ratio));
    } else {
        out.variance_term = false;
    }
    return out;
}

}  // namespace lltrace
