#include "lltrace/decoders.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

namespace lltrace {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_ratio(double f0, double f1) {
    if (f0 == 0.0) return -kInf;
    return std::log(f0) - std::log(f1);
}

void check_bits(Bit x, Bit y) {
    if (x > 1 || y > 1) throw std::invalid_argument("score arguments must be bits");
}

std::uint64_t choose_exact(std::size_t n, std::size_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace

std::string to_string(ScoreName name) {
    switch (name) {
        case ScoreName::llr: return "llr";
        case ScoreName::interleaving_g: return "interleaving-g";
        case ScoreName::oosterwijk_h: return "oosterwijk-h";
        case ScoreName::emi_m: return "emi-m";
        case ScoreName::joint_llr: return "joint-llr";
        case ScoreName::joint_interleaving: return "joint-interleaving";
    }
    throw std::logic_error("unreachable score name");
}

ScoreName parse_score_name(const std::string& text) {
    for (auto name : {ScoreName::llr, ScoreName::interleaving_g, ScoreName::oosterwijk_h, ScoreName::emi_m,
                      ScoreName::joint_llr, ScoreName::joint_interleaving}) {
        if (to_string(name) == text) return name;
    }
    throw std::invalid_argument("unknown decoder '" + text + "'");
}

bool is_joint(ScoreName name) { return name == ScoreName::joint_llr || name == ScoreName::joint_interleaving; }

bool is_informed(ScoreName name) {
    return name == ScoreName::llr || name == ScoreName::emi_m || name == ScoreName::joint_llr;
}

double simple_llr(Bit x, Bit y, const PositionModel& model) {
    check_bits(x, y);
    return log_ratio(model.simple_h0[x][y], model.simple_h1[x][y]);
}

double interleaving_g(Bit x, Bit y, double p, int c) {
    check_bits(x, y);
    if (x != y) return std::log1p(-1.0 / c);
    if (x == 0) return std::log1p(p / (c * (1.0 - p)));
    return std::log1p((1.0 - p) / (c * p));
}

double oosterwijk_h(Bit x, Bit y, double p) {
    check_bits(x, y);
    if (x != y) return -1.0;
    return x == 0 ? p / (1.0 - p) : (1.0 - p) / p;
}

double emi_bayes_m(Bit x, Bit y, const PositionModel& model, std::uint64_t n) {
    check_bits(x, y);
    if (n < static_cast<std::uint64_t>(model.c)) throw std::invalid_argument("emi_bayes_m: n must be at least c");
    // A prior of guilt equal to 1 is the likelihood ratio itself.
    if (n == static_cast<std::uint64_t>(model.c)) return simple_llr(x, y, model);
    const double prior = static_cast<double>(model.c) / static_cast<double>(n);
    const double ratio = model.simple_h0[x][y] / model.simple_h1[x][y];
    return std::log1p(prior * (ratio - 1.0));
}

double emi_bayes_m_interleaving(Bit x, Bit y, double p, std::uint64_t n) {
    check_bits(x, y);
    const double nd = static_cast<double>(n);
    if (x != y) return std::log1p(-1.0 / nd);
    if (x == 0) return std::log1p(p / (nd * (1.0 - p)));
    return std::log1p((1.0 - p) / (nd * p));
}

double joint_llr(int z, Bit y, const PositionModel& model) {
    if (z < 0 || z > model.c || y > 1) throw std::invalid_argument("joint_llr: tally or output out of range");
    const double theta = model.theta[static_cast<std::size_t>(z)];
    const double given_z = y == 1 ? theta : 1.0 - theta;
    const double marginal = y == 1 ? model.y_marginal : model.y_zero;
    return log_ratio(given_z, marginal);
}

double joint_interleaving(int z, Bit y, double p, int c) {
    if (z < 0 || z > c || y > 1) throw std::invalid_argument("joint_interleaving: tally or output out of range");
    const double frac = static_cast<double>(z) / c;
    if (y == 1) return z == 0 ? -kInf : std::log(frac) - std::log(p);
    return z == c ? -kInf : std::log1p(-frac) - std::log1p(-p);
}

XYTable simple_llr_table(const PositionModel& model) {
    XYTable t{};
    for (Bit x = 0; x < 2; ++x)
        for (Bit y = 0; y < 2; ++y) t[x][y] = simple_llr(x, y, model);
    return t;
}

ZYTable joint_llr_table(const PositionModel& model) {
    ZYTable t(static_cast<std::size_t>(model.c) + 1);
    for (int z = 0; z <= model.c; ++z)
        for (Bit y = 0; y < 2; ++y) t[static_cast<std::size_t>(z)][y] = joint_llr(z, y, model);
    return t;
}

SimpleScoreFn make_simple_score(ScoreName name, const CollusionChannel& channel, std::uint64_t n) {
    const int c = channel.c();
    switch (name) {
        case ScoreName::llr:
            return [channel](double p) { return simple_llr_table(position_model(channel, p)); };
        case ScoreName::interleaving_g:
            return [c](double p) {
                XYTable t{};
                for (Bit x = 0; x < 2; ++x)
                    for (Bit y = 0; y < 2; ++y) t[x][y] = interleaving_g(x, y, p, c);
                return t;
            };
        case ScoreName::oosterwijk_h:
            return [](double p) {
                XYTable t{};
                for (Bit x = 0; x < 2; ++x)
                    for (Bit y = 0; y < 2; ++y) t[x][y] = oosterwijk_h(x, y, p);
                return t;
            };
        case ScoreName::emi_m:
            if (n < static_cast<std::uint64_t>(c)) throw std::invalid_argument("emi-m decoder: n must be at least c");
            return [channel, n](double p) {
                const auto model = position_model(channel, p);
                XYTable t{};
                for (Bit x = 0; x < 2; ++x)
                    for (Bit y = 0; y < 2; ++y) t[x][y] = emi_bayes_m(x, y, model, n);
                return t;
            };
        default:
            throw std::invalid_argument(to_string(name) + " is not a simple decoder");
    }
}

JointScoreFn make_joint_score(ScoreName name, const CollusionChannel& channel) {
    const int c = channel.c();
    switch (name) {
        case ScoreName::joint_llr:
            return [channel](double p) { return joint_llr_table(position_model(channel, p)); };
        case ScoreName::joint_interleaving:
            return [c](double p) {
                ZYTable t(static_cast<std::size_t>(c) + 1);
                for (int z = 0; z <= c; ++z)
                    for (Bit y = 0; y < 2; ++y) t[static_cast<std::size_t>(z)][y] = joint_interleaving(z, y, p, c);
                return t;
            };
        default:
            throw std::invalid_argument(to_string(name) + " is not a joint decoder");
    }
}

std::vector<double> user_scores(const Code& code, const PirateOutput& y, const SimpleScoreFn& score) {
    const std::size_t ell = code.ell();
    if (y.y.size() != ell) throw std::invalid_argument("user_scores: pirate output length does not match the code");

    // Per position, the score a user receives for holding a 0 or a 1.
    std::vector<double> if_zero(ell), if_one(ell);
    double last_p = -1.0;
    XYTable table{};
    for (std::size_t i = 0; i < ell; ++i) {
        const double p = code.biases()[i];
        if (p != last_p) {
            table = score(p);
            last_p = p;
        }
        if_zero[i] = table[0][y.y[i]];
        if_one[i] = table[1][y.y[i]];
    }

    std::vector<double> totals(code.n(), 0.0);
    for (std::size_t j = 0; j < code.n(); ++j) {
        const auto row = code.row(j);
        double s = 0.0;
        for (std::size_t i = 0; i < ell; ++i) s += row[i] ? if_one[i] : if_zero[i];
        totals[j] = s;
    }
    return totals;
}

TupleScores::TupleScores(std::size_t n, int c, std::vector<double> scores) : n_(n), c_(c), scores_(std::move(scores)) {
    if (c_ < 1 || static_cast<std::size_t>(c_) > n_) throw std::invalid_argument("tuple scores: need 1 <= c <= n");
    if (static_cast<double>(scores_.size()) != binomial_count(n_, c_)) {
        throw std::invalid_argument("tuple scores: expected one score per size-c subset");
    }
}

std::vector<std::size_t> TupleScores::tuple(std::size_t rank) const {
    if (rank >= scores_.size()) throw std::out_of_range("tuple rank out of range");
    std::vector<std::size_t> members;
    members.reserve(static_cast<std::size_t>(c_));
    std::size_t v = 0;
    for (int k = 0; k < c_; ++k) {
        const auto remaining = static_cast<std::size_t>(c_ - 1 - k);
        for (;; ++v) {
            const std::uint64_t block = choose_exact(n_ - 1 - v, remaining);
            if (rank < block) break;
            rank -= block;
        }
        members.push_back(v++);
    }
    return members;
}

std::size_t TupleScores::rank_of(std::span<const std::size_t> tuple) const {
    if (tuple.size() != static_cast<std::size_t>(c_)) throw std::invalid_argument("tuple has the wrong size");
    std::vector<std::size_t> sorted(tuple.begin(), tuple.end());
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end() || sorted.back() >= n_) {
        throw std::invalid_argument("tuple members must be distinct users");
    }
    std::size_t rank = 0, v = 0;
    for (int k = 0; k < c_; ++k) {
        const auto remaining = static_cast<std::size_t>(c_ - 1 - k);
        for (; v < sorted[static_cast<std::size_t>(k)]; ++v) rank += choose_exact(n_ - 1 - v, remaining);
        ++v;
    }
    return rank;
}

double binomial_count(std::size_t n, int c) {
    if (c < 0 || static_cast<std::size_t>(c) > n) return 0.0;
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(c), n - static_cast<std::size_t>(c));
    double r = 1.0;
    for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return std::round(r);
}

TupleScores tuple_scores(const Code& code, const PirateOutput& y, int c, const JointScoreFn& score, double cap) {
    const std::size_t n = code.n(), ell = code.ell();
    if (y.y.size() != ell) throw std::invalid_argument("tuple_scores: pirate output length does not match the code");
    if (c < 1 || static_cast<std::size_t>(c) > n) throw std::invalid_argument("tuple_scores: need 1 <= c <= n");
    const double count = binomial_count(n, c);
    if (count > cap) {
        throw std::invalid_argument("tuple_scores: C(n, c) = " + std::to_string(count) + " exceeds the enumeration cap");
    }

    const auto width = static_cast<std::size_t>(c) + 1;
    std::vector<double> vals(ell * width);
    double last_p = -1.0;
    ZYTable table;
    for (std::size_t i = 0; i < ell; ++i) {
        const double p = code.biases()[i];
        if (p != last_p) {
            table = score(p);
            if (table.size() != width) throw std::invalid_argument("joint score table has the wrong size");
            last_p = p;
        }
        for (std::size_t z = 0; z < width; ++z) vals[i * width + z] = table[z][y.y[i]];
    }

    std::vector<double> scores;
    scores.reserve(static_cast<std::size_t>(count));
    // tallies[d] holds the per-position tally of the first d chosen members.
    std::vector<std::vector<int>> tallies(static_cast<std::size_t>(c), std::vector<int>(ell, 0));

    auto recurse = [&](auto&& self, int depth, std::size_t start) -> void {
        const auto& tally = tallies[static_cast<std::size_t>(depth)];
        const std::size_t last = n - static_cast<std::size_t>(c - depth);
        if (depth == c - 1) {
            for (std::size_t j = start; j <= last; ++j) {
                const auto row = code.row(j);
                double s = 0.0;
                for (std::size_t i = 0; i < ell; ++i) s += vals[i * width + static_cast<std::size_t>(tally[i] + row[i])];
                scores.push_back(s);
            }
            return;
        }
        auto& next = tallies[static_cast<std::size_t>(depth) + 1];
        for (std::size_t j = start; j <= last; ++j) {
            const auto row = code.row(j);
            for (std::size_t i = 0; i < ell; ++i) next[i] = tally[i] + row[i];
            self(self, depth + 1, j + 1);
        }
    };
    recurse(recurse, 0, 0);
    return TupleScores(n, c, std::move(scores));
}

std::vector<double> normalize_scores(std::span<const double> raw, std::size_t ell, double mu1, double var1) {
    if (!(var1 > 0.0)) throw std::invalid_argument("normalize_scores: var1 must be positive");
    const double shift = static_cast<double>(ell) * mu1;
    const double scale = std::sqrt(static_cast<double>(ell) * var1);
    std::vector<double> out(raw.size());
    for (std::size_t j = 0; j < raw.size(); ++j) out[j] = (raw[j] - shift) / scale;
    return out;
}

SampleMoments sample_innocent_moments(std::span<const double> raw, std::size_t ell) {
    if (ell == 0) throw std::invalid_argument("sample_innocent_moments: ell must be positive");
    double sum = 0.0;
    std::size_t count = 0;
    for (double s : raw)
        if (std::isfinite(s)) {
            sum += s;
            ++count;
        }
    if (count < 2) throw std::invalid_argument("sample_innocent_moments: need at least two finite scores");
    const double mean = sum / static_cast<double>(count);
    double ss = 0.0;
    for (double s : raw)
        if (std::isfinite(s)) ss += (s - mean) * (s - mean);
    const double var = ss / static_cast<double>(count - 1);
    const auto l = static_cast<double>(ell);
    return {mean / l, var / l};
}

double universal_threshold(std::uint64_t n, double eps1) {
    if (n < 1 || !(eps1 > 0.0)) throw std::invalid_argument("universal_threshold: need n >= 1 and eps1 > 0");
    const double tail = eps1 / static_cast<double>(n);
    if (!(tail < 1.0)) throw std::invalid_argument("universal_threshold: eps1 / n must be below 1");
    // Upper quantile through the lower tail keeps full precision for tiny eps1 / n.
    return -boost::math::quantile(boost::math::normal_distribution<double>(), tail);
}

ScoreReport accuse(std::vector<double> raw, double eta, std::optional<Normalization> normalization) {
    ScoreReport report;
    report.threshold = eta;
    if (normalization) {
        report.normalized_scores = normalize_scores(raw, normalization->ell, normalization->mu1, normalization->var1);
    }
    const auto& tested = report.normalized_scores ? *report.normalized_scores : raw;
    for (std::size_t j = 0; j < tested.size(); ++j)
        if (tested[j] != -kInf && tested[j] >= eta) report.accused.push_back(j);
    report.raw_scores = std::move(raw);
    report.normalization = std::move(normalization);
    return report;
}

JointReport accuse_joint(const TupleScores& scores, double eta) {
    JointReport report;
    report.threshold = eta;
    const auto& s = scores.scores();
    report.top_score = s.front();
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (s[k] != -kInf && s[k] >= eta) report.accused.push_back(k);
        if (s[k] > report.top_score) {
            report.top_score = s[k];
            report.top = k;
        }
    }
    report.top_accused = report.top_score != -kInf && report.top_score >= eta;
    report.ambiguous = report.accused.size() >= 2;
    return report;
}

}  // namespace lltrace
