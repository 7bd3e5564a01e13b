#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lltrace/model.hpp"
#include "lltrace/probability.hpp"

namespace lltrace {

enum class ScoreName { llr, interleaving_g, oosterwijk_h, emi_m, joint_llr, joint_interleaving };

/// CLI names: llr, interleaving-g, oosterwijk-h, emi-m, joint-llr, joint-interleaving.
std::string to_string(ScoreName name);
ScoreName parse_score_name(const std::string& text);
bool is_joint(ScoreName name);
/// Scores that need the true channel theta rather than just c.
bool is_informed(ScoreName name);

// Per-position score functions. H0 = guilty, H1 = innocent.

/// ln(f(x,y|H0) / f(x,y|H1)); -inf where f(x,y|H0) = 0.
double simple_llr(Bit x, Bit y, const PositionModel& model);

/// Closed-form log-likelihood score of the interleaving attack (the universal decoder).
double interleaving_g(Bit x, Bit y, double p, int c);

/// p/(1-p) on a 0/0 match, -1 on a mismatch, (1-p)/p on a 1/1 match.
double oosterwijk_h(Bit x, Bit y, double p);

/// Bayesian approximation of the empirical mutual information score with prior c/n.
/// Finite even where simple_llr is -inf. Requires n >= c.
double emi_bayes_m(Bit x, Bit y, const PositionModel& model, std::uint64_t n);

/// emi_bayes_m for the interleaving attack in closed form.
double emi_bayes_m_interleaving(Bit x, Bit y, double p, std::uint64_t n);

/// ln(f(y|z) / f_Y(y|p)); -inf where f(y|z) = 0.
double joint_llr(int z, Bit y, const PositionModel& model);

/// ln(z/c) - ln p for y = 1 and ln(1 - z/c) - ln(1 - p) for y = 0.
double joint_interleaving(int z, Bit y, double p, int c);

/// Per-position score tables as a function of the bias.
using SimpleScoreFn = std::function<XYTable(double p)>;
using JointScoreFn = std::function<ZYTable(double p)>;

XYTable simple_llr_table(const PositionModel& model);
ZYTable joint_llr_table(const PositionModel& model);

/// Informed scores read the full channel; universal ones only use channel.c().
SimpleScoreFn make_simple_score(ScoreName name, const CollusionChannel& channel, std::uint64_t n);
JointScoreFn make_joint_score(ScoreName name, const CollusionChannel& channel);

/// S_j = sum_i score(p_i)[x_ji][y_i]. -inf is absorbing.
std::vector<double> user_scores(const Code& code, const PirateOutput& y, const SimpleScoreFn& score);

/// Scores of every size-c subset in lexicographic order.
class TupleScores {
public:
    TupleScores(std::size_t n, int c, std::vector<double> scores);

    std::size_t n() const { return n_; }
    int c() const { return c_; }
    std::size_t size() const { return scores_.size(); }
    const std::vector<double>& scores() const { return scores_; }
    double score(std::size_t rank) const { return scores_[rank]; }
    double score_of(std::span<const std::size_t> tuple) const { return scores_[rank_of(tuple)]; }

    /// Members of the tuple with the given lexicographic rank, ascending.
    std::vector<std::size_t> tuple(std::size_t rank) const;
    /// Rank of a tuple; members need not be sorted.
    std::size_t rank_of(std::span<const std::size_t> tuple) const;

private:
    std::size_t n_;
    int c_;
    std::vector<double> scores_;
};

constexpr double kTupleEnumerationCap = 5e6;

/// C(n, c), as a double so that huge values do not overflow.
double binomial_count(std::size_t n, int c);

/// Throws std::invalid_argument when C(n, c) exceeds the cap.
TupleScores tuple_scores(const Code& code, const PirateOutput& y, int c, const JointScoreFn& score,
                         double cap = kTupleEnumerationCap);

/// (S_j - ell * mu1) / sqrt(ell * var1). Throws if var1 <= 0.
std::vector<double> normalize_scores(std::span<const double> raw, std::size_t ell, double mu1, double var1);

/// Per-position innocent mean and variance estimated from the sample of all
/// finite user scores; valid when colluders are a small fraction of users.
struct SampleMoments {
    double mu1;
    double var1;
};
SampleMoments sample_innocent_moments(std::span<const double> raw, std::size_t ell);

/// Phi^-1(1 - eps1 / n).
double universal_threshold(std::uint64_t n, double eps1);

struct Normalization {
    std::size_t ell;
    double mu1;
    double var1;
    /// "exact" or "sample".
    std::string source;
};

struct ScoreReport {
    std::vector<double> raw_scores;
    std::optional<std::vector<double>> normalized_scores;
    double threshold = 0.0;
    /// Set when the threshold was applied to normalized scores.
    std::optional<Normalization> normalization;
    std::vector<std::size_t> accused;
};

/// Accuses j iff S_j >= eta (or the normalized score when a normalization is given).
/// -inf never reaches the threshold.
ScoreReport accuse(std::vector<double> raw, double eta, std::optional<Normalization> normalization = std::nullopt);

struct JointReport {
    double threshold = 0.0;
    /// Ranks of all tuples with S_T >= eta.
    std::vector<std::size_t> accused;
    /// Highest-scoring tuple, ties broken by lexicographic order.
    std::size_t top = 0;
    double top_score = 0.0;
    bool top_accused = false;
    /// Two or more accused tuples, so accused tuples disagree on membership.
    bool ambiguous = false;
};

JointReport accuse_joint(const TupleScores& scores, double eta);

}  // namespace lltrace
