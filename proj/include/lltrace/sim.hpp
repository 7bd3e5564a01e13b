#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lltrace/channels.hpp"
#include "lltrace/decoders.hpp"
#include "lltrace/model.hpp"
#include "lltrace/rng.hpp"

namespace lltrace {

enum class NormalizationMode { none, exact, sample };

std::string to_string(NormalizationMode mode);
NormalizationMode parse_normalization(const std::string& text);

struct ExperimentConfig {
    std::size_t n = 100;
    int c = 2;
    Attack attack;
    /// Explicit channel; overrides attack when set.
    std::optional<std::vector<double>> theta;
    BiasDistribution bias = ArcsineBias{0.0};
    ScoreName decoder = ScoreName::interleaving_g;
    Mode mode = Mode::simple;
    std::uint64_t ell = 1;
    double eta = 0.0;
    /// none: eta applies to raw totals. exact: innocent moments from the true channel.
    /// sample: innocent moments estimated from all user scores of the trial.
    NormalizationMode normalization = NormalizationMode::none;
    std::uint64_t trials = 1;
    std::uint64_t seed = 1;
    /// Draw one code (stream index 2^64 - 1) and reuse it in every trial.
    bool reuse_code = false;
    /// Worker threads; 0 picks the hardware concurrency.
    unsigned threads = 0;

    CollusionChannel channel() const;
    /// Throws std::invalid_argument on inconsistent settings.
    void validate() const;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

struct ScoreSummary {
    std::size_t count = 0;
    std::size_t neg_inf = 0;
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    friend bool operator==(const ScoreSummary&, const ScoreSummary&) = default;
};

struct TrialOutcome {
    std::vector<std::size_t> coalition;
    /// Simple mode: accused users. Joint mode: members of every accused tuple.
    std::vector<std::size_t> accused;
    std::size_t innocent_accused = 0;
    std::size_t guilty_accused = 0;
    ScoreSummary innocent;
    ScoreSummary guilty;
    /// Normalized innocent scores when a normalization is active, raw totals otherwise (simple mode).
    std::vector<double> innocent_scores;

    // Joint mode.
    double all_guilty_score = 0.0;
    bool all_guilty_accused = false;
    std::size_t innocent_tuples_accused = 0;
    std::size_t mixed_tuples_accused = 0;
    bool ambiguous = false;
    std::vector<std::size_t> top_tuple;

    /// Simple: any innocent accused. Joint: any all-innocent tuple accused.
    bool false_positive = false;
    /// Simple: no colluder accused. Joint: the all-guilty tuple not accused.
    bool miss_one = false;
    /// Simple: some colluder not accused. Joint: not (all-guilty tuple is the only accused tuple).
    bool miss_all = false;

    friend bool operator==(const TrialOutcome&, const TrialOutcome&) = default;
};

/// One encode -> collude -> decode -> accuse round.
TrialOutcome run_trial(const ExperimentConfig& config, Rng& rng);
/// Same round on a caller-provided code.
TrialOutcome run_trial(const ExperimentConfig& config, const Code& code, Rng& rng);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Wilson score interval; z = 1.96 gives 95% coverage.
Interval wilson_interval(std::uint64_t events, std::uint64_t trials, double z = 1.959963984540054);

struct ErrorEstimate {
    std::uint64_t trials = 0;
    std::uint64_t fp_events = 0;
    std::uint64_t miss_one_events = 0;
    std::uint64_t miss_all_events = 0;
    /// Joint mode only: trials in which some mixed tuple was accused.
    std::uint64_t mixed_tuple_events = 0;
    double fp_rate = 0.0;
    double fn_catch_one = 0.0;
    double fn_catch_all = 0.0;
    Interval fp_ci;
    Interval fn_catch_one_ci;
    Interval fn_catch_all_ci;

    friend bool operator==(const ErrorEstimate&, const ErrorEstimate&) = default;
};

/// Trial t uses derive_stream(seed, t); results do not depend on thread count.
ErrorEstimate estimate_errors(const ExperimentConfig& config);

struct Histogram {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<double> centers;
    std::vector<double> density;
    /// Standard normal density at each bin center.
    std::vector<double> reference;
    std::size_t samples = 0;
    std::size_t outside = 0;
    double mean = 0.0;
    double variance = 0.0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
};

/// Density estimate over [range.first, range.second] (the sample range when unset).
/// Non-finite samples are dropped; densities are normalized by the remaining count,
/// including samples outside the range.
Histogram bin_density(std::span<const double> samples, std::size_t bins,
                      std::optional<std::pair<double, double>> range = std::nullopt);

/// Pools normalized innocent scores over all trials (simple mode only).
/// A config without normalization uses the sample normalization.
Histogram score_histogram(const ExperimentConfig& config, std::size_t bins,
                          std::optional<std::pair<double, double>> range = std::nullopt);

}  // namespace lltrace
