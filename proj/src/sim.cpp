#include "lltrace/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "lltrace/encoder.hpp"
#include "lltrace/probability.hpp"

namespace lltrace {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ScoreSummary summarize(const std::vector<double>& scores, const std::vector<bool>& guilty, bool want_guilty) {
    ScoreSummary s;
    double sum = 0.0;
    s.min = kInf;
    s.max = -kInf;
    for (std::size_t j = 0; j < scores.size(); ++j) {
        if (guilty[j] != want_guilty) continue;
        ++s.count;
        if (scores[j] == -kInf) {
            ++s.neg_inf;
            s.min = -kInf;
            continue;
        }
        sum += scores[j];
        s.min = std::min(s.min, scores[j]);
        s.max = std::max(s.max, scores[j]);
    }
    const std::size_t finite = s.count - s.neg_inf;
    s.mean = finite > 0 ? sum / static_cast<double>(finite) : (s.count > 0 ? -kInf : 0.0);
    if (s.count == 0) s.min = s.max = 0.0;
    return s;
}

std::vector<std::size_t> sample_coalition(std::size_t n, int c, Rng& rng) {
    std::vector<std::size_t> users(n);
    std::iota(users.begin(), users.end(), std::size_t{0});
    for (std::size_t k = 0; k < static_cast<std::size_t>(c); ++k) {
        const std::size_t pick = k + static_cast<std::size_t>(uniform_index(rng, n - k));
        std::swap(users[k], users[pick]);
    }
    users.resize(static_cast<std::size_t>(c));
    std::sort(users.begin(), users.end());
    return users;
}

Normalization exact_normalization(const ExperimentConfig& config, const Code& code, const SimpleScoreFn& score) {
    const auto channel = config.channel();
    double mean = 0.0, var = 0.0;
    double last_p = -1.0;
    ScoreMoments m;
    for (double p : code.biases()) {
        if (p != last_p) {
            m = score_moments(position_model(channel, p), score(p));
            last_p = p;
        }
        mean += m.mu1;
        var += m.var1;
    }
    if (!std::isfinite(mean) || !std::isfinite(var)) {
        throw std::invalid_argument("exact normalization: innocent score moments are infinite for this decoder");
    }
    const auto ell = static_cast<double>(code.ell());
    return {code.ell(), mean / ell, var / ell, "exact"};
}

template <class Task>
void parallel_for(std::uint64_t count, unsigned threads, Task&& task) {
    unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, count));
    if (workers <= 1) {
        for (std::uint64_t t = 0; t < count; ++t) task(t);
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::uint64_t t = next++; t < count && !failed; t = next++) {
                try {
                    task(t);
                } catch (...) {
                    if (!failed.exchange(true)) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

constexpr std::uint64_t kSharedCodeStream = std::numeric_limits<std::uint64_t>::max();

}  // namespace

std::string to_string(NormalizationMode mode) {
    switch (mode) {
        case NormalizationMode::none: return "none";
        case NormalizationMode::exact: return "exact";
        case NormalizationMode::sample: return "sample";
    }
    throw std::logic_error("unreachable normalization mode");
}

NormalizationMode parse_normalization(const std::string& text) {
    if (text == "none") return NormalizationMode::none;
    if (text == "exact") return NormalizationMode::exact;
    if (text == "sample") return NormalizationMode::sample;
    throw std::invalid_argument("unknown normalization '" + text + "'");
}

CollusionChannel ExperimentConfig::channel() const {
    if (theta) return CollusionChannel(c, *theta);
    return build_attack(attack, c);
}

void ExperimentConfig::validate() const {
    if (c < 1 || static_cast<std::size_t>(c) > n) throw std::invalid_argument("config: need 1 <= c <= n");
    if (trials < 1) throw std::invalid_argument("config: trials must be at least 1");
    if (ell < 1) throw std::invalid_argument("config: ell must be at least 1");
    if (is_joint(decoder) != (mode == Mode::joint)) {
        throw std::invalid_argument("config: decoder " + to_string(decoder) + " does not match mode " + to_string(mode));
    }
    if (mode == Mode::joint && normalization != NormalizationMode::none) {
        throw std::invalid_argument("config: joint decoding uses raw tuple scores");
    }
    validate_bias(bias);
    channel();
}

TrialOutcome run_trial(const ExperimentConfig& config, Rng& rng) {
    config.validate();
    const auto biases = sample_biases(config.bias, config.ell, rng);
    const Code code = generate_code(config.n, biases, rng);
    return run_trial(config, code, rng);
}

TrialOutcome run_trial(const ExperimentConfig& config, const Code& code, Rng& rng) {
    config.validate();
    if (code.n() != config.n || code.ell() != config.ell) throw std::invalid_argument("run_trial: code does not match config");
    const auto channel = config.channel();

    TrialOutcome out;
    out.coalition = sample_coalition(config.n, config.c, rng);
    std::vector<bool> guilty(config.n, false);
    for (std::size_t j : out.coalition) guilty[j] = true;

    const PirateOutput y = apply_channel(code, out.coalition, channel, rng);

    if (config.mode == Mode::simple) {
        const auto score = make_simple_score(config.decoder, channel, config.n);
        std::vector<double> raw = user_scores(code, y, score);
        std::optional<Normalization> norm;
        if (config.normalization == NormalizationMode::exact) {
            norm = exact_normalization(config, code, score);
        } else if (config.normalization == NormalizationMode::sample) {
            const auto m = sample_innocent_moments(raw, code.ell());
            norm = Normalization{code.ell(), m.mu1, m.var1, "sample"};
        }
        const ScoreReport report = accuse(std::move(raw), config.eta, norm);
        const auto& tested = report.normalized_scores ? *report.normalized_scores : report.raw_scores;

        out.innocent = summarize(report.raw_scores, guilty, false);
        out.guilty = summarize(report.raw_scores, guilty, true);
        for (std::size_t j = 0; j < tested.size(); ++j)
            if (!guilty[j]) out.innocent_scores.push_back(tested[j]);
        out.accused = report.accused;
        for (std::size_t j : report.accused) (guilty[j] ? out.guilty_accused : out.innocent_accused)++;
        out.false_positive = out.innocent_accused > 0;
        out.miss_one = out.guilty_accused == 0;
        out.miss_all = out.guilty_accused < static_cast<std::size_t>(config.c);
        return out;
    }

    const TupleScores scores = tuple_scores(code, y, config.c, make_joint_score(config.decoder, channel));
    const JointReport report = accuse_joint(scores, config.eta);
    const std::size_t guilty_rank = scores.rank_of(out.coalition);
    out.all_guilty_score = scores.score(guilty_rank);
    out.top_tuple = scores.tuple(report.top);
    out.ambiguous = report.ambiguous;

    std::vector<bool> member(config.n, false);
    for (std::size_t rank : report.accused) {
        const auto tuple = scores.tuple(rank);
        std::size_t guilty_members = 0;
        for (std::size_t j : tuple) {
            member[j] = true;
            if (guilty[j]) ++guilty_members;
        }
        if (rank == guilty_rank) out.all_guilty_accused = true;
        else if (guilty_members == 0) ++out.innocent_tuples_accused;
        else ++out.mixed_tuples_accused;
    }
    for (std::size_t j = 0; j < config.n; ++j)
        if (member[j]) {
            out.accused.push_back(j);
            (guilty[j] ? out.guilty_accused : out.innocent_accused)++;
        }

    // Per-user view of the tuple scores: each user's best tuple.
    std::vector<double> best(config.n, -kInf);
    for (std::size_t rank = 0; rank < scores.size(); ++rank) {
        const double s = scores.score(rank);
        if (s == -kInf) continue;
        for (std::size_t j : scores.tuple(rank)) best[j] = std::max(best[j], s);
    }
    out.innocent = summarize(best, guilty, false);
    out.guilty = summarize(best, guilty, true);

    out.false_positive = out.innocent_tuples_accused > 0;
    out.miss_one = !out.all_guilty_accused;
    out.miss_all = !(out.all_guilty_accused && report.accused.size() == 1);
    return out;
}

Interval wilson_interval(std::uint64_t events, std::uint64_t trials, double z) {
    if (trials == 0 || events > trials) throw std::invalid_argument("wilson_interval: need 0 <= events <= trials, trials >= 1");
    const auto n = static_cast<double>(trials);
    const double p = static_cast<double>(events) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    const double lo = events == 0 ? 0.0 : std::max(0.0, center - half);
    const double hi = events == trials ? 1.0 : std::min(1.0, center + half);
    return {lo, hi};
}

ErrorEstimate estimate_errors(const ExperimentConfig& config) {
    config.validate();
    std::optional<Code> shared;
    if (config.reuse_code) {
        Rng rng = derive_stream(config.seed, kSharedCodeStream);
        auto biases = sample_biases(config.bias, config.ell, rng);
        shared.emplace(generate_code(config.n, std::move(biases), rng));
    }

    std::atomic<std::uint64_t> fp{0}, miss_one{0}, miss_all{0}, mixed{0};
    parallel_for(config.trials, config.threads, [&](std::uint64_t t) {
        Rng rng = derive_stream(config.seed, t);
        const TrialOutcome o = shared ? run_trial(config, *shared, rng) : run_trial(config, rng);
        fp += o.false_positive;
        miss_one += o.miss_one;
        miss_all += o.miss_all;
        mixed += o.mixed_tuples_accused > 0;
    });

    ErrorEstimate e;
    e.trials = config.trials;
    e.fp_events = fp;
    e.miss_one_events = miss_one;
    e.miss_all_events = miss_all;
    e.mixed_tuple_events = mixed;
    const auto n = static_cast<double>(config.trials);
    e.fp_rate = static_cast<double>(e.fp_events) / n;
    e.fn_catch_one = static_cast<double>(e.miss_one_events) / n;
    e.fn_catch_all = static_cast<double>(e.miss_all_events) / n;
    e.fp_ci = wilson_interval(e.fp_events, e.trials);
    e.fn_catch_one_ci = wilson_interval(e.miss_one_events, e.trials);
    e.fn_catch_all_ci = wilson_interval(e.miss_all_events, e.trials);
    return e;
}

Histogram bin_density(std::span<const double> samples, std::size_t bins, std::optional<std::pair<double, double>> range) {
    if (bins < 1) throw std::invalid_argument("bin_density: need at least one bin");
    std::vector<double> finite;
    finite.reserve(samples.size());
    for (double s : samples)
        if (std::isfinite(s)) finite.push_back(s);
    if (finite.empty()) throw std::invalid_argument("bin_density: no finite samples");

    Histogram h;
    h.samples = finite.size();
    if (range) {
        h.lo = range->first;
        h.hi = range->second;
        if (!(h.hi > h.lo)) throw std::invalid_argument("bin_density: empty range");
    } else {
        const auto [mn, mx] = std::minmax_element(finite.begin(), finite.end());
        h.lo = *mn;
        h.hi = *mx;
        if (h.hi == h.lo) {
            h.lo -= 0.5;
            h.hi += 0.5;
        }
    }
    const double width = (h.hi - h.lo) / static_cast<double>(bins);
    std::vector<std::size_t> counts(bins, 0);
    for (double s : finite) {
        if (s < h.lo || s > h.hi) {
            ++h.outside;
            continue;
        }
        auto k = static_cast<std::size_t>((s - h.lo) / width);
        counts[std::min(k, bins - 1)]++;
    }
    const double total = static_cast<double>(finite.size());
    for (std::size_t k = 0; k < bins; ++k) {
        const double center = h.lo + (static_cast<double>(k) + 0.5) * width;
        h.centers.push_back(center);
        h.density.push_back(static_cast<double>(counts[k]) / (total * width));
        h.reference.push_back(std::exp(-0.5 * center * center) / std::sqrt(2.0 * std::numbers::pi));
    }

    double mean = 0.0;
    for (double s : finite) mean += s;
    mean /= total;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double s : finite) {
        const double d = s - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= total;
    m3 /= total;
    m4 /= total;
    h.mean = mean;
    h.variance = m2;
    h.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
    h.excess_kurtosis = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;
    return h;
}

Histogram score_histogram(const ExperimentConfig& config, std::size_t bins, std::optional<std::pair<double, double>> range) {
    if (config.mode != Mode::simple) throw std::invalid_argument("score_histogram: simple mode only");
    ExperimentConfig cfg = config;
    if (cfg.normalization == NormalizationMode::none) cfg.normalization = NormalizationMode::sample;
    cfg.validate();

    std::vector<std::vector<double>> per_trial(cfg.trials);
    parallel_for(cfg.trials, cfg.threads, [&](std::uint64_t t) {
        Rng rng = derive_stream(cfg.seed, t);
        per_trial[t] = run_trial(cfg, rng).innocent_scores;
    });
    std::vector<double> pooled;
    for (auto& v : per_trial) pooled.insert(pooled.end(), v.begin(), v.end());
    return bin_density(pooled, bins, range);
}

}  // namespace lltrace
