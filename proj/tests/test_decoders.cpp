#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "lltrace/channels.hpp"
#include "lltrace/decoders.hpp"
#include "lltrace/encoder.hpp"
#include "lltrace/params.hpp"
#include "lltrace/probability.hpp"

using namespace lltrace;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CollusionChannel attack(AttackKind kind, int c, double r = 0.0) { return build_attack(Attack{kind, r}, c); }

std::vector<Attack> all_attacks() {
    auto a = fingerprinting_attacks();
    a.push_back({AttackKind::additive, 0.1});
    a.push_back({AttackKind::dilution, 0.2});
    return a;
}

const double kBiases[] = {0.01, 0.1, 0.25, 0.5, 0.63, 0.9, 0.999};

// Sum of a per-position joint table over a tuple, computed directly from the members' bits.
double brute_tuple_score(const Code& code, const PirateOutput& y, const std::vector<std::size_t>& tuple,
                         const JointScoreFn& score) {
    double s = 0.0;
    for (std::size_t i = 0; i < code.ell(); ++i) {
        int z = 0;
        for (auto j : tuple) z += code.bit(j, i);
        s += score(code.biases()[i])[static_cast<std::size_t>(z)][y.y[i]];
    }
    return s;
}

}  // namespace

TEST_CASE("decoder names round-trip") {
    for (auto name : {ScoreName::llr, ScoreName::interleaving_g, ScoreName::oosterwijk_h, ScoreName::emi_m,
                      ScoreName::joint_llr, ScoreName::joint_interleaving})
        CHECK(parse_score_name(to_string(name)) == name);
    CHECK(is_joint(ScoreName::joint_interleaving));
    CHECK_FALSE(is_joint(ScoreName::emi_m));
    CHECK(is_informed(ScoreName::llr));
    CHECK_FALSE(is_informed(ScoreName::interleaving_g));
    CHECK_THROWS_AS(parse_score_name("tardos"), std::invalid_argument);
}

TEST_CASE("simple llr examples") {
    const auto all1 = position_model(attack(AttackKind::all_one, 3), 0.2);
    CHECK(simple_llr(1, 0, all1) == -kInf);
    const auto id = position_model(CollusionChannel(1, {0.0, 1.0}), 0.5);
    CHECK(simple_llr(1, 1, id) == doctest::Approx(std::numbers::ln2).epsilon(1e-15));
    CHECK(simple_llr(0, 1, id) == -kInf);
}

TEST_CASE("interleaving g equals the llr of the interleaving model") {
    for (int c : {1, 2, 3, 7, 20, 100})
        for (double p : kBiases) {
            const auto m = position_model(attack(AttackKind::interleaving, c), p);
            for (Bit x = 0; x < 2; ++x)
                for (Bit y = 0; y < 2; ++y) {
                    const double g = interleaving_g(x, y, p, c);
                    const double l = simple_llr(x, y, m);
                    if (std::isinf(g)) CHECK(l == g);
                    else CHECK(std::abs(g - l) <= 1e-12);
                }
        }
}

TEST_CASE("interleaving g examples") {
    CHECK(interleaving_g(0, 1, 0.3, 2) == doctest::Approx(-0.6931).epsilon(1e-4));
    CHECK(interleaving_g(1, 0, 0.3, 2) == doctest::Approx(std::log(0.5)).epsilon(1e-15));
    CHECK(interleaving_g(1, 1, 0.5, 2) == doctest::Approx(0.4055).epsilon(1e-4));
    CHECK(interleaving_g(0, 0, 0.2, 4) == doctest::Approx(std::log(1 + 0.2 / (4 * 0.8))).epsilon(1e-15));
    CHECK(interleaving_g(1, 0, 0.5, 1) == -kInf);
    for (Bit x = 0; x < 2; ++x)
        for (Bit y = 0; y < 2; ++y) {
            const double cg = 1000 * interleaving_g(x, y, 0.5, 1000);
            const double h = oosterwijk_h(x, y, 0.5);
            CHECK(std::abs(cg / h - 1) <= 1e-3);
        }
}

TEST_CASE("oosterwijk h examples") {
    CHECK(oosterwijk_h(0, 1, 0.3) == -1.0);
    CHECK(oosterwijk_h(1, 0, 0.7) == -1.0);
    CHECK(oosterwijk_h(1, 1, 0.5) == 1.0);
    CHECK(oosterwijk_h(0, 0, 0.01) == doctest::Approx(1.0 / 99).epsilon(1e-14));
    CHECK(oosterwijk_h(0, 0, 0.01) == doctest::Approx(0.0101).epsilon(1e-3));
}

TEST_CASE("emi-bayes m") {
    const auto all1 = position_model(attack(AttackKind::all_one, 3), 0.2);
    CHECK(emi_bayes_m(1, 0, all1, 50) == doctest::Approx(std::log(1 - 3.0 / 50)).epsilon(1e-14));
    CHECK(std::isfinite(emi_bayes_m(1, 0, all1, 50)));
    CHECK(emi_bayes_m_interleaving(0, 1, 0.4, 100) == doctest::Approx(-0.01005).epsilon(1e-3));
    CHECK(emi_bayes_m_interleaving(0, 1, 0.4, 100) == doctest::Approx(std::log(0.99)).epsilon(1e-14));
    CHECK_THROWS_AS(emi_bayes_m(0, 0, all1, 2), std::invalid_argument);

    // c = n: prior of guilt 1, so m is the llr itself.
    for (const auto& a : all_attacks())
        for (int c : {1, 2, 5})
            for (double p : kBiases) {
                const auto m = position_model(build_attack(a, c), p);
                for (Bit x = 0; x < 2; ++x)
                    for (Bit y = 0; y < 2; ++y) CHECK(emi_bayes_m(x, y, m, c) == simple_llr(x, y, m));
            }

    // Closed form for the interleaving attack.
    for (int c : {1, 2, 5, 10})
        for (std::uint64_t n : {10ull, 100ull, 100000ull})
            for (double p : kBiases) {
                const auto m = position_model(attack(AttackKind::interleaving, c), p);
                for (Bit x = 0; x < 2; ++x)
                    for (Bit y = 0; y < 2; ++y)
                        CHECK(std::abs(emi_bayes_m(x, y, m, n) - emi_bayes_m_interleaving(x, y, p, n)) <= 1e-12);
            }
}

TEST_CASE("emi-bayes m limits") {
    // m -> llr pointwise as c / n -> 1.
    const auto m = position_model(attack(AttackKind::majority, 5), 0.35);
    for (Bit x = 0; x < 2; ++x)
        for (Bit y = 0; y < 2; ++y) {
            double prev = kInf;
            for (std::uint64_t n : {50ull, 10ull, 6ull}) {
                const double gap = std::abs(emi_bayes_m(x, y, m, n) - simple_llr(x, y, m));
                CHECK(gap <= prev);
                prev = gap;
            }
        }
    // n * m tends to the Oosterwijk score as n grows, and so does c * g as c grows;
    // the two agree once both n and c are large.
    for (int c : {2, 10, 1000})
        for (double p : {0.2, 0.5, 0.8}) {
            const auto il = position_model(attack(AttackKind::interleaving, c), p);
            for (Bit x = 0; x < 2; ++x)
                for (Bit y = 0; y < 2; ++y) {
                    const double h = oosterwijk_h(x, y, p);
                    double prev = kInf;
                    for (double n : {1e4, 1e5, 1e6}) {
                        const auto nn = static_cast<std::uint64_t>(n);
                        const double gap = std::abs(n * emi_bayes_m(x, y, il, nn) - h);
                        CHECK(gap < prev);
                        prev = gap;
                    }
                    CHECK(prev / std::abs(h) < 1e-4);
                    if (c == 1000) {
                        const double nm = 1e6 * emi_bayes_m(x, y, il, 1000000);
                        CHECK(std::abs(nm / (c * interleaving_g(x, y, p, c)) - 1) < 0.01);
                    }
                }
        }
}

TEST_CASE("joint llr examples") {
    for (auto kind : {AttackKind::all_one, AttackKind::majority, AttackKind::minority})
        for (int c : {1, 3, 5}) {
            const auto ch = attack(kind, c);
            const auto m = position_model(ch, deterministic_balance_bias(ch));
            for (int z = 0; z <= c; ++z) {
                const Bit out = ch.theta(static_cast<std::size_t>(z)) == 1.0;
                CHECK(joint_llr(z, out, m) == doctest::Approx(std::numbers::ln2).epsilon(1e-12));
                CHECK(joint_llr(z, 1 - out, m) == -kInf);
            }
        }
    const auto il = position_model(attack(AttackKind::interleaving, 4), 0.5);
    CHECK(joint_llr(2, 1, il) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(joint_llr(3, 1, il) == doctest::Approx(0.4055).epsilon(1e-4));
    CHECK(joint_llr(3, 1, il) == doctest::Approx(std::log(1.5)).epsilon(1e-14));
    const auto il4 = position_model(attack(AttackKind::interleaving, 4), 0.25);
    CHECK(std::abs(joint_llr(1, 1, il4)) <= 1e-14);
    for (int c : {1, 3, 6})
        for (double p : kBiases) {
            const auto m = position_model(attack(AttackKind::interleaving, c), p);
            for (int z = 0; z <= c; ++z)
                for (Bit y = 0; y < 2; ++y) {
                    const double a = joint_llr(z, y, m), b = joint_interleaving(z, y, p, c);
                    if (std::isinf(b)) CHECK(a == b);
                    else CHECK(std::abs(a - b) <= 1e-12);
                }
        }
}

TEST_CASE("llr means under H0 equal the mutual information") {
    for (const auto& a : all_attacks())
        for (int c : {1, 2, 4, 7})
            for (double p : kBiases) {
                const auto m = position_model(build_attack(a, c), p);
                double simple = 0.0, joint = 0.0;
                for (Bit x = 0; x < 2; ++x)
                    for (Bit y = 0; y < 2; ++y)
                        if (m.simple_h0[x][y] > 0) simple += m.simple_h0[x][y] * simple_llr(x, y, m);
                for (int z = 0; z <= c; ++z)
                    for (Bit y = 0; y < 2; ++y)
                        if (m.joint_h0[static_cast<std::size_t>(z)][y] > 0)
                            joint += m.joint_h0[static_cast<std::size_t>(z)][y] * joint_llr(z, y, m);
                CHECK(std::abs(simple - mutual_info_simple(m) * std::numbers::ln2) <= 1e-10);
                CHECK(std::abs(joint - mutual_info_joint(m) * std::numbers::ln2) <= 1e-10);
            }
}

TEST_CASE("likelihood ratios average to one under H1") {
    for (const auto& a : all_attacks())
        for (int c : {1, 2, 4, 7})
            for (double p : kBiases) {
                const auto m = position_model(build_attack(a, c), p);
                double simple = 0.0, joint = 0.0;
                for (Bit x = 0; x < 2; ++x)
                    for (Bit y = 0; y < 2; ++y) simple += m.simple_h1[x][y] * std::exp(simple_llr(x, y, m));
                for (int z = 0; z <= c; ++z)
                    for (Bit y = 0; y < 2; ++y)
                        joint += m.joint_h1[static_cast<std::size_t>(z)][y] * std::exp(joint_llr(z, y, m));
                CHECK(simple == doctest::Approx(1.0).epsilon(1e-12));
                CHECK(joint == doctest::Approx(1.0).epsilon(1e-12));
            }
}

TEST_CASE("score factories") {
    const auto ch = attack(AttackKind::all_one, 3);
    const auto llr = make_simple_score(ScoreName::llr, ch, 100);
    const auto g = make_simple_score(ScoreName::interleaving_g, ch, 100);
    const auto h = make_simple_score(ScoreName::oosterwijk_h, ch, 100);
    const auto m = make_simple_score(ScoreName::emi_m, ch, 100);
    const auto model = position_model(ch, 0.3);
    for (Bit x = 0; x < 2; ++x)
        for (Bit y = 0; y < 2; ++y) {
            CHECK(llr(0.3)[x][y] == simple_llr(x, y, model));
            CHECK(g(0.3)[x][y] == interleaving_g(x, y, 0.3, 3));
            CHECK(h(0.3)[x][y] == oosterwijk_h(x, y, 0.3));
            CHECK(m(0.3)[x][y] == emi_bayes_m(x, y, model, 100));
        }
    const auto jl = make_joint_score(ScoreName::joint_llr, ch);
    const auto ji = make_joint_score(ScoreName::joint_interleaving, ch);
    for (int z = 0; z <= 3; ++z)
        for (Bit y = 0; y < 2; ++y) {
            CHECK(jl(0.3)[static_cast<std::size_t>(z)][y] == joint_llr(z, y, model));
            CHECK(ji(0.3)[static_cast<std::size_t>(z)][y] == joint_interleaving(z, y, 0.3, 3));
        }
    CHECK_THROWS_AS(make_simple_score(ScoreName::joint_llr, ch, 100), std::invalid_argument);
    CHECK_THROWS_AS(make_joint_score(ScoreName::llr, ch), std::invalid_argument);
}

TEST_CASE("user scores") {
    Rng rng(3);
    const Code empty(5, {}, {});
    const auto zero = user_scores(empty, PirateOutput{}, [](double) { return XYTable{}; });
    CHECK(zero == std::vector<double>(5, 0.0));

    const auto code = generate_code(8, sample_biases(ArcsineBias{}, 37, rng), rng);
    PirateOutput y;
    for (std::size_t i = 0; i < 37; ++i) y.y.push_back(static_cast<Bit>(i % 3 == 0));
    const auto ones = user_scores(code, y, [](double) { return XYTable{{{1.0, 1.0}, {1.0, 1.0}}}; });
    CHECK(ones == std::vector<double>(8, 37.0));

    const auto s = user_scores(code, y, [](double p) { return XYTable{{{p, -p}, {2 * p, -kInf}}}; });
    for (std::size_t j = 0; j < 8; ++j) {
        double expect = 0.0;
        for (std::size_t i = 0; i < 37; ++i) {
            const double p = code.biases()[i];
            const double t[2][2] = {{p, -p}, {2 * p, -kInf}};
            expect += t[code.bit(j, i)][y.y[i]];
        }
        if (std::isinf(expect)) CHECK(s[j] == expect);
        else CHECK(s[j] == doctest::Approx(expect).epsilon(1e-14));
    }
    PirateOutput short_y{std::vector<Bit>(36, 0)};
    CHECK_THROWS_AS(user_scores(code, short_y, [](double) { return XYTable{}; }), std::invalid_argument);
}

TEST_CASE("a lone colluder outscores every innocent user") {
    // c = 1 with the identity channel: Y is the colluder's own word.
    const CollusionChannel id(1, {0.0, 1.0});
    const auto score = make_simple_score(ScoreName::interleaving_g, attack(AttackKind::interleaving, 2), 50);
    int wins = 0;
    for (std::uint64_t t = 0; t < 100; ++t) {
        auto rng = derive_stream(77, t);
        const auto code = generate_code(50, sample_biases(ArcsineBias{}, 500, rng), rng);
        const std::size_t guilty = t % 50;
        const std::size_t coalition[] = {guilty};
        const auto y = apply_channel(code, coalition, id, rng);
        const auto s = user_scores(code, y, score);
        bool best = true;
        for (std::size_t j = 0; j < 50; ++j)
            if (j != guilty && s[j] >= s[guilty]) best = false;
        wins += best;
    }
    CHECK(wins >= 99);
}

TEST_CASE("tuple ranks") {
    const TupleScores ts(6, 3, std::vector<double>(20, 0.0));
    std::vector<std::size_t> prev;
    for (std::size_t r = 0; r < ts.size(); ++r) {
        const auto t = ts.tuple(r);
        CHECK(ts.rank_of(t) == r);
        CHECK(std::is_sorted(t.begin(), t.end()));
        if (!prev.empty()) CHECK(std::lexicographical_compare(prev.begin(), prev.end(), t.begin(), t.end()));
        prev = t;
    }
    const std::size_t shuffled[] = {4, 0, 2};
    CHECK(ts.tuple(ts.rank_of(shuffled)) == std::vector<std::size_t>{0, 2, 4});
    const std::size_t dup[] = {1, 1, 2};
    CHECK_THROWS_AS(ts.rank_of(dup), std::invalid_argument);
    CHECK(binomial_count(30, 4) == 27405.0);
    CHECK(binomial_count(5, 7) == 0.0);
}

TEST_CASE("tuple scores match a direct sum") {
    Rng rng(12);
    const auto ch = attack(AttackKind::coin_flip, 3);
    const auto code = generate_code(9, sample_biases(ArcsineBias{0.05}, 60, rng), rng);
    const std::size_t coalition[] = {1, 4, 7};
    const auto y = apply_channel(code, coalition, ch, rng);
    const auto score = make_joint_score(ScoreName::joint_llr, ch);
    const auto ts = tuple_scores(code, y, 3, score);
    REQUIRE(ts.size() == 84);
    for (std::size_t r = 0; r < ts.size(); ++r) {
        const double expect = brute_tuple_score(code, y, ts.tuple(r), score);
        if (std::isinf(expect)) CHECK(ts.score(r) == expect);
        else CHECK(ts.score(r) == doctest::Approx(expect).epsilon(1e-12));
    }
    CHECK_THROWS_AS(tuple_scores(code, y, 3, score, 80.0), std::invalid_argument);
    CHECK_THROWS_AS(tuple_scores(code, y, 10, score), std::invalid_argument);
}

TEST_CASE("tuple scores with one colluder are user scores") {
    Rng rng(8);
    const auto ch = attack(AttackKind::interleaving, 1);
    const auto code = generate_code(12, sample_biases(ArcsineBias{}, 80, rng), rng);
    const std::size_t coalition[] = {5};
    const auto y = apply_channel(code, coalition, ch, rng);
    const auto joint = make_joint_score(ScoreName::joint_llr, ch);
    const auto ts = tuple_scores(code, y, 1, joint);
    const auto us = user_scores(code, y, [&](double p) {
        const auto t = joint(p);
        return XYTable{{t[0], t[1]}};
    });
    CHECK(ts.scores() == us);
}

TEST_CASE("all-guilty tuple under a deterministic channel scores ell ln 2") {
    for (auto kind : {AttackKind::all_one, AttackKind::majority, AttackKind::minority}) {
        const int c = 3;
        const auto ch = attack(kind, c);
        const double p = deterministic_balance_bias(ch);
        Rng rng(static_cast<std::uint64_t>(kind) + 100);
        const std::size_t ell = 64;
        const auto code = generate_code(10, std::vector<double>(ell, p), rng);
        const std::size_t coalition[] = {2, 3, 8};
        const auto y = apply_channel(code, coalition, ch, rng);
        const auto ts = tuple_scores(code, y, c, make_joint_score(ScoreName::joint_llr, ch));
        CHECK(ts.score_of(coalition) == doctest::Approx(ell * std::numbers::ln2).epsilon(1e-13));
    }
}

TEST_CASE("joint interleaving tuple score tracks the sum of member scores") {
    // Expected to fail at c = 10: even at z = c/2 the two differ by 5 ln(100/99) = 0.05.
    const int c = 10;
    const double p = 0.5;
    const double width = 2 * std::sqrt(c / 4.0);
    for (int z = 0; z <= c; ++z) {
        if (std::abs(z - c / 2.0) > width) continue;
        for (Bit y = 0; y < 2; ++y) {
            const double sum = z * interleaving_g(1, y, p, c) + (c - z) * interleaving_g(0, y, p, c);
            CHECK(std::abs(joint_interleaving(z, y, p, c) - sum) <= 0.02);
        }
    }
}

TEST_CASE("tuple and member-sum scores converge as c grows") {
    auto worst = [](int c) {
        double w = 0.0;
        const double width = 2 * std::sqrt(c / 4.0);
        for (int z = 0; z <= c; ++z) {
            if (std::abs(z - c / 2.0) > width) continue;
            for (Bit y = 0; y < 2; ++y) {
                const double sum = z * interleaving_g(1, y, 0.5, c) + (c - z) * interleaving_g(0, y, 0.5, c);
                w = std::max(w, std::abs(joint_interleaving(z, y, 0.5, c) - sum));
            }
        }
        return w;
    };
    CHECK(worst(100) < worst(10));
    CHECK(worst(1000) < worst(100));
    CHECK(worst(10000) < 0.02);
}

TEST_CASE("normalize scores") {
    const double mu1 = -0.3, var1 = 0.7;
    const std::size_t ell = 400;
    const double base = ell * mu1, sd = std::sqrt(ell * var1);
    const std::vector<double> raw{base, base + sd, base - 2 * sd, -kInf};
    const auto out = normalize_scores(raw, ell, mu1, var1);
    CHECK(out[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(out[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(out[2] == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(out[3] == -kInf);
    CHECK_THROWS_AS(normalize_scores(raw, ell, mu1, 0.0), std::invalid_argument);

    const std::vector<double> sample{1.0, 2.0, 3.0, -kInf};
    const auto sm = sample_innocent_moments(sample, 2);
    CHECK(sm.mu1 == doctest::Approx(1.0));
    CHECK(sm.var1 == doctest::Approx(0.5));
}

TEST_CASE("normalized innocent scores are standard") {
    const int c = 10;
    const std::size_t n = 10000, ell = 10000;
    const auto ch = attack(AttackKind::interleaving, c);
    Rng rng(2718);
    const auto code = generate_code(n, sample_biases(ArcsineBias{}, ell, rng), rng);
    std::vector<std::size_t> coalition(c);
    std::iota(coalition.begin(), coalition.end(), 0);
    const auto y = apply_channel(code, coalition, ch, rng);
    const auto score = make_simple_score(ScoreName::interleaving_g, ch, n);
    const auto raw = user_scores(code, y, score);

    double mu = 0.0, var = 0.0;
    for (double p : code.biases()) {
        const auto mom = score_moments(position_model(ch, p), score(p));
        mu += mom.mu1;
        var += mom.var1;
    }
    const auto norm = normalize_scores(raw, ell, mu / ell, var / ell);
    double s = 0.0, ss = 0.0;
    const auto m = static_cast<double>(n - c);
    for (std::size_t j = c; j < n; ++j) s += norm[j];
    const double mean = s / m;
    for (std::size_t j = c; j < n; ++j) ss += (norm[j] - mean) * (norm[j] - mean);
    const double variance = ss / (m - 1);
    CHECK(mean > -0.05);
    CHECK(mean < 0.05);
    CHECK(variance > 0.9);
    CHECK(variance < 1.1);
}

TEST_CASE("universal threshold") {
    CHECK(universal_threshold(100, 0.05) == doctest::Approx(3.2905).epsilon(1e-4));
    // Reference quantiles from scipy.stats.norm.isf.
    CHECK(std::abs(universal_threshold(100, 0.05) - 3.2905267314918945) <= 1e-9);
    CHECK(std::abs(universal_threshold(1000000, 1e-3) - 5.9978070150076865) <= 1e-9);
    CHECK(std::abs(universal_threshold(1000000000, 0.1) - 6.361340902404056) <= 1e-9);
    CHECK(std::abs(universal_threshold(2, 1.0)) <= 1e-12);
    double prev = -kInf;
    for (std::uint64_t n : {10ull, 100ull, 10000ull, 1000000ull, 100000000ull, 10000000000ull}) {
        const double t = universal_threshold(n, 0.01);
        CHECK(t > prev);
        prev = t;
    }
    const double big = universal_threshold(10000000000ull, 0.01);
    CHECK(big / std::sqrt(2 * std::log(1e12)) < 1.0);
    CHECK(big / std::sqrt(2 * std::log(1e12)) > 0.85);
    CHECK_THROWS_AS(universal_threshold(1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(universal_threshold(10, 0.0), std::invalid_argument);
}

TEST_CASE("accusation") {
    const std::vector<double> raw{0.5, 3.0, -kInf, 2.0, 2.0};
    CHECK(accuse(raw, 10.0).accused.empty());
    CHECK(accuse(raw, 2.0).accused == std::vector<std::size_t>{1, 3, 4});
    CHECK(accuse(raw, -kInf).accused == std::vector<std::size_t>{0, 1, 3, 4});
    const auto r = accuse(raw, 2.0);
    CHECK(r.raw_scores == raw);
    CHECK(r.threshold == 2.0);
    CHECK_FALSE(r.normalized_scores.has_value());

    // Raw and normalized thresholds derived from the same rule accuse the same users.
    const Normalization nz{100, 0.01, 0.04, "exact"};
    const double eta_tilde = 0.7;
    const double eta_raw = 100 * 0.01 + eta_tilde * std::sqrt(100 * 0.04);
    const std::vector<double> s{0.0, 2.0, 2.5, 3.0, 4.0, -kInf};
    const auto a = accuse(s, eta_raw);
    const auto b = accuse(s, eta_tilde, nz);
    CHECK(a.accused == b.accused);
    REQUIRE(b.normalized_scores.has_value());
    CHECK(b.normalization->source == "exact");
}

TEST_CASE("raising the threshold never enlarges the accused set") {
    Rng rng(31);
    std::normal_distribution<double> nd;
    std::vector<double> raw(300);
    for (auto& v : raw) v = nd(rng);
    raw[7] = -kInf;
    std::vector<std::size_t> prev(raw.size());
    std::iota(prev.begin(), prev.end(), 0);
    for (double eta = -4; eta <= 4; eta += 0.05) {
        const auto acc = accuse(raw, eta).accused;
        CHECK(std::includes(prev.begin(), prev.end(), acc.begin(), acc.end()));
        prev = acc;
    }
}

TEST_CASE("joint accusation") {
    // n = 4, c = 2: ranks are {01, 02, 03, 12, 13, 23}.
    const TupleScores ts(4, 2, {1.0, 5.0, 0.0, -kInf, 2.0, 5.0});
    const auto none = accuse_joint(ts, 6.0);
    CHECK(none.accused.empty());
    CHECK_FALSE(none.top_accused);
    CHECK_FALSE(none.ambiguous);
    CHECK(none.top == 1);

    const auto two = accuse_joint(ts, 5.0);
    CHECK(two.accused == std::vector<std::size_t>{1, 5});
    CHECK(ts.tuple(1) == std::vector<std::size_t>{0, 2});
    CHECK(ts.tuple(5) == std::vector<std::size_t>{2, 3});
    CHECK(two.ambiguous);
    CHECK(two.top == 1);  // tie resolved by lexicographic order
    CHECK(two.top_accused);

    const TupleScores disjoint(4, 2, {4.0, 0.0, 0.0, 0.0, 0.0, 4.5});
    const auto d = accuse_joint(disjoint, 3.0);
    CHECK(d.ambiguous);
    CHECK(d.top == 5);

    std::vector<std::size_t> prev{0, 1, 2, 3, 4, 5};
    for (double eta = -1; eta <= 6; eta += 0.5) {
        const auto acc = accuse_joint(ts, eta).accused;
        CHECK(std::includes(prev.begin(), prev.end(), acc.begin(), acc.end()));
        prev = acc;
    }
}

TEST_CASE("deterministic channels at the balance bias always accuse the coalition") {
    const std::uint64_t n = 30;
    for (auto kind : {AttackKind::all_one, AttackKind::majority, AttackKind::minority}) {
        // Majority and minority are deterministic only for odd c.
        const int cc = kind == AttackKind::all_one ? 2 : 3;
        const auto ch = attack(kind, cc);
        const auto sp = deterministic_joint_params(cc, n, 0.01);
        const double p = deterministic_balance_bias(ch);
        const auto score = make_joint_score(ScoreName::joint_llr, ch);
        for (std::uint64_t t = 0; t < 40; ++t) {
            auto rng = derive_stream(5, t);
            const auto code = generate_code(n, std::vector<double>(sp.ell, p), rng);
            std::vector<std::size_t> coalition;
            for (int k = 0; k < cc; ++k) coalition.push_back((t + 7 * k) % n);
            const auto y = apply_channel(code, coalition, ch, rng);
            const auto ts = tuple_scores(code, y, cc, score);
            const auto rep = accuse_joint(ts, sp.eta);
            const auto rank = ts.rank_of(coalition);
            CHECK(std::find(rep.accused.begin(), rep.accused.end(), rank) != rep.accused.end());
        }
    }
}
