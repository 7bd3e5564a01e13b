#include "lltrace/serialize.hpp"

#include <cstdio>
#include <stdexcept>

namespace lltrace {

namespace {

std::string full_precision(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_number(const std::string& text, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) throw std::invalid_argument("bad number '" + text + "' in " + what);
    return v;
}

template <class T>
void read_if(const Json& j, const char* key, T& field) {
    if (auto it = j.find(key); it != j.end()) it->get_to(field);
}

}  // namespace

std::string to_string(const BiasDistribution& dist) {
    if (const auto* fixed = std::get_if<FixedBias>(&dist)) return "fixed:" + full_precision(fixed->p);
    return "arcsine:" + full_precision(std::get<ArcsineBias>(dist).delta);
}

BiasDistribution parse_bias(const std::string& text) {
    const auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    const bool has_value = colon != std::string::npos;
    BiasDistribution dist;
    if (kind == "fixed") {
        if (!has_value) throw std::invalid_argument("bias 'fixed' needs a value, as in fixed:0.5");
        dist = FixedBias{parse_number(text.substr(colon + 1), "bias")};
    } else if (kind == "arcsine") {
        dist = ArcsineBias{has_value ? parse_number(text.substr(colon + 1), "bias") : 0.0};
    } else {
        throw std::invalid_argument("unknown bias '" + text + "' (expected fixed:<p> or arcsine[:<delta>])");
    }
    validate_bias(dist);
    return dist;
}

void to_json(Json& j, const CollusionChannel& channel) {
    j = Json{{"c", channel.c()}, {"theta", channel.theta()}};
}

void to_json(Json& j, const BiasDistribution& dist) {
    if (const auto* fixed = std::get_if<FixedBias>(&dist)) j = Json{{"kind", "fixed"}, {"p", fixed->p}};
    else j = Json{{"kind", "arcsine"}, {"delta", std::get<ArcsineBias>(dist).delta}};
}

void from_json(const Json& j, BiasDistribution& dist) {
    if (j.is_string()) {
        dist = parse_bias(j.get<std::string>());
        return;
    }
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "fixed") dist = FixedBias{j.at("p").get<double>()};
    else if (kind == "arcsine") dist = ArcsineBias{j.value("delta", 0.0)};
    else throw std::invalid_argument("unknown bias kind '" + kind + "'");
    validate_bias(dist);
}

void to_json(Json& j, const Code& code) {
    Json words = Json::array();
    for (std::size_t u = 0; u < code.n(); ++u) {
        std::string w;
        w.reserve(code.ell());
        for (Bit b : code.row(u)) w.push_back(b ? '1' : '0');
        words.push_back(std::move(w));
    }
    j = Json{{"n", code.n()}, {"biases", code.biases()}, {"words", std::move(words)}};
}

void to_json(Json& j, const PirateOutput& y) {
    std::string s;
    for (Bit b : y.y) s.push_back(b ? '1' : '0');
    j = Json{{"y", s}};
}

void from_json(const Json& j, PirateOutput& y) {
    y.y.clear();
    for (char ch : j.at("y").get<std::string>()) {
        if (ch != '0' && ch != '1') throw std::invalid_argument("pirate output must contain only 0 and 1");
        y.y.push_back(ch == '1');
    }
}

void to_json(Json& j, const SchemeParams& p) {
    j = Json{{"ell", p.ell},   {"eta", p.eta},   {"gamma", p.gamma},
             {"eps1", p.eps1}, {"eps2", p.eps2}, {"normalized_threshold", p.normalized_threshold},
             {"notes", p.notes}};
}

void from_json(const Json& j, SchemeParams& p) {
    p = SchemeParams{};
    j.at("ell").get_to(p.ell);
    j.at("eta").get_to(p.eta);
    read_if(j, "gamma", p.gamma);
    read_if(j, "eps1", p.eps1);
    read_if(j, "eps2", p.eps2);
    read_if(j, "normalized_threshold", p.normalized_threshold);
    read_if(j, "notes", p.notes);
}

void to_json(Json& j, const Attack& attack) { j = to_string(attack); }

void from_json(const Json& j, Attack& attack) { attack = parse_attack(j.get<std::string>()); }

void to_json(Json& j, const ExperimentConfig& c) {
    j = Json{{"n", c.n},
             {"c", c.c},
             {"attack", c.attack},
             {"bias", to_string(c.bias)},
             {"decoder", to_string(c.decoder)},
             {"mode", to_string(c.mode)},
             {"ell", c.ell},
             {"eta", c.eta},
             {"normalization", to_string(c.normalization)},
             {"trials", c.trials},
             {"seed", c.seed},
             {"reuse_code", c.reuse_code},
             {"threads", c.threads}};
    if (c.theta) j["theta"] = *c.theta;
}

void from_json(const Json& j, ExperimentConfig& c) {
    read_if(j, "n", c.n);
    read_if(j, "c", c.c);
    read_if(j, "attack", c.attack);
    if (auto it = j.find("theta"); it != j.end()) {
        if (it->is_null()) c.theta.reset();
        else c.theta = it->get<std::vector<double>>();
    }
    read_if(j, "bias", c.bias);
    if (auto it = j.find("decoder"); it != j.end()) c.decoder = parse_score_name(it->get<std::string>());
    if (auto it = j.find("mode"); it != j.end()) c.mode = parse_mode(it->get<std::string>());
    read_if(j, "ell", c.ell);
    read_if(j, "eta", c.eta);
    if (auto it = j.find("normalization"); it != j.end()) c.normalization = parse_normalization(it->get<std::string>());
    read_if(j, "trials", c.trials);
    read_if(j, "seed", c.seed);
    read_if(j, "reuse_code", c.reuse_code);
    read_if(j, "threads", c.threads);
}

void to_json(Json& j, const Interval& interval) { j = Json::array({interval.lo, interval.hi}); }

void from_json(const Json& j, Interval& interval) {
    if (!j.is_array() || j.size() != 2) throw std::invalid_argument("interval must be [lo, hi]");
    interval = {j[0].get<double>(), j[1].get<double>()};
}

void to_json(Json& j, const ErrorEstimate& e) {
    j = Json{{"trials", e.trials},
             {"fp_events", e.fp_events},
             {"miss_one_events", e.miss_one_events},
             {"miss_all_events", e.miss_all_events},
             {"mixed_tuple_events", e.mixed_tuple_events},
             {"fp_rate", e.fp_rate},
             {"fn_catch_one", e.fn_catch_one},
             {"fn_catch_all", e.fn_catch_all},
             {"fp_ci", e.fp_ci},
             {"fn_catch_one_ci", e.fn_catch_one_ci},
             {"fn_catch_all_ci", e.fn_catch_all_ci}};
}

void from_json(const Json& j, ErrorEstimate& e) {
    e = ErrorEstimate{};
    j.at("trials").get_to(e.trials);
    j.at("fp_events").get_to(e.fp_events);
    j.at("miss_one_events").get_to(e.miss_one_events);
    j.at("miss_all_events").get_to(e.miss_all_events);
    read_if(j, "mixed_tuple_events", e.mixed_tuple_events);
    j.at("fp_rate").get_to(e.fp_rate);
    j.at("fn_catch_one").get_to(e.fn_catch_one);
    j.at("fn_catch_all").get_to(e.fn_catch_all);
    j.at("fp_ci").get_to(e.fp_ci);
    j.at("fn_catch_one_ci").get_to(e.fn_catch_one_ci);
    j.at("fn_catch_all_ci").get_to(e.fn_catch_all_ci);
}

}  // namespace lltrace

lltrace::CollusionChannel nlohmann::adl_serializer<lltrace::CollusionChannel>::from_json(const json& j) {
    return lltrace::CollusionChannel(j.at("c").get<int>(), j.at("theta").get<std::vector<double>>());
}

lltrace::Code nlohmann::adl_serializer<lltrace::Code>::from_json(const json& j) {
    using namespace lltrace;
    const auto n = j.at("n").get<std::size_t>();
    auto biases = j.at("biases").get<std::vector<double>>();
    const auto& words = j.at("words");
    if (words.size() != n) throw std::invalid_argument("code: expected one word per user");
    std::vector<Bit> bits;
    bits.reserve(n * biases.size());
    for (const auto& w : words) {
        const auto s = w.get<std::string>();
        if (s.size() != biases.size()) throw std::invalid_argument("code: word length differs from bias count");
        for (char ch : s) {
            if (ch != '0' && ch != '1') throw std::invalid_argument("code: words must contain only 0 and 1");
            bits.push_back(ch == '1');
        }
    }
    return Code(n, std::move(biases), std::move(bits));
}
