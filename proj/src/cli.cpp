#include "lltrace/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "lltrace/params.hpp"
#include "lltrace/probability.hpp"

namespace lltrace {

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

Json round_significant(const Json& doc, int digits) {
    if (doc.is_number_float()) {
        const double v = doc.get<double>();
        if (!std::isfinite(v)) return doc;
        char buf[48];
        std::snprintf(buf, sizeof buf, "%.*g", digits, v);
        return std::strtod(buf, nullptr);
    }
    if (doc.is_array()) {
        Json out = Json::array();
        for (const auto& v : doc) out.push_back(round_significant(v, digits));
        return out;
    }
    if (doc.is_object()) {
        Json out = Json::object();
        for (const auto& [k, v] : doc.items()) out[k] = round_significant(v, digits);
        return out;
    }
    return doc;
}

namespace {

double checked_eps(double eps, const char* name) {
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument(std::string(name) + " must lie in (0, 1)");
    return eps;
}

std::optional<double> fixed_bias(const SimulationRequest& r) {
    if (!r.explicit_bias) return std::nullopt;
    if (const auto* f = std::get_if<FixedBias>(&r.config.bias)) return f->p;
    return std::nullopt;
}

}  // namespace

SimulationPlan plan_simulation(const SimulationRequest& request) {
    SimulationPlan plan{request.config, std::nullopt};
    ExperimentConfig& cfg = plan.config;
    if (request.explicit_params) {
        cfg.validate();
        return plan;
    }
    checked_eps(request.eps1, "eps1");
    checked_eps(request.eps2, "eps2");
    const auto channel = cfg.channel();
    const auto explicit_p = fixed_bias(request);
    if (request.explicit_bias && !explicit_p && cfg.decoder != ScoreName::interleaving_g &&
        cfg.decoder != ScoreName::oosterwijk_h) {
        throw std::invalid_argument("decoder " + to_string(cfg.decoder) +
                                    " derives its parameters at a fixed bias; pass --bias fixed:<p> or --ell/--eta");
    }
    auto set_normalization = [&](NormalizationMode fallback) {
        if (!request.explicit_normalization) cfg.normalization = fallback;
    };

    SchemeParams params;
    switch (cfg.decoder) {
        case ScoreName::llr:
        case ScoreName::emi_m: {
            const double p = explicit_p ? *explicit_p : optimal_bias(channel, Mode::simple);
            cfg.bias = FixedBias{p};
            params = simple_params(cfg.c, cfg.n, request.eps1, request.eps2, position_model(channel, p));
            if (cfg.decoder == ScoreName::emi_m) {
                params.eta = universal_threshold(cfg.n, request.eps1);
                params.normalized_threshold = true;
                params.notes.push_back("threshold applies to normalized scores");
                set_normalization(NormalizationMode::sample);
            } else {
                set_normalization(NormalizationMode::none);
            }
            break;
        }
        case ScoreName::interleaving_g:
        case ScoreName::oosterwijk_h:
            if (!request.explicit_bias) cfg.bias = ArcsineBias{0.0};
            params = universal_design(cfg.c, cfg.n, request.eps1, request.eps2);
            set_normalization(NormalizationMode::sample);
            break;
        case ScoreName::joint_llr:
            if (!explicit_p && channel.deterministic()) {
                cfg.bias = FixedBias{deterministic_balance_bias(channel)};
                params = deterministic_joint_params(cfg.c, cfg.n, request.eps1);
            } else {
                const double p = explicit_p ? *explicit_p : optimal_bias(channel, Mode::joint);
                cfg.bias = FixedBias{p};
                params = joint_params(cfg.c, cfg.n, request.eps1, request.eps2, position_model(channel, p));
            }
            set_normalization(NormalizationMode::none);
            break;
        case ScoreName::joint_interleaving: {
            const auto interleaving = build_attack(Attack{AttackKind::interleaving, 0.0}, cfg.c);
            const double p = explicit_p ? *explicit_p : optimal_bias(interleaving, Mode::joint);
            cfg.bias = FixedBias{p};
            params = joint_params(cfg.c, cfg.n, request.eps1, request.eps2, position_model(interleaving, p));
            params.notes.push_back("parameters of the interleaving channel");
            set_normalization(NormalizationMode::none);
            break;
        }
    }
    cfg.ell = params.ell;
    cfg.eta = params.eta;
    cfg.validate();
    plan.params = std::move(params);
    return plan;
}

namespace {

enum class Format { json, csv };

struct Shared {
    std::string attack = "interleaving";
    double r = -1.0;
    int c = 2;
    std::uint64_t n = 100;
    double eps1 = 0.1;
    double eps2 = 0.1;
    std::string mode = "simple";
    std::string decoder;
    std::string bias;
    std::uint64_t trials = 100;
    std::uint64_t seed = 1;
    std::string format;
    std::string out;
};

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> items;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) items.push_back(item);
    return items;
}

std::vector<Attack> parse_attack_list(const std::string& text, double r) {
    if (text == "all") return fingerprinting_attacks();
    std::vector<Attack> attacks;
    for (const auto& item : split_list(text)) attacks.push_back(parse_attack(item, r));
    if (attacks.empty()) throw std::invalid_argument("no attack given");
    return attacks;
}

Format parse_format(const std::string& text) {
    if (text == "json") return Format::json;
    if (text == "csv") return Format::csv;
    throw std::invalid_argument("unknown format '" + text + "'");
}

std::string csv_line(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t k = 0; k < cells.size(); ++k) {
        if (k) line += ',';
        line += cells[k];
    }
    return line + '\n';
}

std::string dump(const Json& doc) { return round_significant(doc).dump(2) + '\n'; }

void emit(const std::string& text, const Shared& s, std::ostream& out) {
    if (s.out.empty()) {
        out << text;
        return;
    }
    std::ofstream file(s.out, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open output file '" + s.out + "'");
    file << text;
    if (!file.flush()) throw std::runtime_error("cannot write output file '" + s.out + "'");
}

void add_common(CLI::App* sub, Shared& s) {
    sub->add_option("--c", s.c, "Coalition size")->check(CLI::PositiveNumber);
    sub->add_option("--format", s.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--out", s.out, "Write output to this file instead of stdout");
}

void add_scheme(CLI::App* sub, Shared& s) {
    sub->add_option("--r", s.r, "Noise rate for additive and dilution");
    sub->add_option("--n", s.n, "Number of users")->check(CLI::PositiveNumber);
    sub->add_option("--eps1", s.eps1, "False-positive budget");
    sub->add_option("--eps2", s.eps2, "False-negative budget");
    sub->add_option("--bias", s.bias, "fixed:<p> or arcsine[:<delta>]");
}

// ---- params ----

struct ParamsArgs {
    Shared s;
    std::string design = "theorem";
};

std::string cmd_params(const ParamsArgs& a) {
    const Attack attack = parse_attack(a.s.attack, a.s.r);
    const Mode mode = parse_mode(a.s.mode);
    const auto channel = build_attack(attack, a.s.c);
    checked_eps(a.s.eps1, "eps1");

    std::optional<double> p;
    if (!a.s.bias.empty()) {
        const auto dist = parse_bias(a.s.bias);
        const auto* f = std::get_if<FixedBias>(&dist);
        if (!f) throw std::invalid_argument("params needs a fixed bias");
        p = f->p;
    }

    SchemeParams params;
    double used_p = 0.5;
    if (a.design == "universal") {
        if (p) throw std::invalid_argument("the universal design fixes its own bias");
        params = universal_design(a.s.c, a.s.n, a.s.eps1, a.s.eps2);
    } else if (a.design == "deterministic") {
        if (mode != Mode::joint) throw std::invalid_argument("the deterministic design is a joint-mode design");
        used_p = p ? *p : deterministic_balance_bias(channel);
        params = deterministic_joint_params(a.s.c, a.s.n, a.s.eps1);
    } else {
        used_p = p ? *p : optimal_bias(channel, mode);
        const auto model = position_model(channel, used_p);
        if (a.design == "catch-all") {
            if (mode != Mode::simple) throw std::invalid_argument("the catch-all design is a simple-mode design");
            params = simple_params_catch_all(a.s.c, a.s.n, a.s.eps1, a.s.eps2, model);
        } else if (mode == Mode::simple) {
            params = simple_params(a.s.c, a.s.n, a.s.eps1, a.s.eps2, model);
        } else {
            params = joint_params(a.s.c, a.s.n, a.s.eps1, a.s.eps2, model);
        }
    }
    const double asym = asymptotic_length(attack, a.s.c, static_cast<double>(a.s.n), mode);
    const double ratio = static_cast<double>(params.ell) / asym;

    if (parse_format(a.s.format.empty() ? "json" : a.s.format) == Format::csv) {
        std::string text = csv_line({"attack", "c", "n", "mode", "design", "p", "ell", "eta", "gamma", "eps1", "eps2",
                                     "asymptotic_length", "ratio"});
        text += csv_line({to_string(attack), std::to_string(a.s.c), std::to_string(a.s.n), to_string(mode), a.design,
                          format_number(used_p), std::to_string(params.ell), format_number(params.eta),
                          format_number(params.gamma), format_number(params.eps1), format_number(params.eps2),
                          format_number(asym), format_number(ratio)});
        return text;
    }
    return dump(Json{{"attack", attack},
                     {"c", a.s.c},
                     {"n", a.s.n},
                     {"mode", to_string(mode)},
                     {"design", a.design},
                     {"p", used_p},
                     {"params", params},
                     {"asymptotic_length", asym},
                     {"ratio", ratio}});
}

// ---- capacity ----

struct CapacityArgs {
    Shared s;
    std::string modes = "both";
    int grid = 99;
};

std::string cmd_capacity(const CapacityArgs& a) {
    if (a.grid < 1) throw std::invalid_argument("grid must be positive");
    std::vector<Mode> modes;
    if (a.modes == "both") modes = {Mode::simple, Mode::joint};
    else modes = {parse_mode(a.modes)};
    const auto attacks = parse_attack_list(a.s.attack, a.s.r);
    const bool csv = parse_format(a.s.format.empty() ? "json" : a.s.format) == Format::csv;

    std::string text = csv ? csv_line({"attack", "mode", "p", "mutual_info"}) : "";
    Json entries = Json::array();
    for (const auto& attack : attacks) {
        const auto channel = build_attack(attack, a.s.c);
        for (Mode mode : modes) {
            Json curve = Json::array();
            for (int k = 1; k <= a.grid; ++k) {
                const double p = static_cast<double>(k) / (a.grid + 1);
                const double info = mutual_info(position_model(channel, p), mode);
                if (csv) text += csv_line({to_string(attack), to_string(mode), format_number(p), format_number(info)});
                else curve.push_back(Json::array({p, info}));
            }
            if (csv) continue;
            const double p_star = optimal_bias(channel, mode);
            const double info = mutual_info(position_model(channel, p_star), mode);
            entries.push_back(Json{{"attack", attack},
                                   {"mode", to_string(mode)},
                                   {"optimal_p", p_star},
                                   {"mutual_info", info},
                                   {"capacity", mode == Mode::joint ? info / a.s.c : info},
                                   {"curve", std::move(curve)}});
        }
    }
    if (csv) return text;
    return dump(Json{{"c", a.s.c}, {"grid", a.grid}, {"entries", std::move(entries)}});
}

// ---- simulate ----

struct SimulateArgs {
    Shared s;
    std::string config_path;
    std::uint64_t ell = 0;
    double eta = 0.0;
    std::string normalization;
    unsigned threads = 0;
    bool reuse_code = false;
    CLI::App* app = nullptr;
};

bool given(CLI::App* app, const char* name) { return app->count(name) > 0; }

SimulationRequest simulate_request(const SimulateArgs& a) {
    SimulationRequest req;
    ExperimentConfig& cfg = req.config;
    cfg.decoder = ScoreName::llr;
    bool decoder_set = false, mode_set = false, ell_set = false, eta_set = false;

    if (!a.config_path.empty()) {
        std::ifstream file(a.config_path);
        if (!file) throw std::invalid_argument("cannot read config file '" + a.config_path + "'");
        const Json doc = Json::parse(file);
        from_json(doc, cfg);
        decoder_set = doc.contains("decoder");
        mode_set = doc.contains("mode");
        ell_set = doc.contains("ell");
        eta_set = doc.contains("eta");
        req.explicit_bias = doc.contains("bias");
        req.explicit_normalization = doc.contains("normalization");
        req.eps1 = doc.value("eps1", req.eps1);
        req.eps2 = doc.value("eps2", req.eps2);
    }

    CLI::App* app = a.app;
    if (given(app, "--attack") || given(app, "--r")) {
        cfg.attack = parse_attack(a.s.attack, a.s.r);
        cfg.theta.reset();
    }
    if (given(app, "--c")) cfg.c = a.s.c;
    if (given(app, "--n")) cfg.n = a.s.n;
    if (given(app, "--eps1")) req.eps1 = a.s.eps1;
    if (given(app, "--eps2")) req.eps2 = a.s.eps2;
    if (given(app, "--mode")) {
        cfg.mode = parse_mode(a.s.mode);
        mode_set = true;
    }
    if (given(app, "--decoder")) {
        cfg.decoder = parse_score_name(a.s.decoder);
        decoder_set = true;
    }
    if (given(app, "--bias")) {
        cfg.bias = parse_bias(a.s.bias);
        req.explicit_bias = true;
    }
    if (given(app, "--trials")) cfg.trials = a.s.trials;
    if (given(app, "--seed")) cfg.seed = a.s.seed;
    if (given(app, "--ell")) {
        cfg.ell = a.ell;
        ell_set = true;
    }
    if (given(app, "--eta")) {
        cfg.eta = a.eta;
        eta_set = true;
    }
    if (given(app, "--normalization")) {
        cfg.normalization = parse_normalization(a.normalization);
        req.explicit_normalization = true;
    }
    if (given(app, "--threads")) cfg.threads = a.threads;
    if (given(app, "--reuse-code")) cfg.reuse_code = a.reuse_code;

    // The decoder and the mode imply each other unless both are given.
    if (decoder_set && !mode_set) cfg.mode = is_joint(cfg.decoder) ? Mode::joint : Mode::simple;
    if (mode_set && !decoder_set) cfg.decoder = cfg.mode == Mode::joint ? ScoreName::joint_llr : ScoreName::llr;
    if (ell_set != eta_set) throw std::invalid_argument("--ell and --eta must be given together");
    req.explicit_params = ell_set;
    return req;
}

std::string cmd_simulate(const SimulateArgs& a) {
    const SimulationPlan plan = plan_simulation(simulate_request(a));
    const ErrorEstimate est = estimate_errors(plan.config);
    if (parse_format(a.s.format.empty() ? "json" : a.s.format) == Format::csv) {
        std::string text = csv_line({"trials", "fp_events", "miss_one_events", "miss_all_events", "fp_rate", "fp_lo",
                                     "fp_hi", "fn_catch_one", "fn_catch_one_lo", "fn_catch_one_hi", "fn_catch_all",
                                     "fn_catch_all_lo", "fn_catch_all_hi"});
        text += csv_line({std::to_string(est.trials), std::to_string(est.fp_events),
                          std::to_string(est.miss_one_events), std::to_string(est.miss_all_events),
                          format_number(est.fp_rate), format_number(est.fp_ci.lo), format_number(est.fp_ci.hi),
                          format_number(est.fn_catch_one), format_number(est.fn_catch_one_ci.lo),
                          format_number(est.fn_catch_one_ci.hi), format_number(est.fn_catch_all),
                          format_number(est.fn_catch_all_ci.lo), format_number(est.fn_catch_all_ci.hi)});
        return text;
    }
    Json doc{{"config", plan.config}, {"estimate", est}};
    doc["params"] = plan.params ? Json(*plan.params) : Json(nullptr);
    return dump(doc);
}

// ---- histogram ----

struct HistogramArgs {
    Shared s;
    std::uint64_t ell = 10000;
    std::size_t bins = 50;
    std::string range = "-5:5";
    std::string normalization = "exact";
    unsigned threads = 0;
};

std::pair<double, double> parse_range(const std::string& text) {
    const auto colon = text.find(':', 1);
    if (colon == std::string::npos) throw std::invalid_argument("range must look like lo:hi");
    try {
        std::size_t u1 = 0, u2 = 0;
        const std::string a = text.substr(0, colon), b = text.substr(colon + 1);
        const double lo = std::stod(a, &u1), hi = std::stod(b, &u2);
        if (u1 != a.size() || u2 != b.size()) throw std::invalid_argument("");
        if (!(hi > lo)) throw std::invalid_argument("");
        return {lo, hi};
    } catch (const std::exception&) {
        throw std::invalid_argument("bad range '" + text + "' (expected lo:hi with lo < hi)");
    }
}

std::string cmd_histogram(const HistogramArgs& a) {
    const auto attacks = parse_attack_list(a.s.attack, a.s.r);
    const auto range = parse_range(a.range);
    ExperimentConfig cfg;
    cfg.n = a.s.n;
    cfg.c = a.s.c;
    cfg.decoder = parse_score_name(a.s.decoder.empty() ? "interleaving-g" : a.s.decoder);
    cfg.mode = Mode::simple;
    cfg.bias = a.s.bias.empty() ? BiasDistribution{ArcsineBias{0.0}} : parse_bias(a.s.bias);
    cfg.ell = a.ell;
    cfg.normalization = parse_normalization(a.normalization);
    cfg.trials = a.s.trials;
    cfg.seed = a.s.seed;
    cfg.threads = a.threads;

    std::vector<Histogram> hists;
    for (const auto& attack : attacks) {
        cfg.attack = attack;
        hists.push_back(score_histogram(cfg, a.bins, range));
    }

    if (parse_format(a.s.format.empty() ? "csv" : a.s.format) == Format::csv) {
        std::vector<std::string> header{"center"};
        for (const auto& attack : attacks) header.push_back(to_string(attack));
        header.push_back("reference");
        std::string text = csv_line(header);
        for (std::size_t k = 0; k < a.bins; ++k) {
            std::vector<std::string> row{format_number(hists.front().centers[k])};
            for (const auto& h : hists) row.push_back(format_number(h.density[k]));
            row.push_back(format_number(hists.front().reference[k]));
            text += csv_line(row);
        }
        return text;
    }
    Json per_attack = Json::array();
    for (std::size_t k = 0; k < attacks.size(); ++k) {
        const auto& h = hists[k];
        per_attack.push_back(Json{{"attack", attacks[k]},
                                  {"density", h.density},
                                  {"samples", h.samples},
                                  {"outside", h.outside},
                                  {"mean", h.mean},
                                  {"variance", h.variance},
                                  {"skewness", h.skewness},
                                  {"excess_kurtosis", h.excess_kurtosis}});
    }
    return dump(Json{{"config", cfg},
                     {"bins", a.bins},
                     {"lo", hists.front().lo},
                     {"hi", hists.front().hi},
                     {"centers", hists.front().centers},
                     {"reference", hists.front().reference},
                     {"attacks", std::move(per_attack)}});
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bias-based fingerprinting and group testing: parameters, capacities and simulations", "lltrace"};
    app.require_subcommand(1);

    ParamsArgs pa;
    auto* params = app.add_subcommand("params", "Code length and threshold for an attack");
    params->add_option("--attack", pa.s.attack, "Attack name, optionally name:r");
    params->add_option("--mode", pa.s.mode, "simple or joint")->check(CLI::IsMember({"simple", "joint"}));
    params->add_option("--design", pa.design, "theorem, catch-all, universal or deterministic")
        ->check(CLI::IsMember({"theorem", "catch-all", "universal", "deterministic"}));
    add_common(params, pa.s);
    add_scheme(params, pa.s);

    CapacityArgs ca;
    ca.s.attack = "all";
    auto* capacity = app.add_subcommand("capacity", "Mutual information over a bias grid and the optimal bias");
    capacity->add_option("--attack", ca.s.attack, "Comma-separated attacks, or all");
    capacity->add_option("--r", ca.s.r, "Noise rate for additive and dilution");
    capacity->add_option("--mode", ca.modes, "simple, joint or both")->check(CLI::IsMember({"simple", "joint", "both"}));
    capacity->add_option("--grid", ca.grid, "Grid points p = k/(grid+1), k = 1..grid");
    add_common(capacity, ca.s);

    SimulateArgs sa;
    sa.app = app.add_subcommand("simulate", "Monte Carlo error rates");
    auto* simulate = sa.app;
    simulate->add_option("--attack", sa.s.attack, "Attack name, optionally name:r");
    simulate->add_option("--mode", sa.s.mode, "simple or joint")->check(CLI::IsMember({"simple", "joint"}));
    simulate->add_option("--decoder", sa.s.decoder, "Score function");
    simulate->add_option("--trials", sa.s.trials, "Number of trials")->check(CLI::PositiveNumber);
    simulate->add_option("--seed", sa.s.seed, "Master seed");
    simulate->add_option("--ell", sa.ell, "Code length (with --eta)")->check(CLI::PositiveNumber);
    simulate->add_option("--eta", sa.eta, "Threshold (with --ell)");
    simulate->add_option("--normalization", sa.normalization, "none, exact or sample")
        ->check(CLI::IsMember({"none", "exact", "sample"}));
    simulate->add_option("--threads", sa.threads, "Worker threads, 0 for all cores");
    simulate->add_flag("--reuse-code", sa.reuse_code, "Use one code for every trial");
    simulate->add_option("--config", sa.config_path, "JSON experiment config; flags override it");
    add_common(simulate, sa.s);
    add_scheme(simulate, sa.s);

    HistogramArgs ha;
    ha.s.attack = "all";
    ha.s.c = 10;
    ha.s.n = 1010;
    ha.s.trials = 10;
    auto* histogram = app.add_subcommand("histogram", "Densities of normalized innocent scores per attack");
    histogram->add_option("--attack", ha.s.attack, "Comma-separated attacks, or all");
    histogram->add_option("--decoder", ha.s.decoder, "Simple score function");
    histogram->add_option("--trials", ha.s.trials, "Number of trials")->check(CLI::PositiveNumber);
    histogram->add_option("--seed", ha.s.seed, "Master seed");
    histogram->add_option("--ell", ha.ell, "Code length")->check(CLI::PositiveNumber);
    histogram->add_option("--bins", ha.bins, "Number of bins")->check(CLI::PositiveNumber);
    histogram->add_option("--range", ha.range, "Binning range lo:hi");
    histogram->add_option("--normalization", ha.normalization, "exact or sample")
        ->check(CLI::IsMember({"exact", "sample"}));
    histogram->add_option("--threads", ha.threads, "Worker threads, 0 for all cores");
    add_common(histogram, ha.s);
    add_scheme(histogram, ha.s);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (params->parsed()) emit(cmd_params(pa), pa.s, out);
        else if (capacity->parsed()) emit(cmd_capacity(ca), ca.s, out);
        else if (simulate->parsed()) emit(cmd_simulate(sa), sa.s, out);
        else emit(cmd_histogram(ha), ha.s, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

}  // namespace lltrace
