#pragma once

#include <string>

#include <json.hpp>

#include "lltrace/channels.hpp"
#include "lltrace/model.hpp"
#include "lltrace/sim.hpp"

namespace lltrace {

using Json = nlohmann::json;

/// "fixed:<p>" or "arcsine:<delta>"; a bare "arcsine" means delta = 0.
std::string to_string(const BiasDistribution& dist);
BiasDistribution parse_bias(const std::string& text);

void to_json(Json& j, const CollusionChannel& channel);

// Biases accept either the string form or {"kind": ..., "p" | "delta": ...}.
void to_json(Json& j, const BiasDistribution& dist);
void from_json(const Json& j, BiasDistribution& dist);

/// Code words are stored as one "0101..." string per user.
void to_json(Json& j, const Code& code);

void to_json(Json& j, const PirateOutput& y);
void from_json(const Json& j, PirateOutput& y);

void to_json(Json& j, const SchemeParams& params);
void from_json(const Json& j, SchemeParams& params);

void to_json(Json& j, const Attack& attack);
void from_json(const Json& j, Attack& attack);

/// Missing keys keep the value already in config, so a partial file layers over defaults.
void to_json(Json& j, const ExperimentConfig& config);
void from_json(const Json& j, ExperimentConfig& config);

void to_json(Json& j, const Interval& interval);
void from_json(const Json& j, Interval& interval);

void to_json(Json& j, const ErrorEstimate& estimate);
void from_json(const Json& j, ErrorEstimate& estimate);

}  // namespace lltrace

// Channels and codes have no empty state, so they deserialize by value.
namespace nlohmann {

template <>
struct adl_serializer<lltrace::CollusionChannel> {
    static lltrace::CollusionChannel from_json(const json& j);
    static void to_json(json& j, const lltrace::CollusionChannel& channel) { lltrace::to_json(j, channel); }
};

template <>
struct adl_serializer<lltrace::Code> {
    static lltrace::Code from_json(const json& j);
    static void to_json(json& j, const lltrace::Code& code) { lltrace::to_json(j, code); }
};

}  // namespace nlohmann
