#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lltrace/serialize.hpp"
#include "lltrace/sim.hpp"

namespace lltrace {

/// Runs one command line (program name excluded). Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// %.12g, the precision of every number the CLI prints.
std::string format_number(double v);

/// Rounds every floating-point value in the document to `digits` significant digits.
Json round_significant(const Json& doc, int digits = 12);

/// What the simulate command runs when (ell, eta) are not given explicitly.
struct SimulationRequest {
    ExperimentConfig config;
    double eps1 = 0.1;
    double eps2 = 0.1;
    /// config.ell and config.eta were supplied by the caller.
    bool explicit_params = false;
    /// config.bias was supplied by the caller.
    bool explicit_bias = false;
    /// config.normalization was supplied by the caller.
    bool explicit_normalization = false;
};

struct SimulationPlan {
    ExperimentConfig config;
    /// Derived parameters; empty when the caller gave (ell, eta).
    std::optional<SchemeParams> params;
};

/// Fills in bias, ell, eta and normalization for the decoder:
///   llr           optimal fixed bias, simple_params
///   emi-m         ell as for llr, sample normalization, universal threshold
///   interleaving-g, oosterwijk-h  arcsine bias, universal_design, sample normalization
///   joint-llr     deterministic channels: balance bias and deterministic_joint_params;
///                 otherwise optimal joint bias and joint_params
///   joint-interleaving  joint_params of the interleaving channel at its optimal joint bias
SimulationPlan plan_simulation(const SimulationRequest& request);

}  // namespace lltrace
