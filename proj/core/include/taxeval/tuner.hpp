#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace taxeval {

struct ParamSpec {
    std::string name;
    double lo = 0.0;
    double hi = 1.0;
    bool log_scale = false;
    bool integer = false;
};

struct TuneCandidate {
    std::map<std::string, double> params;
    double score = 0.0; // CV MAE; lower is better
};

struct TuneResult {
    TuneCandidate best;
    std::vector<TuneCandidate> history; // proposal order
};

/// Scores one candidate (cross-validated MAE on log price in our use).
using TuneObjective = std::function<double(const std::map<std::string, double>&)>;

/// Proposes the next point in the unit cube given the evaluation history.
using ProposalStrategy = std::function<std::vector<double>(
    std::size_t eval_index, std::span<const std::vector<double>> past_points,
    std::span<const double> past_scores, std::uint64_t seed)>;

/// Default strategy: Halton quasi-random exploration for the first half of
/// the budget, then Gaussian perturbations around the incumbent with a
/// shrinking scale.
ProposalStrategy default_proposal_strategy();

/// Budgeted sequential minimization over the declared ranges. Deterministic
/// given the seed; ties in score keep the earlier-proposed candidate.
/// Throws BudgetZero when budget < 1.
TuneResult tune_minimize(const std::vector<ParamSpec>& space, const TuneObjective& objective,
                         int budget, std::uint64_t seed,
                         const ProposalStrategy& strategy = default_proposal_strategy());

} // namespace taxeval
