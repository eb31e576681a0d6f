#include "taxeval/tuner.hpp"

#include <algorithm>
#include <cmath>

#include "taxeval/errors.hpp"
#include "taxeval/rng.hpp"

namespace taxeval {

namespace {

double halton(std::size_t index, int base) {
    double f = 1.0, r = 0.0;
    std::size_t i = index;
    while (i > 0) {
        f /= base;
        r += f * static_cast<double>(i % static_cast<std::size_t>(base));
        i /= static_cast<std::size_t>(base);
    }
    return r;
}

constexpr int kHaltonBases[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};

double from_unit(const ParamSpec& spec, double u) {
    double v;
    if (spec.log_scale) {
        v = spec.lo * std::pow(spec.hi / spec.lo, u);
    } else {
        v = spec.lo + (spec.hi - spec.lo) * u;
    }
    if (spec.integer) v = std::round(v);
    return std::clamp(v, spec.lo, spec.hi);
}

} // namespace

ProposalStrategy default_proposal_strategy() {
    return [](std::size_t eval_index, std::span<const std::vector<double>> past_points,
              std::span<const double> past_scores, std::uint64_t seed) {
        const std::size_t dims = past_points.empty() ? 0 : past_points.front().size();

        // exploration share: the first point is always the cube centre
        if (eval_index == 0 && dims == 0) return std::vector<double>{};
        if (eval_index == 0) return std::vector<double>(dims, 0.5);

        // Halton for the first half of observed history, refinement after
        const bool explore = past_points.size() < 2 || eval_index % 2 == 1 || past_scores.empty();
        std::vector<double> point(dims);
        if (explore) {
            for (std::size_t d = 0; d < dims; ++d) {
                point[d] = halton(eval_index + 1, kHaltonBases[d % 10]);
            }
            return point;
        }

        // local Gaussian refinement around the incumbent
        std::size_t best = 0;
        for (std::size_t i = 1; i < past_scores.size(); ++i) {
            if (past_scores[i] < past_scores[best]) best = i;
        }
        RngStream rng = RngStream::substream(seed, 0x7E, eval_index);
        const double scale = 0.25 * std::pow(0.85, static_cast<double>(eval_index));
        for (std::size_t d = 0; d < dims; ++d) {
            point[d] = std::clamp(past_points[best][d] + rng.normal(0.0, scale), 0.0, 1.0);
        }
        return point;
    };
}

TuneResult tune_minimize(const std::vector<ParamSpec>& space, const TuneObjective& objective,
                         int budget, std::uint64_t seed, const ProposalStrategy& strategy) {
    if (budget < 1) throw BudgetZero();

    TuneResult result;
    std::vector<std::vector<double>> points;
    std::vector<double> scores;

    for (int eval = 0; eval < budget; ++eval) {
        std::vector<double> unit;
        if (points.empty() && eval == 0) {
            unit.assign(space.size(), 0.5);
        } else {
            unit = strategy(static_cast<std::size_t>(eval), points, scores, seed);
        }

        TuneCandidate candidate;
        for (std::size_t d = 0; d < space.size(); ++d) {
            candidate.params[space[d].name] = from_unit(space[d], unit[d]);
        }
        candidate.score = objective(candidate.params);

        points.push_back(unit);
        scores.push_back(candidate.score);
        result.history.push_back(candidate);

        // strict improvement only: ties keep the earlier proposal
        if (eval == 0 || candidate.score < result.best.score) result.best = candidate;
    }
    return result;
}

} // namespace taxeval
