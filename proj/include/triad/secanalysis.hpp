#pragma once

#include <cstdint>

#include "triad/tensor.hpp"

namespace triad {
namespace secanalysis {

struct PriorInterval {
    double low = 0.0;
    double high = 0.0;

    void validate() const {
        if (!(low <= high)) throw ConfigError("prior interval: low > high");
    }
    double length() const { return high - low; }
};

/// Range of a zero-sharing mask alpha_i = r_i - r_{i+1} when r is drawn from
/// [low, high]: [low - high, high - low].
PriorInterval alpha_prior_from_prg(const PriorInterval& prg_range);

/// Masked values x0 = x + alpha inside [r_x + l_a, l_x + r_a] admit no
/// narrowing of the prior on x. Empty (low > high) when L_a < L_x.
PriorInterval safe_interval(const PriorInterval& x_prior, const PriorInterval& alpha_prior);

/// Closed form max(0, 1 - 2/(theta+1)) with theta = L_a / L_x. Assumes the
/// masked value uniform over its full range. Throws DomainError when L_x = 0.
double non_narrowing_probability(const PriorInterval& x_prior, const PriorInterval& alpha_prior);

double theta(const PriorInterval& x_prior, const PriorInterval& alpha_prior);

struct MonteCarloResult {
    double fraction = 0.0;
    double ci_low = 0.0; // Wilson 95%
    double ci_high = 0.0;
    std::uint64_t trials = 0;
};

enum class SamplingModel {
    /// x0 drawn uniform over [l_x + l_a, r_x + r_a]: validates the closed form
    /// on its own terms.
    uniform_masked_value,
    /// x and alpha drawn uniform and summed; the sum is triangular, so the
    /// fraction exceeds the closed form for finite theta.
    joint_draw,
};

/// Fraction of trials where [l_x, r_x] ∩ [x0 - r_a, x0 - l_a] equals the full
/// prior, i.e. the adversary learns nothing.
MonteCarloResult monte_carlo_narrowing(const PriorInterval& x_prior,
                                       const PriorInterval& alpha_prior, std::uint64_t trials,
                                       SamplingModel model, std::uint64_t seed = 1);

} // namespace secanalysis
} // namespace triad
