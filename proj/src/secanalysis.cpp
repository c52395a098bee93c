#include "triad/secanalysis.hpp"

#include <cmath>

namespace triad {
namespace secanalysis {

PriorInterval alpha_prior_from_prg(const PriorInterval& prg_range) {
    prg_range.validate();
    return {prg_range.low - prg_range.high, prg_range.high - prg_range.low};
}

PriorInterval safe_interval(const PriorInterval& x_prior, const PriorInterval& alpha_prior) {
    x_prior.validate();
    alpha_prior.validate();
    return {x_prior.high + alpha_prior.low, x_prior.low + alpha_prior.high};
}

double theta(const PriorInterval& x_prior, const PriorInterval& alpha_prior) {
    x_prior.validate();
    alpha_prior.validate();
    if (x_prior.length() == 0.0) throw DomainError("degenerate prior: L_x = 0");
    return alpha_prior.length() / x_prior.length();
}

double non_narrowing_probability(const PriorInterval& x_prior, const PriorInterval& alpha_prior) {
    const double th = theta(x_prior, alpha_prior);
    const double pr = 1.0 - 2.0 / (th + 1.0);
    return pr < 0.0 ? 0.0 : pr;
}

namespace {

struct Wilson {
    double low, high;
};

Wilson wilson95(double p, double n) {
    const double z = 1.959963984540054;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2 * n)) / denom;
    const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom;
    return {center - half, center + half};
}

} // namespace

MonteCarloResult monte_carlo_narrowing(const PriorInterval& x_prior,
                                       const PriorInterval& alpha_prior, std::uint64_t trials,
                                       SamplingModel model, std::uint64_t seed) {
    x_prior.validate();
    alpha_prior.validate();
    if (trials == 0) throw ConfigError("trials must be positive");
    PrgSeed rng{seed, 0};
    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < trials; ++i) {
        double x0;
        if (model == SamplingModel::uniform_masked_value) {
            const double lo = x_prior.low + alpha_prior.low;
            const double hi = x_prior.high + alpha_prior.high;
            x0 = lo + rng.next_unit() * (hi - lo);
        } else {
            const double x = x_prior.low + rng.next_unit() * x_prior.length();
            const double a = alpha_prior.low + rng.next_unit() * alpha_prior.length();
            x0 = x + a;
        }
        // the adversary's update is [l_x, r_x] ∩ [x0 - r_a, x0 - l_a];
        // no narrowing iff that intersection is the whole prior
        const bool no_narrow =
            (x0 - alpha_prior.high <= x_prior.low) && (x0 - alpha_prior.low >= x_prior.high);
        if (no_narrow) ++hits;
    }
    const double p = static_cast<double>(hits) / static_cast<double>(trials);
    const Wilson w = wilson95(p, static_cast<double>(trials));
    return {p, w.low, w.high, trials};
}

} // namespace secanalysis
} // namespace triad
