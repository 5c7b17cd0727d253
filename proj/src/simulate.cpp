#include "lrsm/simulate.hpp"

#include <cmath>
#include <cstddef>

namespace lrsm {

void SegmentSpec::validate() const {
    params.validate();
    if (thinning == Thinning::Binomial) {
        for (double b : params.betas)
            if (b > 1.0) throw InputError("SegmentSpec: binomial thinning needs beta <= 1");
    }
}

void McpSpec::validate() const {
    if (segments.empty()) throw InputError("McpSpec: no segments");
    if (segments.size() != taus.taus.size() + 1)
        throw InputError("McpSpec: need |segments| = |taus| + 1");
    if (n < 1) throw InputError("McpSpec: n < 1");
    taus.validate(n);
    for (const auto& s : segments) s.validate();
}

count_t thin(Thinning family, double beta, count_t x, Rng& rng) {
    if (x < 0) throw InputError("thin: negative count");
    switch (family) {
        case Thinning::Binomial: {
            if (beta < 0.0 || beta > 1.0) throw InputError("thin: binomial needs beta in [0,1]");
            if (beta == 1.0) return x;
            count_t s = 0;
            for (count_t i = 0; i < x; ++i) s += rng.bernoulli(beta) ? 1 : 0;
            return s;
        }
        case Thinning::NegativeBinomial: {
            if (beta < 0.0) throw InputError("thin: negative beta");
            count_t s = 0;
            for (count_t i = 0; i < x; ++i) s += rng.geometric_mean(beta);
            return s;
        }
        case Thinning::Poisson:
            if (beta < 0.0) throw InputError("thin: negative beta");
            // sum of x iid Poisson(beta) == Poisson(beta*x) by additivity
            return rng.poisson(beta * static_cast<double>(x));
    }
    return 0;
}

namespace {

count_t draw_innovation(const SegmentSpec& seg, Rng& rng) {
    double mean = seg.params.beta0;
    return seg.innovation == Innovation::Poisson ? rng.poisson(mean) : rng.geometric_mean(mean);
}

// One recursion step; lag(i) must return X_{t-i} for i = 1..p.
template <typename LagFn>
count_t step(const SegmentSpec& seg, LagFn&& lag, Rng& rng) {
    count_t x = draw_innovation(seg, rng);
    const auto& betas = seg.params.betas;
    for (std::size_t i = 0; i < betas.size(); ++i)
        x += thin(seg.thinning, betas[i], lag(static_cast<index_t>(i) + 1), rng);
    return x;
}

}  // namespace

CountSeries simulate_mcp(const McpSpec& spec, index_t burn_in, std::uint64_t seed) {
    spec.validate();
    if (burn_in < 0) throw InputError("simulate_mcp: negative burn_in");

    // Warm-up under segment 1's model from an all-zero initial state.
    std::vector<count_t> warm(static_cast<std::size_t>(burn_in), 0);
    {
        Rng rng(substream(seed, 0));
        for (index_t t = 0; t < burn_in; ++t) {
            auto lag = [&](index_t i) -> count_t {
                index_t pos = t - i;
                return pos >= 0 ? warm[static_cast<std::size_t>(pos)] : 0;
            };
            warm[static_cast<std::size_t>(t)] = step(spec.segments.front(), lag, rng);
        }
    }

    std::vector<count_t> out(static_cast<std::size_t>(spec.n), 0);
    auto lag_at = [&](index_t pos) -> count_t {  // pos is a 1-based series position
        if (pos >= 1) return out[static_cast<std::size_t>(pos - 1)];
        index_t w = burn_in + pos - 1;  // pos <= 0 reaches into the warm-up tail
        return w >= 0 ? warm[static_cast<std::size_t>(w)] : 0;
    };

    index_t seg_start = 1;
    for (std::size_t j = 0; j < spec.segments.size(); ++j) {
        index_t seg_end = j < spec.taus.taus.size() ? spec.taus.taus[j] : spec.n;
        Rng rng(substream(seed, j + 1));
        for (index_t t = seg_start; t <= seg_end; ++t) {
            auto lag = [&](index_t i) { return lag_at(t - i); };
            out[static_cast<std::size_t>(t - 1)] = step(spec.segments[j], lag, rng);
        }
        seg_start = seg_end + 1;
    }
    return CountSeries(std::move(out));
}

namespace {

SegmentSpec make_segment(double beta0, std::vector<double> betas, Thinning th, Innovation inn) {
    SegmentSpec s;
    s.params.beta0 = beta0;
    s.params.betas = std::move(betas);
    s.thinning = th;
    s.innovation = inn;
    return s;
}

// Shared segment table for the B (binomial thinning, Poisson innovations) and
// C (negative-binomial thinning, geometric innovations) model families; model
// k uses segments 1..k+1. Innovation means coincide across the families.
const std::vector<std::pair<double, std::vector<double>>> kBcSegments = {
    {0.5, {0.5}},
    {1.0, {0.249, 0.254, 0.297}},
    {0.5, {0.4}},
    {2.0, {0.014, 0.041, 0.29, 0.454}},
    {0.5, {0.332, 0.268}},
    {4.0, {0.2}},
    {3.0, {0.109, 0.306, 0.305}},
    {0.5, {0.3}},
    {1.0, {0.202, 0.127, 0.179, 0.392}},
    {2.0, {0.3}},
};

const std::vector<std::vector<double>> kBcFractions = {
    {0.5},
    {0.3, 0.6},
    {0.2, 0.5, 0.8},
    {0.2, 0.4, 0.6, 0.8},
    {0.1, 0.3, 0.6, 0.7, 0.9},
    {0.1, 0.2, 0.3, 0.5, 0.8, 0.9},
    {0.1, 0.2, 0.3, 0.4, 0.5, 0.8, 0.9},
    {0.1, 0.2, 0.3, 0.4, 0.5, 0.7, 0.8, 0.9},
    {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9},
};

ChangePointSet taus_from_fractions(const std::vector<double>& fracs, index_t n) {
    ChangePointSet cps;
    for (double f : fracs) cps.taus.push_back(static_cast<index_t>(std::floor(f * static_cast<double>(n))));
    return cps;
}

}  // namespace

McpSpec builtin_model(const std::string& name, index_t n) {
    McpSpec spec;
    spec.n = n;
    if (name == "A1") {
        // Three-segment reference model. Its middle segment differs from the
        // B-family table in the first coefficient (0.126 vs 0.249); both
        // variants ship, see README.
        spec.segments = {
            make_segment(0.5, {0.5}, Thinning::Binomial, Innovation::Poisson),
            make_segment(1.0, {0.126, 0.254, 0.297}, Thinning::Binomial, Innovation::Poisson),
            make_segment(2.0, {0.4}, Thinning::Binomial, Innovation::Poisson),
        };
        spec.taus = taus_from_fractions({0.3, 0.6}, n);
    } else if ((name.size() == 2) && (name[0] == 'B' || name[0] == 'C') && name[1] >= '1' &&
               name[1] <= '9') {
        bool is_b = name[0] == 'B';
        int k = name[1] - '0';
        for (int j = 0; j <= k; ++j) {
            const auto& [mean, betas] = kBcSegments[static_cast<std::size_t>(j)];
            spec.segments.push_back(make_segment(
                mean, betas, is_b ? Thinning::Binomial : Thinning::NegativeBinomial,
                is_b ? Innovation::Poisson : Innovation::Geometric));
        }
        spec.taus = taus_from_fractions(kBcFractions[static_cast<std::size_t>(k - 1)], n);
    } else {
        std::string names;
        for (const auto& m : builtin_model_names()) names += (names.empty() ? "" : ", ") + m;
        throw InputError("unknown model '" + name + "'; valid models: " + names);
    }
    spec.validate();
    return spec;
}

std::vector<std::string> builtin_model_names() {
    std::vector<std::string> names = {"A1"};
    for (char fam : {'B', 'C'})
        for (int k = 1; k <= 9; ++k) names.push_back(std::string(1, fam) + std::to_string(k));
    return names;
}

}  // namespace lrsm
