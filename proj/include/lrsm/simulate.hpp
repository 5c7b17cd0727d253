#pragma once

#include <string>
#include <vector>

#include "lrsm/rng.hpp"
#include "lrsm/series.hpp"

namespace lrsm {

enum class Thinning { Binomial, NegativeBinomial, Poisson };
enum class Innovation { Poisson, Geometric };

// Generative description of one stationary segment:
//   X_t = sum_k thin(beta_k, X_{t-k}) + Z_t,
// thinning counts have mean beta_k; Z_t has mean beta0 (Geometric is
// parameterized by its mean, success prob 1/(1+mean)).
struct SegmentSpec {
    GcinarParams params;
    Thinning thinning = Thinning::Binomial;
    Innovation innovation = Innovation::Poisson;

    void validate() const;
};

struct McpSpec {
    std::vector<SegmentSpec> segments;
    ChangePointSet taus;
    index_t n = 0;

    int m() const { return static_cast<int>(taus.size()); }
    void validate() const;
};

// beta-thinning of x: sum of x i.i.d. counting variables with mean beta
// (Bernoulli / Geometric / Poisson per family). Binomial result <= x.
count_t thin(Thinning family, double beta, count_t x, Rng& rng);

// Length-n MCP-GCINAR path. Segment 1 starts from a discarded burn-in run
// (all-zero initial state); segment j+1's first lags are the observed tail of
// segment j. Deterministic given the seed.
CountSeries simulate_mcp(const McpSpec& spec, index_t burn_in, std::uint64_t seed);

// Built-in model catalog: A1, B1..B9, C1..C9 with change points at the listed
// fractions of n.
McpSpec builtin_model(const std::string& name, index_t n);
std::vector<std::string> builtin_model_names();

}  // namespace lrsm
