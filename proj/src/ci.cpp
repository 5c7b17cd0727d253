#include "lrsm/ci.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lrsm {

namespace {

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Per-observation quasi log-likelihood term on a raw 1-based sample.
double ell_term(const std::vector<count_t>& x, index_t t, const GcinarParams& th) {
    double xi = th.beta0;
    const int p = th.order();
    for (int i = 1; i <= p; ++i) xi += th.betas[static_cast<std::size_t>(i - 1)] *
                                      static_cast<double>(x[static_cast<std::size_t>(t - i - 1)]);
    const double xt = static_cast<double>(x[static_cast<std::size_t>(t - 1)]);
    return xt * std::log(xi) - xi;
}

GcinarParams pad_params(const GcinarParams& th, int p) {
    GcinarParams out = th;
    out.betas.resize(static_cast<std::size_t>(p), 0.0);
    return out;
}

// Conditional-Poisson sample path of the fitted model: Poisson thinning plus
// Poisson innovation collapse to one Poisson(xi_t) draw per step.
std::vector<count_t> pinar_sample(const GcinarParams& th, index_t len, int burn_in, Rng& rng) {
    const int p = th.order();
    const index_t total = len + burn_in;
    std::vector<count_t> x(static_cast<std::size_t>(total), 0);
    for (index_t t = 0; t < total; ++t) {
        double xi = th.beta0;
        for (int i = 1; i <= p; ++i)
            if (t - i >= 0) xi += th.betas[static_cast<std::size_t>(i - 1)] *
                                  static_cast<double>(x[static_cast<std::size_t>(t - i)]);
        x[static_cast<std::size_t>(t)] = rng.poisson(xi);
    }
    return std::vector<count_t>(x.end() - len, x.end());
}

struct PercentilePair {
    index_t lo, hi;
};

// Nearest-rank percentiles: the ceil(q*B)-th order statistic.
PercentilePair percentiles(std::vector<index_t>& taus, double alpha) {
    std::sort(taus.begin(), taus.end());
    const auto B = static_cast<double>(taus.size());
    auto rank = [&](double q) {
        auto r = static_cast<std::size_t>(std::ceil(q * B));
        r = std::min(std::max<std::size_t>(r, 1), taus.size());
        return taus[r - 1];
    };
    return PercentilePair{rank(alpha / 2.0), rank(1.0 - alpha / 2.0)};
}

void check_cp_index(const LrsmEstimate& est, index_t j) {
    if (j < 1 || j > est.m_hat) throw InputError("ci: change-point index out of range");
}

// Segment boundaries around change-point j: tau_{j-1}, tau_j, tau_{j+1} with
// the conventions tau_0 = 0 and tau_{m+1} = n.
struct Neighbours {
    index_t lo, tau, hi;
};

Neighbours neighbours(const LrsmEstimate& est, index_t j) {
    const auto uj = static_cast<std::size_t>(j);
    Neighbours nb;
    nb.lo = (j == 1) ? 0 : est.taus.taus[uj - 2];
    nb.tau = est.taus.taus[uj - 1];
    nb.hi = (j == est.m_hat) ? est.n : est.taus.taus[uj];
    return nb;
}

CiResult percentile_ci(const LrsmEstimate& est, index_t j, double alpha,
                       std::vector<index_t>& taus, CiMethod method, index_t half, index_t B) {
    PercentilePair pc = percentiles(taus, alpha);
    const index_t tau = est.taus.taus[static_cast<std::size_t>(j - 1)];
    CiResult res;
    res.method = method;
    res.alpha = alpha;
    res.half = half;
    res.draws = B;
    res.lower = std::clamp<index_t>(tau - pc.hi, 1, est.n);
    res.upper = std::clamp<index_t>(tau - pc.lo, 1, est.n);
    return res;
}

}  // namespace

double yao_cdf(double a) {
    if (!(a > 0.0)) throw InputError("yao_cdf: a must be positive");
    if (a >= 500.0) return 1.0;  // tail terms below 1e-26 here
    const double sa = std::sqrt(a);
    return 1.0 + std::sqrt(a / (2.0 * M_PI)) * std::exp(-a / 8.0) +
           1.5 * std::exp(a) * norm_cdf(-1.5 * sa) - 0.5 * (a + 5.0) * norm_cdf(-0.5 * sa);
}

double yao_quantile(double q) {
    if (!(q > 0.5 && q < 1.0)) throw InputError("yao_quantile: q must lie in (0.5, 1)");
    double lo = 1e-12, hi = 1.0;
    while (yao_cdf(hi) < q) {
        hi *= 2.0;
        if (hi > 1e6) throw NumericError("yao_quantile: bracket failed");
    }
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        (yao_cdf(mid) < q ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

CiResult ci_approx(const CountSeries& series, const LrsmEstimate& est, index_t j, double alpha) {
    check_cp_index(est, j);
    if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("ci_approx: alpha out of range");
    if (est.taus.radii.empty()) throw InputError("ci_approx: estimate lacks detection radii");
    const auto uj = static_cast<std::size_t>(j);
    const index_t tau = est.taus.taus[uj - 1];
    const index_t h = est.taus.radii[uj - 1];
    const int p = std::max(est.orders[uj - 1], est.orders[uj]);

    // Both parameter vectors interpreted at the common order max(p_j, p_{j+1}).
    GcinarParams th_l = pad_params(est.params[uj - 1], p);
    GcinarParams th_r = pad_params(est.params[uj], p);
    std::vector<double> d(static_cast<std::size_t>(p) + 1);
    d[0] = th_l.beta0 - th_r.beta0;
    for (int i = 0; i < p; ++i)
        d[static_cast<std::size_t>(i) + 1] =
            th_l.betas[static_cast<std::size_t>(i)] - th_r.betas[static_cast<std::size_t>(i)];

    index_t k = std::max<index_t>(tau - 2 * h, 0);
    index_t len = std::min<index_t>(4 * h, series.n() - k);
    SandwichVariance sv = sandwich(series, Window{k, len}, th_r);

    double dJd = 0.0, dId = 0.0;
    for (int r = 0; r <= p; ++r)
        for (int c = 0; c <= p; ++c) {
            const double w = d[static_cast<std::size_t>(r)] * d[static_cast<std::size_t>(c)];
            dJd += w * sv.J[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
            dId += w * sv.I[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
        }
    if (!(dJd > 0.0)) throw NumericError("ci_approx: degenerate drift, no detectable change");

    const double delta_hat = dId / (dJd * dJd);
    const double f = yao_quantile(1.0 - alpha / 2.0);
    const auto half_width = static_cast<index_t>(std::floor(delta_hat * f)) + 1;

    CiResult res;
    res.method = CiMethod::Approx;
    res.alpha = alpha;
    res.delta_hat = delta_hat;
    res.lower = std::max<index_t>(tau - half_width, 1);
    res.upper = std::min<index_t>(tau + half_width, est.n);
    return res;
}

static BootstrapWalk walk_impl(const std::vector<count_t>& x, index_t half,
                               const GcinarParams& left, const GcinarParams& right) {
    const int pmax = std::max(left.order(), right.order());
    BootstrapWalk walk;
    walk.half = half;
    walk.w.assign(static_cast<std::size_t>(2 * half) + 1, kNan);
    auto w_at = [&](index_t tau) -> double& { return walk.w[static_cast<std::size_t>(tau + half)]; };

    // Marginal term at 1-based position t of the joined sample; needs pmax lags.
    auto diff = [&](index_t t) -> double {
        if (t <= pmax) return kNan;
        return ell_term(x, t, left) - ell_term(x, t, right);
    };

    w_at(0) = 0.0;
    for (index_t tau = 1; tau <= half; ++tau) w_at(tau) = w_at(tau - 1) + diff(half + 1 + tau);
    for (index_t tau = -1; tau >= -half; --tau) w_at(tau) = w_at(tau + 1) - diff(half + 1 + tau);

    // Restricted argmax: skip offsets landing in the first pmax positions of
    // either half; ties resolve toward 0, then to the negative side.
    double best = -std::numeric_limits<double>::infinity();
    walk.tau_tilde = 0;
    auto consider = [&](index_t tau) {
        if (tau > 0 && tau <= pmax) return;
        if (tau < 0 && half + 1 + tau <= pmax) return;
        const double v = w_at(tau);
        if (std::isfinite(v) && v > best) {
            best = v;
            walk.tau_tilde = tau;
        }
    };
    consider(0);
    for (index_t d = 1; d <= half; ++d) {
        consider(-d);
        consider(d);
    }
    return walk;
}

BootstrapWalk bootstrap_walk(const std::vector<count_t>& joined, index_t half,
                             const GcinarParams& left, const GcinarParams& right) {
    if (static_cast<index_t>(joined.size()) != 2 * half + 1 || half < 1)
        throw InputError("bootstrap_walk: joined sample must have length 2*half+1");
    left.validate();
    right.validate();
    return walk_impl(joined, half, left, right);
}

CiResult pba_ci(const CountSeries& series, const LrsmEstimate& est, index_t j, double alpha,
                index_t n_p, index_t B, std::uint64_t seed, Exec exec) {
    check_cp_index(est, j);
    if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("pba_ci: alpha out of range");
    if (B < 1) throw InputError("pba_ci: B < 1");
    if (n_p == 0) n_p = series.n() / 2;
    if (n_p < 1) throw InputError("pba_ci: n_p < 1");
    const auto uj = static_cast<std::size_t>(j);
    const GcinarParams& th_l = est.params[uj - 1];
    const GcinarParams& th_r = est.params[uj];

    std::vector<index_t> taus(static_cast<std::size_t>(B), 0);
    const bool par = exec == Exec::Parallel;
#pragma omp parallel for schedule(dynamic) if (par)
    for (std::int64_t b = 0; b < static_cast<std::int64_t>(B); ++b) {
        Rng rng_l(substream(seed, static_cast<std::uint64_t>(b), 0));
        Rng rng_r(substream(seed, static_cast<std::uint64_t>(b), 1));
        std::vector<count_t> joined = pinar_sample(th_l, n_p + 1, 500, rng_l);
        std::vector<count_t> rightx = pinar_sample(th_r, n_p, 500, rng_r);
        joined.insert(joined.end(), rightx.begin(), rightx.end());
        taus[static_cast<std::size_t>(b)] = walk_impl(joined, n_p, th_l, th_r).tau_tilde;
    }
    return percentile_ci(est, j, alpha, taus, CiMethod::PBA, n_p, B);
}

std::vector<count_t> bba_replicate(const CountSeries& series, index_t seg_lo, index_t tau,
                                   index_t seg_hi, index_t n_b, Rng& rng) {
    const index_t left_len = tau - seg_lo;
    const index_t right_len = seg_hi - tau;
    if (n_b < 1 || n_b >= std::min(left_len, right_len))
        throw InfeasibleError("bba: n_b too large for adjacent segments");

    const index_t ls = static_cast<index_t>(rng.next_below(static_cast<std::uint64_t>(left_len - n_b)));
    const index_t rs = static_cast<index_t>(rng.next_below(static_cast<std::uint64_t>(right_len - n_b + 1)));
    std::vector<count_t> x;
    x.reserve(static_cast<std::size_t>(2 * n_b) + 1);
    for (index_t t = 0; t < n_b + 1; ++t) x.push_back(series.at(seg_lo + 1 + ls + t));
    for (index_t t = 0; t < n_b; ++t) x.push_back(series.at(tau + 1 + rs + t));
    return x;
}

CiResult bba_ci(const CountSeries& series, const LrsmEstimate& est, index_t j, double alpha,
                index_t n_b, index_t B, std::uint64_t seed, Exec exec) {
    check_cp_index(est, j);
    if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("bba_ci: alpha out of range");
    if (B < 1) throw InputError("bba_ci: B < 1");
    const auto uj = static_cast<std::size_t>(j);
    Neighbours nb = neighbours(est, j);
    if (n_b < 1 || n_b >= std::min(nb.tau - nb.lo, nb.hi - nb.tau))
        throw InfeasibleError("bba_ci: n_b too large for adjacent segments");
    const GcinarParams& th_l = est.params[uj - 1];
    const GcinarParams& th_r = est.params[uj];

    std::vector<index_t> taus(static_cast<std::size_t>(B), 0);
    const bool par = exec == Exec::Parallel;
#pragma omp parallel for schedule(dynamic) if (par)
    for (std::int64_t b = 0; b < static_cast<std::int64_t>(B); ++b) {
        Rng rng(substream(seed, static_cast<std::uint64_t>(b), 0));
        std::vector<count_t> joined = bba_replicate(series, nb.lo, nb.tau, nb.hi, n_b, rng);
        taus[static_cast<std::size_t>(b)] = walk_impl(joined, n_b, th_l, th_r).tau_tilde;
    }
    return percentile_ci(est, j, alpha, taus, CiMethod::BBA, n_b, B);
}

AdaptiveBandwidth adaptive_bandwidth(const CountSeries& series, const LrsmEstimate& est, index_t j,
                                     double alpha, index_t B, std::uint64_t seed, Exec exec) {
    check_cp_index(est, j);
    Neighbours nb = neighbours(est, j);
    const index_t cap = std::min(nb.tau - nb.lo, nb.hi - nb.tau) - 1;
    if (cap < 1) throw InfeasibleError("adaptive_bandwidth: adjacent segment too short");

    CiResult pilot;
    try {
        pilot = ci_approx(series, est, j, alpha);
    } catch (const NumericError&) {
        pilot = pba_ci(series, est, j, alpha, 0, B, substream(seed, 0, 2), exec);
    }
    const index_t l = std::max<index_t>(pilot.upper - pilot.lower, 1);

    AdaptiveBandwidth out;
    out.n_b = std::min(2 * l, cap);
    for (std::uint64_t round = 1;; ++round) {
        const index_t band = static_cast<index_t>(std::ceil((1.0 - alpha) * static_cast<double>(out.n_b)));
        index_t outer = 0;
        const bool par = exec == Exec::Parallel;
        const auto uj = static_cast<std::size_t>(j);
#pragma omp parallel for schedule(dynamic) reduction(+ : outer) if (par)
        for (std::int64_t b = 0; b < static_cast<std::int64_t>(B); ++b) {
            Rng rng(substream(seed, static_cast<std::uint64_t>(b), round));
            std::vector<count_t> joined = bba_replicate(series, nb.lo, nb.tau, nb.hi, out.n_b, rng);
            index_t tt = walk_impl(joined, out.n_b, est.params[uj - 1], est.params[uj]).tau_tilde;
            if (tt <= -band || tt >= band) ++outer;
        }
        out.outer_frac = static_cast<double>(outer) / static_cast<double>(B);
        if (out.outer_frac <= alpha / 2.0) break;
        if (out.n_b >= cap) {
            out.capped = true;
            break;
        }
        out.n_b = std::min(out.n_b + l, cap);
    }
    return out;
}

std::vector<CiResult> simultaneous_ci(const CountSeries& series, const LrsmEstimate& est,
                                      CiMethod method, const CiOptions& opt) {
    if (est.m_hat < 1) throw InputError("simultaneous_ci: no change-points in estimate");
    const double per_alpha =
        1.0 - std::pow(1.0 - opt.alpha, 1.0 / static_cast<double>(est.m_hat));
    std::vector<CiResult> out;
    for (index_t j = 1; j <= est.m_hat; ++j) {
        const std::uint64_t cseed = substream(opt.seed, static_cast<std::uint64_t>(j), 17);
        switch (method) {
            case CiMethod::Approx:
                out.push_back(ci_approx(series, est, j, per_alpha));
                break;
            case CiMethod::PBA:
                out.push_back(pba_ci(series, est, j, per_alpha, opt.n_p, opt.B, cseed, opt.exec));
                break;
            case CiMethod::BBA: {
                index_t nb = opt.n_b;
                if (nb == 0)
                    nb = adaptive_bandwidth(series, est, j, per_alpha, opt.B, cseed, opt.exec).n_b;
                out.push_back(bba_ci(series, est, j, per_alpha, nb, opt.B, cseed, opt.exec));
                break;
            }
        }
    }
    return out;
}

}  // namespace lrsm
