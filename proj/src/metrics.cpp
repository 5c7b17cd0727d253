#include "lrsm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lrsm {

double tpr(const std::vector<index_t>& mhats, index_t m0) {
    if (mhats.empty()) throw InputError("tpr: empty replicate list");
    index_t hit = 0;
    for (index_t m : mhats)
        if (m == m0) ++hit;
    return static_cast<double>(hit) / static_cast<double>(mhats.size());
}

Zeta zeta_metrics(const std::vector<double>& est, const std::vector<double>& truth) {
    if (truth.empty()) throw InputError("zeta_metrics: empty truth set");
    for (double v : truth)
        if (!(v > 0.0 && v < 1.0)) throw InputError("zeta_metrics: fractions must lie in (0,1)");
    for (double v : est)
        if (!(v > 0.0 && v < 1.0)) throw InputError("zeta_metrics: fractions must lie in (0,1)");
    if (est.empty()) return Zeta{0.0, 1.0, 1.0};

    auto min_dist = [](double b, const std::vector<double>& set) {
        double best = std::numeric_limits<double>::infinity();
        for (double a : set) best = std::min(best, std::abs(a - b));
        return best;
    };
    Zeta z;
    for (double b : est) z.under = std::max(z.under, min_dist(b, truth));
    double sum = 0.0;
    for (double b : truth) {
        const double d = min_dist(b, est);
        z.over = std::max(z.over, d);
        sum += d;
    }
    z.dist = sum / static_cast<double>(truth.size());
    return z;
}

std::vector<double> fitted_means(const CountSeries& series, const LrsmEstimate& est) {
    const index_t n = series.n();
    if (est.n != n) throw InputError("fitted_means: estimate built on a different length");
    std::vector<double> xi(static_cast<std::size_t>(n), std::numeric_limits<double>::quiet_NaN());
    const index_t m = est.m_hat;
    for (index_t j = 0; j <= m; ++j) {
        const index_t lo = (j == 0) ? 0 : est.taus.taus[static_cast<std::size_t>(j - 1)];
        const index_t hi = (j == m) ? n : est.taus.taus[static_cast<std::size_t>(j)];
        const GcinarParams& th = est.params[static_cast<std::size_t>(j)];
        const int p = th.order();
        for (index_t t = lo + 1; t <= hi; ++t) {
            if (t <= p) continue;  // lags would precede the series
            double v = th.beta0;
            for (int i = 1; i <= p; ++i)
                v += th.betas[static_cast<std::size_t>(i - 1)] *
                     static_cast<double>(series.at(t - i));
            xi[static_cast<std::size_t>(t - 1)] = v;
        }
    }
    return xi;
}

std::vector<double> pearson_residuals(const CountSeries& series, const LrsmEstimate& est) {
    std::vector<double> xi = fitted_means(series, est);
    const int p1 = est.orders.empty() ? 0 : est.orders.front();
    std::vector<double> res;
    res.reserve(xi.size());
    for (index_t t = p1 + 1; t <= series.n(); ++t) {
        const double m = xi[static_cast<std::size_t>(t - 1)];
        res.push_back((static_cast<double>(series.at(t)) - m) / std::sqrt(m));
    }
    return res;
}

double rms(const CountSeries& series, const LrsmEstimate& est) {
    std::vector<double> xi = fitted_means(series, est);
    const index_t n = series.n();
    if (n < 2) throw InputError("rms: series too short");
    double sum = 0.0;
    for (index_t t = 2; t <= n; ++t) {
        const double m = xi[static_cast<std::size_t>(t - 1)];
        if (!std::isfinite(m)) continue;
        const double d = static_cast<double>(series.at(t)) - m;
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(n - 1));
}

// Regularized incomplete gamma by series expansion (x < a+1) or Lentz
// continued fraction (x >= a+1); both converge well past 1e-10 absolute.
double gamma_q(double a, double x) {
    if (a <= 0.0 || x < 0.0) throw InputError("gamma_q: need a > 0, x >= 0");
    if (x == 0.0) return 1.0;
    const double lg = std::lgamma(a);
    const double prefix = std::exp(a * std::log(x) - x - lg);
    if (x < a + 1.0) {
        double term = 1.0 / a;
        double sum = term;
        double ai = a;
        for (int i = 0; i < 500; ++i) {
            ai += 1.0;
            term *= x / ai;
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-16) break;
        }
        return 1.0 - prefix * sum;
    }
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double f = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return prefix * f;
}

double chi2_upper_tail(double x, double dof) { return gamma_q(dof / 2.0, x / 2.0); }

std::vector<LjungBox> ljung_box(const std::vector<double>& residuals, int max_lag) {
    const auto n = static_cast<index_t>(residuals.size());
    if (max_lag < 1) throw InputError("ljung_box: max_lag < 1");
    if (n <= max_lag + 1) throw InputError("ljung_box: residual sequence too short");

    double mean = 0.0;
    for (double e : residuals) mean += e;
    mean /= static_cast<double>(n);
    double denom = 0.0;
    for (double e : residuals) denom += (e - mean) * (e - mean);
    if (denom == 0.0) throw NumericError("ljung_box: constant residuals");

    std::vector<LjungBox> out;
    double q = 0.0;
    for (int k = 1; k <= max_lag; ++k) {
        double num = 0.0;
        for (index_t t = k + 1; t <= n; ++t)
            num += (residuals[static_cast<std::size_t>(t - 1)] - mean) *
                   (residuals[static_cast<std::size_t>(t - k - 1)] - mean);
        const double r = num / denom;
        q += r * r / static_cast<double>(n - k);
        const double stat = static_cast<double>(n) * (static_cast<double>(n) + 2.0) * q;
        out.push_back(LjungBox{k, stat, chi2_upper_tail(stat, static_cast<double>(k))});
    }
    return out;
}

double coverage(const std::vector<CiResult>& cis, index_t tau0) {
    if (cis.empty()) throw InputError("coverage: empty interval list");
    index_t hit = 0;
    for (const CiResult& ci : cis)
        if (ci.lower <= tau0 && tau0 <= ci.upper) ++hit;
    return static_cast<double>(hit) / static_cast<double>(cis.size());
}

}  // namespace lrsm
