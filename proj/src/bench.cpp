#include "lrsm/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "lrsm/refine.hpp"

namespace lrsm {

namespace {

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

std::vector<double> fractions(const std::vector<index_t>& taus, index_t n) {
    std::vector<double> out;
    out.reserve(taus.size());
    for (index_t t : taus) out.push_back(static_cast<double>(t) / static_cast<double>(n));
    return out;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t k = v.size();
    return k % 2 == 1 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
}

}  // namespace

ExperimentSummary run_experiment(const std::string& model, index_t n, const ScanConfig& cfg,
                                 index_t reps, std::uint64_t seed) {
    if (reps < 1) throw InputError("run_experiment: reps < 1");
    McpSpec spec = builtin_model(model, n);
    const std::vector<double> truth = fractions(spec.taus.taus, n);
    const auto m0 = static_cast<index_t>(spec.taus.size());

    ExperimentSummary sum;
    sum.model = model;
    sum.n = n;
    sum.reps = reps;
    std::vector<index_t> mhats;
    for (index_t r = 0; r < reps; ++r) {
        CountSeries series = simulate_mcp(spec, 500, substream(seed, static_cast<std::uint64_t>(r)));
        const double t0 = now_seconds();
        LrsmEstimate est = lrsm_detect(series, cfg);
        const double secs = now_seconds() - t0;
        Zeta z = zeta_metrics(fractions(est.taus.taus, n), truth);

        RepRecord rec;
        rec.rep = r;
        rec.m_hat = est.m_hat;
        rec.zeta_u = z.under;
        rec.zeta_o = z.over;
        rec.zeta_d = z.dist;
        rec.seconds = secs;
        rec.taus = est.taus.taus;
        sum.records.push_back(rec);
        mhats.push_back(est.m_hat);
        sum.zeta_u += z.under;
        sum.zeta_o += z.over;
        sum.zeta_d += z.dist;
        sum.mean_seconds += secs;
    }
    const auto dn = static_cast<double>(reps);
    sum.tpr = tpr(mhats, m0);
    sum.zeta_u /= dn;
    sum.zeta_o /= dn;
    sum.zeta_d /= dn;
    sum.mean_seconds /= dn;
    return sum;
}

CiExperimentSummary run_ci_experiment(const std::string& model, index_t n, CiMethod method,
                                      const ScanConfig& cfg, const CiExperimentOptions& opt) {
    if (opt.reps < 1) throw InputError("run_ci_experiment: reps < 1");
    McpSpec spec = builtin_model(model, n);
    const auto m0 = static_cast<index_t>(spec.taus.size());
    if (m0 < 1) throw InputError("run_ci_experiment: model has no change-points");

    struct PerCp {
        std::vector<double> lower, upper, tau3, nb;
        index_t hits = 0;
    };
    std::vector<PerCp> acc(static_cast<std::size_t>(m0));

    CiExperimentSummary sum;
    sum.model = model;
    sum.n = n;
    sum.method = method;
    sum.alpha = opt.alpha;
    const index_t cap = 3 * opt.reps;
    for (index_t r = 0; r < cap && sum.used < opt.reps; ++r) {
        ++sum.attempts;
        CountSeries series =
            simulate_mcp(spec, 500, substream(opt.seed, static_cast<std::uint64_t>(r)));
        LrsmEstimate est = lrsm_detect(series, cfg);
        if (est.m_hat != m0) continue;
        ++sum.used;
        for (index_t j = 1; j <= m0; ++j) {
            const std::uint64_t cseed =
                substream(opt.seed, static_cast<std::uint64_t>(r), 100 + static_cast<std::uint64_t>(j));
            CiResult ci;
            index_t nb_used = 0;
            switch (method) {
                case CiMethod::Approx:
                    ci = ci_approx(series, est, j, opt.alpha);
                    break;
                case CiMethod::PBA:
                    ci = pba_ci(series, est, j, opt.alpha, opt.n_p, opt.B, cseed, opt.exec);
                    break;
                case CiMethod::BBA: {
                    nb_used = opt.n_b;
                    if (nb_used == 0)
                        nb_used =
                            adaptive_bandwidth(series, est, j, opt.alpha, opt.B, cseed, opt.exec)
                                .n_b;
                    ci = bba_ci(series, est, j, opt.alpha, nb_used, opt.B, cseed, opt.exec);
                    break;
                }
            }
            PerCp& a = acc[static_cast<std::size_t>(j - 1)];
            a.lower.push_back(static_cast<double>(ci.lower));
            a.upper.push_back(static_cast<double>(ci.upper));
            a.tau3.push_back(static_cast<double>(est.taus.taus[static_cast<std::size_t>(j - 1)]));
            a.nb.push_back(static_cast<double>(nb_used));
            const index_t tau0 = spec.taus.taus[static_cast<std::size_t>(j - 1)];
            if (ci.lower <= tau0 && tau0 <= ci.upper) ++a.hits;
        }
    }
    if (sum.used == 0) throw InfeasibleError("run_ci_experiment: no replicate found the true count");

    for (index_t j = 1; j <= m0; ++j) {
        const PerCp& a = acc[static_cast<std::size_t>(j - 1)];
        CiCpSummary c;
        c.j = j;
        const auto k = static_cast<double>(a.lower.size());
        c.coverage = static_cast<double>(a.hits) / k;
        for (double v : a.lower) c.mean_lower += v / k;
        for (double v : a.upper) c.mean_upper += v / k;
        for (double v : a.nb) c.mean_nb += v / k;
        c.median_tau3 = median(a.tau3);
        sum.cps.push_back(c);
    }
    return sum;
}

ScalingResult scaling_probe(const std::vector<index_t>& ns, index_t h, index_t reps,
                            const std::string& model, std::uint64_t seed) {
    if (ns.empty()) throw InputError("scaling_probe: empty n grid");
    if (reps < 1) throw InputError("scaling_probe: reps < 1");
    ScalingResult res;
    for (index_t n : ns) {
        McpSpec spec = builtin_model(model, n);
        ScanConfig cfg;
        cfg.h = {h};
        cfg.exec = Exec::Serial;
        double total = 0.0;
        for (index_t r = 0; r < reps; ++r) {
            CountSeries series =
                simulate_mcp(spec, 500, substream(seed, static_cast<std::uint64_t>(r)));
            const double t0 = now_seconds();
            LrsmEstimate est = lrsm_detect(series, cfg);
            total += now_seconds() - t0;
            (void)est;
        }
        res.points.push_back(ScalingPoint{n, h, total / static_cast<double>(reps)});
    }
    if (res.points.size() >= 2) {
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        const auto k = static_cast<double>(res.points.size());
        for (const ScalingPoint& p : res.points) {
            const double x = std::log(static_cast<double>(p.n) * static_cast<double>(p.h));
            const double y = std::log(p.seconds);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        res.slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    }
    return res;
}

}  // namespace lrsm
