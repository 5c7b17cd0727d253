#include <algorithm>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lrsm/exec.hpp"
#include "lrsm/io.hpp"
#include "lrsm/refine.hpp"

using nlohmann::json;
using namespace lrsm;

namespace {

struct DetectArgs {
    std::string in;
    std::vector<index_t> h;
    bool h_mix = false;
    double d = 1.0;
    std::string rule = "raw";
    int p_max = 7;
    index_t m_max = 30;
    std::string criterion = "aic";
};

// Detection options are shared between `detect` and `ci` (which re-runs the
// pipeline when no --estimate report is given).
void add_detect_options(CLI::App* cmd, DetectArgs& a) {
    cmd->set_help_flag("--help", "print help");  // frees -h for the --h radius option
    cmd->add_option("--in", a.in, "input CSV (one count per line)")->required();
    cmd->add_option("--h", a.h, "window radius; repeat for a multi-radius scan");
    cmd->add_flag("--h-mix", a.h_mix, "scan over the built-in radius grid");
    cmd->add_option("--d", a.d, "radius scale factor for the window rule")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--rule", a.rule, "window rule when --h is absent")
        ->check(CLI::IsMember({"max", "raw"}));
    cmd->add_option("--p-max", a.p_max, "largest autoregressive order tried")
        ->check(CLI::Range(1, 12));
    cmd->add_option("--m-max", a.m_max, "cap on scan candidates")->check(CLI::PositiveNumber);
    cmd->add_option("--criterion", a.criterion, "per-window order selection rule")
        ->check(CLI::IsMember({"aic", "bic"}));
}

ScanConfig make_scan_config(const DetectArgs& a, index_t n) {
    ScanConfig cfg;
    cfg.p_max = a.p_max;
    cfg.m_max = a.m_max;
    cfg.order_criterion = a.criterion == "bic" ? Criterion::BIC : Criterion::AIC;
    if (!a.h.empty()) {
        cfg.h = a.h;
        std::sort(cfg.h.begin(), cfg.h.end());
        cfg.h.erase(std::unique(cfg.h.begin(), cfg.h.end()), cfg.h.end());
    } else if (a.h_mix) {
        cfg.h = default_window_mix(n);
    } else {
        cfg.h = {default_window(n, a.d, a.rule == "max" ? WindowRule::Max : WindowRule::Raw)};
    }
    return cfg;
}

void emit(const json& j, const std::string& out) {
    if (out.empty())
        std::cout << j.dump(2) << "\n";
    else
        write_json(out, j);
}

json diagnostics_json(const CountSeries& series, const LrsmEstimate& est) {
    json d;
    d["rms"] = rms(series, est);
    const std::vector<double> pr = pearson_residuals(series, est);
    double mean = 0.0;
    for (double v : pr) mean += v;
    mean /= static_cast<double>(pr.size());
    double var = 0.0;
    for (double v : pr) var += (v - mean) * (v - mean);
    if (pr.size() > 1) var /= static_cast<double>(pr.size() - 1);
    d["pearson_mean"] = mean;
    d["pearson_var"] = var;
    if (static_cast<index_t>(pr.size()) > 11) {
        json lb = json::array();
        for (const LjungBox& r : ljung_box(pr, 10))
            lb.push_back(json{{"lag", r.lag}, {"stat", r.stat}, {"p_value", r.p_value}});
        d["ljung_box"] = lb;
    }
    return d;
}

void run_simulate(const std::string& model, index_t n, std::uint64_t seed,
                  const std::string& out) {
    McpSpec spec = builtin_model(model, n);
    CountSeries series = simulate_mcp(spec, 500, seed);
    write_series_csv(out, series);
    write_json(out + ".truth.json", truth_to_json(spec, seed));
}

void run_detect(const DetectArgs& a, const std::string& out, const std::string& plot_data) {
    CountSeries series = read_series_csv(a.in);
    ScanConfig cfg = make_scan_config(a, series.n());
    LrsmEstimate est = lrsm_detect(series, cfg);

    if (!plot_data.empty()) {
        std::ofstream ps(plot_data);
        if (!ps) throw InputError("cannot write output file: " + plot_data);
        ps << "h,t,score\n";
        for (index_t h : cfg.h) {
            ScanScores s = scan_series(series, cfg, h);
            for (std::size_t i = 0; i < s.scores.size(); ++i)
                ps << h << "," << s.t_of(static_cast<index_t>(i)) << "," << s.scores[i] << "\n";
        }
    }

    json report = estimate_to_json(est);
    report["h"] = cfg.h;
    report["diagnostics"] = diagnostics_json(series, est);
    emit(report, out);
}

struct CiArgs {
    std::string method = "all";
    double alpha = 0.1;
    index_t B = 1000;
    index_t n_p = 0;
    std::string n_b = "adaptive";
    std::uint64_t seed = 1;
    std::string estimate;
    std::string out;
};

json approx_or_note(const CountSeries& series, const LrsmEstimate& est, index_t j, double alpha,
                    bool required) {
    try {
        return ci_to_json(ci_approx(series, est, j, alpha));
    } catch (const NumericError& e) {
        if (required) throw;
        return json{{"method", "approx"}, {"error", e.what()}};
    }
}

void run_ci(const DetectArgs& da, const CiArgs& ca) {
    CountSeries series = read_series_csv(da.in);
    LrsmEstimate est = ca.estimate.empty() ? lrsm_detect(series, make_scan_config(da, series.n()))
                                           : estimate_from_json(read_json(ca.estimate));
    if (est.n != series.n()) throw InputError("estimate report does not match the input series");

    const bool want_approx = ca.method == "approx" || ca.method == "all";
    const bool want_pba = ca.method == "pba" || ca.method == "all";
    const bool want_bba = ca.method == "bba" || ca.method == "all";
    index_t fixed_nb = 0;
    if (ca.n_b != "adaptive") {
        try {
            fixed_nb = std::stoll(ca.n_b);
        } catch (const std::exception&) {
            throw InputError("--nb expects an integer or 'adaptive'");
        }
        if (fixed_nb < 1) throw InputError("--nb must be positive");
    }

    json report{{"schema_version", kSchemaVersion},
                {"method", ca.method},
                {"alpha", ca.alpha},
                {"m_hat", est.m_hat}};
    json rows = json::array();
    for (index_t j = 1; j <= est.m_hat; ++j) {
        json row{{"j", j}, {"tau", est.taus.taus[static_cast<std::size_t>(j - 1)]}};
        const std::uint64_t jseed = substream(ca.seed, static_cast<std::uint64_t>(j), 0);
        if (want_approx) row["approx"] = approx_or_note(series, est, j, ca.alpha, ca.method == "approx");
        if (want_pba)
            row["pba"] = ci_to_json(
                pba_ci(series, est, j, ca.alpha, ca.n_p, ca.B, substream(jseed, 1, 0)));
        if (want_bba) {
            index_t nb = fixed_nb;
            if (nb == 0) {
                AdaptiveBandwidth ab =
                    adaptive_bandwidth(series, est, j, ca.alpha, ca.B, substream(jseed, 2, 0));
                row["adaptive"] = json{
                    {"n_b", ab.n_b}, {"capped", ab.capped}, {"outer_frac", ab.outer_frac}};
                nb = ab.n_b;
            }
            row["bba"] =
                ci_to_json(bba_ci(series, est, j, ca.alpha, nb, ca.B, substream(jseed, 3, 0)));
        }
        rows.push_back(row);
    }
    report["change_points"] = rows;

    if (est.m_hat >= 1) {
        json sim{{"per_cp_level",
                  std::pow(1.0 - ca.alpha, 1.0 / static_cast<double>(est.m_hat))}};
        CiOptions opt;
        opt.alpha = ca.alpha;
        opt.B = ca.B;
        opt.n_p = ca.n_p;
        opt.n_b = fixed_nb;
        opt.seed = substream(ca.seed, 9, 0);
        auto add = [&](const char* key, CiMethod m) {
            json arr = json::array();
            for (const CiResult& ci : simultaneous_ci(series, est, m, opt)) arr.push_back(ci_to_json(ci));
            sim[key] = arr;
        };
        if (want_approx) {
            try {
                add("approx", CiMethod::Approx);
            } catch (const NumericError&) {
                if (ca.method == "approx") throw;
            }
        }
        if (want_pba) add("pba", CiMethod::PBA);
        if (want_bba) add("bba", CiMethod::BBA);
        report["simultaneous"] = sim;
    }
    emit(report, ca.out);
}

struct BenchArgs {
    std::string exp;
    std::string model = "A1";
    index_t n = 2000;
    index_t reps = 200;
    std::string method = "pba";
    double alpha = 0.1;
    index_t B = 1000;
    index_t n_p = 0;
    index_t n_b = 0;
    std::vector<index_t> n_grid;
    index_t h = 0;
    std::uint64_t seed = 1;
    std::string out;
    std::string csv;
};

json summary_to_json(const ExperimentSummary& s, double d, index_t h) {
    return json{{"model", s.model},     {"n", s.n},
                {"d", d},               {"h", h},
                {"reps", s.reps},       {"tpr", s.tpr},
                {"zeta_u", s.zeta_u},   {"zeta_o", s.zeta_o},
                {"zeta_d", s.zeta_d},   {"mean_seconds", s.mean_seconds}};
}

void append_records_csv(std::ofstream& cs, const ExperimentSummary& s, double d, index_t h) {
    for (const RepRecord& r : s.records) {
        cs << s.model << "," << s.n << "," << d << "," << h << "," << r.rep << "," << r.m_hat
           << "," << r.zeta_u << "," << r.zeta_o << "," << r.zeta_d << "," << r.seconds << ",";
        for (std::size_t i = 0; i < r.taus.size(); ++i) cs << (i ? ";" : "") << r.taus[i];
        cs << "\n";
    }
}

void run_bench(const BenchArgs& b, const DetectArgs& da0) {
    json report{{"schema_version", kSchemaVersion}, {"experiment", b.exp}};
    std::ofstream cs;
    if (!b.csv.empty()) {
        cs.open(b.csv);
        if (!cs) throw InputError("cannot write output file: " + b.csv);
        cs << "model,n,d,h,rep,m_hat,zeta_u,zeta_o,zeta_d,seconds,taus\n";
    }

    if (b.exp == "sweep") {
        json rows = json::array();
        for (index_t n : std::vector<index_t>{500, 1000, 2000}) {
            for (double d : {0.2, 0.4, 0.6, 0.8, 1.0, 1.2}) {
                ScanConfig cfg;
                cfg.h = {default_window(n, d, WindowRule::Raw)};
                ExperimentSummary s = run_experiment(b.model, n, cfg, b.reps, b.seed);
                rows.push_back(summary_to_json(s, d, cfg.h[0]));
                if (cs.is_open()) append_records_csv(cs, s, d, cfg.h[0]);
            }
            ScanConfig cfg;
            cfg.h = default_window_mix(n);
            ExperimentSummary s = run_experiment(b.model, n, cfg, b.reps, b.seed);
            json row = summary_to_json(s, 0.0, 0);
            row["d"] = "mix";
            row["h"] = cfg.h;
            rows.push_back(row);
            if (cs.is_open()) append_records_csv(cs, s, 0.0, 0);
        }
        report["rows"] = rows;
    } else if (b.exp == "model") {
        DetectArgs da = da0;
        if (b.h > 0) da.h = {b.h};
        ScanConfig cfg = make_scan_config(da, b.n);
        ExperimentSummary s = run_experiment(b.model, b.n, cfg, b.reps, b.seed);
        report["rows"] = json::array({summary_to_json(s, da.d, cfg.h.back())});
        if (cs.is_open()) append_records_csv(cs, s, da.d, cfg.h.back());
    } else if (b.exp == "ci") {
        DetectArgs da = da0;
        if (b.h > 0) da.h = {b.h};
        ScanConfig cfg = make_scan_config(da, b.n);
        CiMethod method;
        if (b.method == "approx")
            method = CiMethod::Approx;
        else if (b.method == "pba")
            method = CiMethod::PBA;
        else if (b.method == "bba")
            method = CiMethod::BBA;
        else
            throw InputError("unknown ci method: " + b.method);
        CiExperimentOptions opt;
        opt.alpha = b.alpha;
        opt.B = b.B;
        opt.n_p = b.n_p;
        opt.n_b = b.n_b;
        opt.reps = b.reps;
        opt.seed = b.seed;
        CiExperimentSummary s = run_ci_experiment(b.model, b.n, method, cfg, opt);
        json rows = json::array();
        for (const CiCpSummary& c : s.cps)
            rows.push_back(json{{"j", c.j},
                                {"coverage", c.coverage},
                                {"mean_lower", c.mean_lower},
                                {"mean_upper", c.mean_upper},
                                {"median_tau3", c.median_tau3},
                                {"mean_nb", c.mean_nb}});
        report["rows"] = rows;
        report["attempts"] = s.attempts;
        report["used"] = s.used;
    } else if (b.exp == "scaling") {
        std::vector<index_t> grid =
            b.n_grid.empty() ? std::vector<index_t>{2000, 4000, 8000, 16000} : b.n_grid;
        const index_t h = b.h > 0 ? b.h : 133;
        const index_t reps = std::min<index_t>(b.reps, 5);
        ScalingResult s = scaling_probe(grid, h, reps, b.model, b.seed);
        json rows = json::array();
        for (const ScalingPoint& p : s.points)
            rows.push_back(json{{"n", p.n}, {"h", p.h}, {"seconds", p.seconds}});
        report["rows"] = rows;
        report["slope"] = s.slope;
    } else {
        throw InputError("unknown experiment: " + b.exp +
                         " (expected sweep, model, ci, or scaling)");
    }
    emit(report, b.out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Change-point inference for piecewise-stationary count time series"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read options from an INI-style file (flags win)");
    int threads = 0;
    app.add_option("--threads", threads, "cap the worker pool (default: all cores)")
        ->check(CLI::PositiveNumber);
    // Subcommand callbacks fire during parse, so the cap must be applied there.
    auto apply_threads = [&] {
        if (threads > 0) set_max_threads(threads);
    };

    std::string sim_model = "A1", sim_out = "series.csv";
    index_t sim_n = 2000;
    std::uint64_t sim_seed = 1;
    CLI::App* sim = app.add_subcommand("simulate", "draw a sample path from a builtin model");
    sim->add_option("--model", sim_model, "builtin model id")->required();
    sim->add_option("--n", sim_n, "series length")->required()->check(CLI::PositiveNumber);
    sim->add_option("--seed", sim_seed, "master seed");
    sim->add_option("--out", sim_out, "output CSV path")->required();
    sim->callback([&] {
        apply_threads();
        run_simulate(sim_model, sim_n, sim_seed, sim_out); });

    DetectArgs det;
    std::string det_out, det_plot;
    std::uint64_t det_seed = 1;
    CLI::App* dc = app.add_subcommand("detect", "run the three-step change-point pipeline");
    add_detect_options(dc, det);
    dc->add_option("--seed", det_seed, "accepted for interface parity; detect is deterministic");
    dc->add_option("--out", det_out, "write the JSON report here instead of stdout");
    dc->add_option("--plot-data", det_plot, "also write scan scores as CSV (h,t,score)");
    dc->callback([&] {
        apply_threads();
        run_detect(det, det_out, det_plot);
    });

    DetectArgs cid;
    CiArgs cia;
    CLI::App* cc = app.add_subcommand("ci", "confidence intervals for detected change-points");
    add_detect_options(cc, cid);
    cc->add_option("--method", cia.method, "approx, pba, bba, or all")
        ->check(CLI::IsMember({"approx", "pba", "bba", "all"}));
    cc->add_option("--alpha", cia.alpha, "miscoverage level")
        ->check(CLI::Range(1e-6, 0.999999));
    cc->add_option("--B", cia.B, "bootstrap replicates")->check(CLI::PositiveNumber);
    cc->add_option("--np", cia.n_p, "parametric resample half-length (0: n/2)");
    cc->add_option("--nb", cia.n_b, "block length, or 'adaptive'");
    cc->add_option("--seed", cia.seed, "master seed");
    cc->add_option("--estimate", cia.estimate, "reuse a prior detect JSON report");
    cc->add_option("--out", cia.out, "write the JSON report here instead of stdout");
    cc->callback([&] {
        apply_threads();
        run_ci(cid, cia);
    });

    BenchArgs ben;
    DetectArgs bend;
    CLI::App* bc = app.add_subcommand("bench", "Monte-Carlo studies on builtin models");
    bc->set_help_flag("--help", "print help");
    bc->add_option("--exp", ben.exp, "sweep, model, ci, or scaling")->required();
    bc->add_option("--model", ben.model, "builtin model id");
    bc->add_option("--n", ben.n, "series length")->check(CLI::PositiveNumber);
    bc->add_option("--reps", ben.reps, "replicates")->check(CLI::PositiveNumber);
    bc->add_option("--method", ben.method, "ci experiment method");
    bc->add_option("--alpha", ben.alpha, "ci experiment level");
    bc->add_option("--B", ben.B, "bootstrap replicates");
    bc->add_option("--np", ben.n_p, "parametric resample half-length (0: n/2)");
    bc->add_option("--nb", ben.n_b, "block length (0: adaptive)");
    bc->add_option("--n-grid", ben.n_grid, "lengths for the scaling experiment");
    bc->add_option("--h", ben.h, "window radius override");
    bc->add_option("--d", bend.d, "radius scale factor");
    bc->add_option("--rule", bend.rule, "window rule")->check(CLI::IsMember({"max", "raw"}));
    bc->add_option("--p-max", bend.p_max, "largest autoregressive order tried");
    bc->add_option("--m-max", bend.m_max, "cap on scan candidates");
    bc->add_option("--criterion", bend.criterion, "order selection rule")
        ->check(CLI::IsMember({"aic", "bic"}));
    bc->add_option("--seed", ben.seed, "master seed");
    bc->add_option("--out", ben.out, "write the JSON summary here instead of stdout");
    bc->add_option("--csv", ben.csv, "write per-replicate records here");
    bc->callback([&] {
        apply_threads();
        run_bench(ben, bend);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const InfeasibleError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
