// Times the OpenMP-parallel kernels against the serial reference paths.
// Both produce bit-identical results (work items are independent and seeds
// are derived per item), so this only reports wall-clock.

#include <chrono>
#include <cstdio>
#include <string>

#include "lrsm/ci.hpp"
#include "lrsm/exec.hpp"
#include "lrsm/select.hpp"
#include "lrsm/simulate.hpp"

using namespace lrsm;

namespace {

template <typename F>
double time_of(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void row(const char* name, double serial, double parallel) {
    std::printf("%-22s %10.3fs %10.3fs %8.2fx\n", name, serial, parallel,
                parallel > 0 ? serial / parallel : 0.0);
}

}  // namespace

int main(int argc, char** argv) {
    index_t n = 2000;
    if (argc > 1) n = std::stoll(argv[1]);
    CountSeries series = simulate_mcp(builtin_model("B2", n), 500, 7);

    ScanConfig cfg;
    cfg.h = {default_window(n, 1.0, WindowRule::Raw)};
    std::printf("n=%lld  h=%lld  threads=%d\n", static_cast<long long>(n),
                static_cast<long long>(cfg.h[0]), max_threads());
    std::printf("%-22s %11s %11s %9s\n", "kernel", "serial", "parallel", "speedup");

    ChangePointSet cands;
    double s, p;
    {
        ScanConfig c = cfg;
        c.exec = Exec::Serial;
        s = time_of([&] { cands = scan_multi(series, c); });
        c.exec = Exec::Parallel;
        p = time_of([&] { cands = scan_multi(series, c); });
        row("scan", s, p);
    }
    {
        ScanConfig c = cfg;
        s = time_of([&] { optimal_partition(series, cands, c.p_max, c.order_criterion, c.delta,
                                            Exec::Serial); });
        p = time_of([&] { optimal_partition(series, cands, c.p_max, c.order_criterion, c.delta,
                                            Exec::Parallel); });
        row("optimal_partition", s, p);
    }
    {
        ScanConfig c = cfg;
        c.exec = Exec::Serial;
        LrsmEstimate est = lrsm_detect(series, c);
        if (est.m_hat >= 1) {
            s = time_of([&] { pba_ci(series, est, 1, 0.1, 0, 200, 7, Exec::Serial); });
            p = time_of([&] { pba_ci(series, est, 1, 0.1, 0, 200, 7, Exec::Parallel); });
            row("parametric bootstrap", s, p);
        }
    }
    return 0;
}
