#include "lrsm/pqml.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>

namespace lrsm {

namespace {

constexpr int kMaxDim = 16;  // p+1 cap; orders this large are never useful here
constexpr int kMaxIter = 200;

// Anchored summation range: terms whose lags would precede the series are
// dropped, so the sum starts at max(k+1, p+1).
struct Range {
    index_t t0, t1;
    index_t terms() const { return t1 - t0 + 1; }
};

Range term_range(const CountSeries& series, Window w, int p) {
    if (w.len < 1 || w.k < 0 || w.last() > series.n())
        throw InputError("quasi_loglik: window out of bounds");
    return Range{std::max(w.k + 1, static_cast<index_t>(p) + 1), w.last()};
}

double dot(const double* a, const double* b, int d) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += a[i] * b[i];
    return s;
}

// One pass over the window accumulating the quasi-log-likelihood and/or its
// gradient and Hessian (lower triangle, row-major).  The GH pass skips the
// log, which dominates the per-term cost.
struct Quad {
    double L = 0.0;
    double g[kMaxDim] = {};
    double h[kMaxDim * kMaxDim] = {};
};

enum class Need { L, GH, LGH };

Quad accumulate(const CountSeries& series, Range r, const double* th, int p, Need need) {
    Quad q;
    const count_t* x = series.values().data();  // x[i] is series position i+1
    const int d = p + 1;
    double xv[kMaxDim];
    xv[0] = 1.0;
    for (index_t t = r.t0; t <= r.t1; ++t) {
        for (int i = 1; i <= p; ++i) xv[i] = static_cast<double>(x[t - i - 1]);
        double xi = th[0] + dot(th + 1, xv + 1, p);
        double X = static_cast<double>(x[t - 1]);
        if (need != Need::GH) q.L += (X > 0.0 ? X * std::log(xi) : 0.0) - xi;
        if (need == Need::L) continue;
        double ratio = X / xi;
        double resid = ratio - 1.0;
        double wgt = ratio / xi;
        for (int i = 0; i < d; ++i) {
            q.g[i] += resid * xv[i];
            double wxi = wgt * xv[i];
            for (int j = 0; j <= i; ++j) q.h[i * d + j] -= wxi * xv[j];
        }
    }
    return q;
}

// Euclidean projection onto {b >= 0, sum b <= cap} (the per-beta upper bound
// 1-delta is implied once the sum constraint binds).
void project_betas(double* b, int p, double cap) {
    for (int i = 0; i < p; ++i) b[i] = std::clamp(b[i], 0.0, cap);
    double sum = std::accumulate(b, b + p, 0.0);
    if (sum <= cap) return;
    // project onto the simplex {b >= 0, sum b = cap} (sort-based)
    double srt[kMaxDim];
    std::copy(b, b + p, srt);
    std::sort(srt, srt + p, std::greater<double>());
    double csum = 0.0, lambda = 0.0;
    for (int j = 0; j < p; ++j) {
        csum += srt[j];
        double cand = (csum - cap) / (j + 1);
        if (j == p - 1 || srt[j + 1] <= cand) {
            lambda = cand;
            break;
        }
    }
    for (int i = 0; i < p; ++i) b[i] = std::max(b[i] - lambda, 0.0);
}

void project(double* th, int p, double delta) {
    th[0] = std::clamp(th[0], delta, 1.0 / delta);
    project_betas(th + 1, p, 1.0 - delta);
}

double projected_gradient_norm(const double* th, const double* g, int p, double delta) {
    double stepped[kMaxDim];
    for (int i = 0; i <= p; ++i) stepped[i] = th[i] + g[i];
    project(stepped, p, delta);
    double s = 0.0;
    for (int i = 0; i <= p; ++i) {
        double dlt = stepped[i] - th[i];
        s += dlt * dlt;
    }
    return std::sqrt(s);
}

GcinarParams to_params(const double* th, int p, double delta) {
    GcinarParams out;
    out.beta0 = th[0];
    out.betas.assign(th + 1, th + 1 + p);
    out.delta = delta;
    return out;
}

// Least-squares initial point: solve the Gram system of the conditional-mean
// regression and project it into the feasible set.
void ls_init(const CountSeries& series, Range r, int p, double delta, double* th) {
    const int d = p + 1;
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
    const count_t* x = series.values().data();
    double xv[kMaxDim];
    xv[0] = 1.0;
    for (index_t t = r.t0; t <= r.t1; ++t) {
        for (int i = 1; i <= p; ++i) xv[i] = static_cast<double>(x[t - i - 1]);
        double X = static_cast<double>(x[t - 1]);
        for (int i = 0; i < d; ++i) {
            b(i) += X * xv[i];
            for (int j = 0; j <= i; ++j) G(i, j) += xv[i] * xv[j];
        }
    }
    G += 1e-8 * static_cast<double>(r.terms()) * Eigen::MatrixXd::Identity(d, d);
    Eigen::VectorXd sol = G.selfadjointView<Eigen::Lower>().ldlt().solve(b);
    for (int i = 0; i < d; ++i) th[i] = sol(i);
    project(th, p, delta);
}

// In-place Cholesky of the lower triangle of a row-major m x m matrix.
bool cholesky(double* a, int m) {
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = a[i * m + j];
            for (int k = 0; k < j; ++k) s -= a[i * m + k] * a[j * m + k];
            if (i == j) {
                if (s <= 0.0) return false;
                a[i * m + i] = std::sqrt(s);
            } else {
                a[i * m + j] = s / a[j * m + j];
            }
        }
    }
    return true;
}

void chol_solve(const double* a, int m, const double* b, double* x) {
    for (int i = 0; i < m; ++i) {
        double s = b[i];
        for (int k = 0; k < i; ++k) s -= a[i * m + k] * x[k];
        x[i] = s / a[i * m + i];
    }
    for (int i = m - 1; i >= 0; --i) {
        double s = x[i];
        for (int k = i + 1; k < m; ++k) s -= a[k * m + i] * x[k];
        x[i] = s / a[i * m + i];
    }
}

// Newton ascent direction restricted to the inactive constraints.  Bound-pinned
// coordinates keep dir = 0; if the persistence cap sum(beta) = 1-delta is
// active, the step is solved on that face via a bordered system.
bool newton_direction(const Quad& q, const double* th, int p, double delta, double* dir) {
    const int d = p + 1;
    int free_ix[kMaxDim], nf = 0;
    bool in_face[kMaxDim] = {};  // free beta coords constrained by the cap face

    // Pin th0 at its bounds and betas at zero when the gradient points outward.
    if (!((th[0] <= delta && q.g[0] <= 0.0) || (th[0] >= 1.0 / delta && q.g[0] >= 0.0)))
        free_ix[nf++] = 0;
    double sumb = 0.0;
    for (int i = 1; i < d; ++i) sumb += th[i];
    const bool at_cap = sumb >= (1.0 - delta) - 1e-10;
    double face_grad = 0.0;
    for (int i = 1; i < d; ++i) {
        if (th[i] <= 0.0 && q.g[i] <= 0.0) continue;
        in_face[nf] = true;
        face_grad += q.g[i];
        free_ix[nf++] = i;
    }
    std::fill(dir, dir + d, 0.0);
    if (nf == 0) return false;

    double H[kMaxDim * kMaxDim], g[kMaxDim];
    double maxdiag = 0.0;
    for (int a = 0; a < nf; ++a) {
        g[a] = q.g[free_ix[a]];
        for (int b = 0; b <= a; ++b) {
            int i = free_ix[a], j = free_ix[b];
            double v = -q.h[std::max(i, j) * d + std::min(i, j)];
            H[a * nf + b] = v;
            if (a == b) maxdiag = std::max(maxdiag, v);
        }
    }

    double ridge = std::max(1e-10 * maxdiag, 1e-14);
    double fac[kMaxDim * kMaxDim];
    for (int tries = 0; tries < 4; ++tries) {
        std::copy(H, H + nf * nf, fac);
        for (int a = 0; a < nf; ++a) fac[a * nf + a] += ridge;
        if (cholesky(fac, nf)) break;
        ridge *= 1e4;
        if (tries == 3) return false;
    }

    double s[kMaxDim];
    chol_solve(fac, nf, g, s);

    // Keep the step on the cap face when the gradient pushes the persistence
    // sum outward: solve the bordered system via the Schur complement.
    bool face_active = at_cap && face_grad > 0.0;
    if (face_active) {
        double e[kMaxDim], y2[kMaxDim];
        int nface = 0;
        for (int a = 0; a < nf; ++a) {
            e[a] = in_face[a] ? 1.0 : 0.0;
            nface += in_face[a];
        }
        if (nface > 0) {
            chol_solve(fac, nf, e, y2);
            double num = 0.0, den = 0.0;
            for (int a = 0; a < nf; ++a) {
                num += e[a] * s[a];
                den += e[a] * y2[a];
            }
            if (den > 0.0) {
                double mu = num / den;
                for (int a = 0; a < nf; ++a) s[a] -= mu * y2[a];
            }
        }
    }
    for (int a = 0; a < nf; ++a) dir[free_ix[a]] = s[a];
    return true;
}

FitResult fit_impl(const CountSeries& series, Window w, int p, double delta, const double* init) {
    if (p < 1 || p + 1 >= kMaxDim) throw InputError("fit_pqml: order out of range");
    if (delta <= 0.0 || delta >= 1.0) throw InputError("fit_pqml: delta outside (0,1)");
    Range r = term_range(series, w, p);
    if (w.len < p + 2 || r.terms() < 2) throw InfeasibleError("fit_pqml: window too short");

    const int d = p + 1;
    FitResult res;
    res.order = p;

    bool all_zero = true;
    for (index_t t = r.t0; t <= r.t1 && all_zero; ++t) all_zero = series.at(t) == 0;
    if (all_zero) {
        // L = -sum xi is maximized on the boundary (delta, 0, .., 0).
        double th[kMaxDim] = {delta};
        res.params = to_params(th, p, delta);
        res.loglik = accumulate(series, r, th, p, Need::L).L;
        res.converged = true;
        res.zero_ar_weight = true;
        return res;
    }

    double th[kMaxDim];
    if (init) {
        std::copy(init, init + d, th);
        project(th, p, delta);
    } else {
        ls_init(series, r, p, delta, th);
    }

    Quad q = accumulate(series, r, th, p, Need::LGH);
    double pg = projected_gradient_norm(th, q.g, p, delta);
    bool converged = false;

    // Backtracking search along the projected arc; on success th is updated
    // and the accepted objective value returned through newL.
    auto arc_search = [&](const double* direction, double alpha0, double& newL) -> bool {
        double alpha = alpha0;
        for (int ls = 0; ls < 40; ++ls) {
            double cand[kMaxDim];
            for (int i = 0; i < d; ++i) cand[i] = th[i] + alpha * direction[i];
            project(cand, p, delta);
            double gdot = 0.0, step2 = 0.0;
            for (int i = 0; i < d; ++i) {
                double s = cand[i] - th[i];
                gdot += q.g[i] * s;
                step2 += s * s;
            }
            if (step2 == 0.0) return false;  // jammed against the boundary
            double Lc = accumulate(series, r, cand, p, Need::L).L;
            if (Lc >= q.L + 1e-4 * gdot) {
                std::copy(cand, cand + d, th);
                newL = Lc;
                return true;
            }
            alpha *= 0.5;
        }
        return false;
    };

    for (int iter = 0; iter < kMaxIter; ++iter) {
        if (pg <= 1e-8 * (1.0 + std::abs(q.L))) {
            converged = true;
            break;
        }
        double dir[kMaxDim], newL = q.L;
        bool moved = newton_direction(q, th, p, delta, dir) && arc_search(dir, 1.0, newL);
        if (!moved) {
            double gnorm = std::sqrt(dot(q.g, q.g, d));
            moved = arc_search(q.g, 1.0 / (1.0 + gnorm), newL);
        }
        if (!moved) break;  // stationary up to line-search resolution
        Quad qn = accumulate(series, r, th, p, Need::GH);
        std::copy(qn.g, qn.g + d, q.g);
        std::copy(qn.h, qn.h + d * d, q.h);
        q.L = newL;
        pg = projected_gradient_norm(th, q.g, p, delta);
    }

    res.params = to_params(th, p, delta);
    res.loglik = q.L;
    res.converged = converged || pg <= 1e-8 * (1.0 + std::abs(q.L));
    res.gradient_norm = pg;
    res.zero_ar_weight = res.params.beta_sum() < 1e-12;
    return res;
}

}  // namespace

double quasi_loglik(const CountSeries& series, Window w, const GcinarParams& params) {
    params.validate();
    Range r = term_range(series, w, params.order());
    if (r.terms() < 1) return 0.0;
    double th[kMaxDim];
    th[0] = params.beta0;
    std::copy(params.betas.begin(), params.betas.end(), th + 1);
    return accumulate(series, r, th, params.order(), Need::L).L;
}

std::vector<double> quasi_loglik_gradient(const CountSeries& series, Window w,
                                          const GcinarParams& params) {
    params.validate();
    int p = params.order();
    Range r = term_range(series, w, p);
    std::vector<double> out(static_cast<std::size_t>(p) + 1, 0.0);
    if (r.terms() < 1) return out;
    double th[kMaxDim];
    th[0] = params.beta0;
    std::copy(params.betas.begin(), params.betas.end(), th + 1);
    Quad q = accumulate(series, r, th, p, Need::LGH);
    std::copy(q.g, q.g + p + 1, out.begin());
    return out;
}

FitResult fit_pqml(const CountSeries& series, Window w, int p, double delta) {
    return fit_impl(series, w, p, delta, nullptr);
}

SandwichVariance sandwich(const CountSeries& series, Window w, const GcinarParams& params) {
    params.validate();
    const int p = params.order();
    const int d = p + 1;
    Range r = term_range(series, w, p);
    if (r.terms() < 1) throw InfeasibleError("sandwich: empty window");
    const double m = static_cast<double>(r.terms());

    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(d, d), I = Eigen::MatrixXd::Zero(d, d);
    const count_t* x = series.values().data();
    double xv[kMaxDim];
    xv[0] = 1.0;
    for (index_t t = r.t0; t <= r.t1; ++t) {
        for (int i = 1; i <= p; ++i) xv[i] = static_cast<double>(x[t - i - 1]);
        double xi = params.beta0;
        for (int i = 1; i <= p; ++i) xi += params.betas[static_cast<std::size_t>(i - 1)] * xv[i];
        double X = static_cast<double>(x[t - 1]);
        double rsd = X / xi - 1.0;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j <= i; ++j) {
                J(i, j) += xv[i] * xv[j] / xi;
                I(i, j) += rsd * rsd * xv[i] * xv[j];
            }
    }
    J = Eigen::MatrixXd(J.selfadjointView<Eigen::Lower>()) / m;
    I = Eigen::MatrixXd(I.selfadjointView<Eigen::Lower>()) / m;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
    lu.setThreshold(1e-12);
    SandwichVariance out;
    out.singular_j = !lu.isInvertible();
    Eigen::MatrixXd Jinv = out.singular_j
        ? Eigen::MatrixXd(J.completeOrthogonalDecomposition().pseudoInverse())
        : Eigen::MatrixXd(lu.inverse());
    Eigen::MatrixXd Sigma = Jinv * I * Jinv;

    auto to_nested = [d](const Eigen::MatrixXd& M) {
        std::vector<std::vector<double>> out_m(static_cast<std::size_t>(d),
                                               std::vector<double>(static_cast<std::size_t>(d)));
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) out_m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = M(i, j);
        return out_m;
    };
    out.J = to_nested(J);
    out.I = to_nested(I);
    out.Sigma = to_nested(Sigma);
    out.se.resize(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i)
        out.se[static_cast<std::size_t>(i)] = std::sqrt(std::max(Sigma(i, i), 0.0) / m);
    return out;
}

OrderFit select_order_fit(const CountSeries& series, Window w, int p_max, Criterion criterion,
                          double delta) {
    if (p_max < 1) throw InputError("select_order: p_max < 1");
    // Largest feasible order: at least 2 usable terms after lag anchoring.
    int cap = 0;
    for (int p = 1; p <= p_max; ++p) {
        index_t t0 = std::max(w.k + 1, static_cast<index_t>(p) + 1);
        if (w.len >= p + 2 && w.last() - t0 + 1 >= 2) cap = p;
    }
    if (cap == 0) throw InfeasibleError("select_order: window too short for any order");

    OrderFit best;
    double best_score = std::numeric_limits<double>::infinity();
    double warm[kMaxDim] = {};
    for (int p = 1; p <= cap; ++p) {
        // Warm start from the previous order's optimum with the new lag at 0.
        FitResult fit = fit_impl(series, w, p, delta, p > 1 ? warm : nullptr);
        warm[0] = fit.params.beta0;
        std::copy(fit.params.betas.begin(), fit.params.betas.end(), warm + 1);
        warm[p + 1] = 0.0;
        double penalty = criterion == Criterion::AIC
                             ? 2.0 * (p + 1)
                             : (p + 1) * std::log(static_cast<double>(w.len));
        double score = -2.0 * fit.loglik + penalty;
        if (score < best_score) {
            best_score = score;
            best = OrderFit{p, std::move(fit)};
        }
    }
    return best;
}

int select_order(const CountSeries& series, Window w, int p_max, Criterion criterion,
                 double delta) {
    return select_order_fit(series, w, p_max, criterion, delta).order;
}

}  // namespace lrsm
