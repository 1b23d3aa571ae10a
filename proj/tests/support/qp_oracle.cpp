#include "support/qp_oracle.hpp"

#include <algorithm>
#include <cmath>

namespace sentinel::testing {

namespace {

double clip(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

// project v onto {a : 0 <= a <= C, y^T a = 0}; y^T clip(v - t*y) is monotone
// non-increasing in t, so bisection finds the feasible multiplier
std::vector<double> project(const std::vector<double>& v, const std::vector<double>& C,
                            const std::vector<int8_t>& y) {
    const size_t n = v.size();
    auto residual = [&](double t) {
        double r = 0.0;
        for (size_t i = 0; i < n; ++i) r += y[i] * clip(v[i] - t * y[i], 0.0, C[i]);
        return r;
    };
    double span = 1.0;
    for (size_t i = 0; i < n; ++i) span = std::max(span, std::fabs(v[i]) + C[i]);
    double lo = -2.0 * span, hi = 2.0 * span;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (residual(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    double t = 0.5 * (lo + hi);
    std::vector<double> out(n);
    for (size_t i = 0; i < n; ++i) out[i] = clip(v[i] - t * y[i], 0.0, C[i]);
    return out;
}

double rbf(const std::vector<double>& a, const std::vector<double>& b, double gamma) {
    double d2 = 0.0;
    for (size_t k = 0; k < a.size(); ++k) {
        double d = a[k] - b[k];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

}  // namespace

DualSolution solve_dual_reference(const std::vector<std::vector<double>>& X,
                                  const std::vector<Label>& y_in, const KernelParams& params,
                                  int iterations) {
    const size_t n = X.size();
    std::vector<int8_t> y(n);
    std::vector<double> C(n);
    for (size_t i = 0; i < n; ++i) {
        y[i] = y_in[i] == Label::trojan ? 1 : -1;
        C[i] = params.C * params.class_weight(y_in[i]);
    }

    std::vector<std::vector<double>> Q(n, std::vector<double>(n));
    double row_sum_max = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (size_t j = 0; j < n; ++j) {
            Q[i][j] = y[i] * y[j] * rbf(X[i], X[j], params.gamma);
            row += std::fabs(Q[i][j]);
        }
        row_sum_max = std::max(row_sum_max, row);
    }
    double step = 1.0 / row_sum_max;  // 1/||Q||_inf bounds the spectral norm

    auto objective = [&](const std::vector<double>& a) {
        double lin = 0.0, quad = 0.0;
        for (size_t i = 0; i < n; ++i) {
            lin += a[i];
            for (size_t j = 0; j < n; ++j) quad += a[i] * Q[i][j] * a[j];
        }
        return lin - 0.5 * quad;
    };

    std::vector<double> a(n, 0.0), grad(n), trial(n);
    a = project(a, C, y);
    for (int it = 0; it < iterations; ++it) {
        for (size_t i = 0; i < n; ++i) {
            double qi = 0.0;
            for (size_t j = 0; j < n; ++j) qi += Q[i][j] * a[j];
            grad[i] = 1.0 - qi;
        }
        for (size_t i = 0; i < n; ++i) trial[i] = a[i] + step * grad[i];
        trial = project(trial, C, y);
        double moved = 0.0;
        for (size_t i = 0; i < n; ++i) moved = std::max(moved, std::fabs(trial[i] - a[i]));
        a = trial;
        if (moved < 1e-12) break;
    }

    // polish: cyclic sweeps of exact two-variable maximizations along the
    // feasible directions until no sweep makes progress
    double prev = objective(a);
    for (int sweep = 0; sweep < 10000; ++sweep) {
        for (size_t i = 0; i < n; ++i) {
            for (size_t j = i + 1; j < n; ++j) {
                // direction d with d_i = y_i, d_j = -y_j keeps y^T a fixed
                double gi = 0.0, gj = 0.0;
                for (size_t t = 0; t < n; ++t) {
                    gi += Q[i][t] * a[t];
                    gj += Q[j][t] * a[t];
                }
                double deriv = y[i] * (1.0 - gi) - y[j] * (1.0 - gj);
                double curv = Q[i][i] + Q[j][j] - 2.0 * y[i] * y[j] * Q[i][j];
                if (curv <= 1e-15) curv = 1e-15;
                double t_step = deriv / curv;
                double lo = -(y[i] > 0 ? a[i] : C[i] - a[i]);
                double hi = (y[i] > 0 ? C[i] - a[i] : a[i]);
                lo = std::max(lo, -(y[j] > 0 ? C[j] - a[j] : a[j]));
                hi = std::min(hi, (y[j] > 0 ? a[j] : C[j] - a[j]));
                t_step = clip(t_step, lo, hi);
                if (t_step == 0.0) continue;
                a[i] = clip(a[i] + y[i] * t_step, 0.0, C[i]);
                a[j] = clip(a[j] - y[j] * t_step, 0.0, C[j]);
            }
        }
        double cur = objective(a);
        if (cur - prev < 1e-13 * std::max(1.0, std::fabs(cur))) break;
        prev = cur;
    }

    DualSolution out;
    out.alpha = a;
    out.objective = objective(a);
    return out;
}

double dual_objective_of_model(const TrainedSvm& m) {
    // alpha_i = |dual_coefs_i|; objective over support vectors only, the rest
    // of the alphas are zero
    double lin = 0.0, quad = 0.0;
    const size_t n = m.support_vectors.size();
    for (size_t i = 0; i < n; ++i) {
        lin += std::fabs(m.dual_coefs[i]);
        for (size_t j = 0; j < n; ++j) {
            quad += m.dual_coefs[i] * m.dual_coefs[j] *
                    rbf(m.support_vectors[i], m.support_vectors[j], m.params.gamma);
        }
    }
    return lin - 0.5 * quad;
}

}  // namespace sentinel::testing
