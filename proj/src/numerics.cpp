#include "groklab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace groklab {

Grid1D Grid1D::tabulate(const ScalarFn& f, double lo, double hi, int n) {
    Grid1D g;
    g.lo = lo;
    g.hi = hi;
    g.points.resize(n);
    g.values.resize(n);
    for (int i = 0; i < n; ++i) {
        double q = lo + (hi - lo) * i / (n - 1);
        g.points[i] = q;
        g.values[i] = f(q);
    }
    return g;
}

namespace {

struct SimpsonCtx {
    const ScalarFn* f;
    const ScalarFn* logw;
    double shift;
    double tol_abs;
    long evals = 0;
    long budget = 2'000'000;
    bool converged = true;

    double eval(double q) {
        ++evals;
        double lw = (*logw)(q) - shift;
        if (lw < -745.0) return 0.0;  // exp underflow
        return (*f)(q) * std::exp(lw);
    }

    double recurse(double a, double b, double fa, double fm, double fb,
                   double whole, int depth) {
        double m = 0.5 * (a + b);
        double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
        double flm = eval(lm), frm = eval(rm);
        double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        double err = (left + right - whole) / 15.0;
        if (depth <= 0 || evals > budget) {
            converged = false;
            return left + right + err;
        }
        if (std::abs(err) <= tol_abs) return left + right + err;
        return recurse(a, m, fa, flm, fm, left, depth - 1) +
               recurse(m, b, fm, frm, fb, right, depth - 1);
    }
};

}  // namespace

QuadratureResult integrate_weighted_shifted(const ScalarFn& f, const ScalarFn& logweight,
                                            double shift, double lo, double hi,
                                            double rel_tol, int pre_scan) {
    SimpsonCtx ctx{&f, &logweight, shift, 0.0};

    // Pre-scan seeds the recursion so narrow weight spikes are not missed,
    // and provides a first integral estimate to set the absolute tolerance.
    std::vector<double> qs(pre_scan), fv(pre_scan);
    double crude = 0.0;
    for (int i = 0; i < pre_scan; ++i) {
        qs[i] = lo + (hi - lo) * i / (pre_scan - 1);
        fv[i] = ctx.eval(qs[i]);
        if (i > 0) crude += 0.5 * (fv[i] + fv[i - 1]) * (qs[i] - qs[i - 1]);
    }
    double scale = std::max(std::abs(crude), 1e-300);
    ctx.tol_abs = rel_tol * scale / (pre_scan - 1);

    double total = 0.0;
    for (int i = 0; i + 1 < pre_scan; ++i) {
        double a = qs[i], b = qs[i + 1];
        double fa = fv[i], fb = fv[i + 1];
        double fm = ctx.eval(0.5 * (a + b));
        double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        total += ctx.recurse(a, b, fa, fm, fb, whole, 40);
    }

    QuadratureResult r;
    r.value = total;
    r.log_shift = shift;
    r.abs_error = rel_tol * std::abs(total);
    r.converged = ctx.converged;
    r.evaluations = ctx.evals;
    return r;
}

QuadratureResult integrate_weighted(const ScalarFn& f, const ScalarFn& logweight,
                                    double lo, double hi, double rel_tol, int pre_scan) {
    double shift = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < pre_scan; ++i) {
        double q = lo + (hi - lo) * i / (pre_scan - 1);
        shift = std::max(shift, logweight(q));
    }
    return integrate_weighted_shifted(f, logweight, shift, lo, hi, rel_tol, pre_scan);
}

namespace {

Root bisect_root(const ScalarFn& g, double a, double b, double fa, double fb, double tol) {
    double lo = a, hi = b, flo = fa;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = g(mid);
        if (std::abs(fm) < tol && (hi - lo) < tol * (1.0 + std::abs(mid))) {
            return {mid, fm, a, b};
        }
        if (flo * fm <= 0.0) {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    double mid = 0.5 * (lo + hi);
    return {mid, g(mid), a, b};
}

}  // namespace

RootSet find_roots(const ScalarFn& g, double lo, double hi, int n_scan, double tol) {
    RootSet out;
    std::vector<double> x(n_scan + 1), y(n_scan + 1);
    for (int i = 0; i <= n_scan; ++i) {
        x[i] = lo + (hi - lo) * i / n_scan;
        y[i] = g(x[i]);
    }
    int i_min_abs = 0;
    for (int i = 0; i <= n_scan; ++i) {
        if (std::abs(y[i]) < std::abs(y[i_min_abs])) i_min_abs = i;
    }
    bool any_sign_change = false;
    for (int i = 0; i < n_scan; ++i) {
        if (y[i] == 0.0) {
            out.roots.push_back({x[i], 0.0, x[i], x[i]});
        } else if (y[i] * y[i + 1] < 0.0) {
            out.roots.push_back(bisect_root(g, x[i], x[i + 1], y[i], y[i + 1], tol));
            any_sign_change = true;
        }
    }
    if (y[n_scan] == 0.0) out.roots.push_back({x[n_scan], 0.0, x[n_scan], x[n_scan]});

    // Tangency handling: a double root leaves no sign change. Once the scan
    // minimum of |g| is small, rescan around it at doubled resolution; a
    // genuine tangency stays a documented limitation if |g| never crosses.
    if (!any_sign_change && i_min_abs > 0 && i_min_abs < n_scan) {
        double gmax = 0.0;
        for (double v : y) gmax = std::max(gmax, std::abs(v));
        if (std::abs(y[i_min_abs]) < 1e-4 * (1.0 + gmax)) {
            double a = x[std::max(0, i_min_abs - 1)];
            double b = x[std::min(n_scan, i_min_abs + 1)];
            int local_n = 64;
            for (int level = 0; level < 6; ++level, local_n *= 2) {
                double prev = g(a);
                for (int i = 1; i <= local_n; ++i) {
                    double q = a + (b - a) * i / local_n;
                    double cur = g(q);
                    if (prev * cur < 0.0) {
                        out.roots.push_back(
                            bisect_root(g, q - (b - a) / local_n, q, prev, cur, tol));
                        return out;
                    }
                    prev = cur;
                }
            }
        }
    }
    return out;
}

FixedPointResult fixed_point(const VectorFn& map, const Eigen::VectorXd& x0,
                             double damping, double tol, int max_iter,
                             double diverge_guard) {
    FixedPointResult r;
    Eigen::VectorXd x = x0;
    auto push_trace = [&r](const Eigen::VectorXd& v) {
        r.trace_tail.push_back(v);
        if (r.trace_tail.size() > 8) r.trace_tail.erase(r.trace_tail.begin());
    };
    for (int it = 0; it < max_iter; ++it) {
        Eigen::VectorXd fx = map(x);
        double res = (fx - x).lpNorm<Eigen::Infinity>();
        push_trace(x);
        if (res < tol) {
            r.x = x;
            r.converged = true;
            r.iterations = it;
            r.residual = res;
            return r;
        }
        x = (1.0 - damping) * x + damping * fx;
        if (!x.allFinite() || x.lpNorm<Eigen::Infinity>() > diverge_guard) {
            r.x = x;
            r.converged = false;
            r.iterations = it + 1;
            r.residual = std::numeric_limits<double>::infinity();
            return r;
        }
    }
    r.x = x;
    r.iterations = max_iter;
    r.residual = (map(x) - x).lpNorm<Eigen::Infinity>();
    r.converged = r.residual < tol;
    return r;
}

double golden_minimize(const ScalarFn& f, double lo, double hi, double tol) {
    constexpr double invphi = 0.6180339887498948482;
    double a = lo, b = hi;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

std::vector<LocalMinimum> local_minima(const Grid1D& curve, double refine_tol,
                                       const ScalarFn* continuous) {
    std::vector<LocalMinimum> out;
    const auto& q = curve.points;
    const auto& v = curve.values;
    const int n = static_cast<int>(q.size());
    if (n < 3) return out;

    for (int i = 1; i + 1 < n; ++i) {
        if (v[i] < v[i - 1] && v[i] < v[i + 1]) {
            LocalMinimum m;
            if (continuous) {
                m.location = golden_minimize(*continuous, q[i - 1], q[i + 1], refine_tol);
                m.value = (*continuous)(m.location);
                double h = std::max(1e-5, 10.0 * refine_tol);
                m.curvature = ((*continuous)(m.location + h) - 2.0 * m.value +
                               (*continuous)(m.location - h)) /
                              (h * h);
            } else {
                m.location = q[i];
                m.value = v[i];
                double hl = q[i] - q[i - 1], hr = q[i + 1] - q[i];
                m.curvature = 2.0 * (hl * v[i + 1] + hr * v[i - 1] - (hl + hr) * v[i]) /
                              (hl * hr * (hl + hr));
            }
            m.interior = true;
            out.push_back(m);
        }
    }
    if (v[0] < v[1]) out.push_back({q[0], v[0], 0.0, false});
    if (v[n - 1] < v[n - 2]) out.push_back({q[n - 1], v[n - 1], 0.0, false});
    return out;
}

}  // namespace groklab
