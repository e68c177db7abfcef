#include "groklab/ts_theory.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace groklab {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSqrt6 = 2.449489742783178098;

double action_prefactor(const TSConfig& cfg) {
    double s4 = cfg.sigma2 * cfg.sigma2;
    return 2.0 * cfg.n * static_cast<double>(cfg.n) * cfg.sigma_a2 /
           (kPi * s4 * cfg.d * static_cast<double>(cfg.N));
}

// Scaled action S/d as a function of q = w.w*; |w|^2 -> sigma_w^2 + q^2.
double action_scaled(double q, const DiscrepancyTS& disc, const TSConfig& cfg, double A) {
    double q2 = q * q;
    double D = 1.0 + 2.0 * (cfg.sigma_w2 + q2);
    double bracket = disc.b - 2.0 * disc.c * q2 / D;
    return q2 / (2.0 * cfg.sigma_w2) - A * q2 / D * bracket * bracket;
}

// Integrands of the three kernel moments in the normalized {H1, H3/sqrt(6)}
// basis. The diagonal entries are squares of the closed-form erf moments
// (I0 and its cubic partner), so the matrix is a Gram matrix.
void kernel_integrands(double q, double sigma_w2, double out[3]) {
    double q2 = q * q;
    double D = 1.0 + 2.0 * (sigma_w2 + q2);
    out[0] = 4.0 * q2 / (kPi * D);
    out[1] = -8.0 * q2 * q2 / (kSqrt6 * kPi * D * D);
    out[2] = 8.0 * q2 * q2 * q2 / (3.0 * kPi * D * D * D);
}

struct GaussHermite {
    std::vector<double> nodes;
    std::vector<double> weights;  // sum to 1, for averages against N(0,1)
};

// Golub-Welsch on the probabilists' Hermite recurrence.
GaussHermite gauss_hermite(int n) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        double b = std::sqrt(static_cast<double>(k));
        J(k, k - 1) = b;
        J(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    GaussHermite gh;
    gh.nodes.resize(n);
    gh.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        gh.nodes[i] = es.eigenvalues()[i];
        double v = es.eigenvectors()(0, i);
        gh.weights[i] = v * v;
    }
    return gh;
}

const GaussHermite& gh_cached(int n) {
    static thread_local int cached_n = -1;
    static thread_local GaussHermite gh;
    if (cached_n != n) {
        gh = gauss_hermite(n);
        cached_n = n;
    }
    return gh;
}

struct Basin {
    double center = 0.0;
    double value_full = 0.0;      // S at the center, full nats
    double curvature_full = 0.0;  // S'' at the center
    double width = 0.0;
    bool trivial = false;
};

struct BasinSet {
    std::vector<Basin> basins;
    bool has_trivial = false;
    bool has_nontrivial = false;
    double trivial_value = 0.0;
    double best_nontrivial_value = 0.0;
    double best_nontrivial_center = 0.0;
};

double qmax_of(const TSConfig& cfg, double factor) {
    return factor * std::max(1.0, std::sqrt(cfg.sigma_w2));
}

// Minima of the scaled action on q >= 0 (the action is even).
BasinSet find_basins(const DiscrepancyTS& disc, const TSConfig& cfg,
                     const TsSolverOptions& opts) {
    double A = action_prefactor(cfg);
    auto Shat = [&](double q) { return action_scaled(q, disc, cfg, A); };
    double qmax = qmax_of(cfg, opts.qmax_factor);
    const int n = 1024;

    BasinSet set;
    const double h = 1e-4;
    auto add_basin = [&](double center, bool trivial) {
        Basin b;
        b.center = center;
        b.trivial = trivial;
        b.value_full = cfg.d * Shat(center);
        b.curvature_full = cfg.d * (Shat(center + h) - 2.0 * Shat(center) + Shat(center - h)) / (h * h);
        double w = (b.curvature_full > 0.0) ? 1.0 / std::sqrt(b.curvature_full)
                                            : opts.width_cap;
        b.width = std::min(w, opts.width_cap);
        set.basins.push_back(b);
    };

    double s0pp = (Shat(h) - 2.0 * Shat(0.0) + Shat(-h)) / (h * h);
    if (s0pp > 0.0) {
        add_basin(0.0, true);
        set.has_trivial = true;
        set.trivial_value = set.basins.back().value_full;
    }

    std::vector<double> qs(n + 1), sv(n + 1);
    for (int i = 0; i <= n; ++i) {
        qs[i] = qmax * i / n;
        sv[i] = Shat(qs[i]);
    }
    double best = std::numeric_limits<double>::infinity();
    for (int i = 1; i < n; ++i) {
        if (sv[i] < sv[i - 1] && sv[i] < sv[i + 1]) {
            double q = golden_minimize(Shat, qs[i - 1], qs[i + 1], 1e-10);
            if (q < 1e-6) continue;  // the trivial basin, caught by curvature above
            add_basin(q, false);
            set.has_nontrivial = true;
            if (set.basins.back().value_full < best) {
                best = set.basins.back().value_full;
                set.best_nontrivial_value = best;
                set.best_nontrivial_center = q;
            }
        }
    }
    return set;
}

// Kernel moments under a Gaussian mixture: (1-omega) on the trivial basin,
// omega split across the nontrivial basins by their own Laplace masses.
Eigen::Matrix2d qtilde_mixture(const DiscrepancyTS& disc, const TSConfig& cfg,
                               const TsSolverOptions& opts, const BasinSet& set,
                               double omega) {
    const auto& gh = gh_cached(opts.gh_order);
    auto basin_avg = [&](const Basin& b, double out[3]) {
        double acc[3] = {0.0, 0.0, 0.0};
        for (size_t k = 0; k < gh.nodes.size(); ++k) {
            double q = b.center + b.width * gh.nodes[k];
            double f[3];
            kernel_integrands(q, cfg.sigma_w2, f);
            for (int j = 0; j < 3; ++j) acc[j] += gh.weights[k] * f[j];
        }
        for (int j = 0; j < 3; ++j) out[j] = acc[j];
    };

    double m[3] = {0.0, 0.0, 0.0};
    double w_nontrivial_total = 0.0;
    double ref = std::numeric_limits<double>::infinity();
    for (const auto& b : set.basins)
        if (!b.trivial) ref = std::min(ref, b.value_full);
    for (const auto& b : set.basins)
        if (!b.trivial) w_nontrivial_total += b.width * std::exp(-(b.value_full - ref));

    for (const auto& b : set.basins) {
        double share;
        if (b.trivial) {
            share = set.has_nontrivial ? (1.0 - omega) : 1.0;
        } else {
            share = (set.has_trivial ? omega : 1.0) * b.width *
                    std::exp(-(b.value_full - ref)) / w_nontrivial_total;
        }
        if (share <= 0.0) continue;
        double avg[3];
        basin_avg(b, avg);
        for (int j = 0; j < 3; ++j) m[j] += share * avg[j];
    }

    Eigen::Matrix2d Q;
    Q << m[0], m[1], m[1], m[2];
    return cfg.sigma_a2 * Q;
}

}  // namespace

double integral_I0(double q, double wnorm2) {
    return 2.0 / std::sqrt(kPi) * q / std::sqrt(1.0 + 2.0 * wnorm2);
}

double integral_I1(double q, double wnorm2) {
    double D = 1.0 + 2.0 * wnorm2;
    return 2.0 / std::sqrt(kPi) * q / std::sqrt(D) * (3.0 - 2.0 * q * q / D);
}

double action_ts(double q, const DiscrepancyTS& disc, const TSConfig& cfg) {
    return cfg.d * action_scaled(q, disc, cfg, action_prefactor(cfg));
}

Eigen::Matrix2d qtilde_matrix(const DiscrepancyTS& disc, const TSConfig& cfg,
                              const TsSolverOptions& opts) {
    // Exact quadrature route. Integration is split at midpoints between the
    // action minima so the adaptive rule cannot miss a narrow well.
    double A = action_prefactor(cfg);
    auto set = find_basins(disc, cfg, opts);
    double qmax = qmax_of(cfg, opts.qmax_factor);

    std::vector<double> centers;
    for (const auto& b : set.basins) {
        centers.push_back(b.center);
        if (b.center > 0.0) centers.push_back(-b.center);
    }
    centers.push_back(0.0);
    std::sort(centers.begin(), centers.end());
    std::vector<double> cuts{-qmax};
    for (size_t i = 0; i + 1 < centers.size(); ++i)
        cuts.push_back(0.5 * (centers[i] + centers[i + 1]));
    cuts.push_back(qmax);

    auto logw = [&](double q) { return -cfg.d * action_scaled(q, disc, cfg, A); };
    double shift = -std::numeric_limits<double>::infinity();
    for (const auto& b : set.basins) shift = std::max(shift, -b.value_full);

    double z = 0.0, m[3] = {0.0, 0.0, 0.0};
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] <= cuts[i]) continue;
        z += integrate_weighted_shifted([](double) { return 1.0; }, logw, shift, cuts[i],
                                        cuts[i + 1], opts.quad_rel_tol)
                 .value;
        for (int j = 0; j < 3; ++j) {
            m[j] += integrate_weighted_shifted(
                        [&, j](double q) {
                            double f[3];
                            kernel_integrands(q, cfg.sigma_w2, f);
                            return f[j];
                        },
                        logw, shift, cuts[i], cuts[i + 1], opts.quad_rel_tol)
                        .value;
        }
    }
    Eigen::Matrix2d Q;
    Q << m[0] / z, m[1] / z, m[1] / z, m[2] / z;
    return cfg.sigma_a2 * Q;
}

DiscrepancyTS gpr_update(const Eigen::Matrix2d& qtilde, const TSConfig& cfg) {
    if (cfg.n < 1) throw std::invalid_argument("gpr_update: needs n >= 1");
    double lam = cfg.sigma2 / static_cast<double>(cfg.n);
    Eigen::Matrix2d M = qtilde + lam * Eigen::Matrix2d::Identity();
    if (std::abs(M.determinant()) < 1e-300)
        throw std::runtime_error("gpr_update: singular kernel matrix (sigma^2/n = 0 with rank-deficient kernel?)");
    Eigen::Vector2d y(1.0, kSqrt6 * cfg.eps);
    Eigen::Vector2d t = lam * M.inverse() * y;
    return {t[0], t[1] / kSqrt6};
}

namespace {

struct InnerResult {
    DiscrepancyTS disc;
    BasinSet basins;
    bool converged = false;
    bool feasible = false;  // nontrivial basins exist at the solution
    int iterations = 0;
    double residual = 0.0;
};

// (b, c) self-consistency at a frozen droplet weight. With the mixture
// weights fixed, the map is mildly conditioned and a damped fixed point
// with a Newton fallback converges.
InnerResult inner_solve(const TSConfig& cfg, const TsSolverOptions& opts, double omega,
                        DiscrepancyTS start) {
    auto map2 = [&](const Eigen::Vector2d& x) -> Eigen::Vector2d {
        DiscrepancyTS disc{x[0], x[1]};
        auto set = find_basins(disc, cfg, opts);
        auto Q = qtilde_mixture(disc, cfg, opts, set, omega);
        auto nd = gpr_update(Q, cfg);
        return {nd.b, nd.c};
    };

    Eigen::Vector2d x(start.b, start.c);
    auto fp = fixed_point([&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return map2(v); },
                          x, opts.fp_damping, opts.fp_tol, opts.fp_max_iter);
    x = fp.x;
    bool ok = fp.converged;
    int iters = fp.iterations;

    if (!ok) {
        // Newton with finite-difference Jacobian and residual backtracking.
        for (int it = 0; it < 60 && !ok; ++it) {
            Eigen::Vector2d F = map2(x) - x;
            if (F.lpNorm<Eigen::Infinity>() < opts.fp_tol) {
                ok = true;
                break;
            }
            Eigen::Matrix2d J;
            const double hstep = 1e-8;
            for (int j = 0; j < 2; ++j) {
                Eigen::Vector2d xp = x;
                xp[j] += hstep;
                J.col(j) = ((map2(xp) - xp) - F) / hstep;
            }
            Eigen::Vector2d dx = J.fullPivLu().solve(-F);
            double t = 1.0, f0 = F.norm();
            while (t > 1e-9) {
                Eigen::Vector2d xn = x + t * dx;
                if ((map2(xn) - xn).norm() < f0) break;
                t *= 0.5;
            }
            x += t * dx;
            ++iters;
        }
    }

    InnerResult r;
    r.disc = {x[0], x[1]};
    r.basins = find_basins(r.disc, cfg, opts);
    r.converged = ok || (map2(x) - x).lpNorm<Eigen::Infinity>() < 10.0 * opts.fp_tol;
    r.residual = (map2(x) - x).lpNorm<Eigen::Infinity>();
    r.feasible = r.basins.has_nontrivial;
    r.iterations = iters;
    return r;
}

double log_odds(double w) {
    w = std::clamp(w, 1e-300, 1.0 - 1e-16);
    return std::log(w) - std::log1p(-w);
}

// Laplace-mass droplet weight implied by the basin structure: the pair of
// nontrivial minima (+-q*) against the trivial basin.
double implied_weight(const BasinSet& set) {
    if (!set.has_nontrivial) return 0.0;
    if (!set.has_trivial) return 1.0;
    double w0 = 0.0, wplus = 0.0;
    double ref = std::min(set.trivial_value, set.best_nontrivial_value);
    for (const auto& b : set.basins) {
        double mass = b.width * std::exp(-(b.value_full - ref));
        if (b.trivial)
            w0 += mass;
        else
            wplus += 2.0 * mass;  // the +-q* pair
    }
    return wplus / (w0 + wplus);
}

TsSolution pack_solution(const InnerResult& in, double omega) {
    TsSolution s;
    s.disc = in.disc;
    s.converged = in.converged;
    s.residual = in.residual;
    s.iterations = in.iterations;
    s.droplet_weight = omega;
    if (in.basins.has_nontrivial && in.basins.has_trivial) {
        s.gap = in.basins.best_nontrivial_value - in.basins.trivial_value;
        s.qstar = in.basins.best_nontrivial_center;
    } else if (in.basins.has_nontrivial) {
        s.gap = -std::numeric_limits<double>::infinity();
        s.qstar = in.basins.best_nontrivial_center;
    } else {
        s.gap = std::numeric_limits<double>::infinity();
        s.qstar = 0.0;
    }
    return s;
}

TsSolveResult solve_bc_mixture(const TSConfig& cfg, const DiscrepancyTS& init,
                               const TsSolverOptions& opts) {
    TsSolveResult out;

    // Trivial candidate: all mass in the q=0 basin.
    InnerResult trivial = inner_solve(cfg, opts, 0.0, init);
    if (trivial.converged && !trivial.basins.has_nontrivial) {
        out.solutions.push_back(pack_solution(trivial, 0.0));
        out.trace.push_back("trivial branch: no nontrivial minima");
    }

    // Droplet branches: self-consistency in the droplet weight omega,
    // solved as a scalar root problem in log-odds. All stiffness of the
    // first-order transition is confined to this one monotone direction.
    auto F = [&](double omega, DiscrepancyTS start) -> std::pair<double, InnerResult> {
        InnerResult in = inner_solve(cfg, opts, omega, start);
        if (!in.feasible || !in.converged)
            return {std::numeric_limits<double>::quiet_NaN(), in};
        return {log_odds(implied_weight(in.basins)) - log_odds(omega), in};
    };

    std::vector<double> grid;
    for (int i = 0; i < opts.omega_scan; ++i) {
        double t = static_cast<double>(i) / (opts.omega_scan - 1);
        grid.push_back(std::exp(std::log(1e-7) + t * (std::log(0.995) - std::log(1e-7))));
    }

    DiscrepancyTS carry = trivial.converged ? trivial.disc : init;
    double prev_omega = std::numeric_limits<double>::quiet_NaN();
    double prev_F = std::numeric_limits<double>::quiet_NaN();
    InnerResult prev_in;
    for (double omega : grid) {
        auto [val, in] = F(omega, carry);
        if (std::isnan(val)) {
            prev_omega = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        carry = in.disc;
        if (!std::isnan(prev_omega) && prev_F > 0.0 && val <= 0.0) {
            // bisect in log-odds space
            double lo = prev_omega, hi = omega;
            DiscrepancyTS ws = prev_in.disc;
            InnerResult root_in = in;
            double root_omega = omega;
            for (int it = 0; it < 60; ++it) {
                double mid = 1.0 / (1.0 + std::exp(-0.5 * (log_odds(lo) + log_odds(hi))));
                auto [vm, im] = F(mid, ws);
                if (std::isnan(vm)) break;
                ws = im.disc;
                if (vm > 0.0)
                    lo = mid;
                else {
                    hi = mid;
                    root_in = im;
                    root_omega = mid;
                }
                if (std::abs(log_odds(hi) - log_odds(lo)) < 1e-10) break;
            }
            auto sol = pack_solution(root_in, root_omega);
            out.solutions.push_back(sol);
            std::ostringstream os;
            os << "droplet branch: omega=" << root_omega << " gap=" << sol.gap;
            out.trace.push_back(os.str());
        }
        prev_omega = omega;
        prev_F = val;
        prev_in = in;
    }

    if (out.solutions.empty()) {
        // Nothing self-consistent found: report the trivial attempt honestly.
        out.solutions.push_back(pack_solution(trivial, 0.0));
        out.trace.push_back("no self-consistent branch located; returning trivial attempt");
    }
    return out;
}

TsSolveResult solve_bc_quadrature(const TSConfig& cfg, const DiscrepancyTS& init,
                                  const TsSolverOptions& opts) {
    TsSolveResult out;
    auto map2 = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        DiscrepancyTS d{x[0], x[1]};
        auto nd = gpr_update(qtilde_matrix(d, cfg, opts), cfg);
        Eigen::VectorXd v(2);
        v << nd.b, nd.c;
        return v;
    };

    std::vector<DiscrepancyTS> starts{init, {0.05, 0.05 * cfg.eps}};
    for (const auto& s0 : starts) {
        Eigen::VectorXd x0(2);
        x0 << s0.b, s0.c;
        FixedPointResult fp;
        for (double damping : {opts.fp_damping, 0.2, 0.05}) {
            fp = fixed_point(map2, x0, damping, opts.fp_tol, opts.fp_max_iter);
            if (fp.converged) break;
            x0 = fp.x;
        }
        TsSolution sol;
        sol.disc = {fp.x[0], fp.x[1]};
        sol.converged = fp.converged;
        sol.residual = fp.residual;
        sol.iterations = fp.iterations;
        auto set = find_basins(sol.disc, cfg, opts);
        sol.droplet_weight = implied_weight(set);
        sol.gap = set.has_nontrivial && set.has_trivial
                      ? set.best_nontrivial_value - set.trivial_value
                      : std::numeric_limits<double>::infinity();
        sol.qstar = set.best_nontrivial_center;
        bool dup = false;
        for (const auto& got : out.solutions)
            if (std::abs(got.disc.b - sol.disc.b) < 1e-7 && std::abs(got.disc.c - sol.disc.c) < 1e-7)
                dup = true;
        if (!dup) out.solutions.push_back(sol);
        out.trace.push_back(fp.converged ? "quadrature branch converged"
                                         : "quadrature branch did not converge");
    }
    return out;
}

}  // namespace

std::string to_string(PhaseLabel p) {
    switch (p) {
        case PhaseLabel::GFL: return "GFL";
        case PhaseLabel::GMFL_I: return "GMFL-I";
        case PhaseLabel::GMFL_II: return "GMFL-II";
    }
    return "?";
}

TsSolveResult solve_bc(const TSConfig& cfg, const DiscrepancyTS& init,
                       const TsSolverOptions& opts) {
    cfg.validate();
    return opts.mode == TsSolverMode::Mixture ? solve_bc_mixture(cfg, init, opts)
                                              : solve_bc_quadrature(cfg, init, opts);
}

ActionCurve action_curve(const DiscrepancyTS& disc, const TSConfig& cfg, int n_points,
                         double qmax_factor) {
    ActionCurve c;
    c.cfg = cfg;
    c.disc = disc;
    double qmax = qmax_of(cfg, qmax_factor);
    c.order_parameter_grid.resize(n_points);
    c.action_values.resize(n_points);
    for (int i = 0; i < n_points; ++i) {
        double q = -qmax + 2.0 * qmax * i / (n_points - 1);
        c.order_parameter_grid[i] = q;
        c.action_values[i] = action_ts(q, disc, cfg);
    }
    return c;
}

SaddleSet find_saddles_ts(const DiscrepancyTS& disc, const TSConfig& cfg, double qmax_factor) {
    double factor = qmax_factor;
    SaddleSet set;
    for (int attempt = 0; attempt < 4; ++attempt) {
        set = SaddleSet{};
        set.scale = static_cast<double>(cfg.d);
        auto fn = [&](double q) { return action_ts(q, disc, cfg); };
        double qmax = qmax_of(cfg, factor);
        Grid1D curve = Grid1D::tabulate(fn, -qmax, qmax, 2049);
        ScalarFn cont = fn;
        auto mins = local_minima(curve, 1e-10, &cont);
        bool boundary_min = false;
        double s0 = fn(0.0);
        double gap = std::numeric_limits<double>::infinity();
        for (const auto& m : mins) {
            if (!m.interior) {
                boundary_min = true;
                continue;
            }
            set.minima.push_back({m.location, m.value, m.curvature, true});
            if (std::abs(m.location) > 1e-6 * std::max(1.0, std::sqrt(cfg.sigma_w2))) {
                set.has_nontrivial = true;
                gap = std::min(gap, m.value - s0);
            }
        }
        set.global_gap = set.has_nontrivial ? gap : std::numeric_limits<double>::infinity();
        if (!boundary_min) break;
        factor *= 1.5;  // boundary minimum: extend the window and rescan
    }
    return set;
}

PhaseReport classify_phase_ts(const SaddleSet& saddles, double window) {
    PhaseReport r;
    if (!saddles.has_nontrivial) {
        r.label = PhaseLabel::GFL;
        r.gap = std::numeric_limits<double>::infinity();
        r.droplet_weight = 0.0;
        return r;
    }
    r.gap = saddles.global_gap;
    double scaled = saddles.global_gap / std::max(1.0, saddles.scale);
    if (scaled > window)
        r.label = PhaseLabel::GFL;
    else if (scaled >= -window)
        r.label = PhaseLabel::GMFL_I;
    else
        r.label = PhaseLabel::GMFL_II;

    // Laplace masses; boundary (non-interior) minima are ignored.
    double ref = std::numeric_limits<double>::infinity();
    for (const auto& m : saddles.minima) ref = std::min(ref, m.value);
    double z_trivial = 0.0, z_plus = 0.0;
    for (const auto& m : saddles.minima) {
        if (!m.interior) continue;
        double width = m.curvature > 0.0 ? 1.0 / std::sqrt(m.curvature) : 1.0;
        double mass = width * std::exp(-(m.value - ref));
        if (std::abs(m.location) < 1e-6)
            z_trivial += mass;
        else
            z_plus += mass;
    }
    r.droplet_weight = (z_trivial + z_plus) > 0.0 ? z_plus / (z_trivial + z_plus) : 0.0;
    return r;
}

std::pair<double, double> predicted_components(const DiscrepancyTS& disc, const TSConfig& cfg) {
    return {1.0 - disc.b, cfg.eps - disc.c};
}

namespace {

TsScanRow make_row(const TSConfig& cfg, double sigma2, const TsSolution& sol, int branch,
                   const TsSolverOptions& opts) {
    TSConfig c = cfg;
    c.sigma2 = sigma2;
    TsScanRow row;
    row.sigma2 = sigma2;
    row.u = effective_interaction(c);
    row.disc = sol.disc;
    auto [h1, h3] = predicted_components(sol.disc, c);
    row.h1 = h1;
    row.h3 = h3;
    row.gap = sol.gap;
    row.droplet_weight = sol.droplet_weight;
    row.branch_id = branch;
    row.converged = sol.converged;
    auto saddles = find_saddles_ts(sol.disc, c, opts.qmax_factor);
    row.phase = classify_phase_ts(saddles, opts.phase_window).label;
    return row;
}

// Continuation: pick the solution nearest the carry state, preferring the
// most-droplet-rich branch on ties in the descending direction.
const TsSolution& pick_nearest(const TsSolveResult& res, const DiscrepancyTS& carry) {
    size_t best = 0;
    double bestd = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < res.solutions.size(); ++i) {
        const auto& s = res.solutions[i];
        double d2 = (s.disc.b - carry.b) * (s.disc.b - carry.b) +
                    (s.disc.c - carry.c) * (s.disc.c - carry.c);
        if (d2 < bestd) {
            bestd = d2;
            best = i;
        }
    }
    return res.solutions[best];
}

}  // namespace

TsScanResult scan_sigma_ts(const TSConfig& cfg, const std::vector<double>& sigma2_grid,
                           const TsSolverOptions& opts) {
    TsScanResult out;
    std::vector<double> down = sigma2_grid;
    std::sort(down.begin(), down.end(), std::greater<double>());
    std::vector<double> up(down.rbegin(), down.rend());

    auto run_dir = [&](const std::vector<double>& grid, int branch, DiscrepancyTS carry) {
        std::vector<TsScanRow> rows;
        for (double s2 : grid) {
            TSConfig c = cfg;
            c.sigma2 = s2;
            auto res = solve_bc(c, carry, opts);
            const auto& sol = pick_nearest(res, carry);
            carry = sol.disc;
            rows.push_back(make_row(cfg, s2, sol, branch, opts));
        }
        return rows;
    };

    auto rows_down = run_dir(down, 0, {1.0, cfg.eps});
    auto rows_up = run_dir(up, 1, {0.05, 0.05 * cfg.eps});

    // Jump statistics on the descending branch.
    double best_jump = 0.0, best_s2 = 0.0;
    for (size_t i = 0; i + 1 < rows_down.size(); ++i) {
        double dh = std::abs(rows_down[i + 1].h3 - rows_down[i].h3);
        if (dh > best_jump) {
            best_jump = dh;
            best_s2 = 0.5 * (rows_down[i].sigma2 + rows_down[i + 1].sigma2);
        }
    }
    out.jump_sigma2 = best_s2;
    out.jump_height = best_jump;

    for (size_t i = 0; i < rows_down.size(); ++i) {
        const auto& d = rows_down[i];
        const auto& u2 = rows_up[rows_up.size() - 1 - i];
        if (std::abs(d.h3 - u2.h3) > 1e-6) out.hysteresis = true;
    }
    out.rows = std::move(rows_down);
    out.rows.insert(out.rows.end(), rows_up.begin(), rows_up.end());
    return out;
}

CriticalU critical_u(const TSConfig& cfg, double sigma2_lo, double sigma2_hi,
                     const TsSolverOptions& opts) {
    CriticalU result;
    result.note =
        "u convention: u = n^2 sigma_a^2 / ((sigma^2)^2 d N); u_c is quoted at the first "
        "sigma^2 (descending) whose solved branch holds a nontrivial minimum inside the "
        "degeneracy window";

    auto solved_has_well = [&](double s2, DiscrepancyTS& carry) {
        TSConfig c = cfg;
        c.sigma2 = s2;
        auto res = solve_bc(c, carry, opts);
        const auto& sol = pick_nearest(res, carry);
        carry = sol.disc;
        return std::isfinite(sol.gap) &&
               sol.gap / static_cast<double>(cfg.d) <= opts.phase_window;
    };

    // Descend until the well first appears, then bisect the bracket.
    const int steps = 40;
    DiscrepancyTS carry{1.0, cfg.eps};
    double prev = sigma2_hi;
    bool prev_has = solved_has_well(sigma2_hi, carry);
    if (prev_has) {
        result.note += "; transition above the scan range";
        return result;
    }
    double found_at = -1.0;
    for (int i = 1; i <= steps; ++i) {
        double s2 = sigma2_hi + (sigma2_lo - sigma2_hi) * i / steps;
        if (solved_has_well(s2, carry)) {
            found_at = s2;
            break;
        }
        prev = s2;
    }
    if (found_at < 0.0) {
        result.note += "; no transition found in scan range";
        return result;
    }
    double lo = found_at, hi = prev;  // lo has the well, hi does not
    for (int it = 0; it < 40 && (hi - lo) > 1e-6; ++it) {
        double mid = 0.5 * (lo + hi);
        DiscrepancyTS c2 = carry;
        if (solved_has_well(mid, c2))
            lo = mid;
        else
            hi = mid;
    }
    TSConfig c = cfg;
    c.sigma2 = 0.5 * (lo + hi);
    result.sigma2_c = c.sigma2;
    result.u_c = effective_interaction(c);
    result.found = true;
    return result;
}

std::string ts_scan_csv(const TsScanResult& scan) {
    std::ostringstream os;
    os.precision(17);
    os << "sigma2,u,b,c,h1,h3,phase,gap,droplet_weight,branch_id,converged\n";
    for (const auto& r : scan.rows) {
        os << r.sigma2 << "," << r.u << "," << r.disc.b << "," << r.disc.c << "," << r.h1 << ","
           << r.h3 << "," << to_string(r.phase) << "," << r.gap << "," << r.droplet_weight << ","
           << r.branch_id << "," << (r.converged ? 1 : 0) << "\n";
    }
    return os.str();
}

std::string action_curve_csv(const ActionCurve& curve) {
    std::ostringstream os;
    os.precision(17);
    os << "q,S\n";
    for (size_t i = 0; i < curve.order_parameter_grid.size(); ++i)
        os << curve.order_parameter_grid[i] << "," << curve.action_values[i] << "\n";
    return os.str();
}

}  // namespace groklab
