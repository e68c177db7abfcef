#include "groklab/mod_theory.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace groklab {

namespace {

// U at a = 1; U(a) = C a^2 / 1 with C folded over sigma^4 already.
double coupling_scale(const ModConfig& cfg) {
    double s4 = cfg.sigma2 * cfg.sigma2;
    return 2.0 * cfg.sigma_a2 * static_cast<double>(cfg.P) * cfg.P /
           (static_cast<double>(cfg.N) * s4);
}

// 4 e^{-S} / (1 + 4 e^{-S}) without overflow for any S.
double saddle_mass_fraction(double S) {
    if (S > 700.0) return 4.0 * std::exp(-S);  // underflows to 0 eventually, fine
    return 4.0 / (std::exp(S) + 4.0);
}

}  // namespace

ModeCouplings mode_couplings(double a_mag, const ModConfig& cfg) {
    return {coupling_scale(cfg) * a_mag * a_mag, cfg.gamma, cfg.P};
}

double fourier_action(double x, double y, double a_mag, const ModConfig& cfg) {
    if (x < 0.0 || y < 0.0)
        throw std::invalid_argument("fourier_action: squared magnitudes must be >= 0");
    double U = coupling_scale(cfg) * a_mag * a_mag;
    return cfg.P * (0.5 * (x + y) - U * x * y +
                    cfg.gamma / 6.0 * (x * x * x + y * y * y));
}

std::optional<SaddlePair> saddle_pair(double a_mag, const ModConfig& cfg) {
    double U = coupling_scale(cfg) * a_mag * a_mag;
    double disc = U * U - cfg.gamma;
    if (disc < 0.0) return std::nullopt;
    double s = std::sqrt(disc);
    return SaddlePair{(U + s) / cfg.gamma, (U - s) / cfg.gamma};
}

double lambda_of_a(double a_mag, const ModConfig& cfg) {
    auto sp = saddle_pair(a_mag, cfg);
    if (!sp) return 0.0;
    double x = sp->w_plus2;
    double S = fourier_action(x, x, a_mag, cfg);
    return cfg.sigma_a2 * x * x * saddle_mass_fraction(S);
}

RootSet solve_a(const ModConfig& cfg, int n_scan, double tol) {
    cfg.validate();
    auto g = [&](double a) {
        return a - cfg.sigma2 / (lambda_of_a(a, cfg) + cfg.sigma2);
    };

    RootSet roots = find_roots(g, 1e-9, 1.0, n_scan, tol);

    // The sigmoid in lambda makes g cross on an interval of width ~1e-5
    // around the pinch where U(a) reaches U0 = 2 sqrt(gamma/3); rescan it
    // densely so the coarse scan cannot skip the physical root.
    double U0 = 2.0 * std::sqrt(cfg.gamma / 3.0);
    double C = coupling_scale(cfg);
    double a0 = std::sqrt(U0 / C);
    if (a0 > 0.0 && a0 < 1.0) {
        double lo = std::max(1e-9, a0 * 0.98);
        double hi = std::min(1.0, a0 * 1.02);
        auto fine = find_roots(g, lo, hi, 20000, tol);
        for (const auto& r : fine.roots) {
            bool dup = false;
            for (const auto& got : roots.roots)
                if (std::abs(got.location - r.location) < 1e-7) dup = true;
            if (!dup) roots.roots.push_back(r);
        }
    }

    // GP-like solution: when lambda(1) is negligible, a = 1 solves g to
    // machine level even if the scan found no sign change.
    if (std::abs(g(1.0)) < tol) {
        bool dup = false;
        for (const auto& r : roots.roots)
            if (std::abs(r.location - 1.0) < 1e-7) dup = true;
        if (!dup) roots.roots.push_back({1.0, g(1.0), 1.0, 1.0});
    }
    std::sort(roots.roots.begin(), roots.roots.end(),
              [](const Root& x, const Root& y) { return x.location < y.location; });
    return roots;
}

namespace {

ModPhaseReport report_at(double a, const ModConfig& cfg, double window) {
    ModPhaseReport r;
    r.a_mag = a;
    r.target_component = 1.0 - a;
    auto sp = saddle_pair(a, cfg);
    if (!sp) {
        r.label = PhaseLabel::GFL;
        r.gap = std::numeric_limits<double>::infinity();
        r.droplet_weight = 0.0;
        r.w_plus2 = 0.0;
        return r;
    }
    r.w_plus2 = sp->w_plus2;
    r.gap = fourier_action(sp->w_plus2, sp->w_plus2, a, cfg);
    r.droplet_weight = saddle_mass_fraction(r.gap);
    double scaled = r.gap / static_cast<double>(cfg.P);
    if (scaled > window)
        r.label = PhaseLabel::GFL;
    else if (scaled >= -window)
        r.label = PhaseLabel::GMFL_I;
    else
        r.label = PhaseLabel::GMFL_II;
    return r;
}

double physical_root(const ModConfig& cfg) {
    auto roots = solve_a(cfg);
    if (roots.empty()) return 1.0;  // GP-like fallback, reported by caller
    return roots.roots.back().location;  // largest root: continuous from GFL
}

}  // namespace

ModPhaseReport classify_phase_mod(const ModConfig& cfg, double window) {
    return report_at(physical_root(cfg), cfg, window);
}

ModScanResult scan_sigma_mod(const ModConfig& cfg, const std::vector<double>& sigma2_grid,
                             double window) {
    ModScanResult out;
    std::vector<double> grid = sigma2_grid;
    std::sort(grid.begin(), grid.end(), std::greater<double>());

    bool prev_saddle = false;
    for (size_t i = 0; i < grid.size(); ++i) {
        ModConfig c = cfg;
        c.sigma2 = grid[i];
        auto roots = solve_a(c);
        double a = roots.empty() ? 1.0 : roots.roots.back().location;
        auto rep = report_at(a, c, window);
        ModScanRow row;
        row.sigma2 = grid[i];
        row.u = effective_interaction(c);
        row.a_mag = rep.a_mag;
        row.branch_id = 0;
        row.w_plus2 = rep.w_plus2;
        row.S_gap = rep.gap;
        row.phase = rep.label;
        row.droplet_weight = rep.droplet_weight;
        row.target_component = rep.target_component;
        bool has_saddle = saddle_pair(a, c).has_value();
        row.saddle_flag = (i > 0) && (has_saddle != prev_saddle);
        prev_saddle = has_saddle;
        out.rows.push_back(row);

        for (size_t k = 0; k + 1 < roots.roots.size(); ++k) {
            auto rep2 = report_at(roots.roots[k].location, c, window);
            ModScanRow extra = row;
            extra.branch_id = static_cast<int>(k) + 1;
            extra.a_mag = rep2.a_mag;
            extra.w_plus2 = rep2.w_plus2;
            extra.S_gap = rep2.gap;
            extra.phase = rep2.label;
            extra.droplet_weight = rep2.droplet_weight;
            extra.target_component = rep2.target_component;
            out.extra_branches.push_back(extra);
        }
    }

    // Refine the two phase boundaries by bisection on the scaled gap.
    auto scaled_gap = [&](double s2) {
        ModConfig c = cfg;
        c.sigma2 = s2;
        auto rep = report_at(physical_root(c), c, window);
        return std::isfinite(rep.gap) ? rep.gap / static_cast<double>(cfg.P)
                                      : std::numeric_limits<double>::infinity();
    };
    auto bisect_boundary = [&](double target) -> std::optional<double> {
        for (size_t i = 0; i + 1 < out.rows.size(); ++i) {
            double glo = scaled_gap(out.rows[i].sigma2) - target;
            double ghi = scaled_gap(out.rows[i + 1].sigma2) - target;
            if (std::isfinite(glo) && std::isfinite(ghi) && glo > 0.0 && ghi <= 0.0) {
                double lo = out.rows[i].sigma2, hi = out.rows[i + 1].sigma2;
                for (int it = 0; it < 60; ++it) {
                    double mid = 0.5 * (lo + hi);
                    if (scaled_gap(mid) - target > 0.0)
                        lo = mid;
                    else
                        hi = mid;
                }
                return 0.5 * (lo + hi);
            }
            // descending grid: gap can also fall straight from +inf
            if (!std::isfinite(glo) && std::isfinite(ghi) && ghi <= 0.0) {
                double lo = out.rows[i].sigma2, hi = out.rows[i + 1].sigma2;
                for (int it = 0; it < 60; ++it) {
                    double mid = 0.5 * (lo + hi);
                    double gm = scaled_gap(mid) - target;
                    if (!std::isfinite(gm) || gm > 0.0)
                        lo = mid;
                    else
                        hi = mid;
                }
                return 0.5 * (lo + hi);
            }
        }
        return std::nullopt;
    };
    auto b1 = bisect_boundary(+window);
    auto b2 = bisect_boundary(-window);
    if (b1 && b2) {
        out.boundary_gfl_to_i = *b1;
        out.boundary_i_to_ii = *b2;
        out.boundaries_found = true;
    }
    return out;
}

KernelMatrix nngp_kernel(long P, double sigma_a2) {
    if (!is_prime(P) || P > 31)
        throw std::invalid_argument("nngp_kernel: P must be prime and <= 31 (test oracle)");
    long n2 = P * P;
    KernelMatrix k;
    k.P = P;
    k.Q.resize(n2, n2);
    for (long r = 0; r < n2; ++r) {
        long n = r / P, m = r % P;
        for (long c = 0; c < n2; ++c) {
            long n2_ = c / P, m2_ = c % P;
            double K = (n == n2_ ? 1.0 : 0.0) + (m == m2_ ? 1.0 : 0.0);
            k.Q(r, c) = sigma_a2 * (4.0 + 2.0 * K * K);
        }
    }
    return k;
}

Eigen::MatrixXcd fourier_basis(long P) {
    if (!is_prime(P)) throw std::invalid_argument("fourier_basis: P must be prime");
    long n2 = P * P;
    Eigen::MatrixXcd basis(n2, n2);
    const double two_pi = 6.283185307179586476925286766559;
    for (long k = 0; k < P; ++k) {
        for (long kp = 0; kp < P; ++kp) {
            long col = k * P + kp;
            for (long n = 0; n < P; ++n)
                for (long m = 0; m < P; ++m) {
                    double phase = two_pi * (k * n + kp * m) / P;
                    basis(n * P + m, col) =
                        std::complex<double>(std::cos(phase), std::sin(phase)) /
                        static_cast<double>(P);
                }
        }
    }
    return basis;
}

namespace {

Eigen::MatrixXd translation_op(long P, bool first_index) {
    long n2 = P * P;
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n2, n2);
    for (long n = 0; n < P; ++n)
        for (long m = 0; m < P; ++m) {
            long src = n * P + m;
            long dst = first_index ? (((n + 1) % P) * P + m) : (n * P + (m + 1) % P);
            T(dst, src) = 1.0;
        }
    return T;
}

Eigen::MatrixXd dilation_op(long P, long q) {
    long n2 = P * P;
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n2, n2);
    for (long n = 0; n < P; ++n)
        for (long m = 0; m < P; ++m)
            C(((q * n) % P) * P + (q * m) % P, n * P + m) = 1.0;
    return C;
}

}  // namespace

SymmetryReport verify_symmetries(const KernelMatrix& kernel, long P, double tol) {
    SymmetryReport rep;
    const auto& Q = kernel.Q;
    double qnorm = Q.norm();
    auto add = [&](const std::string& name, double residual) {
        rep.checks.push_back({name, residual, residual < tol});
    };

    auto comm = [&](const Eigen::MatrixXd& T) { return (Q * T - T * Q).norm() / qnorm; };
    add("commutator_T1", comm(translation_op(P, true)));
    add("commutator_T2", comm(translation_op(P, false)));
    double worst = 0.0;
    for (long q = 1; q < P; ++q) worst = std::max(worst, comm(dilation_op(P, q)));
    add("commutator_Cq", worst);

    // Every Fourier vector is an eigenvector.
    auto basis = fourier_basis(P);
    double worst_eig = 0.0;
    for (long col = 0; col < P * P; ++col) {
        Eigen::VectorXcd phi = basis.col(col);
        Eigen::VectorXcd qphi = Q * phi;
        std::complex<double> lam = phi.dot(qphi);  // phi is unit norm
        worst_eig = std::max(worst_eig, (qphi - lam * phi).norm() / qnorm * P);
    }
    add("fourier_eigenvectors", worst_eig);

    // Spectrum: exactly 3 distinct eigenvalues grouped as {(0,0)},
    // {(0,k)+(k,0)}, {(k,k') both nonzero}.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q);
    std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + P * P);
    std::sort(ev.begin(), ev.end());
    double cluster_tol = 1e-8 * std::max(1.0, std::abs(ev.back()));
    rep.distinct_eigenvalues.clear();
    rep.multiplicities.clear();
    for (double v : ev) {
        if (rep.distinct_eigenvalues.empty() ||
            std::abs(v - rep.distinct_eigenvalues.back()) > cluster_tol) {
            rep.distinct_eigenvalues.push_back(v);
            rep.multiplicities.push_back(1);
        } else {
            ++rep.multiplicities.back();
        }
    }
    bool spectrum_ok = rep.distinct_eigenvalues.size() == 3 &&
                       rep.multiplicities[2] == 1 &&
                       rep.multiplicities[1] == 2 * (P - 1) &&
                       rep.multiplicities[0] == (P - 1) * (P - 1);
    // order: smallest eigenvalue has multiplicity (P-1)^2 at the GP limit
    rep.checks.push_back({"three_distinct_eigenvalues", spectrum_ok ? 0.0 : 1.0, spectrum_ok});

    // The target is an eigenvector: check ||Q y - lambda y|| / ||y||.
    auto ds = mod_dataset(P);
    double worst_target = 0.0;
    double lam_target = 0.0;
    for (long p = 0; p < P; ++p) {
        Eigen::VectorXd y = ds.labels.col(p);
        Eigen::VectorXd qy = Q * y;
        double lam = y.dot(qy) / y.squaredNorm();
        lam_target = lam;
        worst_target = std::max(worst_target, (qy - lam * y).norm() / y.norm());
    }
    add("target_eigenvector", worst_target);
    rep.target_eigenvalue = lam_target;

    rep.all_pass = true;
    for (const auto& c : rep.checks) rep.all_pass = rep.all_pass && c.pass;
    return rep;
}

std::string mod_scan_csv(const ModScanResult& scan) {
    std::ostringstream os;
    os.precision(17);
    os << "sigma2,u,a_mag,branch_id,w_plus2,S_gap,phase,droplet_weight,target_component\n";
    auto row = [&](const ModScanRow& r) {
        os << r.sigma2 << "," << r.u << "," << r.a_mag << "," << r.branch_id << "," << r.w_plus2
           << "," << r.S_gap << "," << to_string(r.phase) << "," << r.droplet_weight << ","
           << r.target_component << "\n";
    };
    for (const auto& r : scan.rows) row(r);
    for (const auto& r : scan.extra_branches) row(r);
    return os.str();
}

std::string symmetry_report_json(const SymmetryReport& rep) {
    nlohmann::json j;
    j["all_pass"] = rep.all_pass;
    j["target_eigenvalue"] = rep.target_eigenvalue;
    j["distinct_eigenvalues"] = rep.distinct_eigenvalues;
    j["multiplicities"] = rep.multiplicities;
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : rep.checks)
        checks.push_back({{"name", c.name}, {"residual", c.residual}, {"pass", c.pass}});
    j["checks"] = std::move(checks);
    return j.dump(2);
}

std::string mod_action_curve_csv(const ModConfig& cfg, double a_mag, double x_max, int n) {
    std::ostringstream os;
    os.precision(17);
    os << "phi2,S_k,S_k_scaled\n";
    for (int i = 0; i < n; ++i) {
        double x = x_max * i / (n - 1);
        double s = fourier_action(x, x, a_mag, cfg);
        os << x << "," << s << "," << s / cfg.P << "\n";
    }
    return os.str();
}

}  // namespace groklab
