#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "groklab/rng.hpp"
#include "groklab/ts_theory.hpp"

using namespace groklab;

namespace {

TSConfig paper_cfg() {
    TSConfig cfg;
    cfg.n = 3000;
    cfg.d = 150;
    cfg.N = 700;
    cfg.sigma2 = 0.2;
    cfg.sigma_a2 = 8.0 / 700.0;
    cfg.sigma_w2 = 0.5;
    cfg.eps = -0.3;
    return cfg;
}

// Monte-Carlo oracle for E_x[(w*.x)^k erf(w.x)] reduced to the joint 2-D
// Gaussian of (t, s) = (w*.x, w.x) with Var t = 1, Var s = |w|^2, cov = q.
std::pair<double, double> mc_erf_moments(double q, double wnorm2, long n_samples,
                                         std::uint64_t seed) {
    RngStream rng(seed);
    double cross = std::sqrt(std::max(wnorm2 - q * q, 0.0));
    double s1 = 0.0, s3 = 0.0;
    for (long i = 0; i < n_samples; ++i) {
        double z1 = rng.normal(), z2 = rng.normal();
        double t = z1;
        double s = q * z1 + cross * z2;
        double e = std::erf(s);
        s1 += t * e;
        s3 += t * t * t * e;
    }
    return {s1 / n_samples, s3 / n_samples};
}

}  // namespace

TEST_CASE("integral_I0 / I1: closed-form values and linearity") {
    CHECK(integral_I0(0.0, 1.0) == 0.0);
    CHECK(integral_I1(0.0, 2.0) == 0.0);
    CHECK(integral_I0(1.0, 1.0) ==
          doctest::Approx(2.0 / (std::sqrt(3.14159265358979) * std::sqrt(3.0))).epsilon(1e-12));
    CHECK(integral_I1(1.0, 1.0) ==
          doctest::Approx(2.0 / std::sqrt(3.0 * 3.14159265358979) * 7.0 / 3.0).epsilon(1e-12));
    CHECK(integral_I0(2.0 * 0.37, 1.4) == doctest::Approx(2.0 * integral_I0(0.37, 1.4)));
    // small-q: I1 -> 3 I0
    CHECK(integral_I1(1e-4, 0.8) == doctest::Approx(3.0 * integral_I0(1e-4, 0.8)).epsilon(1e-6));
}

TEST_CASE("integral_I0 / I1 against the Monte-Carlo oracle") {
    RngStream rng(5);
    for (int rep = 0; rep < 3; ++rep) {
        double q = 0.4 + 0.8 * rng.uniform();
        double w2 = q * q + 1.5 * rng.uniform();
        auto [m1, m3] = mc_erf_moments(q, w2, 2000000, 100 + rep);
        CHECK(std::abs(m1 - integral_I0(q, w2)) < 0.02 * std::abs(integral_I0(q, w2)));
        CHECK(std::abs(m3 - integral_I1(q, w2)) < 0.02 * std::abs(integral_I1(q, w2)));
    }
}

TEST_CASE("action_ts: zero at origin, even, no-data limit") {
    auto cfg = paper_cfg();
    DiscrepancyTS disc{0.7, -0.2};
    CHECK(action_ts(0.0, disc, cfg) == 0.0);
    RngStream rng(3);
    for (int i = 0; i < 10; ++i) {
        double q = 3.0 * (2.0 * rng.uniform() - 1.0);
        CHECK(action_ts(q, disc, cfg) == doctest::Approx(action_ts(-q, disc, cfg)).epsilon(1e-14));
    }
    DiscrepancyTS zero{0.0, 0.0};
    double q = 0.9;
    CHECK(action_ts(q, zero, cfg) == doctest::Approx(cfg.d * q * q / (2.0 * cfg.sigma_w2)));
}

TEST_CASE("qtilde_matrix: symmetry, PSD, sign structure, refinement stability") {
    auto cfg = paper_cfg();
    cfg.sigma2 = 0.25;
    DiscrepancyTS disc{0.42, -0.28};
    TsSolverOptions opts;
    auto Q = qtilde_matrix(disc, cfg, opts);
    CHECK(Q(0, 1) == Q(1, 0));
    CHECK(Q(0, 1) <= 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(Q);
    CHECK(es.eigenvalues()[0] >= -1e-14 * es.eigenvalues()[1]);

    TsSolverOptions finer = opts;
    finer.quad_rel_tol = opts.quad_rel_tol / 100.0;
    auto Q2 = qtilde_matrix(disc, cfg, finer);
    CHECK((Q - Q2).norm() / Q.norm() < 1e-6);
}

TEST_CASE("qtilde_matrix: gaussian-action entries match direct Monte Carlo") {
    // b = c = 0: weight is exp(-d q^2/(2 sw2)), i.e. q ~ N(0, sw2/d).
    auto cfg = paper_cfg();
    DiscrepancyTS zero{0.0, 0.0};
    auto Q = qtilde_matrix(zero, cfg, {});
    RngStream rng(17);
    double sd = std::sqrt(cfg.sigma_w2 / cfg.d);
    double acc11 = 0.0, acc22 = 0.0;
    const long n = 2000000;
    for (long i = 0; i < n; ++i) {
        double q = sd * rng.normal();
        double q2 = q * q;
        double D = 1.0 + 2.0 * (cfg.sigma_w2 + q2);
        acc11 += 4.0 * q2 / (3.14159265358979 * D);
        acc22 += 8.0 * q2 * q2 * q2 / (3.0 * 3.14159265358979 * D * D * D);
    }
    CHECK(Q(0, 0) == doctest::Approx(cfg.sigma_a2 * acc11 / n).epsilon(0.005));
    CHECK(Q(1, 1) == doctest::Approx(cfg.sigma_a2 * acc22 / n).epsilon(0.02));
}

TEST_CASE("gpr_update: limiting cases and residual of the linear system") {
    TSConfig cfg;
    cfg.n = 3;
    cfg.sigma2 = 3.0;  // sigma^2/n = 1
    cfg.eps = -0.3;
    cfg.d = 10;
    cfg.N = 10;

    auto d0 = gpr_update(Eigen::Matrix2d::Zero(), cfg);
    CHECK(d0.b == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(d0.c == doctest::Approx(cfg.eps).epsilon(1e-14));

    auto dI = gpr_update(Eigen::Matrix2d::Identity(), cfg);
    CHECK(dI.b == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(dI.c == doctest::Approx(cfg.eps / 2.0).epsilon(1e-14));

    RngStream rng(9);
    for (int rep = 0; rep < 5; ++rep) {
        Eigen::Matrix2d A;
        A << rng.normal(), rng.normal(), rng.normal(), rng.normal();
        Eigen::Matrix2d spd = A * A.transpose() + 0.1 * Eigen::Matrix2d::Identity();
        auto disc = gpr_update(spd, cfg);
        double lam = cfg.sigma2 / cfg.n;
        Eigen::Vector2d t(disc.b, std::sqrt(6.0) * disc.c);
        Eigen::Vector2d y(1.0, std::sqrt(6.0) * cfg.eps);
        Eigen::Vector2d resid = (spd + lam * Eigen::Matrix2d::Identity()) * t - lam * y;
        CHECK(resid.norm() < 1e-12);
    }
}

TEST_CASE("solve_bc: GP limit recovers (1, eps) and the trivial action") {
    auto cfg = paper_cfg();
    cfg.sigma2 = 100.0;
    TsSolverOptions opts;
    opts.mode = TsSolverMode::Quadrature;
    auto res = solve_bc(cfg, {1.0, cfg.eps}, opts);
    REQUIRE(!res.solutions.empty());
    const auto& sol = res.solutions.front();
    CHECK(sol.converged);
    CHECK(std::abs(sol.disc.b - 1.0) < 1e-3);
    CHECK(std::abs(sol.disc.c - cfg.eps) < 1e-3);

    auto saddles = find_saddles_ts(sol.disc, cfg);
    CHECK_FALSE(saddles.has_nontrivial);
    CHECK(classify_phase_ts(saddles).label == PhaseLabel::GFL);
}

TEST_CASE("solve_bc: quadrature and mixture agree deep in the GFL phase") {
    auto cfg = paper_cfg();
    cfg.sigma2 = 0.8;
    TsSolverOptions quad;
    quad.mode = TsSolverMode::Quadrature;
    TsSolverOptions mix;
    mix.mode = TsSolverMode::Mixture;
    auto rq = solve_bc(cfg, {1.0, cfg.eps}, quad);
    auto rm = solve_bc(cfg, {1.0, cfg.eps}, mix);
    REQUIRE(!rq.solutions.empty());
    REQUIRE(!rm.solutions.empty());
    CHECK(rq.solutions[0].converged);
    CHECK(rm.solutions[0].converged);
    // far from the transition the basin is near-Gaussian, routes agree
    CHECK(rq.solutions[0].disc.b == doctest::Approx(rm.solutions[0].disc.b).epsilon(0.02));
    CHECK(rq.solutions[0].disc.c == doctest::Approx(rm.solutions[0].disc.c).epsilon(0.02));
}

TEST_CASE("solve_bc: fixed-point residual at reported solutions") {
    auto cfg = paper_cfg();
    cfg.sigma2 = 0.25;
    TsSolverOptions opts;
    auto res = solve_bc(cfg, {1.0, cfg.eps}, opts);
    for (const auto& sol : res.solutions) {
        CHECK(sol.converged);
        CHECK(sol.residual < 1e-8);
    }
}

TEST_CASE("find_saddles_ts: trivial-only case and stationarity of minima") {
    auto cfg = paper_cfg();
    DiscrepancyTS zero{0.0, 0.0};
    auto s0 = find_saddles_ts(zero, cfg);
    CHECK_FALSE(s0.has_nontrivial);
    REQUIRE(s0.minima.size() >= 1);

    // a discrepancy that digs wells near |q| ~ 1
    DiscrepancyTS dug{0.5, -0.3};
    cfg.sigma2 = 0.15;
    auto s1 = find_saddles_ts(dug, cfg);
    CHECK(s1.has_nontrivial);
    for (const auto& m : s1.minima) {
        if (!m.interior) continue;
        double h = 1e-5;
        double sp = (action_ts(m.location + h, dug, cfg) - action_ts(m.location - h, dug, cfg)) /
                    (2.0 * h);
        double spp = (action_ts(m.location + h, dug, cfg) - 2.0 * action_ts(m.location, dug, cfg) +
                      action_ts(m.location - h, dug, cfg)) /
                     (h * h);
        CHECK(std::abs(sp) < 1e-8 * (1.0 + std::abs(spp)));
    }
}

TEST_CASE("classify_phase_ts: single well, degenerate wells, deep wells") {
    SaddleSet single;
    single.scale = 150.0;
    single.minima.push_back({0.0, 0.0, 300.0, true});
    single.has_nontrivial = false;
    single.global_gap = std::numeric_limits<double>::infinity();
    auto r0 = classify_phase_ts(single);
    CHECK(r0.label == PhaseLabel::GFL);
    CHECK(r0.droplet_weight == 0.0);

    SaddleSet degen = single;
    degen.minima.push_back({1.0, 0.0, 300.0, true});
    degen.minima.push_back({-1.0, 0.0, 300.0, true});
    degen.has_nontrivial = true;
    degen.global_gap = 0.0;
    CHECK(classify_phase_ts(degen).label == PhaseLabel::GMFL_I);

    SaddleSet deep = single;
    double gap = -10.0 * degen.scale;  // 10 scaled nats below the trivial well
    deep.minima.push_back({1.0, gap, 300.0, true});
    deep.minima.push_back({-1.0, gap, 300.0, true});
    deep.has_nontrivial = true;
    deep.global_gap = gap;
    auto r2 = classify_phase_ts(deep);
    CHECK(r2.label == PhaseLabel::GMFL_II);
    CHECK(r2.droplet_weight > 0.99);
}

TEST_CASE("predicted_components") {
    auto cfg = paper_cfg();
    auto [h1a, h3a] = predicted_components({1.0, cfg.eps}, cfg);
    CHECK(h1a == doctest::Approx(0.0));
    CHECK(h3a == doctest::Approx(0.0));
    auto [h1b, h3b] = predicted_components({0.0, 0.0}, cfg);
    CHECK(h1b == doctest::Approx(1.0));
    CHECK(h3b == doctest::Approx(cfg.eps));
}

TEST_CASE("scan: GP-limit monotonicity of (b, c) and phase ordering") {
    auto cfg = paper_cfg();
    TsSolverOptions opts;
    opts.mode = TsSolverMode::Quadrature;
    std::vector<double> grid{1.0, 2.0, 5.0, 10.0, 30.0, 100.0};
    DiscrepancyTS carry{0.5, -0.25};
    double prev_b = 0.0, prev_c = -1.0;
    for (double s2 : grid) {
        TSConfig c = cfg;
        c.sigma2 = s2;
        auto res = solve_bc(c, carry, opts);
        REQUIRE(!res.solutions.empty());
        carry = res.solutions[0].disc;
        CHECK(carry.b > prev_b);
        CHECK(carry.c > prev_c * 1.0000001 - 1e-12);  // c rises toward eps from below
        prev_b = carry.b;
        prev_c = carry.c;
    }
    CHECK(std::abs(prev_b - 1.0) < 1e-3);
    CHECK(std::abs(prev_c - cfg.eps) < 1e-3);
}

TEST_CASE("mixture scan shows the first-order jump near sigma^2 = 0.18" *
          doctest::timeout(500)) {
    auto cfg = paper_cfg();
    TsSolverOptions opts;
    std::vector<double> grid;
    for (double s2 = 0.30; s2 >= 0.0999; s2 -= 0.005) grid.push_back(s2);
    auto scan = scan_sigma_ts(cfg, grid, opts);
    CHECK(scan.jump_height > 0.01);
    CHECK(scan.jump_sigma2 > 0.15);
    CHECK(scan.jump_sigma2 < 0.21);

    // phase-label monotonicity along decreasing sigma^2 on the descending branch
    int stage = 0;  // GFL=0 -> GMFL-I=1 -> GMFL-II=2
    for (const auto& row : scan.rows) {
        if (row.branch_id != 0) continue;
        int s = row.phase == PhaseLabel::GFL ? 0 : (row.phase == PhaseLabel::GMFL_I ? 1 : 2);
        CHECK(s >= stage);
        stage = std::max(stage, s);
    }
    // droplet weight is nonzero past the jump
    double below = 0.0;
    for (const auto& row : scan.rows)
        if (row.branch_id == 0 && row.sigma2 < scan.jump_sigma2 - 0.01)
            below = std::max(below, row.droplet_weight);
    CHECK(below > 1e-4);
}

TEST_CASE("critical_u: in the paper band and invariant under the scaling knobs" *
          doctest::timeout(500)) {
    auto cfg = paper_cfg();
    TsSolverOptions opts;
    auto cu = critical_u(cfg, 0.10, 0.30, opts);
    REQUIRE(cu.found);
    CHECK(cu.sigma2_c > 0.15);
    CHECK(cu.sigma2_c < 0.21);
    CHECK(cu.u_c > 20.0);
    CHECK(cu.u_c < 40.0);

    ScalingKnobs k{4.0, 4.0};
    auto scaled = apply_scaling_ts(cfg, k);
    auto cu2 = critical_u(scaled, 0.10, 0.30, opts);
    REQUIRE(cu2.found);
    CHECK(cu2.u_c == doctest::Approx(cu.u_c).epsilon(0.05));
}
