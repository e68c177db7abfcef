#pragma once

#include <optional>
#include <string>
#include <vector>

#include "groklab/models.hpp"
#include "groklab/numerics.hpp"

namespace groklab {

// Coefficients of the discrepancy sigma^2 tbar = b H1 + c H3.
struct DiscrepancyTS {
    double b = 1.0;
    double c = 0.0;
};

enum class PhaseLabel { GFL, GMFL_I, GMFL_II };
std::string to_string(PhaseLabel p);

struct ActionCurve {
    std::vector<double> order_parameter_grid;
    std::vector<double> action_values;  // full action, includes the factor d
    TSConfig cfg;
    DiscrepancyTS disc;
};

struct Saddle {
    double location = 0.0;   // q*
    double value = 0.0;      // S(q*), full action
    double curvature = 0.0;  // S''(q*)
    bool interior = true;
};

struct SaddleSet {
    std::vector<Saddle> minima;
    double global_gap = 0.0;  // min over nontrivial interior minima of S* - S(0)
    bool has_nontrivial = false;
    double scale = 1.0;  // macroscopic factor in front of the scaled action (d)
};

struct PhaseReport {
    PhaseLabel label = PhaseLabel::GFL;
    double gap = 0.0;            // full-action nats
    double droplet_weight = 0.0; // posterior mass of the nontrivial minima
};

// Solver knobs. Two routes to the self-consistent (b, c):
//   - Quadrature: the kernel averages are exact integrals of e^{-S};
//     faithful at the stated (finite) parameters, so the transition is
//     rounded into a crossover.
//   - Mixture: Gaussian-mixture (saddle-point) evaluation around the
//     action minima, the scaling-limit form in which the transition is
//     a genuine first-order jump. Default for scans.
enum class TsSolverMode { Mixture, Quadrature };

struct TsSolverOptions {
    TsSolverMode mode = TsSolverMode::Mixture;
    double fp_tol = 1e-10;
    double fp_damping = NumericDefaults::fp_damping;
    int fp_max_iter = NumericDefaults::fp_max_iter;
    double quad_rel_tol = NumericDefaults::quad_rel_tol;
    double width_cap = 0.35;    // cap on a basin's Gaussian half-width
    int gh_order = 41;          // Gauss-Hermite points per basin
    int omega_scan = 96;        // droplet-weight grid for the outer root scan
    double phase_window = 1.0;  // nats of scaled action
    double qmax_factor = 3.0;   // order-parameter range 3*max(1, sigma_w)
};

struct TsSolution {
    DiscrepancyTS disc;
    bool converged = false;
    double residual = 0.0;
    double droplet_weight = 0.0;  // mass on the nontrivial minima
    double gap = 0.0;             // full-action nats; +inf when trivial only
    double qstar = 0.0;           // location of the lowest nontrivial minimum
    int iterations = 0;
};

struct TsSolveResult {
    std::vector<TsSolution> solutions;  // all distinct self-consistent branches
    std::vector<std::string> trace;
};

// erf moments against H1 and H3 of a standard Gaussian (App-style closed
// forms): I0 = (2/sqrt(pi)) q / sqrt(1+2|w|^2), and I1 its cubic partner.
double integral_I0(double q, double wnorm2);
double integral_I1(double q, double wnorm2);

// The scalar order-parameter action S(q), including the factor d.
double action_ts(double q, const DiscrepancyTS& disc, const TSConfig& cfg);

// Kernel restricted to the normalized span {H1, H3/sqrt(6)}, averaged over
// e^{-S}. Entries are Gram moments of (I0-type, I1-type) integrands; the
// (1,1) integrand is 4q^2/(pi D) = I0^2 so the matrix stays PSD.
Eigen::Matrix2d qtilde_matrix(const DiscrepancyTS& disc, const TSConfig& cfg,
                              const TsSolverOptions& opts = {});

// GPR self-consistency update: [b; sqrt(6) c] = (sigma^2/n) [Qt + (sigma^2/n) I]^{-1} y.
DiscrepancyTS gpr_update(const Eigen::Matrix2d& qtilde, const TSConfig& cfg);

TsSolveResult solve_bc(const TSConfig& cfg, const DiscrepancyTS& init,
                       const TsSolverOptions& opts = {});

ActionCurve action_curve(const DiscrepancyTS& disc, const TSConfig& cfg,
                         int n_points = 801, double qmax_factor = 3.0);

SaddleSet find_saddles_ts(const DiscrepancyTS& disc, const TSConfig& cfg,
                          double qmax_factor = 3.0);

// Degeneracy is judged on the scaled action (gap / scale) so labels are
// invariant under the thermodynamic knobs; droplet weight from Laplace
// masses of the minima.
PhaseReport classify_phase_ts(const SaddleSet& saddles, double window = 1.0);

struct TsScanRow {
    double sigma2 = 0.0;
    double u = 0.0;
    DiscrepancyTS disc;
    double h1 = 0.0;
    double h3 = 0.0;
    PhaseLabel phase = PhaseLabel::GFL;
    double gap = 0.0;
    double droplet_weight = 0.0;
    int branch_id = 0;  // 0 = descending continuation, 1 = ascending
    bool converged = false;
};

struct TsScanResult {
    std::vector<TsScanRow> rows;  // both directions, ordered by (branch, grid)
    double jump_sigma2 = 0.0;     // largest |dh3| step on the descending branch
    double jump_height = 0.0;
    bool hysteresis = false;
};

TsScanResult scan_sigma_ts(const TSConfig& cfg, const std::vector<double>& sigma2_grid,
                           const TsSolverOptions& opts = {});

struct CriticalU {
    double u_c = 0.0;
    double sigma2_c = 0.0;
    bool found = false;
    std::string note;
};

// Bisection over sigma^2 locating the first appearance of a nontrivial
// minimum within the degeneracy window on the descending branch. The
// returned u uses this tool's convention u = n^2 sigma_a^2 / (sigma^4 d N)
// with sigma^4 = (sigma^2)^2.
CriticalU critical_u(const TSConfig& cfg, double sigma2_lo = 0.05, double sigma2_hi = 0.5,
                     const TsSolverOptions& opts = {});

// f-bar projections: h1 = 1 - b, h3 = eps - c.
std::pair<double, double> predicted_components(const DiscrepancyTS& disc, const TSConfig& cfg);

std::string ts_scan_csv(const TsScanResult& scan);
std::string action_curve_csv(const ActionCurve& curve);

}  // namespace groklab
