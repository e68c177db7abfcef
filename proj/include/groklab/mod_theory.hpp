#pragma once

#include <Eigen/Core>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "groklab/models.hpp"
#include "groklab/numerics.hpp"
#include "groklab/ts_theory.hpp"  // PhaseLabel

namespace groklab {

struct ModeCouplings {
    double U = 0.0;      // quartic coupling 2 sigma_a^2 a^2 P^2 / (N sigma^4)
    double gamma = 0.0;  // sextic coefficient
    long P = 0;
};

struct DiscrepancyMod {
    double a_mag = 1.0;  // |a| in [0, 1]; the action depends only on a^2
};

struct SaddlePair {
    double w_plus2 = 0.0;
    double w_minus2 = 0.0;
};

struct ModPhaseReport {
    PhaseLabel label = PhaseLabel::GFL;
    double a_mag = 1.0;
    double gap = 0.0;             // S_k at the nontrivial saddle, full nats
    double droplet_weight = 0.0;  // 4 e^{-S} / (1 + 4 e^{-S})
    double target_component = 0.0;  // 1 - a_mag
    double w_plus2 = 0.0;
};

ModeCouplings mode_couplings(double a_mag, const ModConfig& cfg);

// Per-mode action S_k(x, y) = P [ (x+y)/2 - U x y + (gamma/6)(x^3+y^3) ]
// with x = |w_k|^2, y = |v_k|^2.
double fourier_action(double x, double y, double a_mag, const ModConfig& cfg);

// Nontrivial saddle magnitudes when U^2 >= gamma.
std::optional<SaddlePair> saddle_pair(double a_mag, const ModConfig& cfg);

// Target-subspace eigenvalue of the adaptive kernel out of the saddle
// masses; zero when no nontrivial saddle exists (sub-saddle fluctuations
// are O(P^-2) and dropped).
double lambda_of_a(double a_mag, const ModConfig& cfg);

// All roots in (0, 1] of g(a) = a - sigma^2/(lambda(a) + sigma^2). The
// sigmoid in lambda pins roots to an analytically known pinch near
// a0 = sqrt(U0 sigma^4 / C), which gets a dedicated fine scan.
RootSet solve_a(const ModConfig& cfg, int n_scan = 2048,
                double tol = NumericDefaults::root_tol);

// Physical branch = largest root (continuity from the GFL end). Degeneracy
// is judged on the scaled action S_k / P against the window.
ModPhaseReport classify_phase_mod(const ModConfig& cfg, double window = 1.0);

struct ModScanRow {
    double sigma2 = 0.0;
    double u = 0.0;
    double a_mag = 1.0;
    int branch_id = 0;
    double w_plus2 = 0.0;
    double S_gap = 0.0;  // full nats
    PhaseLabel phase = PhaseLabel::GFL;
    double droplet_weight = 0.0;
    double target_component = 0.0;
    bool saddle_flag = false;  // U^2 crosses gamma between this row and the previous
};

struct ModScanResult {
    std::vector<ModScanRow> rows;          // physical branch, one row per grid point
    std::vector<ModScanRow> extra_branches;  // non-physical roots, for hysteresis analysis
    double boundary_gfl_to_i = 0.0;        // sigma^2 where scaled gap crosses +window
    double boundary_i_to_ii = 0.0;         // sigma^2 where scaled gap crosses -window
    bool boundaries_found = false;
};

ModScanResult scan_sigma_mod(const ModConfig& cfg, const std::vector<double>& sigma2_grid,
                             double window = 1.0);

// ---- small-P brute-force oracle side --------------------------------------

struct KernelMatrix {
    Eigen::MatrixXd Q;  // P^2 x P^2, indexed by row-major (n, m)
    long P = 0;
};

// GP-limit kernel Q = sigma_a^2 [K_diag K_diag' + 2 K^2], K = delta_nn' + delta_mm'.
KernelMatrix nngp_kernel(long P, double sigma_a2 = 1.0);

// Orthonormal Fourier vectors phi_{k,k'}(n,m) = exp(2 pi i (k n + k' m)/P)/P.
Eigen::MatrixXcd fourier_basis(long P);

struct SymmetryCheck {
    std::string name;
    double residual = 0.0;
    bool pass = false;
};

struct SymmetryReport {
    std::vector<SymmetryCheck> checks;
    bool all_pass = false;
    std::vector<double> distinct_eigenvalues;
    std::vector<long> multiplicities;
    double target_eigenvalue = 0.0;
};

// Commutators with translations and dilations, Fourier eigenvectors,
// the three-fold GP spectrum, and the target-eigenvector residual.
SymmetryReport verify_symmetries(const KernelMatrix& kernel, long P, double tol = 1e-10);

std::string mod_scan_csv(const ModScanResult& scan);
std::string symmetry_report_json(const SymmetryReport& rep);

// Action curve along the symmetric line x = y for Fig-style plots.
std::string mod_action_curve_csv(const ModConfig& cfg, double a_mag, double x_max, int n);

}  // namespace groklab
