#pragma once

#include <Eigen/Core>
#include <functional>
#include <utility>
#include <vector>

namespace groklab {

using ScalarFn = std::function<double(double)>;
using VectorFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Tabulated 1-D curve on strictly increasing abscissae.
struct Grid1D {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<double> points;
    std::vector<double> values;

    static Grid1D tabulate(const ScalarFn& f, double lo, double hi, int n);
};

struct Root {
    double location = 0.0;
    double residual = 0.0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
};

struct RootSet {
    std::vector<Root> roots;
    bool empty() const { return roots.empty(); }
};

struct QuadratureResult {
    double value = 0.0;      // integral of f(q) * exp(logweight(q) - shift)
    double log_shift = 0.0;  // max of logweight over the probe grid
    double abs_error = 0.0;
    bool converged = true;
    long evaluations = 0;
};

// Default tolerances shared by every module; config may override.
struct NumericDefaults {
    static constexpr double quad_rel_tol = 1e-8;
    static constexpr double root_tol = 1e-10;
    static constexpr double fp_tol = 1e-8;
    static constexpr double fp_damping = 0.5;
    static constexpr int fp_max_iter = 500;
};

// Integral of f(q)*exp(logweight(q) - shift) over [lo, hi] by adaptive
// Simpson. The common shift (max of logweight on a probe grid) keeps
// ratios of such integrals stable even when the action scale is hundreds
// of nats; the caller owns the shift, so Z-normalized averages cancel it.
QuadratureResult integrate_weighted(const ScalarFn& f, const ScalarFn& logweight,
                                    double lo, double hi,
                                    double rel_tol = NumericDefaults::quad_rel_tol,
                                    int pre_scan = 257);

// Same quadrature with the shift imposed by the caller (so a family of
// integrals shares one normalization).
QuadratureResult integrate_weighted_shifted(const ScalarFn& f, const ScalarFn& logweight,
                                            double shift, double lo, double hi,
                                            double rel_tol = NumericDefaults::quad_rel_tol,
                                            int pre_scan = 257);

// Scans [lo, hi] in n_scan panels for sign changes of g and refines each
// bracket by bisection. All roots found are returned; multiplicity of
// fixed points near a first-order transition is physically meaningful.
// Tangential (double) roots without a sign change are searched for by a
// local rescan at doubled resolution around the scan's minimum of |g|.
RootSet find_roots(const ScalarFn& g, double lo, double hi, int n_scan,
                   double tol = NumericDefaults::root_tol);

struct FixedPointResult {
    Eigen::VectorXd x;
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;                  // ||map(x) - x||_inf at exit
    std::vector<Eigen::VectorXd> trace_tail;  // last iterates, for diagnosis
};

// Damped iteration x <- (1-damping) x + damping map(x), stopping on the
// residual ||map(x)-x||_inf < tol. Divergence (guard on ||x||_inf) is
// reported, never masked.
FixedPointResult fixed_point(const VectorFn& map, const Eigen::VectorXd& x0,
                             double damping = NumericDefaults::fp_damping,
                             double tol = NumericDefaults::fp_tol,
                             int max_iter = NumericDefaults::fp_max_iter,
                             double diverge_guard = 1e8);

struct LocalMinimum {
    double location = 0.0;
    double value = 0.0;
    double curvature = 0.0;  // second difference / refined second derivative
    bool interior = true;    // boundary minima are reported but flagged
};

// All strict interior local minima of the tabulated curve, plus boundary
// minima flagged non-interior. When a callback is supplied each interior
// minimum is refined by golden-section on the continuous function.
std::vector<LocalMinimum> local_minima(const Grid1D& curve, double refine_tol,
                                       const ScalarFn* continuous = nullptr);

// Golden-section minimizer on [lo, hi].
double golden_minimize(const ScalarFn& f, double lo, double hi, double tol);

}  // namespace groklab
