#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "groklab/rng.hpp"

namespace groklab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Erf-student / cubic-teacher regression model.
struct TSConfig {
    long n = 0;            // sample count
    long d = 1;            // input dimension
    long N = 1;            // hidden width
    double sigma2 = 1.0;   // measurement noise variance
    double sigma_a2 = 1.0; // readout prior scale: each a_i ~ N(0, sigma_a2/N)
    double sigma_w2 = 1.0; // input prior scale: each w_ij ~ N(0, sigma_w2/d)
    double eps = 0.0;      // cubic teacher coefficient

    void validate() const;
};

// Modular-addition model with square activation.
struct ModConfig {
    long P = 3;            // prime modulus
    long N = 1;            // hidden width
    double sigma2 = 1.0;   // noise variance
    double sigma_a2 = 1.0; // readout prior scale: a_pi ~ N(0, sigma_a2/N)
    double gamma = 1e-4;   // sextic weight-decay coefficient

    void validate() const;
};

struct ScalingKnobs {
    double alpha = 1.0;
    double beta = 1.0;

    void validate() const;
};

// Integer/prime rounding applied by the scaling maps, reported so that
// invariance checks can run on the exact pre-rounding values.
struct ScalingResidual {
    double exact_d = 0.0;
    double exact_P = 0.0;
    double exact_N = 0.0;
    double exact_n = 0.0;
};

struct TSDataset {
    TSConfig cfg;
    std::uint64_t seed = 0;
    Matrix inputs;   // n x d
    Vector labels;   // n
    Vector teacher;  // d, unit norm
};

struct ModDataset {
    ModConfig cfg;
    Matrix inputs;                            // P^2 x 2P two-hot rows
    Matrix labels;                            // P^2 x P, rows sum to zero
    std::vector<std::pair<long, long>> pairs; // (n, m) per row
};

struct TSNetwork {
    Matrix input_weights;  // N x d
    Vector readout;        // N
};

struct ModNetwork {
    Matrix input_weights;  // N x 2P
    Matrix readout;        // P x N
};

// y(x) = H1(t) + eps*H3(t), t = teacher.x, H1(t)=t, H3(t)=t^3-3t.
double ts_target(const Vector& x, const Vector& teacher, double eps);
double ts_target_of_overlap(double t, double eps);

// Inputs iid standard normal, teacher uniform on the unit sphere,
// labels exact; bitwise deterministic in (cfg, seed).
TSDataset ts_sample_dataset(const TSConfig& cfg, std::uint64_t seed);

double ts_forward(const TSNetwork& net, const Vector& x);
Vector ts_forward_batch(const TSNetwork& net, const Matrix& inputs);

// Full P^2 pair table, two-hot encoding, y_p = delta_{p,(n+m) mod P} - 1/P.
ModDataset mod_dataset(long P);

Vector mod_forward(const ModNetwork& net, const Vector& x);
Matrix mod_forward_batch(const ModNetwork& net, const Matrix& inputs);

bool is_prime(long p);
long nearest_prime(double x);

TSConfig apply_scaling_ts(const TSConfig& cfg, const ScalingKnobs& k,
                          ScalingResidual* residual = nullptr);
ModConfig apply_scaling_mod(const ModConfig& cfg, double beta,
                            ScalingResidual* residual = nullptr);

// The scale-invariant coupling u that drives the transition.
double effective_interaction(const TSConfig& cfg);   // n^2 sa2 / (sigma^4 d N)
double effective_interaction(const ModConfig& cfg);  // 2 sa2 P^2 / (N sigma^4)

// Documented JSON form (arrays of rows + metadata) and a CSV of
// (index, label) for eyeballing.
std::string ts_dataset_to_json(const TSDataset& ds);
TSDataset ts_dataset_from_json(const std::string& text);
std::string mod_dataset_to_json(const ModDataset& ds);
std::string ts_dataset_labels_csv(const TSDataset& ds);

}  // namespace groklab
