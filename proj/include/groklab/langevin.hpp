#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "groklab/models.hpp"
#include "groklab/rng.hpp"

namespace groklab {

struct LangevinSettings {
    double step_size = 2e-3;
    long n_steps = 10000;
    long burn_in = 2000;
    long thin = 100;
    std::uint64_t seed = 0;

    void validate() const;
};

// Euler-Maruyama discretization of
//   theta' = -grad( L + sum_layers (gamma_l/2) ||theta_l||^2 ) + sqrt(2 T) xi
// with T = 2 sigma^2 and L = sum_mu (f - y)^2 (no 1/2), so the stationary
// density is the Bayesian posterior exp(-sum (f-y)^2 / (2 sigma^2)) times
// the layer priors. Per-layer decay gamma_l = T * fan / sigma_l^2 makes the
// no-data stationary variance sigma_l^2 / fan per weight.
struct TsLayerDecays {
    double gamma_w = 0.0;
    double gamma_a = 0.0;
    double temperature = 0.0;
};
TsLayerDecays ts_layer_decays(const TSConfig& cfg);

struct ModLayerDecays {
    double gamma_w = 0.0;
    double gamma_a = 0.0;
    double temperature = 0.0;
};
ModLayerDecays mod_layer_decays(const ModConfig& cfg);

TSNetwork ts_init_from_prior(const TSConfig& cfg, RngStream& rng);
ModNetwork mod_init_from_prior(const ModConfig& cfg, RngStream& rng);

// Closed-form backprop gradients of L (sum over the full training set).
void ts_gradients(const TSNetwork& net, const Matrix& inputs, const Vector& labels,
                  Matrix& grad_w, Vector& grad_a);
void mod_gradients(const ModNetwork& net, const Matrix& inputs, const Matrix& labels,
                   Matrix& grad_w, Matrix& grad_a);

// One update; returns false (and leaves the network untouched) on a
// non-finite weight, which aborts the member upstream.
bool ts_langevin_step(TSNetwork& net, const Matrix& inputs, const Vector& labels,
                      const TSConfig& cfg, double step_size, RngStream& rng);
bool mod_langevin_step(ModNetwork& net, const Matrix& inputs, const Matrix& labels,
                       const ModConfig& cfg, double step_size, RngStream& rng);

struct TsMember {
    TSNetwork final_net;
    std::vector<TSNetwork> snapshots;  // thinned, after burn-in
    std::uint64_t init_seed = 0;
    std::uint64_t data_seed = 0;
    bool diverged = false;
    long steps_run = 0;
};

struct TsEnsemble {
    std::vector<TsMember> members;
    TSConfig cfg;
    LangevinSettings settings;
    long diverged_count = 0;
};

struct ModMember {
    ModNetwork final_net;
    std::vector<ModNetwork> snapshots;
    std::uint64_t init_seed = 0;
    bool diverged = false;
    long steps_run = 0;
};

struct ModEnsemble {
    std::vector<ModMember> members;
    ModConfig cfg;
    LangevinSettings settings;
    long diverged_count = 0;
};

// Members are fully independent tasks; per-member streams split from the
// master seed, so results do not depend on thread count. A member (i, j)
// trains on dataset draw j from initialization draw i.
TsEnsemble run_ensemble_ts(const TSConfig& cfg, const LangevinSettings& settings,
                           int n_init_seeds, int n_data_seeds, int n_threads = 0,
                           bool keep_snapshots = false);
ModEnsemble run_ensemble_mod(const ModConfig& cfg, const LangevinSettings& settings,
                             int n_init_seeds, int n_threads = 0,
                             bool keep_snapshots = false);

struct OverlapHistogram {
    std::vector<double> edges;
    std::vector<long> counts;
    std::vector<double> neg_log_p;     // NaN where the bin is empty
    std::vector<double> neg_log_p_se;  // from 5 disjoint member subsets
    long total = 0;
};

// Pools the final network of every non-diverged member: one overlap
// w_i . w* per neuron.
OverlapHistogram overlap_histogram(const TsEnsemble& ens, const Vector& teacher,
                                   double lo, double hi, int n_bins);

double histogram_tail_mass(const OverlapHistogram& h, double threshold);

struct Projection {
    double mean = 0.0;
    double stderr_members = 0.0;
    std::vector<double> per_member;
};

enum class TargetComponent { H1, H3 };

// Ensemble-mean output projected on the normalized H1(w*.x) or
// eps*H3(w*.x) direction over a test set; the teacher projects to 1.
Projection output_projection(const TsEnsemble& ens, const TSDataset& testset,
                             TargetComponent component);

struct LossPoint {
    long step = 0;
    std::vector<double> train_mse;  // per member
    std::vector<double> test_mse;
};

struct LossTrack {
    std::vector<LossPoint> points;
};

// Re-runs the trajectory with checkpoints at the scheduled steps.
LossTrack loss_track_ts(const TSConfig& cfg, const LangevinSettings& settings,
                        int n_init_seeds, int n_data_seeds,
                        const std::vector<long>& schedule, std::uint64_t test_seed,
                        long n_test, int n_threads = 0);

struct ModeSpectrumRow {
    long k = 0;
    double mean_wk2vk2 = 0.0;  // pooled over neurons and members
    double mean_wk2 = 0.0;
    double mean_vk2 = 0.0;
};

struct ModeSpectrum {
    std::vector<ModeSpectrumRow> rows;
    double top_mode_share_median = 0.0;  // per-neuron max_k power / total power
};

// DFT of each neuron's two P-blocks; |w_k|^2 |v_k|^2 per mode is the
// empirical analog of the saddle average entering lambda.
ModeSpectrum mod_overlap_spectrum(const ModEnsemble& ens);

// Flat JSON checkpoints. Noise for step s comes from the dedicated stream
// member_rng.split(1 + s), so a checkpoint needs only (master seed, member
// index, step) to resume bit-exactly.
struct TsCheckpoint {
    TSConfig cfg;
    LangevinSettings settings;
    std::uint64_t master_seed = 0;
    long member_index = 0;
    int data_seed = 0;
    long step = 0;
    TSNetwork net;
};

std::string ts_checkpoint_json(const TsCheckpoint& c);
TsCheckpoint ts_checkpoint_load(const std::string& text);

// Advances a checkpointed member to until_step with the same noise path an
// uninterrupted run would have used.
TsCheckpoint ts_member_continue(const TsCheckpoint& c, long until_step);

// Runs one member from scratch (exposed so resume can be verified).
TsCheckpoint ts_member_run(const TSConfig& cfg, const LangevinSettings& settings,
                           std::uint64_t master_seed, long member_index, int data_seed,
                           long until_step);

std::string histogram_csv(const OverlapHistogram& h);
std::string loss_track_csv(const LossTrack& t);
std::string mode_spectrum_csv(const ModeSpectrum& s);

}  // namespace groklab
