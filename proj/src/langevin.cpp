#include "groklab/langevin.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <sstream>

#include "groklab/threads.hpp"
#include "json.hpp"

namespace groklab {

namespace {
constexpr double kTwoOverSqrtPi = 1.1283791670955125739;
constexpr double kDivergeGuard = 1e6;

double mean(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

double stderr_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double m = mean(v);
    double s2 = 0.0;
    for (double x : v) s2 += (x - m) * (x - m);
    return std::sqrt(s2 / (v.size() - 1) / v.size());
}

}  // namespace

void LangevinSettings::validate() const {
    if (!(step_size > 0.0)) throw std::invalid_argument("LangevinSettings: step_size > 0");
    if (burn_in >= n_steps) throw std::invalid_argument("LangevinSettings: burn_in < n_steps");
    if (thin < 1) throw std::invalid_argument("LangevinSettings: thin >= 1");
}

TsLayerDecays ts_layer_decays(const TSConfig& cfg) {
    double T = 2.0 * cfg.sigma2;
    return {T * cfg.d / cfg.sigma_w2, T * cfg.N / cfg.sigma_a2, T};
}

ModLayerDecays mod_layer_decays(const ModConfig& cfg) {
    // Input weights carry unit prior variance in this model.
    double T = 2.0 * cfg.sigma2;
    return {T, T * cfg.N / cfg.sigma_a2, T};
}

TSNetwork ts_init_from_prior(const TSConfig& cfg, RngStream& rng) {
    TSNetwork net;
    double sw = std::sqrt(cfg.sigma_w2 / cfg.d);
    double sa = std::sqrt(cfg.sigma_a2 / cfg.N);
    net.input_weights.resize(cfg.N, cfg.d);
    net.readout.resize(cfg.N);
    for (long i = 0; i < cfg.N; ++i)
        for (long j = 0; j < cfg.d; ++j) net.input_weights(i, j) = sw * rng.normal();
    for (long i = 0; i < cfg.N; ++i) net.readout[i] = sa * rng.normal();
    return net;
}

ModNetwork mod_init_from_prior(const ModConfig& cfg, RngStream& rng) {
    ModNetwork net;
    double sa = std::sqrt(cfg.sigma_a2 / cfg.N);
    net.input_weights.resize(cfg.N, 2 * cfg.P);
    net.readout.resize(cfg.P, cfg.N);
    for (long i = 0; i < cfg.N; ++i)
        for (long j = 0; j < 2 * cfg.P; ++j) net.input_weights(i, j) = rng.normal();
    for (long p = 0; p < cfg.P; ++p)
        for (long i = 0; i < cfg.N; ++i) net.readout(p, i) = sa * rng.normal();
    return net;
}

void ts_gradients(const TSNetwork& net, const Matrix& inputs, const Vector& labels,
                  Matrix& grad_w, Vector& grad_a) {
    if (inputs.rows() == 0) {
        grad_w = Matrix::Zero(net.input_weights.rows(), net.input_weights.cols());
        grad_a = Vector::Zero(net.readout.size());
        return;
    }
    Matrix z = net.input_weights * inputs.transpose();  // N x n
    Matrix e = z.unaryExpr([](double v) { return std::erf(v); });
    Vector r = e.transpose() * net.readout - labels;  // n
    grad_a = 2.0 * (e * r);
    // dL/dW_i = 2 a_i sum_mu r_mu (2/sqrt(pi)) exp(-z_{i mu}^2) x_mu
    Matrix gz = (-z.array().square()).exp();
    gz.array().rowwise() *= r.transpose().array();
    grad_w = (2.0 * kTwoOverSqrtPi) * (net.readout.asDiagonal() * (gz * inputs));
}

void mod_gradients(const ModNetwork& net, const Matrix& inputs, const Matrix& labels,
                   Matrix& grad_w, Matrix& grad_a) {
    if (inputs.rows() == 0) {
        grad_w = Matrix::Zero(net.input_weights.rows(), net.input_weights.cols());
        grad_a = Matrix::Zero(net.readout.rows(), net.readout.cols());
        return;
    }
    Matrix z = net.input_weights * inputs.transpose();  // N x S
    Matrix h = z.array().square();
    Matrix r = net.readout * h - labels.transpose();  // P x S
    grad_a = 2.0 * (r * h.transpose());
    Matrix gz = (net.readout.transpose() * r).array() * (2.0 * z.array());
    grad_w = 2.0 * (gz * inputs);
}

namespace {

template <typename NetLike, typename GradFn>
bool langevin_update(NetLike& net, GradFn&& grads, double step_size, double T,
                     double gamma_w, double gamma_a, RngStream& rng) {
    auto [gw, ga] = grads(net);
    double noise = std::sqrt(2.0 * T * step_size);
    for (long i = 0; i < net.input_weights.rows(); ++i)
        for (long j = 0; j < net.input_weights.cols(); ++j) {
            double& w = net.input_weights(i, j);
            w += -step_size * (gw(i, j) + gamma_w * w) + noise * rng.normal();
        }
    if constexpr (std::is_same_v<std::decay_t<decltype(net.readout)>, Vector>) {
        for (long i = 0; i < net.readout.size(); ++i) {
            double& a = net.readout[i];
            a += -step_size * (ga[i] + gamma_a * a) + noise * rng.normal();
        }
    } else {
        for (long p = 0; p < net.readout.rows(); ++p)
            for (long i = 0; i < net.readout.cols(); ++i) {
                double& a = net.readout(p, i);
                a += -step_size * (ga(p, i) + gamma_a * a) + noise * rng.normal();
            }
    }
    return net.input_weights.allFinite() &&
           net.input_weights.template lpNorm<Eigen::Infinity>() < kDivergeGuard &&
           net.readout.allFinite() &&
           net.readout.template lpNorm<Eigen::Infinity>() < kDivergeGuard;
}

}  // namespace

bool ts_langevin_step(TSNetwork& net, const Matrix& inputs, const Vector& labels,
                      const TSConfig& cfg, double step_size, RngStream& rng) {
    auto dec = ts_layer_decays(cfg);
    return langevin_update(
        net,
        [&](const TSNetwork& n) {
            Matrix gw;
            Vector ga;
            ts_gradients(n, inputs, labels, gw, ga);
            return std::make_pair(std::move(gw), std::move(ga));
        },
        step_size, dec.temperature, dec.gamma_w, dec.gamma_a, rng);
}

bool mod_langevin_step(ModNetwork& net, const Matrix& inputs, const Matrix& labels,
                       const ModConfig& cfg, double step_size, RngStream& rng) {
    auto dec = mod_layer_decays(cfg);
    return langevin_update(
        net,
        [&](const ModNetwork& n) {
            Matrix gw, ga;
            mod_gradients(n, inputs, labels, gw, ga);
            return std::make_pair(std::move(gw), std::move(ga));
        },
        step_size, dec.temperature, dec.gamma_w, dec.gamma_a, rng);
}

TsEnsemble run_ensemble_ts(const TSConfig& cfg, const LangevinSettings& settings,
                           int n_init_seeds, int n_data_seeds, int n_threads,
                           bool keep_snapshots) {
    cfg.validate();
    settings.validate();
    TsEnsemble ens;
    ens.cfg = cfg;
    ens.settings = settings;
    long n_members = static_cast<long>(n_init_seeds) * n_data_seeds;
    ens.members.resize(n_members);

    RngStream master(settings.seed);
    // Datasets are shared across init seeds with the same data seed.
    std::vector<TSDataset> datasets(n_data_seeds);
    for (int j = 0; j < n_data_seeds; ++j) {
        RngStream ds_stream = master.split(1000000 + j);
        datasets[j] = ts_sample_dataset(cfg, ds_stream.next_u64());
    }

    parallel_for(
        n_members,
        [&](long idx) {
            int i = static_cast<int>(idx / n_data_seeds);
            int j = static_cast<int>(idx % n_data_seeds);
            TsMember& m = ens.members[idx];
            m.init_seed = i;
            m.data_seed = j;
            RngStream member_rng = master.split(idx);
            RngStream init_rng = member_rng.split(0);
            TSNetwork net = ts_init_from_prior(cfg, init_rng);
            const auto& ds = datasets[j];
            for (long step = 0; step < settings.n_steps; ++step) {
                RngStream step_rng = member_rng.split(1 + step);
                if (!ts_langevin_step(net, ds.inputs, ds.labels, cfg, settings.step_size,
                                      step_rng)) {
                    m.diverged = true;
                    m.steps_run = step;
                    return;
                }
                if (keep_snapshots && step >= settings.burn_in &&
                    (step - settings.burn_in) % settings.thin == 0)
                    m.snapshots.push_back(net);
            }
            m.final_net = std::move(net);
            m.steps_run = settings.n_steps;
        },
        n_threads);

    for (const auto& m : ens.members)
        if (m.diverged) ++ens.diverged_count;
    return ens;
}

ModEnsemble run_ensemble_mod(const ModConfig& cfg, const LangevinSettings& settings,
                             int n_init_seeds, int n_threads, bool keep_snapshots) {
    cfg.validate();
    settings.validate();
    ModEnsemble ens;
    ens.cfg = cfg;
    ens.settings = settings;
    ens.members.resize(n_init_seeds);
    RngStream master(settings.seed);
    ModDataset ds = mod_dataset(cfg.P);  // the dataset is the full table, no draw seed

    parallel_for(
        n_init_seeds,
        [&](long idx) {
            ModMember& m = ens.members[idx];
            m.init_seed = idx;
            RngStream member_rng = master.split(idx);
            RngStream init_rng = member_rng.split(0);
            ModNetwork net = mod_init_from_prior(cfg, init_rng);
            for (long step = 0; step < settings.n_steps; ++step) {
                RngStream step_rng = member_rng.split(1 + step);
                if (!mod_langevin_step(net, ds.inputs, ds.labels, cfg, settings.step_size,
                                       step_rng)) {
                    m.diverged = true;
                    m.steps_run = step;
                    return;
                }
                if (keep_snapshots && step >= settings.burn_in &&
                    (step - settings.burn_in) % settings.thin == 0)
                    m.snapshots.push_back(net);
            }
            m.final_net = std::move(net);
            m.steps_run = settings.n_steps;
        },
        n_threads);

    for (const auto& m : ens.members)
        if (m.diverged) ++ens.diverged_count;
    return ens;
}

OverlapHistogram overlap_histogram(const TsEnsemble& ens, const Vector& teacher, double lo,
                                   double hi, int n_bins) {
    OverlapHistogram h;
    h.edges.resize(n_bins + 1);
    for (int i = 0; i <= n_bins; ++i) h.edges[i] = lo + (hi - lo) * i / n_bins;
    h.counts.assign(n_bins, 0);

    std::vector<std::vector<long>> subset_counts(5, std::vector<long>(n_bins, 0));
    std::vector<long> subset_totals(5, 0);
    long member_idx = 0;
    for (const auto& m : ens.members) {
        if (m.diverged) continue;
        int subset = static_cast<int>(member_idx % 5);
        Vector phi = m.final_net.input_weights * teacher;
        for (long i = 0; i < phi.size(); ++i) {
            ++h.total;
            ++subset_totals[subset];
            double v = phi[i];
            if (v < lo || v >= hi) continue;  // clamp into end bins for mass accounting
            int bin = static_cast<int>((v - lo) / (hi - lo) * n_bins);
            bin = std::clamp(bin, 0, n_bins - 1);
            ++h.counts[bin];
            ++subset_counts[subset][bin];
        }
        ++member_idx;
    }

    double binw = (hi - lo) / n_bins;
    h.neg_log_p.assign(n_bins, std::numeric_limits<double>::quiet_NaN());
    h.neg_log_p_se.assign(n_bins, std::numeric_limits<double>::quiet_NaN());
    for (int b = 0; b < n_bins; ++b) {
        if (h.counts[b] == 0) continue;  // empty bins carry no estimate, flagged by NaN
        h.neg_log_p[b] = -std::log(h.counts[b] / (h.total * binw));
        std::vector<double> vals;
        for (int s = 0; s < 5; ++s)
            if (subset_counts[s][b] > 0 && subset_totals[s] > 0)
                vals.push_back(-std::log(subset_counts[s][b] / (subset_totals[s] * binw)));
        if (vals.size() >= 2) {
            double m = mean(vals), s2 = 0.0;
            for (double v : vals) s2 += (v - m) * (v - m);
            h.neg_log_p_se[b] = std::sqrt(s2 / (vals.size() - 1) / vals.size());
        }
    }
    return h;
}

double histogram_tail_mass(const OverlapHistogram& h, double threshold) {
    if (h.total == 0) return 0.0;
    long tail = 0;
    int n_bins = static_cast<int>(h.counts.size());
    for (int b = 0; b < n_bins; ++b) {
        double center = 0.5 * (h.edges[b] + h.edges[b + 1]);
        if (std::abs(center) > threshold) tail += h.counts[b];
    }
    return static_cast<double>(tail) / h.total;
}

Projection output_projection(const TsEnsemble& ens, const TSDataset& testset,
                             TargetComponent component) {
    Vector t = testset.inputs * testset.teacher;
    Vector u(t.size());
    for (long i = 0; i < t.size(); ++i) {
        double ti = t[i];
        u[i] = component == TargetComponent::H1 ? ti
                                                : testset.cfg.eps * (ti * ti * ti - 3.0 * ti);
    }
    double uu = u.squaredNorm();
    Projection p;
    for (const auto& m : ens.members) {
        if (m.diverged) continue;
        Vector f = ts_forward_batch(m.final_net, testset.inputs);
        p.per_member.push_back(f.dot(u) / uu);
    }
    p.mean = mean(p.per_member);
    p.stderr_members = stderr_of(p.per_member);
    return p;
}

LossTrack loss_track_ts(const TSConfig& cfg, const LangevinSettings& settings,
                        int n_init_seeds, int n_data_seeds, const std::vector<long>& schedule,
                        std::uint64_t test_seed, long n_test, int n_threads) {
    cfg.validate();
    settings.validate();
    TSConfig test_cfg = cfg;
    test_cfg.n = n_test;
    TSDataset common_test = ts_sample_dataset(test_cfg, test_seed);

    std::vector<long> sched = schedule;
    std::sort(sched.begin(), sched.end());

    long n_members = static_cast<long>(n_init_seeds) * n_data_seeds;
    std::vector<std::vector<std::pair<double, double>>> per_member(n_members);

    RngStream master(settings.seed);
    std::vector<TSDataset> datasets(n_data_seeds);
    for (int j = 0; j < n_data_seeds; ++j) {
        RngStream ds_stream = master.split(1000000 + j);
        datasets[j] = ts_sample_dataset(cfg, ds_stream.next_u64());
    }
    // Test labels must come from each member's own teacher, so rebuild the
    // test inputs against the train teacher per data seed.
    parallel_for(
        n_members,
        [&](long idx) {
            int j = static_cast<int>(idx % n_data_seeds);
            const auto& ds = datasets[j];
            Vector test_labels(common_test.inputs.rows());
            for (long i = 0; i < common_test.inputs.rows(); ++i)
                test_labels[i] = ts_target_of_overlap(
                    common_test.inputs.row(i).dot(ds.teacher), cfg.eps);

            RngStream member_rng = master.split(idx);
            RngStream init_rng = member_rng.split(0);
            TSNetwork net = ts_init_from_prior(cfg, init_rng);
            size_t next = 0;
            auto record = [&](long step) {
                while (next < sched.size() && sched[next] == step) {
                    double train = ds.labels.size()
                                       ? (ts_forward_batch(net, ds.inputs) - ds.labels)
                                                 .squaredNorm() /
                                             ds.labels.size()
                                       : 0.0;
                    double test = (ts_forward_batch(net, common_test.inputs) - test_labels)
                                      .squaredNorm() /
                                  test_labels.size();
                    per_member[idx].emplace_back(train, test);
                    ++next;
                }
            };
            record(0);
            for (long step = 1; step <= settings.n_steps; ++step) {
                RngStream step_rng = member_rng.split(step);  // step s noise = split(s), s >= 1
                if (!ts_langevin_step(net, ds.inputs, ds.labels, cfg, settings.step_size,
                                      step_rng))
                    break;
                record(step);
            }
        },
        n_threads);

    LossTrack out;
    for (size_t s = 0; s < sched.size(); ++s) {
        LossPoint pt;
        pt.step = sched[s];
        for (long m = 0; m < n_members; ++m) {
            if (s < per_member[m].size()) {
                pt.train_mse.push_back(per_member[m][s].first);
                pt.test_mse.push_back(per_member[m][s].second);
            }
        }
        out.points.push_back(std::move(pt));
    }
    return out;
}

ModeSpectrum mod_overlap_spectrum(const ModEnsemble& ens) {
    const long P = ens.cfg.P;
    ModeSpectrum out;
    out.rows.resize(P);
    for (long k = 0; k < P; ++k) out.rows[k].k = k;

    const double two_pi = 6.283185307179586476925286766559;
    long pooled = 0;
    std::vector<double> top_shares;
    for (const auto& m : ens.members) {
        if (m.diverged) continue;
        for (long i = 0; i < m.final_net.input_weights.rows(); ++i) {
            std::vector<double> wk2(P), vk2(P);
            for (long k = 0; k < P; ++k) {
                std::complex<double> wk(0.0, 0.0), vk(0.0, 0.0);
                for (long n = 0; n < P; ++n) {
                    double phase = two_pi * k * n / P;
                    std::complex<double> e(std::cos(phase), std::sin(phase));
                    wk += m.final_net.input_weights(i, n) * e;
                    vk += m.final_net.input_weights(i, P + n) * e;
                }
                wk /= static_cast<double>(P);
                vk /= static_cast<double>(P);
                wk2[k] = std::norm(wk);
                vk2[k] = std::norm(vk);
            }
            double total = 0.0, top = 0.0;
            for (long k = 0; k < P; ++k) {
                out.rows[k].mean_wk2vk2 += wk2[k] * vk2[k];
                out.rows[k].mean_wk2 += wk2[k];
                out.rows[k].mean_vk2 += vk2[k];
                if (k >= 1) {
                    double pw = wk2[k] * vk2[k];
                    total += pw;
                    top = std::max(top, pw);
                }
            }
            if (total > 0.0) top_shares.push_back(top / total);
            ++pooled;
        }
    }
    if (pooled > 0)
        for (auto& r : out.rows) {
            r.mean_wk2vk2 /= pooled;
            r.mean_wk2 /= pooled;
            r.mean_vk2 /= pooled;
        }
    if (!top_shares.empty()) {
        std::sort(top_shares.begin(), top_shares.end());
        out.top_mode_share_median = top_shares[top_shares.size() / 2];
    }
    return out;
}

namespace {

TSDataset dataset_for(const TSConfig& cfg, std::uint64_t master_seed, int data_seed) {
    RngStream master(master_seed);
    RngStream ds_stream = master.split(1000000 + data_seed);
    return ts_sample_dataset(cfg, ds_stream.next_u64());
}

}  // namespace

TsCheckpoint ts_member_run(const TSConfig& cfg, const LangevinSettings& settings,
                           std::uint64_t master_seed, long member_index, int data_seed,
                           long until_step) {
    TsCheckpoint c;
    c.cfg = cfg;
    c.settings = settings;
    c.master_seed = master_seed;
    c.member_index = member_index;
    c.data_seed = data_seed;
    c.step = 0;
    RngStream member_rng = RngStream(master_seed).split(member_index);
    RngStream init_rng = member_rng.split(0);
    c.net = ts_init_from_prior(cfg, init_rng);
    return ts_member_continue(c, until_step);
}

TsCheckpoint ts_member_continue(const TsCheckpoint& c, long until_step) {
    TsCheckpoint out = c;
    TSDataset ds = dataset_for(c.cfg, c.master_seed, c.data_seed);
    RngStream member_rng = RngStream(c.master_seed).split(c.member_index);
    for (long step = c.step; step < until_step; ++step) {
        RngStream step_rng = member_rng.split(1 + step);
        if (!ts_langevin_step(out.net, ds.inputs, ds.labels, c.cfg, c.settings.step_size,
                              step_rng))
            break;
        out.step = step + 1;
    }
    return out;
}

std::string ts_checkpoint_json(const TsCheckpoint& c) {
    nlohmann::json j;
    j["kind"] = "ts_checkpoint";
    j["step"] = c.step;
    j["master_seed"] = c.master_seed;
    j["member_index"] = c.member_index;
    j["data_seed"] = c.data_seed;
    j["config"] = {{"n", c.cfg.n},       {"d", c.cfg.d},           {"N", c.cfg.N},
                   {"sigma2", c.cfg.sigma2}, {"sigma_a2", c.cfg.sigma_a2},
                   {"sigma_w2", c.cfg.sigma_w2}, {"eps", c.cfg.eps}};
    j["settings"] = {{"step_size", c.settings.step_size}, {"n_steps", c.settings.n_steps},
                     {"burn_in", c.settings.burn_in},     {"thin", c.settings.thin},
                     {"seed", c.settings.seed}};
    const auto& W = c.net.input_weights;
    j["input_weights"] = std::vector<double>(W.data(), W.data() + W.size());
    const auto& a = c.net.readout;
    j["readout"] = std::vector<double>(a.data(), a.data() + a.size());
    return j.dump();
}

TsCheckpoint ts_checkpoint_load(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    if (j.at("kind") != "ts_checkpoint") throw std::invalid_argument("not a ts_checkpoint");
    TsCheckpoint c;
    const auto& cf = j.at("config");
    c.cfg.n = cf.at("n");
    c.cfg.d = cf.at("d");
    c.cfg.N = cf.at("N");
    c.cfg.sigma2 = cf.at("sigma2");
    c.cfg.sigma_a2 = cf.at("sigma_a2");
    c.cfg.sigma_w2 = cf.at("sigma_w2");
    c.cfg.eps = cf.at("eps");
    const auto& st = j.at("settings");
    c.settings.step_size = st.at("step_size");
    c.settings.n_steps = st.at("n_steps");
    c.settings.burn_in = st.at("burn_in");
    c.settings.thin = st.at("thin");
    c.settings.seed = st.at("seed");
    c.master_seed = j.at("master_seed");
    c.member_index = j.at("member_index");
    c.data_seed = j.at("data_seed");
    c.step = j.at("step");
    auto wv = j.at("input_weights").get<std::vector<double>>();
    c.net.input_weights = Eigen::Map<Matrix>(wv.data(), c.cfg.N, c.cfg.d);
    auto av = j.at("readout").get<std::vector<double>>();
    c.net.readout = Eigen::Map<Vector>(av.data(), av.size());
    return c;
}

std::string histogram_csv(const OverlapHistogram& h) {
    std::ostringstream os;
    os.precision(17);
    os << "bin_lo,bin_hi,count,neg_log_p,neg_log_p_se\n";
    for (size_t b = 0; b < h.counts.size(); ++b) {
        os << h.edges[b] << "," << h.edges[b + 1] << "," << h.counts[b] << ",";
        if (std::isnan(h.neg_log_p[b]))
            os << "NA,NA\n";
        else
            os << h.neg_log_p[b] << "," << (std::isnan(h.neg_log_p_se[b]) ? 0.0 : h.neg_log_p_se[b])
               << "\n";
    }
    return os.str();
}

std::string loss_track_csv(const LossTrack& t) {
    std::ostringstream os;
    os.precision(17);
    os << "step,member,train_mse,test_mse\n";
    for (const auto& p : t.points)
        for (size_t m = 0; m < p.train_mse.size(); ++m)
            os << p.step << "," << m << "," << p.train_mse[m] << "," << p.test_mse[m] << "\n";
    return os.str();
}

std::string mode_spectrum_csv(const ModeSpectrum& s) {
    std::ostringstream os;
    os.precision(17);
    os << "k,mean_wk2vk2,mean_wk2,mean_vk2\n";
    for (const auto& r : s.rows)
        os << r.k << "," << r.mean_wk2vk2 << "," << r.mean_wk2 << "," << r.mean_vk2 << "\n";
    return os.str();
}

}  // namespace groklab
