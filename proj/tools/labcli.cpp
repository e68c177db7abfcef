#include "labcli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "groklab/io.hpp"
#include "groklab/langevin.hpp"
#include "groklab/mod_theory.hpp"
#include "groklab/models.hpp"
#include "groklab/ts_theory.hpp"
#include "json.hpp"

namespace groklab::cli {

namespace {

constexpr const char* kToolVersion = "groklab 1.0.0";
namespace fs = std::filesystem;
using nlohmann::json;

// ---- config schema ---------------------------------------------------------

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key()))
            throw std::invalid_argument("unknown key '" + where + it.key() + "'");
    }
}

struct RunConfig {
    std::string model;  // "ts" | "mod"
    TSConfig ts;
    ModConfig mod;
    ScalingKnobs scaling;
    bool has_scaling = false;

    std::vector<double> grid;
    std::string driver = "sigma2";
    bool scan_down = true;
    bool scan_up = true;

    TsSolverOptions solver;
    double window = 1.0;
    bool emit_curves = true;

    LangevinSettings langevin;
    int n_init_seeds = 4;
    int n_data_seeds = 1;
    bool keep_snapshots = false;
    bool keep_checkpoints = false;
    double hist_lo = -1.6, hist_hi = 1.6;
    int hist_bins = 61;
    long test_points = 3000;
    std::vector<long> schedule;
    double flop_cap = 2e13;

    std::string output_dir = "out";
    std::uint64_t seed = 1;
    int threads = 0;

    std::string raw_text;  // canonical config dump for hashing
};

RunConfig parse_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open config file '" + path + "'");
    json j;
    try {
        f >> j;
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }

    reject_unknown(j, {"model", "ts", "mod", "scaling", "scan", "solver", "langevin",
                       "output_dir", "seed", "threads"},
                   "");
    RunConfig rc;
    rc.model = j.at("model").get<std::string>();
    if (rc.model != "ts" && rc.model != "mod")
        throw std::invalid_argument("field 'model' must be \"ts\" or \"mod\"");

    if (rc.model == "ts") {
        if (!j.contains("ts")) throw std::invalid_argument("missing section 'ts'");
        const auto& t = j["ts"];
        reject_unknown(t, {"n", "d", "N", "sigma2", "sigma_a2", "sigma_w2", "eps"}, "ts.");
        rc.ts.n = t.at("n");
        rc.ts.d = t.at("d");
        rc.ts.N = t.at("N");
        rc.ts.sigma2 = t.at("sigma2");
        rc.ts.sigma_a2 = t.at("sigma_a2");
        rc.ts.sigma_w2 = t.at("sigma_w2");
        rc.ts.eps = t.at("eps");
        rc.ts.validate();
    } else {
        if (!j.contains("mod")) throw std::invalid_argument("missing section 'mod'");
        const auto& t = j["mod"];
        reject_unknown(t, {"P", "N", "sigma2", "sigma_a2", "gamma"}, "mod.");
        rc.mod.P = t.at("P");
        rc.mod.N = t.at("N");
        rc.mod.sigma2 = t.at("sigma2");
        rc.mod.sigma_a2 = t.at("sigma_a2");
        rc.mod.gamma = t.at("gamma");
        rc.mod.validate();
    }

    if (j.contains("scaling")) {
        const auto& s = j["scaling"];
        reject_unknown(s, {"alpha", "beta"}, "scaling.");
        rc.scaling.alpha = s.value("alpha", 1.0);
        rc.scaling.beta = s.value("beta", 1.0);
        rc.scaling.validate();
        rc.has_scaling = true;
    }

    if (j.contains("scan")) {
        const auto& s = j["scan"];
        reject_unknown(s, {"driver", "grid", "from", "to", "step", "directions"}, "scan.");
        rc.driver = s.value("driver", "sigma2");
        if (rc.driver != "sigma2")
            throw std::invalid_argument("scan.driver: only \"sigma2\" is supported");
        if (s.contains("grid")) {
            rc.grid = s.at("grid").get<std::vector<double>>();
        } else if (s.contains("from") && s.contains("to") && s.contains("step")) {
            double from = s.at("from"), to = s.at("to"), step = s.at("step");
            if (!(step > 0.0)) throw std::invalid_argument("scan.step must be > 0");
            for (double v = std::max(from, to); v >= std::min(from, to) - 1e-12; v -= step)
                rc.grid.push_back(v);
        }
        if (rc.grid.empty()) throw std::invalid_argument("scan.grid is empty");
        for (double g : rc.grid)
            if (!(g > 0.0)) throw std::invalid_argument("scan.grid entries must be > 0");
        if (s.contains("directions")) {
            rc.scan_down = rc.scan_up = false;
            for (const auto& d : s.at("directions")) {
                if (d == "down") rc.scan_down = true;
                else if (d == "up") rc.scan_up = true;
                else throw std::invalid_argument("scan.directions entries must be down|up");
            }
        }
    }

    if (j.contains("solver")) {
        const auto& s = j["solver"];
        reject_unknown(s,
                       {"mode", "window", "damping", "tol", "max_iter", "quad_rel_tol",
                        "width_cap", "emit_curves"},
                       "solver.");
        std::string mode = s.value("mode", "mixture");
        if (mode == "mixture") rc.solver.mode = TsSolverMode::Mixture;
        else if (mode == "quadrature") rc.solver.mode = TsSolverMode::Quadrature;
        else throw std::invalid_argument("solver.mode must be mixture|quadrature");
        rc.window = s.value("window", 1.0);
        rc.solver.phase_window = rc.window;
        rc.solver.fp_damping = s.value("damping", rc.solver.fp_damping);
        rc.solver.fp_tol = s.value("tol", rc.solver.fp_tol);
        rc.solver.fp_max_iter = s.value("max_iter", rc.solver.fp_max_iter);
        rc.solver.quad_rel_tol = s.value("quad_rel_tol", rc.solver.quad_rel_tol);
        rc.solver.width_cap = s.value("width_cap", rc.solver.width_cap);
        rc.emit_curves = s.value("emit_curves", true);
    }

    if (j.contains("langevin")) {
        const auto& s = j["langevin"];
        reject_unknown(s,
                       {"step_size", "n_steps", "burn_in", "thin", "n_init_seeds",
                        "n_data_seeds", "keep_snapshots", "keep_checkpoints", "histogram",
                        "test_points", "schedule", "flop_cap"},
                       "langevin.");
        rc.langevin.step_size = s.value("step_size", rc.langevin.step_size);
        rc.langevin.n_steps = s.value("n_steps", rc.langevin.n_steps);
        rc.langevin.burn_in = s.value("burn_in", rc.langevin.burn_in);
        rc.langevin.thin = s.value("thin", rc.langevin.thin);
        rc.n_init_seeds = s.value("n_init_seeds", rc.n_init_seeds);
        rc.n_data_seeds = s.value("n_data_seeds", rc.n_data_seeds);
        rc.keep_snapshots = s.value("keep_snapshots", false);
        rc.keep_checkpoints = s.value("keep_checkpoints", false);
        rc.test_points = s.value("test_points", rc.test_points);
        rc.flop_cap = s.value("flop_cap", rc.flop_cap);
        if (s.contains("histogram")) {
            const auto& h = s["histogram"];
            reject_unknown(h, {"lo", "hi", "bins"}, "langevin.histogram.");
            rc.hist_lo = h.value("lo", rc.hist_lo);
            rc.hist_hi = h.value("hi", rc.hist_hi);
            rc.hist_bins = h.value("bins", rc.hist_bins);
        }
        if (s.contains("schedule")) rc.schedule = s.at("schedule").get<std::vector<long>>();
        rc.langevin.validate();
    }

    rc.output_dir = j.value("output_dir", std::string("out"));
    rc.seed = j.value("seed", 1ull);
    rc.threads = j.value("threads", 0);
    rc.langevin.seed = rc.seed;
    rc.raw_text = j.dump();
    return rc;
}

fs::path resolve_output(const RunConfig& rc, const Overrides& ov) {
    fs::path dir = ov.output_dir ? *ov.output_dir : rc.output_dir;
    if (dir.is_relative()) {
        if (const char* root = std::getenv("GROKLAB_OUT_ROOT")) dir = fs::path(root) / dir;
    }
    return dir;
}

void apply_overrides(RunConfig& rc, const Overrides& ov) {
    if (ov.seed) {
        rc.seed = *ov.seed;
        rc.langevin.seed = *ov.seed;
    }
    if (ov.threads) rc.threads = *ov.threads;
}

RunManifest start_manifest(const RunConfig& rc) {
    RunManifest man;
    man.config_hash = hash_hex(fnv1a64(rc.raw_text + "|seed=" + std::to_string(rc.seed)));
    man.tool_version = kToolVersion;
    man.started_at = iso8601_now();
    return man;
}

std::string f17(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

// ---- ts-theory -------------------------------------------------------------

int run_ts_theory(const RunConfig& rc_in, const Overrides& ov) {
    RunConfig rc = rc_in;
    apply_overrides(rc, ov);
    TSConfig cfg = rc.has_scaling ? apply_scaling_ts(rc.ts, rc.scaling) : rc.ts;
    std::vector<double> grid = rc.grid;
    if (grid.empty()) grid = {cfg.sigma2};

    auto dir = resolve_output(rc, ov);
    auto man = start_manifest(rc);

    auto scan = scan_sigma_ts(cfg, grid, rc.solver);
    man.add(dir, "ts_scan.csv", ts_scan_csv(scan));

    if (rc.emit_curves) {
        int idx = 0;
        for (const auto& row : scan.rows) {
            if (row.branch_id != 0) continue;
            TSConfig c = cfg;
            c.sigma2 = row.sigma2;
            auto curve = action_curve(row.disc, c);
            std::ostringstream name;
            name << "action_curve_" << idx++ << ".csv";
            man.add(dir, name.str(), action_curve_csv(curve));
        }
    }

    auto cu = critical_u(cfg, grid.back() * 0.8,
                         *std::max_element(grid.begin(), grid.end()) * 1.2, rc.solver);
    json extra;
    extra["jump_sigma2"] = scan.jump_sigma2;
    extra["jump_height"] = scan.jump_height;
    extra["hysteresis"] = scan.hysteresis;
    extra["u_c"] = cu.u_c;
    extra["sigma2_c"] = cu.sigma2_c;
    extra["u_c_found"] = cu.found;
    extra["u_convention_note"] = cu.note;
    man.add(dir, "transition.json", extra.dump(2));

    bool partial = false;
    for (const auto& row : scan.rows) partial = partial || !row.converged;
    man.finished_at = iso8601_now();
    atomic_write(dir / "manifest.json", man.to_json());
    return partial ? kPartial : kClean;
}

// ---- mod-theory ------------------------------------------------------------

int run_mod_theory(const RunConfig& rc_in, const Overrides& ov) {
    RunConfig rc = rc_in;
    apply_overrides(rc, ov);
    ModConfig cfg = rc.mod;
    std::vector<double> grid = rc.grid;
    if (grid.empty()) grid = {cfg.sigma2};

    auto dir = resolve_output(rc, ov);
    auto man = start_manifest(rc);

    auto scan = scan_sigma_mod(cfg, grid, rc.window);
    man.add(dir, "mod_scan.csv", mod_scan_csv(scan));

    if (rc.emit_curves) {
        int idx = 0;
        for (const auto& row : scan.rows) {
            ModConfig c = cfg;
            c.sigma2 = row.sigma2;
            double xmax = row.w_plus2 > 0.0 ? 2.0 * row.w_plus2 : 3.0 / std::sqrt(cfg.gamma);
            std::ostringstream name;
            name << "mod_action_curve_" << idx++ << ".csv";
            man.add(dir, name.str(), mod_action_curve_csv(c, row.a_mag, xmax, 401));
        }
    }

    json extra;
    extra["boundaries_found"] = scan.boundaries_found;
    extra["boundary_gfl_to_gmfl1_sigma2"] = scan.boundary_gfl_to_i;
    extra["boundary_gmfl1_to_gmfl2_sigma2"] = scan.boundary_i_to_ii;
    extra["window_scaled_nats"] = rc.window;
    man.add(dir, "boundaries.json", extra.dump(2));

    man.finished_at = iso8601_now();
    atomic_write(dir / "manifest.json", man.to_json());
    return kClean;
}

// ---- sample ----------------------------------------------------------------

double estimate_flops(const RunConfig& rc) {
    double per_step;
    long members;
    if (rc.model == "ts") {
        per_step = 6.0 * rc.ts.N * rc.ts.d * std::max<long>(rc.ts.n, 1) +
                   40.0 * rc.ts.N * std::max<long>(rc.ts.n, 1);
        members = static_cast<long>(rc.n_init_seeds) * rc.n_data_seeds;
    } else {
        double P2 = static_cast<double>(rc.mod.P) * rc.mod.P;
        per_step = 6.0 * rc.mod.N * P2 * (2.0 + rc.mod.P);
        members = rc.n_init_seeds;
    }
    return per_step * rc.langevin.n_steps * members;
}

json moment_report_ts(const TsEnsemble& ens) {
    double sw = 0.0, sa = 0.0;
    long cw = 0, ca = 0;
    std::vector<double> member_w, member_a;
    for (const auto& m : ens.members) {
        if (m.diverged) continue;
        const auto& snaps = m.snapshots.empty() ? std::vector<TSNetwork>{m.final_net}
                                                : m.snapshots;
        double mw = 0.0, ma = 0.0;
        long kw = 0, ka = 0;
        for (const auto& s : snaps) {
            mw += s.input_weights.array().square().sum();
            kw += s.input_weights.size();
            ma += s.readout.array().square().sum();
            ka += s.readout.size();
        }
        member_w.push_back(mw / kw);
        member_a.push_back(ma / ka);
        sw += mw;
        cw += kw;
        sa += ma;
        ca += ka;
    }
    auto se = [](const std::vector<double>& v) {
        if (v.size() < 2) return 0.0;
        double m = 0.0;
        for (double x : v) m += x;
        m /= v.size();
        double s2 = 0.0;
        for (double x : v) s2 += (x - m) * (x - m);
        return std::sqrt(s2 / (v.size() - 1) / v.size());
    };
    json j;
    j["input_weight_var"] = sw / std::max<long>(cw, 1);
    j["input_weight_var_declared"] = ens.cfg.sigma_w2 / ens.cfg.d;
    j["input_weight_var_se"] = se(member_w);
    j["readout_var"] = sa / std::max<long>(ca, 1);
    j["readout_var_declared"] = ens.cfg.sigma_a2 / ens.cfg.N;
    j["readout_var_se"] = se(member_a);
    return j;
}

int run_sample(const RunConfig& rc_in, const Overrides& ov) {
    RunConfig rc = rc_in;
    apply_overrides(rc, ov);
    double flops = estimate_flops(rc);
    if (flops > rc.flop_cap && !ov.force) {
        std::cerr << "estimated work " << flops << " flops exceeds flop_cap " << rc.flop_cap
                  << "; rerun with --force to proceed\n";
        return kInvalid;
    }

    auto dir = resolve_output(rc, ov);
    auto man = start_manifest(rc);
    long diverged = 0;

    if (rc.model == "ts") {
        TSConfig cfg = rc.has_scaling ? apply_scaling_ts(rc.ts, rc.scaling) : rc.ts;
        auto ens = run_ensemble_ts(cfg, rc.langevin, rc.n_init_seeds, rc.n_data_seeds,
                                   rc.threads, rc.keep_snapshots || cfg.n == 0);
        diverged = ens.diverged_count;

        if (cfg.n == 0) {
            man.add(dir, "prior_moments.json", moment_report_ts(ens).dump(2));
        } else {
            RngStream master(rc.seed);
            RngStream ds_stream = master.split(1000000);
            auto train0 = ts_sample_dataset(cfg, ds_stream.next_u64());
            TSConfig tc = cfg;
            tc.n = rc.test_points;
            auto testset = ts_sample_dataset(tc, rc.seed ^ 0x7e57beefull);
            testset.teacher = train0.teacher;
            for (long i = 0; i < testset.inputs.rows(); ++i)
                testset.labels[i] = ts_target_of_overlap(
                    testset.inputs.row(i).dot(testset.teacher), cfg.eps);

            auto hist = overlap_histogram(ens, train0.teacher, rc.hist_lo, rc.hist_hi,
                                          rc.hist_bins);
            man.add(dir, "overlap_histogram.csv", histogram_csv(hist));

            auto p1 = output_projection(ens, testset, TargetComponent::H1);
            auto p3 = output_projection(ens, testset, TargetComponent::H3);
            json pj;
            pj["h1"] = {{"mean", p1.mean}, {"stderr", p1.stderr_members}};
            pj["h3"] = {{"mean", p3.mean}, {"stderr", p3.stderr_members}};
            pj["tail_mass_0.5"] = histogram_tail_mass(hist, 0.5);
            man.add(dir, "projections.json", pj.dump(2));

            if (!rc.schedule.empty()) {
                auto track = loss_track_ts(cfg, rc.langevin, rc.n_init_seeds, rc.n_data_seeds,
                                           rc.schedule, rc.seed ^ 0x10557u, rc.test_points,
                                           rc.threads);
                man.add(dir, "loss_track.csv", loss_track_csv(track));
            }
        }
        if (rc.keep_checkpoints) {
            for (size_t i = 0; i < ens.members.size(); ++i) {
                TsCheckpoint c;
                c.cfg = cfg;
                c.settings = rc.langevin;
                c.master_seed = rc.seed;
                c.member_index = static_cast<long>(i);
                c.data_seed = static_cast<int>(i % rc.n_data_seeds);
                c.step = ens.members[i].steps_run;
                c.net = ens.members[i].final_net;
                std::ostringstream name;
                name << "checkpoint_" << i << ".json";
                man.add(dir, name.str(), ts_checkpoint_json(c));
            }
        }
    } else {
        ModConfig cfg = rc.mod;
        auto ens = run_ensemble_mod(cfg, rc.langevin, rc.n_init_seeds, rc.threads,
                                    rc.keep_snapshots);
        diverged = ens.diverged_count;
        auto spec = mod_overlap_spectrum(ens);
        man.add(dir, "mode_spectrum.csv", mode_spectrum_csv(spec));
        json mj;
        mj["top_mode_share_median"] = spec.top_mode_share_median;
        mj["diverged_members"] = diverged;
        man.add(dir, "spectrum_summary.json", mj.dump(2));
    }

    json status;
    status["diverged_members"] = diverged;
    man.add(dir, "status.json", status.dump(2));
    man.finished_at = iso8601_now();
    atomic_write(dir / "manifest.json", man.to_json());
    return diverged > 0 ? kPartial : kClean;
}

// ---- verify ----------------------------------------------------------------

int run_verify(const RunConfig& rc_in, const Overrides& ov) {
    RunConfig rc = rc_in;
    apply_overrides(rc, ov);
    auto dir = resolve_output(rc, ov);
    auto man = start_manifest(rc);
    json rep;
    bool all = true;

    // kernel symmetry suite at small P
    for (long P : {5L, 7L}) {
        auto k = nngp_kernel(P, 1.0);
        auto sym = verify_symmetries(k, P);
        rep["symmetry_P" + std::to_string(P)] = json::parse(symmetry_report_json(sym));
        all = all && sym.all_pass;
    }

    // integral oracles: 10 random (q, wnorm2) draws vs Monte Carlo
    {
        RngStream rng(rc.seed);
        json items = json::array();
        for (int i = 0; i < 10; ++i) {
            double q = 0.35 + 0.9 * rng.uniform();
            double w2 = q * q + 2.0 * rng.uniform();
            const long n = 2000000;
            double cross = std::sqrt(std::max(w2 - q * q, 0.0));
            double s1 = 0.0, s3 = 0.0;
            for (long s = 0; s < n; ++s) {
                double z1 = rng.normal(), z2 = rng.normal();
                double e = std::erf(q * z1 + cross * z2);
                s1 += z1 * e;
                s3 += z1 * z1 * z1 * e;
            }
            double mc0 = s1 / n, mc1 = s3 / n;
            double r0 = std::abs(mc0 - integral_I0(q, w2)) / std::abs(integral_I0(q, w2));
            double r1 = std::abs(mc1 - integral_I1(q, w2)) / std::abs(integral_I1(q, w2));
            bool ok = r0 < 0.01 && r1 < 0.01;
            all = all && ok;
            items.push_back({{"q", q}, {"wnorm2", w2}, {"rel_err_I0", r0}, {"rel_err_I1", r1},
                             {"pass", ok}});
        }
        rep["integral_oracles"] = std::move(items);
    }

    // gradient finite-difference checks
    {
        TSConfig cfg;
        cfg.n = 10;
        cfg.d = 4;
        cfg.N = 5;
        cfg.sigma2 = 0.3;
        cfg.sigma_a2 = 0.8;
        cfg.sigma_w2 = 0.5;
        cfg.eps = -0.4;
        auto ds = ts_sample_dataset(cfg, 2);
        RngStream rng(7);
        double worst = 0.0;
        for (int rep_i = 0; rep_i < 20; ++rep_i) {
            auto net = ts_init_from_prior(cfg, rng);
            Matrix gw;
            Vector ga;
            ts_gradients(net, ds.inputs, ds.labels, gw, ga);
            long i = rep_i % cfg.N, j = rep_i % cfg.d;
            const double h = 1e-6;
            TSNetwork p = net, m = net;
            p.input_weights(i, j) += h;
            m.input_weights(i, j) -= h;
            double fd = ((ts_forward_batch(p, ds.inputs) - ds.labels).squaredNorm() -
                         (ts_forward_batch(m, ds.inputs) - ds.labels).squaredNorm()) /
                        (2.0 * h);
            worst = std::max(worst, std::abs(gw(i, j) - fd) / std::max(1.0, std::abs(fd)));
        }
        bool ok = worst < 1e-6;
        all = all && ok;
        rep["gradient_fd"] = {{"worst_rel_err", worst}, {"pass", ok}};
    }

    rep["all_pass"] = all;
    man.add(dir, "verification.json", rep.dump(2));
    man.finished_at = iso8601_now();
    atomic_write(dir / "manifest.json", man.to_json());
    return all ? kClean : kVerifyFailed;
}

}  // namespace

void validate_config_file(const std::string& config_path) { (void)parse_config(config_path); }

int cmd_ts_theory(const std::string& config_path, const Overrides& ov) {
    try {
        auto rc = parse_config(config_path);
        if (rc.model != "ts") throw std::invalid_argument("ts-theory needs model=\"ts\"");
        return run_ts_theory(rc, ov);
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kInvalid;
    }
}

int cmd_mod_theory(const std::string& config_path, const Overrides& ov) {
    try {
        auto rc = parse_config(config_path);
        if (rc.model != "mod") throw std::invalid_argument("mod-theory needs model=\"mod\"");
        return run_mod_theory(rc, ov);
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kInvalid;
    }
}

int cmd_scan(const std::string& config_path, const Overrides& ov) {
    try {
        auto rc = parse_config(config_path);
        return rc.model == "ts" ? run_ts_theory(rc, ov) : run_mod_theory(rc, ov);
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kInvalid;
    }
}

int cmd_sample(const std::string& config_path, const Overrides& ov) {
    try {
        auto rc = parse_config(config_path);
        return run_sample(rc, ov);
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kInvalid;
    }
}

int cmd_verify(const std::string& config_path, const Overrides& ov) {
    try {
        auto rc = parse_config(config_path);
        return run_verify(rc, ov);
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kInvalid;
    }
}

int cmd_resume(const std::string& checkpoint_path, long until_step, const Overrides& ov) {
    try {
        std::ifstream f(checkpoint_path);
        if (!f) throw std::invalid_argument("cannot open checkpoint " + checkpoint_path);
        std::stringstream ss;
        ss << f.rdbuf();
        auto cp = ts_checkpoint_load(ss.str());
        long target = until_step > 0 ? until_step : cp.settings.n_steps;
        auto done = ts_member_continue(cp, target);
        fs::path out = ov.output_dir ? fs::path(*ov.output_dir) : fs::path(checkpoint_path);
        if (!ov.output_dir) out += ".resumed";
        atomic_write(out, ts_checkpoint_json(done));
        std::cout << "resumed member " << cp.member_index << " from step " << cp.step << " to "
                  << done.step << " -> " << out.string() << "\n";
        return kClean;
    } catch (const std::exception& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kInvalid;
    }
}

}  // namespace groklab::cli
