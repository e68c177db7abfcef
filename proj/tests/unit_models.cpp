#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "groklab/models.hpp"

using namespace groklab;

TEST_CASE("ts_target: direct substitutions") {
    CHECK(ts_target_of_overlap(0.0, 0.7) == 0.0);
    CHECK(ts_target_of_overlap(1.0, -0.3) == doctest::Approx(1.6));
    CHECK(ts_target_of_overlap(2.0, -1.2) == doctest::Approx(-0.4));

    Vector teacher(2);
    teacher << 1.0, 0.0;
    Vector x(2);
    x << 2.0, 5.0;
    CHECK(ts_target(x, teacher, -1.2) == doctest::Approx(-0.4));
}

TEST_CASE("ts_sample_dataset: determinism, teacher norm, exact labels") {
    TSConfig cfg;
    cfg.n = 3;
    cfg.d = 2;
    cfg.eps = -0.3;
    auto a = ts_sample_dataset(cfg, 0);
    auto b = ts_sample_dataset(cfg, 0);
    CHECK(a.inputs == b.inputs);
    CHECK(a.labels == b.labels);
    CHECK(a.teacher == b.teacher);
    CHECK(std::abs(a.teacher.norm() - 1.0) < 1e-12);

    for (long i = 0; i < cfg.n; ++i)
        CHECK(a.labels[i] == ts_target_of_overlap(a.inputs.row(i).dot(a.teacher), cfg.eps));

    auto c = ts_sample_dataset(cfg, 1);
    CHECK(a.inputs != c.inputs);
}

TEST_CASE("ts_sample_dataset: law of large numbers on coordinates") {
    TSConfig cfg;
    cfg.n = 100000;
    cfg.d = 3;
    auto ds = ts_sample_dataset(cfg, 7);
    for (long j = 0; j < cfg.d; ++j) {
        double mean = ds.inputs.col(j).mean();
        CHECK(std::abs(mean) < 3.0 / std::sqrt(static_cast<double>(cfg.n)));
        double var = (ds.inputs.col(j).array() - mean).square().mean();
        CHECK(std::abs(var - 1.0) < 0.02);
    }
}

TEST_CASE("ts_forward: zeros, saturation, independent re-evaluation") {
    TSNetwork net;
    net.input_weights = Matrix::Random(4, 3);
    net.readout = Vector::Zero(4);
    Vector x = Vector::Random(3);
    CHECK(ts_forward(net, x) == 0.0);

    TSNetwork sat;
    sat.input_weights = Matrix::Constant(1, 1, 50.0);
    sat.readout = Vector::Constant(1, 1.0);
    Vector one(1);
    one << 1.0;
    CHECK(ts_forward(sat, one) == doctest::Approx(1.0).epsilon(1e-12));

    TSNetwork r;
    r.input_weights = Matrix::Random(5, 4);
    r.readout = Vector::Random(5);
    Vector xr = Vector::Random(4);
    double manual = 0.0;
    for (int i = 0; i < 5; ++i) {
        double z = 0.0;
        for (int j = 0; j < 4; ++j) z += r.input_weights(i, j) * xr[j];
        manual += r.readout[i] * std::erf(z);
    }
    CHECK(ts_forward(r, xr) == doctest::Approx(manual).epsilon(1e-12));

    Vector wrong = Vector::Random(3);
    CHECK_THROWS(ts_forward(r, wrong));
}

TEST_CASE("forward passes are linear in the readout") {
    TSNetwork a, b;
    a.input_weights = Matrix::Random(6, 3);
    b.input_weights = a.input_weights;
    a.readout = Vector::Random(6);
    b.readout = Vector::Random(6);
    TSNetwork sum = a;
    sum.readout = a.readout + b.readout;
    Vector x = Vector::Random(3);
    CHECK(ts_forward(sum, x) ==
          doctest::Approx(ts_forward(a, x) + ts_forward(b, x)).epsilon(1e-12));
}

TEST_CASE("mod_dataset: two-hot inputs, zero-sum labels, example row") {
    auto ds = mod_dataset(3);
    CHECK(ds.inputs.rows() == 9);
    // (n, m) = (1, 2): y_p = delta_{p, 0} - 1/3
    long row = 1 * 3 + 2;
    CHECK(ds.labels(row, 0) == doctest::Approx(2.0 / 3.0));
    CHECK(ds.labels(row, 1) == doctest::Approx(-1.0 / 3.0));
    CHECK(ds.labels(row, 2) == doctest::Approx(-1.0 / 3.0));

    auto ds5 = mod_dataset(5);
    CHECK(ds5.inputs.rows() == 25);
    for (long r = 0; r < ds5.inputs.rows(); ++r) {
        CHECK(ds5.inputs.row(r).sum() == doctest::Approx(2.0));
        CHECK(ds5.inputs.row(r).cwiseAbs().sum() == doctest::Approx(2.0));
        CHECK(std::abs(ds5.labels.row(r).sum()) < 1e-14);
    }
    CHECK_THROWS(mod_dataset(9));
}

TEST_CASE("mod_forward: zeros, single neuron, re-evaluation") {
    ModNetwork net;
    net.input_weights = Matrix::Random(4, 6);
    net.readout = Matrix::Zero(3, 4);
    Vector x = Vector::Random(6);
    CHECK(mod_forward(net, x).cwiseAbs().maxCoeff() == 0.0);

    ModNetwork one;
    one.input_weights = Matrix::Zero(1, 6);
    one.input_weights(0, 0) = 1.0;
    one.input_weights(0, 3) = 1.0;
    one.readout = Matrix::Ones(3, 1);
    auto ds = mod_dataset(3);
    Vector x00 = ds.inputs.row(0);  // two-hot at 0 and P+0=3: w.x = 2
    Vector f = mod_forward(one, x00);
    for (int p = 0; p < 3; ++p) CHECK(f[p] == doctest::Approx(4.0));

    ModNetwork rnd;
    rnd.input_weights = Matrix::Random(5, 6);
    rnd.readout = Matrix::Random(3, 5);
    Vector xr = Vector::Random(6);
    Vector fr = mod_forward(rnd, xr);
    for (int p = 0; p < 3; ++p) {
        double manual = 0.0;
        for (int i = 0; i < 5; ++i) {
            double z = rnd.input_weights.row(i).dot(xr);
            manual += rnd.readout(p, i) * z * z;
        }
        CHECK(fr[p] == doctest::Approx(manual).epsilon(1e-12));
    }
}

TEST_CASE("apply_scaling_ts: identity, table values, invariance of u") {
    TSConfig base;
    base.n = 3000;
    base.d = 150;
    base.N = 700;
    base.sigma2 = 0.2;
    base.sigma_a2 = 8.0 / 700;
    base.sigma_w2 = 0.5;
    base.eps = -0.3;

    auto same = apply_scaling_ts(base, {1.0, 1.0});
    CHECK(same.N == base.N);
    CHECK(same.d == base.d);
    CHECK(same.n == base.n);
    CHECK(same.sigma2 == base.sigma2);
    CHECK(same.sigma_a2 == base.sigma_a2);

    ScalingResidual res;
    auto scaled = apply_scaling_ts(base, {4.0, 4.0}, &res);
    CHECK(scaled.N == 2800);
    CHECK(scaled.d == 300);
    CHECK(scaled.n == 12000);
    CHECK(scaled.sigma_a2 == doctest::Approx(base.sigma_a2 / 2.0));
    CHECK(scaled.sigma2 == doctest::Approx(base.sigma2));  // alpha/beta = 1
    CHECK(scaled.sigma_w2 == base.sigma_w2);
    CHECK(scaled.eps == base.eps);

    // u invariant (exact here: no rounding residual at alpha=beta=4)
    CHECK(effective_interaction(scaled) ==
          doctest::Approx(effective_interaction(base)).epsilon(1e-12));

    // non-square beta: invariance holds on the exact pre-rounding values
    ScalingResidual r2;
    auto s2 = apply_scaling_ts(base, {2.0, 3.0}, &r2);
    double u_exact = static_cast<double>(base.n) * 2.0 * (base.n * 2.0) *
                     (base.sigma_a2 / std::sqrt(3.0)) /
                     (std::pow(base.sigma2 * 2.0 / 3.0, 2) * r2.exact_d * r2.exact_N);
    CHECK(u_exact == doctest::Approx(effective_interaction(base)).epsilon(1e-12));
    CHECK(effective_interaction(s2) ==
          doctest::Approx(effective_interaction(base)).epsilon(0.02));  // rounding only
}

TEST_CASE("apply_scaling_mod: identity, prime rounding, invariance of u") {
    ModConfig base;
    base.P = 5;
    base.N = 100;
    base.sigma2 = 0.3;
    base.sigma_a2 = 0.01;
    base.gamma = 1e-4;

    auto same = apply_scaling_mod(base, 1.0);
    CHECK(same.P == 5);
    CHECK(same.N == 100);

    ScalingResidual res;
    auto scaled = apply_scaling_mod(base, 4.0, &res);
    CHECK(scaled.P == 11);  // nearest prime to 10
    CHECK(scaled.N == 1600);
    CHECK(scaled.sigma2 == doctest::Approx(base.sigma2 / 4.0));
    CHECK(scaled.sigma_a2 == doctest::Approx(base.sigma_a2 / 4.0));

    // invariance is exact before prime rounding
    double u_exact = 2.0 * (base.sigma_a2 / 4.0) * res.exact_P * res.exact_P /
                     (res.exact_N * std::pow(base.sigma2 / 4.0, 2));
    CHECK(u_exact == doctest::Approx(effective_interaction(base)).epsilon(1e-12));
}

TEST_CASE("nearest_prime") {
    CHECK(nearest_prime(10.0) == 11);
    CHECK(nearest_prime(9.0) == 11);  // 7 and 11 tie -> upward
    CHECK(nearest_prime(5.0) == 5);
    CHECK(nearest_prime(1.2) == 2);
    CHECK(nearest_prime(8.2) == 7);
}

TEST_CASE("effective_interaction: unit case, Fig-3 parameters, scaling in n") {
    TSConfig unit;
    unit.n = 1;
    unit.d = 1;
    unit.N = 1;
    unit.sigma2 = 1.0;
    unit.sigma_a2 = 1.0;
    CHECK(effective_interaction(unit) == doctest::Approx(1.0));

    TSConfig twice = unit;
    twice.n = 2;
    CHECK(effective_interaction(twice) == doctest::Approx(4.0));

    // Fig. 3 caption parameters at sigma^2 = 0.2 with sigma^4 = (sigma^2)^2
    ModConfig fig3;
    fig3.P = 401;
    fig3.N = 1000;
    fig3.sigma_a2 = 0.002 / 1000;
    fig3.sigma2 = 0.2;
    fig3.gamma = 1e-4;
    CHECK(effective_interaction(fig3) ==
          doctest::Approx(2.0 * 2e-6 * 401.0 * 401.0 / (1000.0 * 0.04)).epsilon(1e-12));
}

TEST_CASE("ts dataset JSON round trip and CSV export") {
    TSConfig cfg;
    cfg.n = 4;
    cfg.d = 3;
    cfg.eps = 0.5;
    auto ds = ts_sample_dataset(cfg, 11);
    auto text = ts_dataset_to_json(ds);
    auto back = ts_dataset_from_json(text);
    CHECK(back.inputs == ds.inputs);
    CHECK(back.labels == ds.labels);
    CHECK(back.teacher == ds.teacher);
    CHECK(back.seed == ds.seed);

    auto csv = ts_dataset_labels_csv(ds);
    CHECK(csv.find("index,label") == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}
