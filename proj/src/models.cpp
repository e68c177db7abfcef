#include "groklab/models.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"

namespace groklab {

void TSConfig::validate() const {
    if (n < 0 || d < 1 || N < 1) throw std::invalid_argument("TSConfig: n, d, N out of range");
    if (!(sigma2 > 0.0) || !(sigma_a2 > 0.0) || !(sigma_w2 > 0.0))
        throw std::invalid_argument("TSConfig: variances must be positive");
    if (!std::isfinite(eps)) throw std::invalid_argument("TSConfig: eps must be finite");
}

void ModConfig::validate() const {
    if (P < 3 || !is_prime(P)) throw std::invalid_argument("ModConfig: P must be prime and >= 3");
    if (N < 1) throw std::invalid_argument("ModConfig: N must be >= 1");
    if (!(sigma2 > 0.0) || !(sigma_a2 > 0.0)) throw std::invalid_argument("ModConfig: variances must be positive");
    if (!(gamma > 0.0)) throw std::invalid_argument("ModConfig: gamma must be positive");
}

void ScalingKnobs::validate() const {
    if (!(alpha >= 1.0) || !(beta >= 1.0) || !std::isfinite(alpha) || !std::isfinite(beta))
        throw std::invalid_argument("ScalingKnobs: alpha, beta must be finite and >= 1");
}

double ts_target_of_overlap(double t, double eps) {
    return t + eps * (t * t * t - 3.0 * t);
}

double ts_target(const Vector& x, const Vector& teacher, double eps) {
    return ts_target_of_overlap(teacher.dot(x), eps);
}

TSDataset ts_sample_dataset(const TSConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    TSDataset ds;
    ds.cfg = cfg;
    ds.seed = seed;
    RngStream rng(seed);

    ds.teacher.resize(cfg.d);
    do {
        for (long j = 0; j < cfg.d; ++j) ds.teacher[j] = rng.normal();
    } while (ds.teacher.norm() == 0.0);
    ds.teacher /= ds.teacher.norm();

    ds.inputs.resize(cfg.n, cfg.d);
    for (long i = 0; i < cfg.n; ++i)
        for (long j = 0; j < cfg.d; ++j) ds.inputs(i, j) = rng.normal();

    ds.labels.resize(cfg.n);
    for (long i = 0; i < cfg.n; ++i)
        ds.labels[i] = ts_target_of_overlap(ds.inputs.row(i).dot(ds.teacher), cfg.eps);
    return ds;
}

double ts_forward(const TSNetwork& net, const Vector& x) {
    if (net.input_weights.cols() != x.size())
        throw std::invalid_argument("ts_forward: shape mismatch");
    Vector z = net.input_weights * x;
    return z.unaryExpr([](double v) { return std::erf(v); }).dot(net.readout);
}

Vector ts_forward_batch(const TSNetwork& net, const Matrix& inputs) {
    if (net.input_weights.cols() != inputs.cols())
        throw std::invalid_argument("ts_forward_batch: shape mismatch");
    // f_mu = sum_i a_i erf(w_i . x_mu)
    Matrix z = net.input_weights * inputs.transpose();
    return z.unaryExpr([](double v) { return std::erf(v); }).transpose() * net.readout;
}

ModDataset mod_dataset(long P) {
    if (!is_prime(P)) throw std::invalid_argument("mod_dataset: P must be prime");
    ModDataset ds;
    ds.cfg.P = P;
    ds.inputs = Matrix::Zero(P * P, 2 * P);
    ds.labels = Matrix::Constant(P * P, P, -1.0 / static_cast<double>(P));
    ds.pairs.reserve(P * P);
    long row = 0;
    for (long n = 0; n < P; ++n) {
        for (long m = 0; m < P; ++m, ++row) {
            ds.inputs(row, n) = 1.0;
            ds.inputs(row, P + m) = 1.0;
            ds.labels(row, (n + m) % P) += 1.0;
            ds.pairs.emplace_back(n, m);
        }
    }
    return ds;
}

Vector mod_forward(const ModNetwork& net, const Vector& x) {
    if (net.input_weights.cols() != x.size())
        throw std::invalid_argument("mod_forward: shape mismatch");
    Vector h = (net.input_weights * x).array().square();
    return net.readout * h;
}

Matrix mod_forward_batch(const ModNetwork& net, const Matrix& inputs) {
    if (net.input_weights.cols() != inputs.cols())
        throw std::invalid_argument("mod_forward_batch: shape mismatch");
    Matrix h = (net.input_weights * inputs.transpose()).array().square();
    return net.readout * h;  // P x (#samples)
}

bool is_prime(long p) {
    if (p < 2) return false;
    if (p < 4) return true;
    if (p % 2 == 0) return false;
    for (long q = 3; q * q <= p; q += 2)
        if (p % q == 0) return false;
    return true;
}

long nearest_prime(double x) {
    long base = std::lround(x);
    long below = std::min(base, static_cast<long>(std::floor(x)));
    while (below >= 2 && !is_prime(below)) --below;
    long above = std::max<long>(2, std::max(base, static_cast<long>(std::ceil(x))));
    while (!is_prime(above)) ++above;
    if (below < 2) return above;
    // ties resolve upward
    return (x - below < above - x) ? below : above;
}

TSConfig apply_scaling_ts(const TSConfig& cfg, const ScalingKnobs& k, ScalingResidual* residual) {
    k.validate();
    TSConfig out = cfg;
    double exact_N = cfg.N * k.beta;
    double exact_d = cfg.d * std::sqrt(k.beta);
    double exact_n = cfg.n * k.alpha;
    out.N = std::lround(exact_N);
    out.d = std::lround(exact_d);
    out.n = std::lround(exact_n);
    out.sigma_a2 = cfg.sigma_a2 / std::sqrt(k.beta);
    out.sigma2 = cfg.sigma2 * k.alpha / k.beta;
    if (residual) {
        residual->exact_N = exact_N;
        residual->exact_d = exact_d;
        residual->exact_n = exact_n;
    }
    return out;
}

ModConfig apply_scaling_mod(const ModConfig& cfg, double beta, ScalingResidual* residual) {
    if (!(beta >= 1.0)) throw std::invalid_argument("apply_scaling_mod: beta must be >= 1");
    ModConfig out = cfg;
    double exact_N = cfg.N * beta * beta;
    double exact_P = cfg.P * std::sqrt(beta);
    out.N = std::lround(exact_N);
    out.P = nearest_prime(exact_P);
    out.sigma2 = cfg.sigma2 / beta;
    out.sigma_a2 = cfg.sigma_a2 / beta;
    if (residual) {
        residual->exact_N = exact_N;
        residual->exact_P = exact_P;
    }
    return out;
}

double effective_interaction(const TSConfig& cfg) {
    double s4 = cfg.sigma2 * cfg.sigma2;
    return static_cast<double>(cfg.n) * cfg.n * cfg.sigma_a2 /
           (s4 * cfg.d * static_cast<double>(cfg.N));
}

double effective_interaction(const ModConfig& cfg) {
    double s4 = cfg.sigma2 * cfg.sigma2;
    return 2.0 * cfg.sigma_a2 * static_cast<double>(cfg.P) * cfg.P /
           (static_cast<double>(cfg.N) * s4);
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (long i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (long j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
    Matrix m(j.size(), j.empty() ? 0 : j[0].size());
    for (long i = 0; i < m.rows(); ++i)
        for (long k = 0; k < m.cols(); ++k) m(i, k) = j[i][k].get<double>();
    return m;
}

}  // namespace

std::string ts_dataset_to_json(const TSDataset& ds) {
    nlohmann::json j;
    j["kind"] = "ts_dataset";
    j["seed"] = ds.seed;
    j["config"] = {{"n", ds.cfg.n},         {"d", ds.cfg.d},
                   {"N", ds.cfg.N},         {"sigma2", ds.cfg.sigma2},
                   {"sigma_a2", ds.cfg.sigma_a2}, {"sigma_w2", ds.cfg.sigma_w2},
                   {"eps", ds.cfg.eps}};
    j["teacher"] = std::vector<double>(ds.teacher.data(), ds.teacher.data() + ds.teacher.size());
    j["inputs"] = matrix_to_json(ds.inputs);
    j["labels"] = std::vector<double>(ds.labels.data(), ds.labels.data() + ds.labels.size());
    return j.dump();
}

TSDataset ts_dataset_from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    if (j.at("kind") != "ts_dataset") throw std::invalid_argument("not a ts_dataset");
    TSDataset ds;
    const auto& c = j.at("config");
    ds.cfg.n = c.at("n");
    ds.cfg.d = c.at("d");
    ds.cfg.N = c.at("N");
    ds.cfg.sigma2 = c.at("sigma2");
    ds.cfg.sigma_a2 = c.at("sigma_a2");
    ds.cfg.sigma_w2 = c.at("sigma_w2");
    ds.cfg.eps = c.at("eps");
    ds.seed = j.at("seed");
    auto tv = j.at("teacher").get<std::vector<double>>();
    ds.teacher = Eigen::Map<Vector>(tv.data(), tv.size());
    ds.inputs = matrix_from_json(j.at("inputs"));
    auto lv = j.at("labels").get<std::vector<double>>();
    ds.labels = Eigen::Map<Vector>(lv.data(), lv.size());
    return ds;
}

std::string mod_dataset_to_json(const ModDataset& ds) {
    nlohmann::json j;
    j["kind"] = "mod_dataset";
    j["config"] = {{"P", ds.cfg.P}};
    j["inputs"] = matrix_to_json(ds.inputs);
    j["labels"] = matrix_to_json(ds.labels);
    nlohmann::json pairs = nlohmann::json::array();
    for (auto& [n, m] : ds.pairs) pairs.push_back({n, m});
    j["pairs"] = std::move(pairs);
    return j.dump();
}

std::string ts_dataset_labels_csv(const TSDataset& ds) {
    std::ostringstream os;
    os << "index,label\n";
    os.precision(17);
    for (long i = 0; i < ds.labels.size(); ++i) os << i << "," << ds.labels[i] << "\n";
    return os.str();
}

}  // namespace groklab
