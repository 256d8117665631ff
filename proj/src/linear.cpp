#include "pcmri/linear.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "pcmri/errors.hpp"
#include "pcmri/rng.hpp"

namespace pcmri {

namespace {

using json = nlohmann::json;

// log(1 + exp(-m)) without overflow
double log1p_exp_neg(double m) {
    if (m >= 0.0) return std::log1p(std::exp(-m));
    return -m + std::log1p(std::exp(m));
}

double sigmoid(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

void check_training_input(const std::vector<FeatureVector>& X, const std::vector<int>& y) {
    if (X.empty() || X.size() != y.size())
        throw DataError("training set empty or feature/label count mismatch");
    const int d = X.front().dim();
    for (const auto& fv : X) {
        if (fv.dim() != d) throw DataError("inconsistent feature dimensions in training set");
        for (double v : fv.values)
            if (!std::isfinite(v)) throw DataError("non-finite feature value in training set");
    }
    const long n_pos = std::count(y.begin(), y.end(), 1);
    if (n_pos == 0 || n_pos == static_cast<long>(y.size()))
        throw DataError("training requires at least one sample of each class");
}

Standardization fit_standardization(const std::vector<FeatureVector>& X) {
    const std::size_t n = X.size();
    const std::size_t d = static_cast<std::size_t>(X.front().dim());
    Standardization st;
    st.mean.assign(d, 0.0);
    st.sd.assign(d, 0.0);
    for (const auto& fv : X)
        for (std::size_t j = 0; j < d; ++j) st.mean[j] += fv.values[j];
    for (std::size_t j = 0; j < d; ++j) st.mean[j] /= static_cast<double>(n);
    for (const auto& fv : X)
        for (std::size_t j = 0; j < d; ++j) {
            const double dv = fv.values[j] - st.mean[j];
            st.sd[j] += dv * dv;
        }
    for (std::size_t j = 0; j < d; ++j) st.sd[j] = std::sqrt(st.sd[j] / static_cast<double>(n));
    return st;
}

std::vector<std::vector<double>> standardize_all(const Standardization& st,
                                                 const std::vector<FeatureVector>& X) {
    std::vector<std::vector<double>> Z;
    Z.reserve(X.size());
    for (const auto& fv : X) Z.push_back(st.apply(fv.values));
    return Z;
}

std::vector<int> signed_labels(const std::vector<int>& y) {
    std::vector<int> s(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) s[i] = y[i] == 1 ? 1 : -1;
    return s;
}

}  // namespace

std::vector<double> Standardization::apply(std::span<const double> raw) const {
    if (raw.size() != mean.size())
        throw ConfigError("feature dimension mismatch: got " + std::to_string(raw.size()) +
                          ", model expects " + std::to_string(mean.size()));
    std::vector<double> z(raw.size());
    for (std::size_t j = 0; j < raw.size(); ++j)
        z[j] = sd[j] > 0.0 ? (raw[j] - mean[j]) / sd[j] : 0.0;
    return z;
}

double Calibration::prob(double score) const { return sigmoid(-(A * score + B)); }

double LinearModel::score(std::span<const double> raw) const {
    const auto z = standardization.apply(raw);
    double s = bias;
    for (std::size_t j = 0; j < z.size(); ++j) s += weights[j] * z[j];
    return s;
}

std::vector<double> LinearModel::raw_weights() const {
    std::vector<double> w(weights.size(), 0.0);
    for (std::size_t j = 0; j < weights.size(); ++j)
        if (standardization.sd[j] > 0.0) w[j] = weights[j] / standardization.sd[j];
    return w;
}

double LinearModel::raw_bias() const {
    double b = bias;
    for (std::size_t j = 0; j < weights.size(); ++j)
        if (standardization.sd[j] > 0.0)
            b -= weights[j] * standardization.mean[j] / standardization.sd[j];
    return b;
}

namespace detail {

double logreg_objective(std::span<const double> params, const std::vector<std::vector<double>>& Z,
                        const std::vector<int>& y, double C) {
    const std::size_t d = params.size() - 1;
    double obj = 0.0;
    for (std::size_t j = 0; j < d; ++j) obj += 0.5 * params[j] * params[j];
    for (std::size_t i = 0; i < Z.size(); ++i) {
        double s = params[d];
        for (std::size_t j = 0; j < d; ++j) s += params[j] * Z[i][j];
        const int sy = y[i] == 1 ? 1 : -1;
        obj += C * log1p_exp_neg(sy * s);
    }
    return obj;
}

std::vector<double> logreg_gradient(std::span<const double> params,
                                    const std::vector<std::vector<double>>& Z,
                                    const std::vector<int>& y, double C) {
    const std::size_t d = params.size() - 1;
    std::vector<double> g(params.size(), 0.0);
    for (std::size_t j = 0; j < d; ++j) g[j] = params[j];
    for (std::size_t i = 0; i < Z.size(); ++i) {
        double s = params[d];
        for (std::size_t j = 0; j < d; ++j) s += params[j] * Z[i][j];
        const int sy = y[i] == 1 ? 1 : -1;
        const double coef = -C * sy * sigmoid(-sy * s);
        for (std::size_t j = 0; j < d; ++j) g[j] += coef * Z[i][j];
        g[d] += coef;
    }
    return g;
}

double svm_objective(std::span<const double> params, const std::vector<std::vector<double>>& Z,
                     const std::vector<int>& y, double C) {
    const std::size_t d = params.size() - 1;
    double obj = 0.0;
    for (double p : params) obj += 0.5 * p * p;  // bias is an augmented feature
    for (std::size_t i = 0; i < Z.size(); ++i) {
        double s = params[d];
        for (std::size_t j = 0; j < d; ++j) s += params[j] * Z[i][j];
        const int sy = y[i] == 1 ? 1 : -1;
        obj += C * std::max(0.0, 1.0 - sy * s);
    }
    return obj;
}

}  // namespace detail

LinearModel train_svm(const std::vector<FeatureVector>& X, const std::vector<int>& y, double C,
                      std::uint64_t seed) {
    if (C <= 0.0) throw ConfigError("C must be positive");
    check_training_input(X, y);

    LinearModel m;
    m.kind = ModelKind::svm;
    m.dim = X.front().dim();
    m.C = C;
    m.seed = seed;
    m.source = X.front().source;
    m.standardization = fit_standardization(X);

    const auto Z = standardize_all(m.standardization, X);
    const auto sy = signed_labels(y);
    const std::size_t n = Z.size();
    const std::size_t d = static_cast<std::size_t>(m.dim);

    // dual coordinate descent (Hsieh et al. style) with bias as a constant
    // augmented feature, so Q_ii = |z_i|^2 + 1
    std::vector<double> q(n);
    for (std::size_t i = 0; i < n; ++i) {
        double ss = 1.0;
        for (double v : Z[i]) ss += v * v;
        q[i] = ss;
    }

    std::vector<double> alpha(n, 0.0);
    std::vector<double> w(d + 1, 0.0);  // w[d] is the bias component
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    constexpr int kMaxEpochs = 1000;
    constexpr double kTol = 1e-6;
    Rng rng(seed);
    for (int epoch = 0; epoch < kMaxEpochs; ++epoch) {
        shuffle(order, rng);
        double max_violation = 0.0;
        for (std::size_t i : order) {
            double s = w[d];
            for (std::size_t j = 0; j < d; ++j) s += w[j] * Z[i][j];
            const double grad = sy[i] * s - 1.0;
            double pg = grad;
            if (alpha[i] <= 0.0)
                pg = std::min(grad, 0.0);
            else if (alpha[i] >= C)
                pg = std::max(grad, 0.0);
            max_violation = std::max(max_violation, std::abs(pg));
            if (pg == 0.0) continue;
            const double a_new = std::clamp(alpha[i] - grad / q[i], 0.0, C);
            const double delta = (a_new - alpha[i]) * sy[i];
            if (delta != 0.0) {
                for (std::size_t j = 0; j < d; ++j) w[j] += delta * Z[i][j];
                w[d] += delta;
            }
            alpha[i] = a_new;
        }
        if (max_violation < kTol) break;
    }

    m.weights.assign(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(d));
    m.bias = w[d];
    return m;
}

LinearModel train_logreg(const std::vector<FeatureVector>& X, const std::vector<int>& y,
                         double C, std::uint64_t seed) {
    if (C <= 0.0) throw ConfigError("C must be positive");
    check_training_input(X, y);

    LinearModel m;
    m.kind = ModelKind::logreg;
    m.dim = X.front().dim();
    m.C = C;
    m.seed = seed;
    m.source = X.front().source;
    m.standardization = fit_standardization(X);

    const auto Z = standardize_all(m.standardization, X);
    const std::size_t d = static_cast<std::size_t>(m.dim);

    std::vector<double> params(d + 1, 0.0);
    double obj = detail::logreg_objective(params, Z, y, C);

    constexpr int kMaxIters = 10000;
    constexpr double kLossTol = 1e-10;
    constexpr double kGradTol = 1e-8;
    double step = 1.0;
    for (int iter = 0; iter < kMaxIters; ++iter) {
        const auto g = detail::logreg_gradient(params, Z, y, C);
        double g_inf = 0.0, g_norm2 = 0.0;
        for (double v : g) {
            g_inf = std::max(g_inf, std::abs(v));
            g_norm2 += v * v;
        }
        if (g_inf < kGradTol) break;

        // Armijo backtracking, reusing (and growing) the last accepted step
        step *= 2.0;
        std::vector<double> trial(params.size());
        double new_obj;
        while (true) {
            for (std::size_t j = 0; j < params.size(); ++j) trial[j] = params[j] - step * g[j];
            new_obj = detail::logreg_objective(trial, Z, y, C);
            if (new_obj <= obj - 1e-4 * step * g_norm2) break;
            step *= 0.5;
            if (step < 1e-18) break;
        }
        if (new_obj >= obj) break;
        const double decrease = obj - new_obj;
        params.swap(trial);
        obj = new_obj;
        if (decrease < kLossTol) break;
    }

    m.weights.assign(params.begin(), params.begin() + static_cast<std::ptrdiff_t>(d));
    m.bias = params[d];
    return m;
}

Calibration fit_platt(std::span<const double> scores, std::span<const int> labels) {
    if (scores.empty() || scores.size() != labels.size())
        throw DataError("calibration set empty or score/label count mismatch");
    const long n_pos = std::count(labels.begin(), labels.end(), 1);
    const long n_neg = static_cast<long>(labels.size()) - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw DataError("calibration requires both classes in the validation set");

    Calibration cal;
    const auto [mn, mx] = std::minmax_element(scores.begin(), scores.end());
    if (*mx - *mn < 1e-12) {
        // constant scores carry no information; emit the smoothed base rate
        cal.A = 0.0;
        cal.B = std::log(static_cast<double>(n_neg + 1) / static_cast<double>(n_pos + 1));
        cal.uninformative = true;
        return cal;
    }

    // Platt targets with Laplace-style smoothing
    const double t_pos = (static_cast<double>(n_pos) + 1.0) / (static_cast<double>(n_pos) + 2.0);
    const double t_neg = 1.0 / (static_cast<double>(n_neg) + 2.0);
    std::vector<double> targets(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i)
        targets[i] = labels[i] == 1 ? t_pos : t_neg;

    // safeguarded Newton on F(A,B) = sum_i [ t_i*f_i + log(1+exp(-f_i)) ],
    // f_i = A*s_i + B  (Lin/Weng/Platt formulation)
    auto objective = [&](double A, double B) {
        double F = 0.0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            const double f = A * scores[i] + B;
            F += targets[i] * f + log1p_exp_neg(f);
        }
        return F;
    };

    double A = 0.0;
    double B = std::log(static_cast<double>(n_neg + 1) / static_cast<double>(n_pos + 1));
    double F = objective(A, B);
    constexpr int kMaxIters = 200;
    constexpr double kSigma = 1e-12;  // Hessian safeguard
    for (int it = 0; it < kMaxIters; ++it) {
        double gA = 0.0, gB = 0.0, hAA = kSigma, hBB = kSigma, hAB = 0.0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            const double f = A * scores[i] + B;
            const double p = sigmoid(-f);  // P(y=1 | f)
            const double e = targets[i] - p;
            gA += scores[i] * e;
            gB += e;
            const double d2 = p * (1.0 - p);
            hAA += scores[i] * scores[i] * d2;
            hBB += d2;
            hAB += scores[i] * d2;
        }
        if (std::abs(gA) < 1e-10 && std::abs(gB) < 1e-10) break;
        const double det = hAA * hBB - hAB * hAB;
        double dA = -(hBB * gA - hAB * gB) / det;
        double dB = -(hAA * gB - hAB * gA) / det;
        double stepsize = 1.0;
        while (stepsize >= 1e-10) {
            const double F_new = objective(A + stepsize * dA, B + stepsize * dB);
            if (F_new < F + 1e-4 * stepsize * (gA * dA + gB * dB)) {
                A += stepsize * dA;
                B += stepsize * dB;
                F = F_new;
                break;
            }
            stepsize /= 2.0;
        }
        if (stepsize < 1e-10) break;
    }
    cal.A = A;
    cal.B = B;
    return cal;
}

Calibration calibrate(const LinearModel& m, const std::vector<FeatureVector>& X_val,
                      const std::vector<int>& y_val) {
    std::vector<double> scores(X_val.size());
    for (std::size_t i = 0; i < X_val.size(); ++i) scores[i] = m.score(X_val[i]);
    return fit_platt(scores, y_val);
}

double predict_proba(const LinearModel& m, const FeatureVector& x) {
    if (x.dim() != m.dim)
        throw ConfigError("feature dimension mismatch: got " + std::to_string(x.dim()) +
                          ", model expects " + std::to_string(m.dim));
    const double s = m.score(x);
    if (m.kind == ModelKind::logreg) return sigmoid(s);
    if (!m.calibration)
        throw ConfigError("uncalibrated SVM cannot emit probabilities; threshold raw scores instead");
    return m.calibration->prob(s);
}

double predict_proba(const LinearModel& m, const Calibration& cal, const FeatureVector& x) {
    if (x.dim() != m.dim)
        throw ConfigError("feature dimension mismatch: got " + std::to_string(x.dim()) +
                          ", model expects " + std::to_string(m.dim));
    return cal.prob(m.score(x));
}

void save_model(const LinearModel& m, const std::filesystem::path& file) {
    json j;
    j["format"] = "pcmri-model";
    j["version"] = 1;
    j["kind"] = m.kind == ModelKind::svm ? "svm" : "logreg";
    j["dim"] = m.dim;
    j["weights"] = m.weights;
    j["bias"] = m.bias;
    j["mean"] = m.standardization.mean;
    j["sd"] = m.standardization.sd;
    j["C"] = m.C;
    j["seed"] = m.seed;
    j["source"] = m.source == FeatureVector::Source::hog ? "hog" : "embedding";
    if (m.calibration) {
        j["calibration"] = {{"A", m.calibration->A},
                            {"B", m.calibration->B},
                            {"uninformative", m.calibration->uninformative}};
    }
    if (m.hog_params) {
        const auto& p = *m.hog_params;
        j["hog_params"] = {{"cell_px", p.cell_px},
                           {"block_cells", p.block_cells},
                           {"n_bins", p.n_bins},
                           {"clip", p.clip},
                           {"epsilon", p.epsilon}};
    }
    if (!m.operating_points.empty()) j["operating_points"] = m.operating_points;
    if (!m.training_ids.empty()) j["training_ids"] = m.training_ids;

    std::ofstream os(file);
    if (!os) throw DataError("cannot write model file: " + file.string());
    os << j.dump(2) << "\n";
}

LinearModel load_model(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open model file: " + file.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("malformed model file " + file.string() + ": " + e.what());
    }
    if (j.value("format", "") != "pcmri-model" || j.value("version", 0) != 1)
        throw DataError("unsupported model file format: " + file.string());

    LinearModel m;
    const std::string kind = j.at("kind");
    if (kind == "svm")
        m.kind = ModelKind::svm;
    else if (kind == "logreg")
        m.kind = ModelKind::logreg;
    else
        throw DataError("unknown model kind '" + kind + "'");
    m.dim = j.at("dim");
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias");
    m.standardization.mean = j.at("mean").get<std::vector<double>>();
    m.standardization.sd = j.at("sd").get<std::vector<double>>();
    m.C = j.at("C");
    m.seed = j.at("seed");
    m.source = j.at("source") == "hog" ? FeatureVector::Source::hog
                                       : FeatureVector::Source::embedding;
    if (static_cast<int>(m.weights.size()) != m.dim ||
        m.standardization.mean.size() != m.weights.size() ||
        m.standardization.sd.size() != m.weights.size())
        throw DataError("model file dimensions are inconsistent: " + file.string());
    if (j.contains("calibration")) {
        Calibration c;
        c.A = j["calibration"].at("A");
        c.B = j["calibration"].at("B");
        c.uninformative = j["calibration"].value("uninformative", false);
        m.calibration = c;
    }
    if (j.contains("hog_params")) {
        HogParams p;
        p.cell_px = j["hog_params"].at("cell_px");
        p.block_cells = j["hog_params"].at("block_cells");
        p.n_bins = j["hog_params"].at("n_bins");
        p.clip = j["hog_params"].at("clip");
        p.epsilon = j["hog_params"].at("epsilon");
        m.hog_params = p;
    }
    if (j.contains("operating_points"))
        m.operating_points = j["operating_points"].get<std::map<std::string, double>>();
    if (j.contains("training_ids"))
        m.training_ids = j["training_ids"].get<std::vector<std::string>>();
    return m;
}

}  // namespace pcmri
