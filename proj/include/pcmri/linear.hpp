#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pcmri/features.hpp"

namespace pcmri {

enum class ModelKind { svm, logreg };

// Per-feature training-split mean/sd. A feature with zero variance is marked
// constant (sd stored as 0) and contributes nothing to the score.
struct Standardization {
    std::vector<double> mean;
    std::vector<double> sd;

    std::vector<double> apply(std::span<const double> raw) const;
};

// Platt sigmoid p = 1 / (1 + exp(A*s + B)).
struct Calibration {
    double A = 0.0;
    double B = 0.0;
    bool uninformative = false;  // degenerate fit (constant scores)

    double prob(double score) const;
};

struct LinearModel {
    ModelKind kind = ModelKind::svm;
    std::vector<double> weights;  // in z-scored feature space
    double bias = 0.0;
    int dim = 0;
    Standardization standardization;
    double C = 1.0;
    std::uint64_t seed = 0;
    FeatureVector::Source source = FeatureVector::Source::hog;

    std::optional<Calibration> calibration;
    std::optional<HogParams> hog_params;
    std::map<std::string, double> operating_points;  // e.g. fixed / sensitivity_floor
    std::vector<std::string> training_ids;           // for external-reuse detection

    double score(std::span<const double> raw) const;
    double score(const FeatureVector& x) const { return score(std::span(x.values)); }

    // Equivalent weights/bias in raw (unstandardized) feature space, so that
    // score(x) = raw_weights . x + raw_bias.
    std::vector<double> raw_weights() const;
    double raw_bias() const;
};

// L1-loss linear SVM by dual coordinate descent on z-scored features with an
// augmented bias feature; epoch order is a seeded permutation.
LinearModel train_svm(const std::vector<FeatureVector>& X, const std::vector<int>& y, double C,
                      std::uint64_t seed);

// L2-regularized logistic regression by full-batch gradient descent with
// backtracking line search.
LinearModel train_logreg(const std::vector<FeatureVector>& X, const std::vector<int>& y,
                         double C, std::uint64_t seed);

// Platt sigmoid fit on raw decision scores by a safeguarded Newton method.
Calibration fit_platt(std::span<const double> scores, std::span<const int> labels);

// Platt scaling on decision scores of a held-out validation split.
Calibration calibrate(const LinearModel& m, const std::vector<FeatureVector>& X_val,
                      const std::vector<int>& y_val);

// logreg: sigmoid of score; svm: requires calibration (attached to the model
// or passed explicitly) — uncalibrated SVMs refuse to emit probabilities.
double predict_proba(const LinearModel& m, const FeatureVector& x);
double predict_proba(const LinearModel& m, const Calibration& cal, const FeatureVector& x);

void save_model(const LinearModel& m, const std::filesystem::path& file);
LinearModel load_model(const std::filesystem::path& file);

namespace detail {

// Objective and gradient of the logistic problem on pre-standardized features;
// exposed so tests can check the gradient against finite differences.
// params = [w_0..w_{d-1}, b].
double logreg_objective(std::span<const double> params, const std::vector<std::vector<double>>& Z,
                        const std::vector<int>& y, double C);
std::vector<double> logreg_gradient(std::span<const double> params,
                                    const std::vector<std::vector<double>>& Z,
                                    const std::vector<int>& y, double C);

// SVM primal objective on pre-standardized features with augmented bias
// (params as above; the bias is regularized like a weight).
double svm_objective(std::span<const double> params, const std::vector<std::vector<double>>& Z,
                     const std::vector<int>& y, double C);

}  // namespace detail

}  // namespace pcmri
