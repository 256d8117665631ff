#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pcmri/data.hpp"
#include "pcmri/features.hpp"
#include "pcmri/linear.hpp"
#include "pcmri/metrics.hpp"

namespace pcmri {

struct PipelineConfig {
    std::string name;

    enum class Feature { hog, embedding };
    Feature feature = Feature::hog;
    HogParams hog_params;              // when feature == hog
    std::filesystem::path embedding_file;  // when feature == embedding

    ModelKind model = ModelKind::svm;
    double C = 1.0;
    std::vector<double> C_grid;  // optional per-fold selection by validation AUC
    bool calibrated = false;
    ThresholdPolicy threshold;
};

struct AugmentationConfig {
    enum class Mode { off, synthetic, safeaug };
    Mode mode = Mode::off;
    int n_per_image = 2;
    AugSpec spec;  // defaulted per mode when absent from the config file
};

struct ExperimentConfig {
    std::filesystem::path data_source;  // directory or manifest CSV
    SplitConfig split;
    std::vector<PipelineConfig> pipelines;
    AugmentationConfig augmentation;
    std::filesystem::path output_dir;
    std::uint64_t seed = 42;
    bool refit_full_dev = true;        // otherwise reuse the best-val-AUC fold model
    bool per_fold_thresholds = false;  // otherwise select on pooled out-of-fold predictions

    std::string config_hash;  // FNV-1a of the config document

    static ExperimentConfig from_file(const std::filesystem::path& file);
    static ExperimentConfig from_json_text(const std::string& text,
                                           const std::filesystem::path& base_dir);
};

struct PipelineResult {
    std::string name;
    std::vector<MetricSet> fold_val_metrics;  // one row per fold (incl. val AUC)
    double selected_threshold = 0.5;
    double floor_threshold = 0.5;  // sensitivity-floor 0.95 operating point
    double chosen_C = 1.0;
    ConfusionMatrix test_confusion;
    MetricSet test_metrics;  // incl. test AUC
    std::filesystem::path model_file;
    std::string note;
};

struct RunReport {
    std::vector<PipelineResult> pipelines;
    AggregateRow aggregate_row;  // across pipelines' test metrics
    std::uint64_t seed = 0;
    std::string config_hash;
    std::string version;
    int test_size = 0;
    int dev_size = 0;
};

RunReport run_experiment(const ExperimentConfig& cfg);

// Throws NumericError naming `step` if any held-out test id appears in `used`.
void assert_no_leak(const SampleSet& held_out_test, const SampleSet& used,
                    const std::string& step);

struct ExternalEvaluation {
    int n_samples = 0;
    std::optional<double> auc;
    // operating point name -> (threshold, confusion, metrics)
    struct OperatingPoint {
        double threshold = 0.0;
        ConfusionMatrix confusion;
        MetricSet metrics;
    };
    std::map<std::string, OperatingPoint> points;
    bool internal_data_reuse = false;
};

// No refitting: scores the persisted model on an external manifest and reports
// the fixed and sensitivity-floor operating points stored with the model.
ExternalEvaluation evaluate_external(const std::filesystem::path& model_file,
                                     const std::filesystem::path& manifest,
                                     const std::filesystem::path& embeddings = {});

enum class ReportFormat { csv, markdown };

// Writes report.csv / report.md into out_dir; display values are rounded to 3
// decimals in markdown, full precision in CSV.
std::filesystem::path render_report(const RunReport& r, ReportFormat format,
                                    const std::filesystem::path& out_dir);

void save_report_json(const RunReport& r, const std::filesystem::path& file);
RunReport load_report_json(const std::filesystem::path& file);

std::string fnv1a_hex(const std::string& bytes);

inline constexpr const char* kToolkitVersion = "0.1.0";

}  // namespace pcmri
