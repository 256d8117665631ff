#include "pcmri/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pcmri/errors.hpp"
#include "pcmri/rng.hpp"

namespace pcmri {

namespace {

using json = nlohmann::json;

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
}

HogParams parse_hog(const json& j) {
    HogParams p;
    p.cell_px = j.value("cell_px", p.cell_px);
    p.block_cells = j.value("block_cells", p.block_cells);
    p.n_bins = j.value("n_bins", p.n_bins);
    p.clip = j.value("clip", p.clip);
    p.epsilon = j.value("epsilon", p.epsilon);
    p.validate();
    return p;
}

AugSpec parse_aug_spec(const json& j, AugSpec base) {
    base.max_rotation_deg = j.value("max_rotation_deg", base.max_rotation_deg);
    base.hflip_prob = j.value("hflip_prob", base.hflip_prob);
    base.max_translate_frac = j.value("max_translate_frac", base.max_translate_frac);
    if (j.contains("scale_range")) {
        base.scale_lo = j["scale_range"].at(0);
        base.scale_hi = j["scale_range"].at(1);
    }
    base.intensity_jitter = j.value("intensity_jitter", base.intensity_jitter);
    base.contrast_jitter = j.value("contrast_jitter", base.contrast_jitter);
    base.validate();
    return base;
}

ThresholdPolicy parse_threshold(const json& j) {
    const std::string policy = j.value("policy", "fixed");
    if (policy == "fixed") return ThresholdPolicy::fixed(j.value("value", 0.5));
    if (policy == "sensitivity_floor")
        return ThresholdPolicy::sensitivity_floor(j.value("min_sensitivity", 0.95));
    throw ConfigError("unknown threshold policy '" + policy + "'");
}

// decision value the thresholds act on: probability when available, raw
// decision score for an uncalibrated SVM
double decision_value(const LinearModel& m, double score) {
    if (m.kind == ModelKind::logreg) return 1.0 / (1.0 + std::exp(-score));
    if (m.calibration) return m.calibration->prob(score);
    return score;
}

struct FeatureStore {
    std::map<std::string, FeatureVector> by_id;

    std::vector<FeatureVector> gather(const SampleSet& s) const {
        std::vector<FeatureVector> out;
        out.reserve(s.size());
        for (const auto& r : s.samples()) out.push_back(by_id.at(r.id));
        return out;
    }
};

std::vector<int> labels_of(const SampleSet& s) {
    std::vector<int> y;
    y.reserve(s.size());
    for (const auto& r : s.samples()) y.push_back(r.label);
    return y;
}

LinearModel train_model(ModelKind kind, const std::vector<FeatureVector>& X,
                        const std::vector<int>& y, double C, std::uint64_t seed) {
    return kind == ModelKind::svm ? train_svm(X, y, C, seed) : train_logreg(X, y, C, seed);
}

json metricset_to_json(const MetricSet& m) {
    json j;
    auto put = [&](const char* key, const std::optional<double>& v) {
        if (v) j[key] = *v;
    };
    put("accuracy", m.accuracy);
    put("sensitivity", m.sensitivity);
    put("specificity", m.specificity);
    put("ppv", m.ppv);
    put("npv", m.npv);
    put("f1", m.f1);
    put("auc", m.auc);
    return j;
}

MetricSet metricset_from_json(const json& j) {
    MetricSet m;
    auto get = [&](const char* key) -> std::optional<double> {
        if (j.contains(key)) return j[key].get<double>();
        return std::nullopt;
    };
    m.accuracy = get("accuracy");
    m.sensitivity = get("sensitivity");
    m.specificity = get("specificity");
    m.ppv = get("ppv");
    m.npv = get("npv");
    m.f1 = get("f1");
    m.auc = get("auc");
    return m;
}

std::string fmt3(const std::optional<double>& v) {
    if (!v) return "NA";
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(3);
    os << *v;
    return os.str();
}

std::string fmt_full(const std::optional<double>& v) {
    if (!v) return "NA";
    std::ostringstream os;
    os.precision(17);
    os << *v;
    return os.str();
}

}  // namespace

void assert_no_leak(const SampleSet& held_out_test, const SampleSet& used,
                    const std::string& step) {
    std::set<std::string> test_ids;
    for (const auto& r : held_out_test.samples()) test_ids.insert(r.id);
    for (const auto& r : used.samples())
        if (test_ids.count(r.id))
            throw NumericError("leakage guard: test id '" + r.id + "' reached " + step);
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open config file: " + file.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str(), file.parent_path());
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text,
                                                  const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }

    ExperimentConfig cfg;
    cfg.config_hash = fnv1a_hex(text);
    if (!j.contains("data")) throw ConfigError("config requires a 'data' entry");
    cfg.data_source = resolve(base_dir, j.at("data").get<std::string>());
    cfg.seed = j.value("seed", 42ULL);
    cfg.split.seed = cfg.seed;
    if (j.contains("split")) {
        const auto& s = j["split"];
        cfg.split.test_fraction = s.value("test_fraction", 0.2);
        cfg.split.k = s.value("k", 5);
        cfg.split.seed = s.value("seed", cfg.seed);
    }
    cfg.output_dir = resolve(base_dir, j.value("output_dir", std::string("out")));
    const std::string refit = j.value("refit", "full");
    if (refit == "full")
        cfg.refit_full_dev = true;
    else if (refit == "best_fold")
        cfg.refit_full_dev = false;
    else
        throw ConfigError("refit must be 'full' or 'best_fold'");
    const std::string ts = j.value("threshold_selection", "pooled");
    if (ts == "pooled")
        cfg.per_fold_thresholds = false;
    else if (ts == "per_fold")
        cfg.per_fold_thresholds = true;
    else
        throw ConfigError("threshold_selection must be 'pooled' or 'per_fold'");

    if (j.contains("augmentation")) {
        const auto& a = j["augmentation"];
        const std::string mode = a.value("mode", "off");
        if (mode == "off") {
            cfg.augmentation.mode = AugmentationConfig::Mode::off;
        } else if (mode == "synthetic") {
            cfg.augmentation.mode = AugmentationConfig::Mode::synthetic;
            cfg.augmentation.spec = AugSpec{};
        } else if (mode == "safeaug") {
            cfg.augmentation.mode = AugmentationConfig::Mode::safeaug;
            cfg.augmentation.spec = AugSpec::safeaug();
        } else {
            throw ConfigError("unknown augmentation mode '" + mode + "'");
        }
        cfg.augmentation.n_per_image = a.value("n_per_image", 2);
        if (cfg.augmentation.n_per_image < 0) throw ConfigError("n_per_image must be >= 0");
        if (a.contains("spec"))
            cfg.augmentation.spec = parse_aug_spec(a["spec"], cfg.augmentation.spec);
    }

    if (!j.contains("pipelines") || !j["pipelines"].is_array() || j["pipelines"].empty())
        throw ConfigError("config requires a non-empty 'pipelines' array");
    std::set<std::string> names;
    for (const auto& p : j["pipelines"]) {
        PipelineConfig pc;
        pc.name = p.at("name").get<std::string>();
        if (!names.insert(pc.name).second)
            throw ConfigError("duplicate pipeline name '" + pc.name + "'");
        const std::string feature = p.value("feature", "hog");
        if (feature == "hog") {
            pc.feature = PipelineConfig::Feature::hog;
            if (p.contains("hog")) pc.hog_params = parse_hog(p["hog"]);
        } else if (feature == "embedding") {
            pc.feature = PipelineConfig::Feature::embedding;
            if (!p.contains("embedding_file"))
                throw ConfigError("pipeline '" + pc.name + "' needs an 'embedding_file'");
            pc.embedding_file = resolve(base_dir, p.at("embedding_file").get<std::string>());
            if (!std::filesystem::exists(pc.embedding_file))
                throw ConfigError("embedding file does not exist: " + pc.embedding_file.string());
        } else {
            throw ConfigError("unknown feature type '" + feature + "'");
        }
        const std::string model = p.value("model", "svm");
        if (model == "svm")
            pc.model = ModelKind::svm;
        else if (model == "logreg")
            pc.model = ModelKind::logreg;
        else
            throw ConfigError("unknown model type '" + model + "'");
        pc.C = p.value("C", 1.0);
        if (pc.C <= 0.0) throw ConfigError("C must be positive");
        if (p.contains("C_grid")) {
            pc.C_grid = p["C_grid"].get<std::vector<double>>();
            for (double c : pc.C_grid)
                if (c <= 0.0) throw ConfigError("C_grid values must be positive");
        }
        pc.calibrated = p.value("calibrated", false);
        if (pc.calibrated && pc.model != ModelKind::svm)
            throw ConfigError("'calibrated' applies to SVM pipelines only");
        if (p.contains("threshold")) pc.threshold = parse_threshold(p["threshold"]);
        cfg.pipelines.push_back(std::move(pc));
    }
    return cfg;
}

RunReport run_experiment(const ExperimentConfig& cfg) {
    const SampleSet manifest = load_manifest(cfg.data_source);
    auto [dev, test] = stratified_split(manifest, cfg.split);
    const auto folds = stratified_kfold(dev, cfg.split.k, cfg.split.seed);


    std::filesystem::create_directories(cfg.output_dir);

    // standardized images are shared across hog pipelines
    const bool any_hog = std::any_of(cfg.pipelines.begin(), cfg.pipelines.end(), [](const auto& p) {
        return p.feature == PipelineConfig::Feature::hog;
    });
    std::map<std::string, ImageGray> std_images;
    if (any_hog)
        for (const auto& r : manifest.samples())
            std_images.emplace(r.id, standardize(decode_gray(r.path)));

    RunReport report;
    report.seed = cfg.seed;
    report.config_hash = cfg.config_hash;
    report.version = kToolkitVersion;
    report.test_size = static_cast<int>(test.size());
    report.dev_size = static_cast<int>(dev.size());

    for (std::size_t pi = 0; pi < cfg.pipelines.size(); ++pi) {
        const auto& pc = cfg.pipelines[pi];
        try {
            PipelineResult res;
            res.name = pc.name;

            FeatureStore store;
            if (pc.feature == PipelineConfig::Feature::hog) {
                for (const auto& [id, img] : std_images)
                    store.by_id.emplace(id, hog(img, pc.hog_params));
            } else {
                store.by_id = load_embeddings(pc.embedding_file, manifest);
            }

            const bool augment_folds = pc.feature == PipelineConfig::Feature::hog &&
                                       cfg.augmentation.mode != AugmentationConfig::Mode::off &&
                                       cfg.augmentation.n_per_image > 0;
            if (cfg.augmentation.mode != AugmentationConfig::Mode::off && !augment_folds)
                res.note = "augmentation skipped (embedding features)";

            // training features for a sample set, with synthetic variants
            // injected for training splits only
            auto training_features = [&](const SampleSet& s, std::uint64_t aug_seed,
                                         std::vector<int>& y_out) {
                std::vector<FeatureVector> X = store.gather(s);
                y_out = labels_of(s);
                if (augment_folds) {
                    std::vector<std::pair<ImageGray, int>> imgs;
                    imgs.reserve(s.size());
                    for (const auto& r : s.samples())
                        imgs.emplace_back(std_images.at(r.id), r.label);
                    const auto variants = synthesize_variants(
                        imgs, cfg.augmentation.n_per_image, cfg.augmentation.spec, aug_seed);
                    for (const auto& [img, label] : variants) {
                        X.push_back(hog(img, pc.hog_params));
                        y_out.push_back(label);
                    }
                }
                return X;
            };

            const std::vector<double> c_grid =
                pc.C_grid.empty() ? std::vector<double>{pc.C} : pc.C_grid;

            // fold models for every candidate C; choose C by mean validation AUC
            struct FoldRun {
                LinearModel model;
                std::vector<double> val_scores;
            };
            double best_c = c_grid.front();
            double best_mean_auc = -1.0;
            std::vector<FoldRun> best_runs;
            for (double c : c_grid) {
                std::vector<FoldRun> runs;
                double auc_sum = 0.0;
                for (std::size_t f = 0; f < folds.size(); ++f) {
                    const auto& [train, val] = folds[f];
                    assert_no_leak(test, train, "fold training");
                    std::vector<int> y_train;
                    const auto X_train =
                        training_features(train, mix_seed(cfg.seed, f), y_train);
                    FoldRun run;
                    run.model = train_model(pc.model, X_train, y_train, c,
                                            mix_seed(cfg.seed, f));
                    const auto X_val = store.gather(val);
                    run.val_scores.reserve(X_val.size());
                    for (const auto& x : X_val) run.val_scores.push_back(run.model.score(x));
                    auc_sum += auc(run.val_scores, labels_of(val));
                    runs.push_back(std::move(run));
                }
                const double mean_auc = auc_sum / static_cast<double>(folds.size());
                if (mean_auc > best_mean_auc) {
                    best_mean_auc = mean_auc;
                    best_c = c;
                    best_runs = std::move(runs);
                }
            }
            res.chosen_C = best_c;

            // pooled out-of-fold predictions (fold order, then sample order)
            std::vector<double> oof_scores;
            std::vector<int> oof_labels;
            std::size_t best_fold = 0;
            double best_fold_auc = -1.0;
            for (std::size_t f = 0; f < folds.size(); ++f) {
                const auto& val = folds[f].second;
                const auto y_val = labels_of(val);
                const auto& scores = best_runs[f].val_scores;
                const double fold_auc = auc(scores, y_val);
                if (fold_auc > best_fold_auc) {
                    best_fold_auc = fold_auc;
                    best_fold = f;
                }
                MetricSet fm = summarize(confusion(scores, y_val, 0.0));
                fm.auc = fold_auc;
                res.fold_val_metrics.push_back(fm);
                oof_scores.insert(oof_scores.end(), scores.begin(), scores.end());
                oof_labels.insert(oof_labels.end(), y_val.begin(), y_val.end());
            }

            // final model: refit on all dev data, or reuse the best fold model
            LinearModel final_model;
            if (cfg.refit_full_dev) {
                assert_no_leak(test, dev, "final refit");
                std::vector<int> y_dev;
                const auto X_dev =
                    training_features(dev, mix_seed(cfg.seed, folds.size()), y_dev);
                final_model = train_model(pc.model, X_dev, y_dev, best_c, cfg.seed);
            } else {
                final_model = best_runs[best_fold].model;
            }

            if (pc.calibrated)
                final_model.calibration = fit_platt(oof_scores, oof_labels);

            // thresholds act on decision values (probabilities when available)
            auto to_decision = [&](const std::vector<double>& scores) {
                std::vector<double> d(scores.size());
                for (std::size_t i = 0; i < scores.size(); ++i)
                    d[i] = decision_value(final_model, scores[i]);
                return d;
            };
            const auto oof_decisions = to_decision(oof_scores);

            if (cfg.per_fold_thresholds && pc.threshold.kind != ThresholdPolicy::Kind::Fixed) {
                double sum = 0.0;
                std::size_t offset = 0;
                for (std::size_t f = 0; f < folds.size(); ++f) {
                    const std::size_t n = folds[f].second.size();
                    const std::span<const double> d(oof_decisions.data() + offset, n);
                    const std::span<const int> y(oof_labels.data() + offset, n);
                    sum += select_threshold(d, y, pc.threshold);
                    offset += n;
                }
                res.selected_threshold = sum / static_cast<double>(folds.size());
            } else {
                res.selected_threshold = select_threshold(oof_decisions, oof_labels, pc.threshold);
            }
            res.floor_threshold =
                select_threshold(oof_decisions, oof_labels, ThresholdPolicy::sensitivity_floor());

            const bool raw_score_space =
                final_model.kind == ModelKind::svm && !final_model.calibration;
            final_model.operating_points["fixed"] = raw_score_space ? 0.0 : 0.5;
            final_model.operating_points["selected"] = res.selected_threshold;
            final_model.operating_points["sensitivity_floor"] = res.floor_threshold;
            final_model.training_ids.clear();
            for (const auto& r : dev.samples()) final_model.training_ids.push_back(r.id);
            if (pc.feature == PipelineConfig::Feature::hog) final_model.hog_params = pc.hog_params;

            // held-out test evaluation, exactly once
            const auto X_test = store.gather(test);
            const auto y_test = labels_of(test);
            std::vector<double> test_scores(X_test.size());
            for (std::size_t i = 0; i < X_test.size(); ++i)
                test_scores[i] = final_model.score(X_test[i]);
            const auto test_decisions = to_decision(test_scores);
            res.test_confusion = confusion(test_decisions, y_test, res.selected_threshold);
            res.test_metrics = summarize(res.test_confusion);
            try {
                res.test_metrics.auc = auc(test_scores, y_test);
            } catch (const DataError&) {
                res.test_metrics.auc = std::nullopt;
            }

            res.model_file = cfg.output_dir / (pc.name + ".model.json");
            save_model(final_model, res.model_file);
            report.pipelines.push_back(std::move(res));
        } catch (const Error& e) {
            throw Error(e.kind(), "pipeline '" + pc.name + "': " + e.what());
        }
    }

    if (report.pipelines.size() >= 2) {
        std::vector<MetricSet> rows;
        for (const auto& p : report.pipelines) rows.push_back(p.test_metrics);
        report.aggregate_row = aggregate(rows);
    }

    save_report_json(report, cfg.output_dir / "report.json");
    return report;
}

ExternalEvaluation evaluate_external(const std::filesystem::path& model_file,
                                     const std::filesystem::path& manifest_path,
                                     const std::filesystem::path& embeddings) {
    const LinearModel model = load_model(model_file);
    const SampleSet manifest = load_manifest(manifest_path);

    std::vector<FeatureVector> X;
    if (model.source == FeatureVector::Source::hog) {
        if (!model.hog_params)
            throw DataError("model file lacks hog parameters: " + model_file.string());
        if (!embeddings.empty())
            throw ConfigError("hog model evaluates images; embeddings file not applicable");
        for (const auto& r : manifest.samples())
            X.push_back(hog(standardize(decode_gray(r.path)), *model.hog_params));
    } else {
        if (embeddings.empty())
            throw ConfigError("embedding model requires an embeddings file");
        auto by_id = load_embeddings(embeddings, manifest);
        for (const auto& r : manifest.samples()) X.push_back(std::move(by_id.at(r.id)));
    }
    for (const auto& x : X)
        if (x.dim() != model.dim)
            throw ConfigError("feature dimension mismatch: got " + std::to_string(x.dim()) +
                              ", model expects " + std::to_string(model.dim));

    const auto y = labels_of(manifest);
    std::vector<double> decisions(X.size());
    for (std::size_t i = 0; i < X.size(); ++i)
        decisions[i] = decision_value(model, model.score(X[i]));

    ExternalEvaluation ev;
    ev.n_samples = static_cast<int>(manifest.size());
    try {
        ev.auc = auc(decisions, y);
    } catch (const DataError&) {
        ev.auc = std::nullopt;
    }

    const bool raw_score_space = model.kind == ModelKind::svm && !model.calibration;
    std::map<std::string, double> points = model.operating_points;
    if (!points.count("fixed")) points["fixed"] = raw_score_space ? 0.0 : 0.5;
    for (const auto& [name, t] : points) {
        ExternalEvaluation::OperatingPoint op;
        op.threshold = t;
        op.confusion = confusion(decisions, y, t);
        op.metrics = summarize(op.confusion);
        op.metrics.auc = ev.auc;
        ev.points.emplace(name, std::move(op));
    }

    if (!model.training_ids.empty()) {
        const std::set<std::string> train_ids(model.training_ids.begin(),
                                              model.training_ids.end());
        for (const auto& r : manifest.samples())
            if (train_ids.count(r.id)) ev.internal_data_reuse = true;
    }
    return ev;
}

std::filesystem::path render_report(const RunReport& r, ReportFormat format,
                                    const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    const auto file = out_dir / (format == ReportFormat::csv ? "report.csv" : "report.md");
    std::ofstream os(file);
    if (!os) throw DataError("cannot write report: " + file.string());

    if (format == ReportFormat::csv) {
        os << "method,accuracy,auc,sensitivity,specificity,f1,confusion\n";
        for (const auto& p : r.pipelines) {
            const auto& m = p.test_metrics;
            os << p.name << ',' << fmt_full(m.accuracy) << ',' << fmt_full(m.auc) << ','
               << fmt_full(m.sensitivity) << ',' << fmt_full(m.specificity) << ','
               << fmt_full(m.f1) << ',' << p.test_confusion.format() << '\n';
        }
        if (r.pipelines.size() >= 2) {
            const auto& a = r.aggregate_row;
            os << "mean," << fmt_full(a.accuracy.mean) << ',' << fmt_full(a.auc.mean) << ','
               << fmt_full(a.sensitivity.mean) << ',' << fmt_full(a.specificity.mean) << ','
               << fmt_full(a.f1.mean) << ",\n";
            os << "sd," << fmt_full(a.accuracy.sd) << ',' << fmt_full(a.auc.sd) << ','
               << fmt_full(a.sensitivity.sd) << ',' << fmt_full(a.specificity.sd) << ','
               << fmt_full(a.f1.sd) << ",\n";
        }
    } else {
        os << "| Method | Accuracy | AUC | Sensitivity | Specificity | F1 | TN / FP / FN / TP |\n";
        os << "|---|---|---|---|---|---|---|\n";
        for (const auto& p : r.pipelines) {
            const auto& m = p.test_metrics;
            os << "| " << p.name << " | " << fmt3(m.accuracy) << " | " << fmt3(m.auc) << " | "
               << fmt3(m.sensitivity) << " | " << fmt3(m.specificity) << " | " << fmt3(m.f1)
               << " | " << p.test_confusion.format() << " |\n";
        }
        if (r.pipelines.size() >= 2) {
            const auto& a = r.aggregate_row;
            auto pm = [&](const MeanSd& ms) {
                if (!ms.mean) return std::string("NA");
                return fmt3(ms.mean) + (ms.sd ? " ± " + fmt3(ms.sd) : "");
            };
            os << "| Mean ± SD | " << pm(a.accuracy) << " | " << pm(a.auc) << " | "
               << pm(a.sensitivity) << " | " << pm(a.specificity) << " | " << pm(a.f1)
               << " | — |\n";
        }
        os << "\nSeed: " << r.seed << "  \nConfig hash: " << r.config_hash
           << "  \nVersion: " << r.version << "\n";
    }
    return file;
}

void save_report_json(const RunReport& r, const std::filesystem::path& file) {
    json j;
    j["format"] = "pcmri-report";
    j["version"] = r.version;
    j["seed"] = r.seed;
    j["config_hash"] = r.config_hash;
    j["test_size"] = r.test_size;
    j["dev_size"] = r.dev_size;
    j["pipelines"] = json::array();
    for (const auto& p : r.pipelines) {
        json pj;
        pj["name"] = p.name;
        pj["selected_threshold"] = p.selected_threshold;
        pj["floor_threshold"] = p.floor_threshold;
        pj["chosen_C"] = p.chosen_C;
        pj["model_file"] = p.model_file.string();
        if (!p.note.empty()) pj["note"] = p.note;
        pj["test_confusion"] = {{"tn", p.test_confusion.tn},
                                {"fp", p.test_confusion.fp},
                                {"fn", p.test_confusion.fn},
                                {"tp", p.test_confusion.tp}};
        pj["test_metrics"] = metricset_to_json(p.test_metrics);
        pj["fold_val_metrics"] = json::array();
        for (const auto& fm : p.fold_val_metrics)
            pj["fold_val_metrics"].push_back(metricset_to_json(fm));
        j["pipelines"].push_back(std::move(pj));
    }
    if (r.pipelines.size() >= 2) {
        auto ms_json = [&](const MeanSd& ms) {
            json mj;
            if (ms.mean) mj["mean"] = *ms.mean;
            if (ms.sd) mj["sd"] = *ms.sd;
            return mj;
        };
        j["aggregate"] = {{"accuracy", ms_json(r.aggregate_row.accuracy)},
                          {"auc", ms_json(r.aggregate_row.auc)},
                          {"sensitivity", ms_json(r.aggregate_row.sensitivity)},
                          {"specificity", ms_json(r.aggregate_row.specificity)},
                          {"f1", ms_json(r.aggregate_row.f1)}};
    }
    std::ofstream os(file);
    if (!os) throw DataError("cannot write report: " + file.string());
    os << j.dump(2) << "\n";
}

RunReport load_report_json(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open report file: " + file.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("malformed report file " + file.string() + ": " + e.what());
    }
    if (j.value("format", "") != "pcmri-report")
        throw DataError("unsupported report file: " + file.string());

    RunReport r;
    r.version = j.value("version", "");
    r.seed = j.value("seed", 0ULL);
    r.config_hash = j.value("config_hash", "");
    r.test_size = j.value("test_size", 0);
    r.dev_size = j.value("dev_size", 0);
    for (const auto& pj : j.at("pipelines")) {
        PipelineResult p;
        p.name = pj.at("name");
        p.selected_threshold = pj.at("selected_threshold");
        p.floor_threshold = pj.at("floor_threshold");
        p.chosen_C = pj.at("chosen_C");
        p.model_file = pj.value("model_file", std::string());
        p.note = pj.value("note", std::string());
        p.test_confusion.tn = pj["test_confusion"].at("tn");
        p.test_confusion.fp = pj["test_confusion"].at("fp");
        p.test_confusion.fn = pj["test_confusion"].at("fn");
        p.test_confusion.tp = pj["test_confusion"].at("tp");
        p.test_metrics = metricset_from_json(pj.at("test_metrics"));
        for (const auto& fm : pj.at("fold_val_metrics"))
            p.fold_val_metrics.push_back(metricset_from_json(fm));
        r.pipelines.push_back(std::move(p));
    }
    if (r.pipelines.size() >= 2) {
        std::vector<MetricSet> rows;
        for (const auto& p : r.pipelines) rows.push_back(p.test_metrics);
        r.aggregate_row = aggregate(rows);
    }
    return r;
}

}  // namespace pcmri
