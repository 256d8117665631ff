#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pcmri/data.hpp"
#include "pcmri/errors.hpp"
#include "pcmri/experiment.hpp"
#include "pcmri/reader_study.hpp"
#include "pcmri/saliency.hpp"

namespace fs = std::filesystem;

namespace {

void print_metric_row(const std::string& name, const pcmri::MetricSet& m) {
    auto pct = [](const std::optional<double>& v) {
        if (!v) return std::string("NA");
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.1f%%", *v * 100.0);
        return std::string(buf);
    };
    std::cout << name << "  sens " << pct(m.sensitivity) << "  spec " << pct(m.specificity)
              << "  ppv " << pct(m.ppv) << "  npv " << pct(m.npv) << "  acc "
              << pct(m.accuracy) << "\n";
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Classical prostate-MRI classification pipelines and evaluation harness"};
    app.require_subcommand(1);

    // split
    auto* split_cmd = app.add_subcommand("split", "Stratified train/test split and k folds");
    std::string split_data, split_out = "split.csv";
    pcmri::SplitConfig split_cfg;
    split_cmd->add_option("--data", split_data, "Class-subfolder directory or manifest CSV")
        ->required();
    split_cmd->add_option("--out", split_out, "Output CSV (id,role)");
    split_cmd->add_option("--test-fraction", split_cfg.test_fraction, "Held-out test fraction");
    split_cmd->add_option("--k", split_cfg.k, "Fold count");
    split_cmd->add_option("--seed", split_cfg.seed, "Random seed");

    // run
    auto* run_cmd = app.add_subcommand("run", "Run a configured experiment");
    std::string run_config, run_out;
    std::uint64_t run_seed = 0;
    bool run_seed_set = false;
    run_cmd->add_option("--config", run_config, "Experiment config (JSON)")->required();
    run_cmd->add_option("--out", run_out, "Override output directory");
    run_cmd->add_option("--seed", run_seed, "Override seed")->each([&](const std::string&) {
        run_seed_set = true;
    });

    // eval-external
    auto* ext_cmd = app.add_subcommand("eval-external", "Evaluate a saved model on a manifest");
    std::string ext_model, ext_manifest, ext_embeddings;
    ext_cmd->add_option("--model", ext_model, "Model file")->required();
    ext_cmd->add_option("--manifest", ext_manifest, "External manifest or directory")->required();
    ext_cmd->add_option("--embeddings", ext_embeddings, "Embedding CSV (embedding models)");

    // reader-study
    auto* rs_cmd = app.add_subcommand("reader-study", "Reader metrics and Fleiss' kappa");
    std::string rs_ratings;
    int rs_bootstrap = 10000;
    std::uint64_t rs_seed = 42;
    rs_cmd->add_option("--ratings", rs_ratings, "Ratings CSV")->required();
    rs_cmd->add_option("--bootstrap", rs_bootstrap, "Bootstrap resamples for the CI");
    rs_cmd->add_option("--seed", rs_seed, "Bootstrap seed");

    // saliency
    auto* sal_cmd = app.add_subcommand("saliency", "Linear-model saliency heatmap for one image");
    std::string sal_model, sal_image, sal_out = "saliency.png";
    sal_cmd->add_option("--model", sal_model, "HOG model file")->required();
    sal_cmd->add_option("--image", sal_image, "Input image")->required();
    sal_cmd->add_option("--out", sal_out, "Output overlay PNG");

    // report
    auto* rep_cmd = app.add_subcommand("report", "Re-render a saved report");
    std::string rep_file, rep_format = "markdown", rep_out = ".";
    rep_cmd->add_option("--report", rep_file, "report.json from a run")->required();
    rep_cmd->add_option("--format", rep_format, "csv or markdown")
        ->check(CLI::IsMember({"csv", "markdown"}));
    rep_cmd->add_option("--out", rep_out, "Output directory");

    CLI11_PARSE(app, argc, argv);

    if (split_cmd->parsed()) {
        const auto set = pcmri::load_manifest(split_data);
        const auto [dev, test] = pcmri::stratified_split(set, split_cfg);
        const auto folds = pcmri::stratified_kfold(dev, split_cfg.k, split_cfg.seed);
        pcmri::save_split_csv(split_out, test, folds);
        std::cout << "total " << set.size() << " (" << set.n_pos() << " cancer, " << set.n_neg()
                  << " normal); test " << test.size() << " (" << test.n_pos() << " cancer, "
                  << test.n_neg() << " normal); " << folds.size() << " folds -> " << split_out
                  << "\n";
    } else if (run_cmd->parsed()) {
        auto cfg = pcmri::ExperimentConfig::from_file(run_config);
        if (!run_out.empty()) cfg.output_dir = run_out;
        if (run_seed_set) {
            cfg.seed = run_seed;
            cfg.split.seed = run_seed;
        }
        const auto report = pcmri::run_experiment(cfg);
        pcmri::render_report(report, pcmri::ReportFormat::csv, cfg.output_dir);
        const auto md = pcmri::render_report(report, pcmri::ReportFormat::markdown, cfg.output_dir);
        for (const auto& p : report.pipelines) {
            std::cout << p.name << ": acc " << (p.test_metrics.accuracy ? *p.test_metrics.accuracy : 0.0)
                      << ", auc " << (p.test_metrics.auc ? *p.test_metrics.auc : 0.0)
                      << ", threshold " << p.selected_threshold << ", confusion ["
                      << p.test_confusion.format() << "]\n";
        }
        std::cout << "report written to " << md.parent_path().string() << "\n";
    } else if (ext_cmd->parsed()) {
        const auto ev = pcmri::evaluate_external(ext_model, ext_manifest,
                                                 ext_embeddings.empty() ? fs::path{}
                                                                        : fs::path(ext_embeddings));
        std::cout << "n = " << ev.n_samples;
        if (ev.auc)
            std::cout << ", auc " << *ev.auc;
        else
            std::cout << ", auc NA (single-class manifest)";
        if (ev.internal_data_reuse) std::cout << "  [internal data reuse]";
        std::cout << "\n";
        for (const auto& [name, op] : ev.points) {
            std::cout << "  " << name << " @ " << op.threshold << ": confusion ["
                      << op.confusion.format() << "], acc "
                      << (op.metrics.accuracy ? *op.metrics.accuracy : 0.0) << ", sens "
                      << (op.metrics.sensitivity ? *op.metrics.sensitivity : 0.0) << ", spec "
                      << (op.metrics.specificity ? *op.metrics.specificity : 0.0) << "\n";
        }
    } else if (rs_cmd->parsed()) {
        const auto rs = pcmri::load_ratings(rs_ratings);
        const auto table = pcmri::reader_metrics(rs);
        for (std::size_t i = 0; i < rs.reader_ids.size(); ++i)
            print_metric_row(rs.reader_ids[i], table.per_reader[i]);
        print_metric_row("Mean", table.mean);
        const auto kappa = pcmri::fleiss_kappa(rs, rs_bootstrap, rs_seed);
        char buf[160];
        std::snprintf(buf, sizeof(buf), "Fleiss' kappa = %.3f, 95%% CI %.3f-%.3f, p = %.3g",
                      kappa.kappa, kappa.ci_lo, kappa.ci_hi, kappa.p);
        std::cout << buf << "\n";
    } else if (sal_cmd->parsed()) {
        const auto model = pcmri::load_model(sal_model);
        if (!model.hog_params) throw pcmri::ConfigError("saliency requires a HOG-feature model");
        const auto img = pcmri::standardize(pcmri::decode_gray(sal_image));
        const auto hm = pcmri::saliency_map(model, img, *model.hog_params);
        pcmri::write_heatmap_overlay(hm, img, sal_out);
        std::cout << "saliency overlay -> " << sal_out << "\n";
    } else if (rep_cmd->parsed()) {
        const auto report = pcmri::load_report_json(rep_file);
        const auto file = pcmri::render_report(
            report, rep_format == "csv" ? pcmri::ReportFormat::csv : pcmri::ReportFormat::markdown,
            rep_out);
        std::cout << "rendered " << file.string() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const pcmri::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
