#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pcmri/metrics.hpp"

namespace pcmri {

// Binary ratings of N cases by M readers, with pathology ground truth.
struct ReaderStudy {
    std::vector<std::string> case_ids;   // length N
    std::vector<int> truth;              // length N, {0,1}
    std::vector<std::string> reader_ids; // length M
    std::vector<std::vector<int>> ratings;  // N rows x M columns, {0,1}

    std::size_t n_cases() const { return case_ids.size(); }
    std::size_t n_readers() const { return reader_ids.size(); }

    void validate() const;
};

struct KappaResult {
    double kappa = 0.0;
    double ci_lo = 0.0;  // percentile bootstrap 95% CI
    double ci_hi = 0.0;
    double p = 1.0;      // two-sided, z = kappa / se0
    double se0 = 0.0;    // Fleiss large-sample SE under H0
};

// CSV header "case_id,truth,<reader_id>,..."; all cells in {0,1}.
ReaderStudy load_ratings(const std::filesystem::path& file);

struct ReaderMetricsTable {
    std::vector<MetricSet> per_reader;  // one row per reader, in column order
    MetricSet mean;                     // arithmetic mean per metric
};

ReaderMetricsTable reader_metrics(const ReaderStudy& rs);

// Two-category Fleiss' kappa; truth is not consulted (kappa measures
// agreement, not correctness).
double fleiss_kappa_point(const ReaderStudy& rs);

KappaResult fleiss_kappa(const ReaderStudy& rs, int n_bootstrap, std::uint64_t seed);

}  // namespace pcmri
