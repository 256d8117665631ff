#include "pcmri/reader_study.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "pcmri/errors.hpp"
#include "pcmri/rng.hpp"

namespace pcmri {

namespace {

// kappa from per-case positive-rating counts, two categories
double kappa_from_counts(const std::vector<int>& n_pos_per_case, int m) {
    const std::size_t n = n_pos_per_case.size();
    double p_bar = 0.0;
    double p_pos = 0.0;
    for (int c : n_pos_per_case) {
        const int c_neg = m - c;
        p_bar += (static_cast<double>(c) * c + static_cast<double>(c_neg) * c_neg - m) /
                 (static_cast<double>(m) * (m - 1));
        p_pos += c;
    }
    p_bar /= static_cast<double>(n);
    p_pos /= static_cast<double>(n) * m;
    const double p_e = p_pos * p_pos + (1.0 - p_pos) * (1.0 - p_pos);
    if (1.0 - p_e <= 0.0) throw DataError("kappa undefined: all ratings in a single category");
    return (p_bar - p_e) / (1.0 - p_e);
}

std::vector<int> positive_counts(const ReaderStudy& rs) {
    std::vector<int> counts(rs.n_cases(), 0);
    for (std::size_t i = 0; i < rs.n_cases(); ++i)
        for (int r : rs.ratings[i]) counts[i] += r;
    return counts;
}

int parse_cell(const std::string& tok, int row, const std::string& col) {
    if (tok == "0") return 0;
    if (tok == "1") return 1;
    if (tok.empty())
        throw DataError("blank cell at row " + std::to_string(row) + ", column " + col);
    throw DataError("non-binary value '" + tok + "' at row " + std::to_string(row) +
                    ", column " + col);
}

}  // namespace

void ReaderStudy::validate() const {
    if (n_cases() < 2) throw DataError("reader study requires N >= 2 cases");
    if (n_readers() < 2) throw DataError("reader study requires M >= 2 readers");
    if (truth.size() != n_cases() || ratings.size() != n_cases())
        throw DataError("reader study row counts are inconsistent");
    for (std::size_t i = 0; i < n_cases(); ++i) {
        if (truth[i] != 0 && truth[i] != 1) throw DataError("truth values must be 0 or 1");
        if (ratings[i].size() != n_readers())
            throw DataError("missing rating cells for case '" + case_ids[i] + "'");
        for (int r : ratings[i])
            if (r != 0 && r != 1) throw DataError("rating values must be 0 or 1");
    }
}

ReaderStudy load_ratings(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open ratings file: " + file.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty ratings file");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) header.push_back(tok);
    }
    if (header.size() < 2 || header[0] != "case_id" || header[1] != "truth")
        throw DataError("ratings header must start with 'case_id,truth'");
    if (header.size() < 4) throw DataError("M >= 2 required: need at least two reader columns");

    ReaderStudy rs;
    rs.reader_ids.assign(header.begin() + 2, header.end());

    std::set<std::string> seen;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) cells.push_back(tok);
        // a trailing comma means a blank final cell
        if (!line.empty() && line.back() == ',') cells.push_back("");
        if (cells.size() != header.size())
            throw DataError("row " + std::to_string(row) + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(header.size()));
        if (!seen.insert(cells[0]).second)
            throw DataError("duplicate case_id '" + cells[0] + "' at row " + std::to_string(row));
        rs.case_ids.push_back(cells[0]);
        rs.truth.push_back(parse_cell(cells[1], row, "truth"));
        std::vector<int> r;
        for (std::size_t c = 2; c < cells.size(); ++c)
            r.push_back(parse_cell(cells[c], row, rs.reader_ids[c - 2]));
        rs.ratings.push_back(std::move(r));
    }
    rs.validate();
    return rs;
}

ReaderMetricsTable reader_metrics(const ReaderStudy& rs) {
    rs.validate();
    ReaderMetricsTable out;
    for (std::size_t j = 0; j < rs.n_readers(); ++j) {
        std::vector<double> scores(rs.n_cases());
        for (std::size_t i = 0; i < rs.n_cases(); ++i) scores[i] = rs.ratings[i][j];
        out.per_reader.push_back(summarize(confusion(scores, rs.truth, 0.5)));
    }

    auto mean_of = [&](std::optional<double> MetricSet::* field) -> std::optional<double> {
        double sum = 0.0;
        int n = 0;
        for (const auto& r : out.per_reader)
            if (r.*field) {
                sum += *(r.*field);
                ++n;
            }
        if (n == 0) return std::nullopt;
        return sum / n;
    };
    out.mean.accuracy = mean_of(&MetricSet::accuracy);
    out.mean.sensitivity = mean_of(&MetricSet::sensitivity);
    out.mean.specificity = mean_of(&MetricSet::specificity);
    out.mean.ppv = mean_of(&MetricSet::ppv);
    out.mean.npv = mean_of(&MetricSet::npv);
    out.mean.f1 = mean_of(&MetricSet::f1);
    return out;
}

double fleiss_kappa_point(const ReaderStudy& rs) {
    rs.validate();
    return kappa_from_counts(positive_counts(rs), static_cast<int>(rs.n_readers()));
}

KappaResult fleiss_kappa(const ReaderStudy& rs, int n_bootstrap, std::uint64_t seed) {
    rs.validate();
    if (n_bootstrap < 1) throw ConfigError("n_bootstrap must be >= 1");
    const int m = static_cast<int>(rs.n_readers());
    const auto counts = positive_counts(rs);
    const std::size_t n = counts.size();

    KappaResult res;
    res.kappa = kappa_from_counts(counts, m);

    // Fleiss large-sample SE under H0 (two categories)
    double p_pos = 0.0;
    for (int c : counts) p_pos += c;
    p_pos /= static_cast<double>(n) * m;
    const double pq_sum = 2.0 * p_pos * (1.0 - p_pos);  // sum_j p_j (1 - p_j)
    double pq_1m2p = p_pos * (1.0 - p_pos) * (1.0 - 2.0 * p_pos) +
                     (1.0 - p_pos) * p_pos * (1.0 - 2.0 * (1.0 - p_pos));
    res.se0 = std::sqrt(2.0 / (static_cast<double>(n) * m * (m - 1))) *
              std::sqrt(std::max(0.0, pq_sum * pq_sum - pq_1m2p)) / pq_sum;
    if (res.se0 > 0.0) {
        const double z = res.kappa / res.se0;
        res.p = std::erfc(std::abs(z) / std::sqrt(2.0));
        if (res.p <= 0.0) res.p = std::numeric_limits<double>::min();
    }

    // percentile bootstrap over cases; each resample draws from its own seeded
    // substream so results are order-independent
    std::vector<double> boot;
    boot.reserve(static_cast<std::size_t>(n_bootstrap));
    for (int rep = 0; rep < n_bootstrap; ++rep) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(rep)));
        std::vector<int> sample(n);
        for (std::size_t i = 0; i < n; ++i)
            sample[i] = counts[uniform_index(rng, n)];
        try {
            boot.push_back(kappa_from_counts(sample, m));
        } catch (const DataError&) {
            // degenerate resample (all one category): no kappa, skip
        }
    }
    if (boot.empty()) throw NumericError("all bootstrap resamples were degenerate");
    std::sort(boot.begin(), boot.end());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(boot.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, boot.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        return boot[lo] * (1.0 - frac) + boot[hi] * frac;
    };
    res.ci_lo = quantile(0.025);
    res.ci_hi = quantile(0.975);
    return res;
}

}  // namespace pcmri
