#include "pcmri/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pcmri/errors.hpp"

namespace pcmri {

namespace {

void check_pair(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size())
        throw DataError("scores and labels length mismatch (" + std::to_string(scores.size()) +
                        " vs " + std::to_string(labels.size()) + ")");
    if (scores.empty()) throw DataError("empty score list");
    for (int y : labels)
        if (y != 0 && y != 1) throw DataError("labels must be 0 or 1");
}

std::optional<double> ratio(long num, long den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

// sensitivity/specificity at one threshold (positive iff score >= t)
std::pair<double, double> sens_spec_at(std::span<const double> scores,
                                       std::span<const int> labels, double t) {
    long tp = 0, fn = 0, tn = 0, fp = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] == 1)
            (scores[i] >= t ? tp : fn)++;
        else
            (scores[i] >= t ? fp : tn)++;
    }
    const double sens = (tp + fn) ? static_cast<double>(tp) / (tp + fn) : 1.0;
    const double spec = (tn + fp) ? static_cast<double>(tn) / (tn + fp) : 1.0;
    return {sens, spec};
}

}  // namespace

std::string ConfusionMatrix::format() const {
    return std::to_string(tn) + " / " + std::to_string(fp) + " / " + std::to_string(fn) +
           " / " + std::to_string(tp);
}

ConfusionMatrix confusion(std::span<const double> scores, std::span<const int> labels,
                          double threshold) {
    check_pair(scores, labels);
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool pred = scores[i] >= threshold;
        if (labels[i] == 1)
            (pred ? cm.tp : cm.fn)++;
        else
            (pred ? cm.fp : cm.tn)++;
    }
    return cm;
}

MetricSet summarize(const ConfusionMatrix& cm) {
    MetricSet m;
    m.accuracy = ratio(cm.tp + cm.tn, cm.total());
    m.sensitivity = ratio(cm.tp, cm.tp + cm.fn);
    m.specificity = ratio(cm.tn, cm.tn + cm.fp);
    m.ppv = ratio(cm.tp, cm.tp + cm.fp);
    m.npv = ratio(cm.tn, cm.tn + cm.fn);
    m.f1 = ratio(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn);
    return m;
}

double auc(std::span<const double> scores, std::span<const int> labels) {
    check_pair(scores, labels);
    long n_pos = 0, n_neg = 0;
    for (int y : labels) (y == 1 ? n_pos : n_neg)++;
    if (n_pos == 0 || n_neg == 0) throw DataError("auc undefined: single-class input");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // rank-sum with average ranks over tie groups
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k)
            if (labels[order[k]] == 1) rank_sum_pos += avg_rank;
        i = j;
    }
    const double u = rank_sum_pos - static_cast<double>(n_pos) * (n_pos + 1) / 2.0;
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double select_threshold(std::span<const double> val_scores, std::span<const int> val_labels,
                        const ThresholdPolicy& policy) {
    if (policy.kind == ThresholdPolicy::Kind::Fixed) return policy.value;

    check_pair(val_scores, val_labels);
    if (!(policy.value > 0.0 && policy.value <= 1.0))
        throw ConfigError("sensitivity floor must be in (0,1]");
    if (std::count(val_labels.begin(), val_labels.end(), 1) == 0)
        throw DataError("sensitivity floor requires at least one positive validation sample");

    std::vector<double> distinct(val_scores.begin(), val_scores.end());
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    std::vector<double> candidates;
    candidates.push_back(distinct.front() - 1.0);  // everything positive: sensitivity 1
    for (std::size_t i = 0; i + 1 < distinct.size(); ++i)
        candidates.push_back((distinct[i] + distinct[i + 1]) / 2.0);
    candidates.push_back(distinct.back() + 1.0);

    bool found = false;
    double best_t = candidates.front();
    double best_spec = -1.0;
    for (double t : candidates) {
        const auto [sens, spec] = sens_spec_at(val_scores, val_labels, t);
        if (sens < policy.value) continue;
        if (!found || spec > best_spec || (spec == best_spec && t > best_t)) {
            found = true;
            best_spec = spec;
            best_t = t;
        }
    }
    // the below-min sentinel always achieves sensitivity 1 >= s_min
    if (!found) throw NumericError("unreachable: no threshold meets the sensitivity floor");
    return best_t;
}

AggregateRow aggregate(std::span<const MetricSet> rows) {
    if (rows.size() < 2) throw DataError("aggregate requires at least 2 rows");

    auto agg_one = [&](std::optional<double> MetricSet::* field) {
        std::vector<double> vals;
        for (const auto& r : rows)
            if (r.*field) vals.push_back(*(r.*field));
        MeanSd out;
        if (vals.empty()) return out;
        const double mean = std::accumulate(vals.begin(), vals.end(), 0.0) /
                            static_cast<double>(vals.size());
        out.mean = mean;
        if (vals.size() >= 2) {
            double ss = 0.0;
            for (double v : vals) ss += (v - mean) * (v - mean);
            out.sd = std::sqrt(ss / static_cast<double>(vals.size() - 1));
        }
        return out;
    };

    AggregateRow row;
    row.accuracy = agg_one(&MetricSet::accuracy);
    row.sensitivity = agg_one(&MetricSet::sensitivity);
    row.specificity = agg_one(&MetricSet::specificity);
    row.ppv = agg_one(&MetricSet::ppv);
    row.npv = agg_one(&MetricSet::npv);
    row.f1 = agg_one(&MetricSet::f1);
    row.auc = agg_one(&MetricSet::auc);
    return row;
}

}  // namespace pcmri
