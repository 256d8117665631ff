#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "pcmri/errors.hpp"
#include "pcmri/metrics.hpp"
#include "pcmri/rng.hpp"

using namespace pcmri;

namespace {

// pairwise Mann-Whitney oracle: fraction of pos/neg pairs ordered correctly,
// ties half-credited
double auc_pairs(const std::vector<double>& scores, const std::vector<int>& labels) {
    double favorable = 0.0;
    long pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            ++pairs;
            if (scores[i] > scores[j])
                favorable += 1.0;
            else if (scores[i] == scores[j])
                favorable += 0.5;
        }
    }
    return favorable / static_cast<double>(pairs);
}

// trapezoidal integration of the ROC curve swept over distinct thresholds
double auc_trapezoid(const std::vector<double>& scores, const std::vector<int>& labels) {
    std::vector<double> distinct = scores;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    const long n_pos = std::count(labels.begin(), labels.end(), 1);
    const long n_neg = static_cast<long>(labels.size()) - n_pos;
    std::vector<std::pair<double, double>> roc;  // (fpr, tpr)
    roc.emplace_back(0.0, 0.0);
    for (auto it = distinct.rbegin(); it != distinct.rend(); ++it) {
        long tp = 0, fp = 0;
        for (std::size_t i = 0; i < scores.size(); ++i)
            if (scores[i] >= *it) (labels[i] == 1 ? tp : fp)++;
        roc.emplace_back(static_cast<double>(fp) / n_neg, static_cast<double>(tp) / n_pos);
    }
    double area = 0.0;
    for (std::size_t i = 1; i < roc.size(); ++i)
        area += (roc[i].first - roc[i - 1].first) * (roc[i].second + roc[i - 1].second) / 2.0;
    return area;
}

// exhaustive oracle for SensitivityFloor over the same candidate set
double best_floor_threshold(const std::vector<double>& scores, const std::vector<int>& labels,
                            double floor) {
    std::vector<double> distinct = scores;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    std::vector<double> candidates{distinct.front() - 1.0};
    for (std::size_t i = 0; i + 1 < distinct.size(); ++i)
        candidates.push_back((distinct[i] + distinct[i + 1]) / 2.0);
    candidates.push_back(distinct.back() + 1.0);

    double best_t = 0.0, best_spec = -1.0;
    bool found = false;
    for (double t : candidates) {
        long tp = 0, fn = 0, tn = 0, fp = 0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            if (labels[i] == 1)
                (scores[i] >= t ? tp : fn)++;
            else
                (scores[i] >= t ? fp : tn)++;
        }
        const double sens = static_cast<double>(tp) / (tp + fn);
        const double spec = (tn + fp) ? static_cast<double>(tn) / (tn + fp) : 1.0;
        if (sens < floor) continue;
        if (!found || spec > best_spec || (spec == best_spec && t > best_t)) {
            found = true;
            best_spec = spec;
            best_t = t;
        }
    }
    REQUIRE(found);
    return best_t;
}

}  // namespace

TEST_CASE("confusion tallies with ties predicted positive") {
    SUBCASE("all positive") {
        const std::vector<double> p(5, 1.0);
        const std::vector<int> y(5, 1);
        const auto cm = confusion(p, y, 0.5);
        CHECK(cm.tn == 0);
        CHECK(cm.fp == 0);
        CHECK(cm.fn == 0);
        CHECK(cm.tp == 5);
    }
    SUBCASE("hand tally") {
        const std::vector<double> p{0.6, 0.4};
        const std::vector<int> y{0, 1};
        const auto cm = confusion(p, y, 0.5);
        CHECK(cm.tn == 0);
        CHECK(cm.fp == 1);
        CHECK(cm.fn == 1);
        CHECK(cm.tp == 0);
    }
    SUBCASE("score equal to threshold is positive") {
        const std::vector<double> p{0.5};
        const std::vector<int> y{1};
        CHECK(confusion(p, y, 0.5).tp == 1);
    }
    SUBCASE("length mismatch") {
        const std::vector<double> p{0.5};
        const std::vector<int> y{1, 0};
        CHECK_THROWS_AS(confusion(p, y, 0.5), DataError);
    }
}

TEST_CASE("summarize reproduces the reference confusion matrices") {
    const auto m1 = summarize({10, 2, 1, 20});
    CHECK(*m1.accuracy == doctest::Approx(0.909).epsilon(0.001));
    CHECK(*m1.sensitivity == doctest::Approx(0.952).epsilon(0.001));
    CHECK(*m1.specificity == doctest::Approx(0.833).epsilon(0.001));
    CHECK(*m1.f1 == doctest::Approx(0.930).epsilon(0.001));

    const auto m2 = summarize({11, 1, 9, 12});
    CHECK(*m2.accuracy == doctest::Approx(0.697).epsilon(0.001));
    CHECK(*m2.sensitivity == doctest::Approx(0.571).epsilon(0.001));
    CHECK(*m2.specificity == doctest::Approx(0.917).epsilon(0.001));
    CHECK(*m2.f1 == doctest::Approx(0.706).epsilon(0.001));

    const auto m0 = summarize({0, 0, 0, 0});
    CHECK(!m0.accuracy);
    CHECK(!m0.sensitivity);
    CHECK(!m0.specificity);
    CHECK(!m0.ppv);
    CHECK(!m0.npv);
    CHECK(!m0.f1);
}

TEST_CASE("summarize accuracy is exact in rational terms") {
    Rng rng(11);
    for (int t = 0; t < 50; ++t) {
        ConfusionMatrix cm{static_cast<long>(uniform_index(rng, 40)),
                           static_cast<long>(uniform_index(rng, 40)),
                           static_cast<long>(uniform_index(rng, 40)),
                           static_cast<long>(1 + uniform_index(rng, 40))};
        const auto m = summarize(cm);
        CHECK(*m.accuracy * static_cast<double>(cm.total()) ==
              doctest::Approx(static_cast<double>(cm.tp + cm.tn)).epsilon(1e-12));
    }
}

TEST_CASE("auc basics") {
    SUBCASE("perfect separation") {
        const std::vector<double> s{1, 1, 0, 0};
        const std::vector<int> y{1, 1, 0, 0};
        CHECK(auc(s, y) == 1.0);
    }
    SUBCASE("all ties") {
        const std::vector<double> s{0.3, 0.3, 0.3};
        const std::vector<int> y{1, 0, 1};
        CHECK(auc(s, y) == 0.5);
    }
    SUBCASE("enumerated 4-pair example") {
        const std::vector<double> s{0.9, 0.4, 0.6, 0.1};
        const std::vector<int> y{1, 1, 0, 0};
        CHECK(auc(s, y) == 0.75);
    }
    SUBCASE("single class is an error") {
        const std::vector<double> s{0.2, 0.4};
        const std::vector<int> y{1, 1};
        CHECK_THROWS_AS(auc(s, y), DataError);
    }
}

TEST_CASE("auc equals both oracles and is rank-invariant") {
    Rng rng(7);
    for (int t = 0; t < 200; ++t) {
        const int n = 2 + static_cast<int>(uniform_index(rng, 49));
        std::vector<double> s(n);
        std::vector<int> y(n);
        for (int i = 0; i < n; ++i) {
            // coarse grid to provoke ties
            s[i] = static_cast<double>(uniform_index(rng, 8)) / 8.0;
            y[i] = static_cast<int>(uniform_index(rng, 2));
        }
        if (std::count(y.begin(), y.end(), 1) == 0 || std::count(y.begin(), y.end(), 0) == 0)
            continue;
        const double a = auc(s, y);
        CHECK(std::abs(a - auc_pairs(s, y)) <= 1e-12);
        CHECK(std::abs(a - auc_trapezoid(s, y)) <= 1e-12);

        // strictly increasing transform leaves the rank statistic unchanged
        std::vector<double> st(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) st[i] = std::exp(3.0 * s[i]) + 1.0;
        CHECK(auc(st, y) == a);
    }
}

TEST_CASE("select_threshold fixed and floor policies") {
    SUBCASE("fixed returns the configured value") {
        const std::vector<double> s{0.1, 0.9};
        const std::vector<int> y{0, 1};
        CHECK(select_threshold(s, y, ThresholdPolicy::fixed(0.5)) == 0.5);
    }
    SUBCASE("perfect separation picks a perfect operating point") {
        const std::vector<double> s{0.1, 0.2, 0.8, 0.9};
        const std::vector<int> y{0, 0, 1, 1};
        const double t = select_threshold(s, y, ThresholdPolicy::sensitivity_floor(0.95));
        CHECK(t > 0.2);
        CHECK(t <= 0.8);
        const auto cm = confusion(s, y, t);
        CHECK(cm.fn == 0);
        CHECK(cm.fp == 0);
    }
    SUBCASE("floor 1.0 on the worked example") {
        const std::vector<double> s{0.9, 0.8, 0.3, 0.6, 0.2, 0.1};
        const std::vector<int> y{1, 1, 1, 0, 0, 0};
        const double t = select_threshold(s, y, ThresholdPolicy::sensitivity_floor(1.0));
        CHECK(t < 0.3);
        const auto m = summarize(confusion(s, y, t));
        CHECK(*m.sensitivity == 1.0);
        CHECK(*m.specificity == doctest::Approx(2.0 / 3.0));
    }
    SUBCASE("21 positives at floor 0.95 allow at most one miss") {
        Rng rng(3);
        std::vector<double> s;
        std::vector<int> y;
        for (int i = 0; i < 21; ++i) {
            s.push_back(uniform_unit(rng));
            y.push_back(1);
        }
        for (int i = 0; i < 12; ++i) {
            s.push_back(uniform_unit(rng));
            y.push_back(0);
        }
        const double t = select_threshold(s, y, ThresholdPolicy::sensitivity_floor(0.95));
        CHECK(confusion(s, y, t).fn <= 1);
    }
    SUBCASE("no positives is an error") {
        const std::vector<double> s{0.5, 0.6};
        const std::vector<int> y{0, 0};
        CHECK_THROWS_AS(select_threshold(s, y, ThresholdPolicy::sensitivity_floor(0.95)),
                        DataError);
    }
}

TEST_CASE("select_threshold floor matches exhaustive search on random sets") {
    Rng rng(13);
    for (int t = 0; t < 500; ++t) {
        const int n = 3 + static_cast<int>(uniform_index(rng, 40));
        std::vector<double> s(n);
        std::vector<int> y(n);
        bool has_pos = false;
        for (int i = 0; i < n; ++i) {
            s[i] = static_cast<double>(uniform_index(rng, 12)) / 12.0;
            y[i] = static_cast<int>(uniform_index(rng, 2));
            has_pos |= y[i] == 1;
        }
        if (!has_pos) y[0] = 1;
        const double chosen = select_threshold(s, y, ThresholdPolicy::sensitivity_floor(0.95));
        CHECK(chosen == best_floor_threshold(s, y, 0.95));
        const auto m = summarize(confusion(s, y, chosen));
        CHECK(*m.sensitivity >= 0.95);
    }
}

TEST_CASE("lowering a fixed threshold is monotone in sensitivity and specificity") {
    Rng rng(17);
    for (int t = 0; t < 100; ++t) {
        const int n = 4 + static_cast<int>(uniform_index(rng, 30));
        std::vector<double> s(n);
        std::vector<int> y(n);
        for (int i = 0; i < n; ++i) {
            s[i] = uniform_unit(rng);
            y[i] = static_cast<int>(uniform_index(rng, 2));
        }
        const double t_hi = uniform_unit(rng);
        const double t_lo = t_hi * uniform_unit(rng);
        const auto hi = summarize(confusion(s, y, t_hi));
        const auto lo = summarize(confusion(s, y, t_lo));
        if (hi.sensitivity && lo.sensitivity) CHECK(*lo.sensitivity >= *hi.sensitivity);
        if (hi.specificity && lo.specificity) CHECK(*lo.specificity <= *hi.specificity);
    }
}

TEST_CASE("aggregate reproduces the cross-method summary row") {
    auto row_for = [](ConfusionMatrix cm) { return summarize(cm); };
    const std::vector<MetricSet> rows{row_for({10, 2, 1, 20}), row_for({10, 2, 1, 20}),
                                      row_for({10, 2, 4, 17}), row_for({11, 1, 5, 16}),
                                      row_for({10, 2, 2, 19}), row_for({8, 4, 2, 19})};
    const auto agg = aggregate(rows);
    CHECK(*agg.accuracy.mean == doctest::Approx(0.858).epsilon(0.002));
    CHECK(*agg.accuracy.sd == doctest::Approx(0.046).epsilon(0.02));
    CHECK(*agg.sensitivity.mean == doctest::Approx(0.881).epsilon(0.002));
    CHECK(*agg.sensitivity.sd == doctest::Approx(0.078).epsilon(0.02));
}

TEST_CASE("aggregate edge handling") {
    const MetricSet a = summarize({5, 5, 5, 5});
    SUBCASE("fewer than two rows is an error") {
        const std::vector<MetricSet> rows{a};
        CHECK_THROWS_AS(aggregate(rows), DataError);
    }
    SUBCASE("identical rows have zero SD") {
        const std::vector<MetricSet> rows{a, a, a};
        CHECK(*aggregate(rows).accuracy.sd == 0.0);
    }
    SUBCASE("undefined entries are excluded pairwise") {
        MetricSet b = a;
        b.auc = 0.9;
        const std::vector<MetricSet> rows{a, b};
        const auto agg = aggregate(rows);
        CHECK(*agg.auc.mean == 0.9);
        CHECK(!agg.auc.sd);  // single defined value
        CHECK(agg.accuracy.sd);
    }
}
