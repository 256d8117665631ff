#include <doctest.h>

#include <algorithm>
#include <set>

#include "helpers.hpp"
#include "pcmri/data.hpp"
#include "pcmri/errors.hpp"

using namespace pcmri;
using testutil::TempDir;
using testutil::make_sample_set;

namespace {

std::filesystem::path make_image_tree(const TempDir& dir, int n_cancer, int n_normal) {
    const auto root = dir.path() / "data";
    std::filesystem::create_directories(root / "cancer");
    std::filesystem::create_directories(root / "normal");
    for (int i = 0; i < n_cancer; ++i)
        testutil::write_file(root / "cancer" / ("c" + std::to_string(100 + i) + ".png"), "x");
    for (int i = 0; i < n_normal; ++i)
        testutil::write_file(root / "normal" / ("n" + std::to_string(100 + i) + ".jpg"), "x");
    return root;
}

}  // namespace

TEST_CASE("load_manifest from class directories") {
    TempDir dir("manifest_dir");
    const auto root = make_image_tree(dir, 102, 60);
    const auto set = load_manifest(root);
    CHECK(set.n_pos() == 102);
    CHECK(set.n_neg() == 60);
    CHECK(set.size() == 162);
    CHECK(std::is_sorted(set.samples().begin(), set.samples().end(),
                         [](const auto& a, const auto& b) { return a.id < b.id; }));
}

TEST_CASE("load_manifest rejects empty and unknown class directories") {
    TempDir dir("manifest_bad");
    const auto empty = dir.path() / "empty";
    std::filesystem::create_directories(empty);
    CHECK_THROWS_AS(load_manifest(empty), DataError);

    const auto root = make_image_tree(dir, 1, 1);
    std::filesystem::create_directories(root / "benign");
    testutil::write_file(root / "benign" / "b.png", "x");
    CHECK_THROWS_AS(load_manifest(root), DataError);
}

TEST_CASE("load_manifest from CSV") {
    TempDir dir("manifest_csv");
    testutil::write_file(dir.path() / "img.png", "x");
    const auto img = (dir.path() / "img.png").string();

    SUBCASE("same path under two ids is allowed") {
        testutil::write_file(dir.path() / "m.csv",
                             "id,path,label\na," + img + ",cancer\nb," + img + ",0\n");
        const auto set = load_manifest(dir.path() / "m.csv");
        CHECK(set.size() == 2);
        CHECK(set.n_pos() == 1);
        CHECK(set.n_neg() == 1);
    }
    SUBCASE("duplicate id is a schema error") {
        testutil::write_file(dir.path() / "m.csv",
                             "id,path,label\na," + img + ",cancer\na," + img + ",normal\n");
        CHECK_THROWS_AS(load_manifest(dir.path() / "m.csv"), DataError);
    }
    SUBCASE("missing referenced file is named in the error") {
        testutil::write_file(dir.path() / "m.csv", "id,path,label\na,/nonexistent/f.png,1\n");
        CHECK_THROWS_WITH_AS(load_manifest(dir.path() / "m.csv"),
                             doctest::Contains("/nonexistent/f.png"), DataError);
    }
    SUBCASE("unknown label token") {
        testutil::write_file(dir.path() / "m.csv", "id,path,label\na," + img + ",maybe\n");
        CHECK_THROWS_AS(load_manifest(dir.path() / "m.csv"), DataError);
    }
}

TEST_CASE("stratified_split takes the per-class ceiling") {
    SUBCASE("102/60 at 0.2 gives the 21/12 test split") {
        const auto s = make_sample_set(102, 60);
        const auto [dev, test] = stratified_split(s, {});
        CHECK(test.n_pos() == 21);
        CHECK(test.n_neg() == 12);
        CHECK(dev.n_pos() == 81);
        CHECK(dev.n_neg() == 48);
    }
    SUBCASE("10/10 at 0.5 gives exact halves") {
        const auto [dev, test] = stratified_split(make_sample_set(10, 10), {0.5, 2, 42});
        CHECK(test.n_pos() == 5);
        CHECK(test.n_neg() == 5);
    }
    SUBCASE("7/3 at 0.2 gives ceil(1.4)=2 and ceil(0.6)=1") {
        const auto [dev, test] = stratified_split(make_sample_set(7, 3), {0.2, 2, 42});
        CHECK(test.n_pos() == 2);
        CHECK(test.n_neg() == 1);
    }
}

TEST_CASE("stratified_split is deterministic and partitions the input") {
    const auto s = make_sample_set(37, 23);
    const auto [dev1, test1] = stratified_split(s, {});
    const auto [dev2, test2] = stratified_split(s, {});
    REQUIRE(dev1.size() == dev2.size());
    for (std::size_t i = 0; i < dev1.size(); ++i) CHECK(dev1[i].id == dev2[i].id);
    for (std::size_t i = 0; i < test1.size(); ++i) CHECK(test1[i].id == test2[i].id);

    std::set<std::string> ids;
    for (const auto& r : dev1.samples()) ids.insert(r.id);
    for (const auto& r : test1.samples()) ids.insert(r.id);
    CHECK(ids.size() == s.size());
}

TEST_CASE("stratified_split validates its config") {
    const auto s = make_sample_set(4, 4);
    CHECK_THROWS_AS(stratified_split(s, {0.0, 5, 42}), ConfigError);
    CHECK_THROWS_AS(stratified_split(s, {1.0, 5, 42}), ConfigError);
    CHECK_THROWS_AS(stratified_split(make_sample_set(4, 0), {0.2, 5, 42}), DataError);
}

TEST_CASE("stratified_kfold balances per-class fold sizes") {
    SUBCASE("81 pos + 48 neg, k=5") {
        const auto folds = stratified_kfold(make_sample_set(81, 48), 5, 42);
        REQUIRE(folds.size() == 5);
        std::multiset<int> pos_sizes, neg_sizes;
        for (const auto& [train, val] : folds) {
            pos_sizes.insert(val.n_pos());
            neg_sizes.insert(val.n_neg());
        }
        CHECK(pos_sizes == std::multiset<int>{16, 16, 16, 16, 17});
        CHECK(neg_sizes == std::multiset<int>{9, 9, 10, 10, 10});
    }
    SUBCASE("k=2 on 2+2 forces 1+1 folds") {
        const auto folds = stratified_kfold(make_sample_set(2, 2), 2, 7);
        for (const auto& [train, val] : folds) {
            CHECK(val.n_pos() == 1);
            CHECK(val.n_neg() == 1);
        }
    }
    SUBCASE("class count below k is a config error") {
        CHECK_THROWS_AS(stratified_kfold(make_sample_set(4, 10), 5, 42), ConfigError);
        CHECK_THROWS_AS(stratified_kfold(make_sample_set(10, 10), 1, 42), ConfigError);
    }
    SUBCASE("same seed reproduces fold assignments") {
        const auto a = stratified_kfold(make_sample_set(23, 17), 4, 99);
        const auto b = stratified_kfold(make_sample_set(23, 17), 4, 99);
        for (std::size_t f = 0; f < a.size(); ++f) {
            REQUIRE(a[f].second.size() == b[f].second.size());
            for (std::size_t i = 0; i < a[f].second.size(); ++i)
                CHECK(a[f].second[i].id == b[f].second[i].id);
        }
    }
}

TEST_CASE("kfold validation folds partition dev and track the class ratio") {
    Rng rng(2024);
    for (int trial = 0; trial < 25; ++trial) {
        const int n_pos = 5 + static_cast<int>(uniform_index(rng, 245));
        const int n_neg = 5 + static_cast<int>(uniform_index(rng, 245));
        const int k = 2 + static_cast<int>(uniform_index(rng, 4));
        if (n_pos < k || n_neg < k) continue;
        const auto dev = make_sample_set(n_pos, n_neg);
        const auto folds = stratified_kfold(dev, k, rng());

        std::multiset<std::string> val_ids;
        const double dev_frac = static_cast<double>(n_pos) / (n_pos + n_neg);
        for (const auto& [train, val] : folds) {
            for (const auto& r : val.samples()) val_ids.insert(r.id);
            const double val_frac = static_cast<double>(val.n_pos()) / val.size();
            CHECK(std::abs(val_frac - dev_frac) <= 1.0 / static_cast<double>(val.size()) + 1e-12);
            CHECK(train.size() + val.size() == dev.size());
        }
        CHECK(val_ids.size() == dev.size());  // no duplication, no omission
        for (const auto& r : dev.samples()) CHECK(val_ids.count(r.id) == 1);
    }
}

TEST_CASE("save_split_csv round trip layout") {
    TempDir dir("split_csv");
    const auto s = make_sample_set(12, 8);
    const auto [dev, test] = stratified_split(s, {0.2, 2, 42});
    const auto folds = stratified_kfold(dev, 2, 42);
    save_split_csv(dir.path() / "split.csv", test, folds);

    std::ifstream in(dir.path() / "split.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "id,role");
    int n = 0;
    std::set<std::string> roles;
    while (std::getline(in, line)) {
        ++n;
        roles.insert(line.substr(line.find(',') + 1));
    }
    CHECK(n == 20);
    CHECK(roles == std::set<std::string>{"test", "fold0", "fold1"});
}
