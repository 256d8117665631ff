#include "pcmri/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "pcmri/errors.hpp"
#include "pcmri/rng.hpp"

namespace pcmri {

namespace {

std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

int parse_label(const std::string& token, const std::string& context) {
    const std::string t = to_lower(token);
    if (t == "cancer" || t == "1") return 1;
    if (t == "normal" || t == "0") return 0;
    throw DataError("unknown label token '" + token + "' " + context);
}

bool is_image_file(const std::filesystem::path& p) {
    const std::string ext = to_lower(p.extension().string());
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

SampleSet finalize(std::vector<SampleRef> samples) {
    if (samples.empty()) throw DataError("no samples");
    std::sort(samples.begin(), samples.end(),
              [](const SampleRef& a, const SampleRef& b) { return a.id < b.id; });
    return SampleSet(std::move(samples));
}

SampleSet load_directory(const std::filesystem::path& root) {
    std::vector<SampleRef> samples;
    for (const auto& entry : std::filesystem::directory_iterator(root)) {
        if (!entry.is_directory()) continue;
        const std::string cls = to_lower(entry.path().filename().string());
        int label;
        if (cls == "cancer") {
            label = 1;
        } else if (cls == "normal") {
            label = 0;
        } else {
            // Only object if the stray directory actually holds images.
            bool has_images = false;
            for (const auto& f : std::filesystem::directory_iterator(entry.path()))
                if (f.is_regular_file() && is_image_file(f.path())) has_images = true;
            if (has_images)
                throw DataError("unknown class directory '" + entry.path().filename().string() +
                                "' (expected cancer/normal)");
            continue;
        }
        for (const auto& f : std::filesystem::directory_iterator(entry.path())) {
            if (!f.is_regular_file() || !is_image_file(f.path())) continue;
            SampleRef ref;
            ref.id = cls + "/" + f.path().filename().string();
            ref.path = f.path().string();
            ref.label = label;
            samples.push_back(std::move(ref));
        }
    }
    return finalize(std::move(samples));
}

SampleSet load_csv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw DataError("cannot open manifest: " + file.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("no samples");
    // tolerate a UTF-8 BOM and trailing CR
    if (line.size() >= 3 && line.compare(0, 3, "\xef\xbb\xbf") == 0) line.erase(0, 3);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "id,path,label")
        throw DataError("manifest header must be 'id,path,label', got '" + line + "'");

    std::vector<SampleRef> samples;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string id, path, label;
        if (!std::getline(ss, id, ',') || !std::getline(ss, path, ',') ||
            !std::getline(ss, label))
            throw DataError("malformed manifest row " + std::to_string(row));
        SampleRef ref;
        ref.id = id;
        ref.path = path;
        ref.label = parse_label(label, "at manifest row " + std::to_string(row));
        if (!std::filesystem::exists(ref.path))
            throw DataError("referenced file does not exist: " + ref.path);
        samples.push_back(std::move(ref));
    }
    return finalize(std::move(samples));
}

// Shuffled index list for one class, seeded per label so both classes draw
// from independent streams.
std::vector<std::size_t> shuffled_class_indices(const SampleSet& s, int label,
                                                std::uint64_t seed) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s[i].label == label) idx.push_back(i);
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(label)));
    shuffle(idx, rng);
    return idx;
}

SampleSet subset_in_order(const SampleSet& s, const std::set<std::size_t>& pick) {
    std::vector<SampleRef> out;
    out.reserve(pick.size());
    for (std::size_t i = 0; i < s.size(); ++i)
        if (pick.count(i)) out.push_back(s[i]);
    return SampleSet(std::move(out));
}

}  // namespace

SampleSet::SampleSet(std::vector<SampleRef> samples) : samples_(std::move(samples)) {
    std::set<std::string> ids;
    for (const auto& r : samples_) {
        if (r.label != 0 && r.label != 1)
            throw DataError("label must be 0 or 1 for sample '" + r.id + "'");
        if (!ids.insert(r.id).second) throw DataError("duplicate sample id '" + r.id + "'");
        (r.label == 1 ? n_pos_ : n_neg_)++;
    }
}

SampleSet load_manifest(const std::filesystem::path& source) {
    if (std::filesystem::is_directory(source)) return load_directory(source);
    if (std::filesystem::is_regular_file(source)) return load_csv(source);
    throw DataError("manifest source not found: " + source.string());
}

std::pair<SampleSet, SampleSet> stratified_split(const SampleSet& s, const SplitConfig& cfg) {
    if (!(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0))
        throw ConfigError("test_fraction must be in (0,1)");
    if (s.n_pos() < 1 || s.n_neg() < 1)
        throw DataError("stratified_split requires at least one sample of each class");

    std::set<std::size_t> test_idx;
    for (int label : {0, 1}) {
        auto idx = shuffled_class_indices(s, label, cfg.seed);
        const auto n_test = static_cast<std::size_t>(
            std::ceil(cfg.test_fraction * static_cast<double>(idx.size())));
        for (std::size_t i = 0; i < n_test; ++i) test_idx.insert(idx[i]);
    }
    std::set<std::size_t> dev_idx;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (!test_idx.count(i)) dev_idx.insert(i);
    return {subset_in_order(s, dev_idx), subset_in_order(s, test_idx)};
}

std::vector<std::pair<SampleSet, SampleSet>> stratified_kfold(const SampleSet& dev, int k,
                                                              std::uint64_t seed) {
    if (k < 2) throw ConfigError("k must be >= 2");
    if (dev.n_pos() < k || dev.n_neg() < k)
        throw ConfigError("each class must have at least k samples (k=" + std::to_string(k) +
                          ", pos=" + std::to_string(dev.n_pos()) +
                          ", neg=" + std::to_string(dev.n_neg()) + ")");

    std::vector<int> fold_of(dev.size(), -1);
    for (int label : {0, 1}) {
        auto idx = shuffled_class_indices(dev, label, seed);
        for (std::size_t i = 0; i < idx.size(); ++i)
            fold_of[idx[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
    }

    std::vector<std::pair<SampleSet, SampleSet>> folds;
    folds.reserve(static_cast<std::size_t>(k));
    for (int f = 0; f < k; ++f) {
        std::vector<SampleRef> train, val;
        for (std::size_t i = 0; i < dev.size(); ++i)
            (fold_of[i] == f ? val : train).push_back(dev[i]);
        folds.emplace_back(SampleSet(std::move(train)), SampleSet(std::move(val)));
    }
    return folds;
}

void save_split_csv(const std::filesystem::path& out, const SampleSet& test,
                    const std::vector<std::pair<SampleSet, SampleSet>>& folds) {
    std::ofstream os(out);
    if (!os) throw DataError("cannot write split file: " + out.string());
    os << "id,role\n";
    for (const auto& r : test.samples()) os << r.id << ",test\n";
    for (std::size_t f = 0; f < folds.size(); ++f)
        for (const auto& r : folds[f].second.samples()) os << r.id << ",fold" << f << "\n";
}

}  // namespace pcmri
