#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace pcmri {

struct SampleRef {
    std::string id;
    std::string path;
    int label = 0;  // 0 = normal, 1 = cancer
};

// Ordered, label-counted collection of sample references.
class SampleSet {
public:
    SampleSet() = default;
    explicit SampleSet(std::vector<SampleRef> samples);

    const std::vector<SampleRef>& samples() const { return samples_; }
    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }
    int n_pos() const { return n_pos_; }
    int n_neg() const { return n_neg_; }
    const SampleRef& operator[](std::size_t i) const { return samples_[i]; }

private:
    std::vector<SampleRef> samples_;
    int n_pos_ = 0;
    int n_neg_ = 0;
};

struct SplitConfig {
    double test_fraction = 0.2;
    int k = 5;
    std::uint64_t seed = 42;
};

// Loads either a class-subfolder directory ({cancer,normal}/*.png|jpg|jpeg)
// or a CSV manifest with header "id,path,label". Samples come back sorted
// lexicographically by id.
SampleSet load_manifest(const std::filesystem::path& source);

// Per class, the test part takes ceil(test_fraction * class_count) samples,
// drawn uniformly without replacement from a seeded stream.
std::pair<SampleSet, SampleSet> stratified_split(const SampleSet& s, const SplitConfig& cfg);

// Shuffles each class independently, then deals round-robin, so per-class
// fold sizes differ by at most one.
std::vector<std::pair<SampleSet, SampleSet>> stratified_kfold(const SampleSet& dev, int k,
                                                              std::uint64_t seed);

// Persists a split as CSV "id,role" with role in {test, fold0..fold{k-1}}.
void save_split_csv(const std::filesystem::path& out, const SampleSet& test,
                    const std::vector<std::pair<SampleSet, SampleSet>>& folds);

}  // namespace pcmri
