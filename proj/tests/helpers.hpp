#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "pcmri/data.hpp"
#include "pcmri/image.hpp"
#include "pcmri/rng.hpp"

namespace testutil {

// Fresh scratch directory, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("pcmri_test_" + tag + "_" + std::to_string(counter()++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream os(p);
    os << content;
}

// In-memory SampleSet with n_pos positive and n_neg negative samples.
inline pcmri::SampleSet make_sample_set(int n_pos, int n_neg) {
    std::vector<pcmri::SampleRef> refs;
    for (int i = 0; i < n_pos; ++i)
        refs.push_back({"pos_" + std::to_string(1000 + i), "p" + std::to_string(i), 1});
    for (int i = 0; i < n_neg; ++i)
        refs.push_back({"neg_" + std::to_string(1000 + i), "n" + std::to_string(i), 0});
    return pcmri::SampleSet(std::move(refs));
}

// Smooth horizontal intensity ramp, 224x224.
inline pcmri::ImageGray gradient_image() {
    pcmri::ImageGray img(pcmri::kStandardSize, pcmri::kStandardSize);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            img.at(x, y) = static_cast<double>(x) / (img.width - 1);
    return img;
}

inline pcmri::ImageGray random_image(int w, int h, pcmri::Rng& rng) {
    pcmri::ImageGray img(w, h);
    for (double& v : img.pixels) v = pcmri::uniform_unit(rng);
    return img;
}

}  // namespace testutil
