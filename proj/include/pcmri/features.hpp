#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "pcmri/data.hpp"
#include "pcmri/image.hpp"

namespace pcmri {

struct HogParams {
    int cell_px = 8;
    int block_cells = 2;
    int n_bins = 9;  // unsigned orientations over [0, 180)
    double clip = 0.2;
    double epsilon = 1e-6;

    void validate() const;
    int cells_per_side() const { return kStandardSize / cell_px; }
    int blocks_per_side() const { return cells_per_side() - block_cells + 1; }
    int block_dim() const { return block_cells * block_cells * n_bins; }
    int dim() const { return blocks_per_side() * blocks_per_side() * block_dim(); }
};

struct FeatureVector {
    enum class Source { hog, embedding };

    std::vector<double> values;
    Source source = Source::hog;

    int dim() const { return static_cast<int>(values.size()); }
};

// Dalal-Triggs style descriptor: central-difference gradients (replicate
// borders), orientation-interpolated cell histograms, L2-Hys normalized
// sliding blocks concatenated in row-major order.
FeatureVector hog(const ImageGray& img, const HogParams& p);

// CSV with a "# dim=d" header, rows "id,v1,...,vd". Every manifest id must
// appear exactly once; extra rows are ignored.
std::map<std::string, FeatureVector> load_embeddings(const std::filesystem::path& file,
                                                     const SampleSet& manifest);

void save_embeddings(const std::filesystem::path& file,
                     const std::map<std::string, FeatureVector>& vectors);

}  // namespace pcmri
