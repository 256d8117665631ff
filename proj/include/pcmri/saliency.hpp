#pragma once

#include <filesystem>
#include <vector>

#include "pcmri/image.hpp"
#include "pcmri/linear.hpp"

namespace pcmri {

// Per-HOG-cell contribution scores plus a 224x224 rendering in [0,1].
struct Heatmap {
    int cells_per_side = 0;
    std::vector<double> cell_scores;  // row-major, cells_per_side^2
    ImageGray rendering;

    double cell(int cx, int cy) const {
        return cell_scores[static_cast<std::size_t>(cy) * cells_per_side + cx];
    }
};

// Accumulates each descriptor component's contribution w_i * x_i into the
// cell that component reads from; cell scores sum to score(x) - bias.
Heatmap saliency_map(const LinearModel& model, const ImageGray& img, const HogParams& p);

// Grayscale base blended with the heat channel, written as PNG.
void write_heatmap_overlay(const Heatmap& hm, const ImageGray& base,
                           const std::filesystem::path& file);

}  // namespace pcmri
